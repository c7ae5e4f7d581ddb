//! Power-law fits of computed solutions and the explicit sub- and
//! super-solution envelopes for sublinear growth `D^γ u = A u^p`, `A > 0`,
//! `0 < p < 1`.
//!
//! With `k = γ/(1−p)`:
//!
//! * subsolution `ω(t) = u0` on `[0, t0]`, `a t^k` after, where `a` is the
//!   largest value with `a Γ(k+1)/Γ(kp+1) ≤ A a^p` and `a t0^k = u0`;
//! * supersolution `v(t) = u0 + B1 t^γ/Γ(1+γ)` on `[0, 1]`, `B2 t^k` after,
//!   with `B2 = u0 + B1/Γ(1+γ)` and `B1` the smallest value satisfying
//!   `B2 ≥ M1` and `B1 min(1, C1) ≥ A max(u0^p, B2^p 2^{pk})`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::adaptive_simpson;
use crate::regress::line_fit;
use crate::specfun::{beta_fn, gamma_fn, ln_gamma};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AsymptoticsError {
    #[error(
        "fit window [{t_lo}, {t_hi}] spans {window_decades:.3} decades and holds {nodes} nodes spanning {decades:.3}; \
         need a window of >= 1 decade with >= 10 nodes spanning >= 0.9"
    )]
    InsufficientWindow { t_lo: f64, t_hi: f64, window_decades: f64, nodes: usize, decades: f64 },
    #[error("nonpositive value {value} at t = {t}")]
    NonPositive { t: f64, value: f64 },
    #[error("parameter out of range: {0}")]
    Domain(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
}

/// `u ≈ constant · x^{exponent}` with `x = t` (growth/decay) or
/// `x = T_b − t` (blow-up, where the reported exponent is `−slope`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticFit {
    pub exponent: f64,
    pub constant: f64,
    pub window: (f64, f64),
    /// In log-log coordinates.
    pub rms_residual: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum FitMode {
    Growth,
    /// `u ≈ C (T_b − t)^{−exponent}`.
    BlowUp { tb: f64 },
}

/// Least squares of `log u` on `log t` (or `log(T_b − t)`) over the nodes in
/// `window`; the default window is the last decade of `t`.
pub fn fit_power(t: &[f64], u: &[f64], window: Option<(f64, f64)>, mode: FitMode) -> Result<AsymptoticFit, AsymptoticsError> {
    let t_end = t.last().copied().unwrap_or(0.0);
    let (t_lo, t_hi) = window.unwrap_or((t_end / 10.0, t_end));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&ti, &ui) in t.iter().zip(u) {
        if ti < t_lo || ti > t_hi {
            continue;
        }
        if !(ui > 0.0) {
            return Err(AsymptoticsError::NonPositive { t: ti, value: ui });
        }
        let x = match mode {
            FitMode::Growth => ti,
            FitMode::BlowUp { tb } => tb - ti,
        };
        if !(x > 0.0) {
            return Err(AsymptoticsError::Domain(format!("abscissa {x} at t = {ti} is not positive")));
        }
        xs.push(x.ln());
        ys.push(ui.ln());
    }
    let span = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min);
    let decades = if xs.is_empty() { 0.0 } else { span(&xs) / std::f64::consts::LN_10 };
    let window_decades = match mode {
        FitMode::Growth => (t_hi / t_lo).log10(),
        FitMode::BlowUp { tb } => ((tb - t_lo) / (tb - t_hi).max(0.0)).log10(),
    };
    // nodes strictly inside a one-decade window cannot span all of it
    if xs.len() < 10 || !(window_decades >= 1.0 - 1e-9) || decades < 0.9 {
        return Err(AsymptoticsError::InsufficientWindow { t_lo, t_hi, window_decades, nodes: xs.len(), decades });
    }
    let f = line_fit(&xs, &ys).expect("at least two distinct abscissae");
    let exponent = match mode {
        FitMode::Growth => f.slope,
        FitMode::BlowUp { .. } => -f.slope,
    };
    Ok(AsymptoticFit { exponent, constant: f.intercept.exp(), window: (t_lo, t_hi), rms_residual: f.rms, nodes: xs.len() })
}

/// `[Γ(pγ/(p−1)) / (A Γ(γ/(p−1)))]^{1/(p−1)}`, the constant of
/// `u ≈ C (T_b − t)^{−γ/(p−1)}` near blow-up.
pub fn blowup_constant_theory(a: f64, p: f64, gamma: f64) -> Result<f64, AsymptoticsError> {
    if !(a > 0.0 && p > 1.0 && gamma > 0.0 && gamma < 1.0) || !a.is_finite() || !p.is_finite() {
        return Err(AsymptoticsError::Domain(format!("need A > 0, p > 1, gamma in (0,1); got A={a}, p={p}, gamma={gamma}")));
    }
    let k = gamma / (p - 1.0);
    let lg = |x: f64| ln_gamma(x).map_err(|e| AsymptoticsError::Overflow(e.to_string()));
    let ln_c = (lg(p * k)? - lg(k)? - a.ln()) / (p - 1.0);
    let c = ln_c.exp();
    if !c.is_finite() || c == 0.0 {
        return Err(AsymptoticsError::Overflow(format!("blow-up constant out of range for p = {p} (log value {ln_c})")));
    }
    Ok(c)
}

fn check_sublinear(a: f64, p: f64, gamma: f64, u0: f64) -> Result<(), AsymptoticsError> {
    if !(a > 0.0 && p > 0.0 && p < 1.0 && gamma > 0.0 && gamma < 1.0 && u0 > 0.0) || !a.is_finite() || !u0.is_finite() {
        return Err(AsymptoticsError::Domain(format!(
            "envelopes need A > 0, 0 < p < 1, gamma in (0,1), u0 > 0; got A={a}, p={p}, gamma={gamma}, u0={u0}"
        )));
    }
    Ok(())
}

fn gamma_checked(x: f64) -> Result<f64, AsymptoticsError> {
    gamma_fn(x).map_err(|e| AsymptoticsError::Overflow(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Subsolution {
    pub a: f64,
    pub t0: f64,
}

/// `Γ(k+1)/Γ(kp+1)` with `k = γ/(1−p)`.
fn sub_ratio(p: f64, gamma: f64) -> Result<f64, AsymptoticsError> {
    let k = gamma / (1.0 - p);
    Ok(gamma_checked(k + 1.0)? / gamma_checked(k * p + 1.0)?)
}

pub fn subsolution_params(a_coef: f64, p: f64, gamma: f64, u0: f64) -> Result<Subsolution, AsymptoticsError> {
    check_sublinear(a_coef, p, gamma, u0)?;
    let a = (a_coef / sub_ratio(p, gamma)?).powf(1.0 / (1.0 - p));
    let t0 = (u0 / a).powf((1.0 - p) / gamma);
    Ok(Subsolution { a, t0 })
}

/// `A a^p − a Γ(k+1)/Γ(kp+1)`; nonnegative exactly when `ω` is a subsolution.
pub fn subsolution_margin(a: f64, a_coef: f64, p: f64, gamma: f64) -> Result<f64, AsymptoticsError> {
    Ok(a_coef * a.powf(p) - a * sub_ratio(p, gamma)?)
}

/// `C1(γ) = γ/B(1+γ, 1−γ) ∫₀¹ τ^{γ−1} (2−τ)^{−γ} dτ`, computed after
/// `τ = σ^{1/γ}`, which makes the integrand smooth.
pub fn c1_constant(gamma: f64) -> Result<f64, AsymptoticsError> {
    let b = beta_fn(1.0 + gamma, 1.0 - gamma).map_err(|e| AsymptoticsError::Domain(e.to_string()))?;
    let r = adaptive_simpson(|s: f64| (2.0 - s.powf(1.0 / gamma)).powf(-gamma), 0.0, 1.0, 1e-10, 50)
        .map_err(|e| AsymptoticsError::Quadrature(e.to_string()))?;
    Ok(r.value / b)
}

/// `C2(p, γ) = γ/((1−p) Γ(1−γ)) ∫_{1/2}^1 τ^{k−1} (1−τ)^{−γ} dτ`, computed
/// after `1 − τ = σ^{1/(1−γ)}`.
pub fn c2_constant(p: f64, gamma: f64) -> Result<f64, AsymptoticsError> {
    let k = gamma / (1.0 - p);
    let m = 1.0 / (1.0 - gamma);
    let upper = 0.5f64.powf(1.0 - gamma);
    let r = adaptive_simpson(|s: f64| (1.0 - s.powf(m)).powf(k - 1.0), 0.0, upper, 1e-10, 50)
        .map_err(|e| AsymptoticsError::Quadrature(e.to_string()))?;
    Ok(gamma / ((1.0 - p) * gamma_checked(1.0 - gamma)?) * m * r.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeParams {
    pub a: f64,
    pub t0: f64,
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "M1")]
    pub m1: f64,
    #[serde(rename = "A")]
    pub a_coef: f64,
    pub p: f64,
    pub gamma: f64,
    pub u0: f64,
}

impl EnvelopeParams {
    /// Slack in `B2 ≥ M1` and in `B1 min(1, C1) ≥ A max(u0^p, B2^p 2^{pk})`.
    pub fn super_margins(&self) -> (f64, f64) {
        super_margins(self.b1, self.a_coef, self.p, self.gamma, self.u0, self.c1, self.m1)
    }
}

fn super_margins(b1: f64, a: f64, p: f64, gamma: f64, u0: f64, c1: f64, m1: f64) -> (f64, f64) {
    let g1 = gamma_fn(1.0 + gamma).expect("gamma in (0, 1)");
    let b2 = u0 + b1 / g1;
    let k = gamma / (1.0 - p);
    let rhs = a * u0.powf(p).max(b2.powf(p) * 2f64.powf(p * k));
    (b2 - m1, b1 * c1.min(1.0) - rhs)
}

/// Both envelopes, with `B1` the smallest value meeting the supersolution
/// constraints (doubling, then bisection to relative `1e-13`).
pub fn supersolution_params(a_coef: f64, p: f64, gamma: f64, u0: f64) -> Result<EnvelopeParams, AsymptoticsError> {
    check_sublinear(a_coef, p, gamma, u0)?;
    let sub = subsolution_params(a_coef, p, gamma, u0)?;
    let c1 = c1_constant(gamma)?;
    let c2 = c2_constant(p, gamma)?;
    let m1 = (a_coef / c2).powf(1.0 / (1.0 - p));
    let ok = |b1: f64| {
        let (x, y) = super_margins(b1, a_coef, p, gamma, u0, c1, m1);
        x >= 0.0 && y >= 0.0
    };
    let mut hi = u0.max(1.0);
    let mut lo = 0.0;
    let mut doublings = 0;
    while !ok(hi) {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 2000 || !hi.is_finite() {
            return Err(AsymptoticsError::Overflow("no feasible B1 found".into()));
        }
    }
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let b1 = hi;
    let b2 = u0 + b1 / gamma_checked(1.0 + gamma)?;
    Ok(EnvelopeParams { a: sub.a, t0: sub.t0, b1, b2, c1, c2, m1, a_coef, p, gamma, u0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    Sub,
    Super,
}

pub fn eval_envelope(params: &EnvelopeParams, which: Envelope, t: f64) -> f64 {
    let k = params.gamma / (1.0 - params.p);
    match which {
        Envelope::Sub if t <= params.t0 => params.u0,
        Envelope::Sub => params.a * t.powf(k),
        Envelope::Super if t <= 1.0 => {
            params.u0 + params.b1 * t.powf(params.gamma) / gamma_fn(1.0 + params.gamma).expect("gamma in (0, 1)")
        }
        Envelope::Super => params.b2 * t.powf(k),
    }
}
