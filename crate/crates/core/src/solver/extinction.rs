//! Adaptive runs of `D^γ u = A u^p`, `A < 0`, `p < 0`, until `u` touches zero.
//!
//! Near the touch point `u ≈ c (T_e − t)^{γ/(1−p)}`, so `u^{(1−p)/γ}` is
//! locally linear and gives the remaining time; steps are capped by a
//! fraction of it. Steps that would make `u` nonpositive are halved.
//!
//! Since `u` vanishes like a small power of `T_e − t`, the threshold
//! `eps_touch·u0` usually lies closer to `T_e` than `f64` can resolve. Once
//! the remaining time drops below that resolution the crossing time is
//! extrapolated along the linear law; the extrapolation moves `t` by less
//! than the spacing of representable times near `T_e`.

use serde::{Deserialize, Serialize};

use super::{remaining_time, FracProblem, SolverError, StepError, Stepper};
use crate::specfun::gamma_fn;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtinctionOptions {
    /// The run stops once `u < eps_touch·u0`.
    pub eps_touch: f64,
    /// Regular steps per unit horizon.
    pub base_steps: usize,
    /// Step cap as a fraction of the remaining time.
    pub theta: f64,
    pub corrector_sweeps: usize,
    pub max_steps: usize,
}

impl Default for ExtinctionOptions {
    fn default() -> Self {
        Self { eps_touch: 1e-6, base_steps: 400, theta: 0.05, corrector_sweeps: 2, max_steps: 200_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtinctionReport {
    /// Time at which `u` crosses `eps_touch·u0`.
    pub touch_time: f64,
    /// `(u0^{1−p} Γ(1+γ)/|A|)^{1/γ}`, where the constant-forcing comparison
    /// solution `u0 + A u0^p t^γ/Γ(1+γ)` vanishes.
    pub upper_bound_time: f64,
    pub strictly_decreasing: bool,
    /// True when the crossing was extrapolated below the time resolution.
    pub resolution_limited: bool,
    /// Last computed state.
    pub t_last: f64,
    pub u_last: f64,
    pub steps: usize,
    #[serde(skip)]
    pub times: Vec<f64>,
    #[serde(skip)]
    pub values: Vec<f64>,
}

pub fn extinction_upper_bound(a: f64, p: f64, gamma: f64, u0: f64) -> f64 {
    let g = gamma_fn(1.0 + gamma).expect("gamma in (0, 1)");
    (u0.powf(1.0 - p) * g / a.abs()).powf(1.0 / gamma)
}

pub fn detect_extinction(prob: &FracProblem, opts: &ExtinctionOptions) -> Result<ExtinctionReport, SolverError> {
    let pl = prob.rhs.as_power_law().ok_or_else(|| {
        SolverError::WrongRegime("extinction detection needs a power-law right-hand side A*u^p".into())
    })?;
    let (a, p, gamma, u0) = (pl.a, pl.p, prob.gamma, prob.u0);
    if !(a < 0.0 && p < 0.0 && u0 > 0.0) {
        return Err(SolverError::WrongRegime(format!(
            "extinction needs A < 0, p < 0, u0 > 0; got A = {a}, p = {p}, u0 = {u0}"
        )));
    }
    if !(opts.eps_touch > 0.0 && opts.eps_touch < 1.0) {
        return Err(SolverError::InvalidProblem(format!("eps_touch must lie in (0, 1), got {}", opts.eps_touch)));
    }
    let q = (1.0 - p) / gamma;
    let threshold = opts.eps_touch * u0;
    let h_base = prob.t_end / opts.base_steps.max(1) as f64;
    let h_start = h_base * 1e-4;
    let mut st = Stepper::new(prob, opts.corrector_sweeps, true).map_err(|e| match e {
        StepError::Evaluation(e) => SolverError::Evaluation(e),
        _ => SolverError::StepCollapse { t_last: 0.0, u_last: u0 },
    })?;
    let resolution = |t: f64| 64.0 * f64::EPSILON * t.max(h_start);
    let mut extrapolated = None;
    while st.last_u() >= threshold {
        let t = st.last_t();
        if st.len() > opts.max_steps {
            return Err(SolverError::StepBudget { max_steps: opts.max_steps, t_last: t });
        }
        let r = remaining_time(st.times(), st.values(), q);
        if opts.theta * r < 4.0 * resolution(t) {
            let w_n = st.last_u().powf(q);
            extrapolated = Some(t + r * (1.0 - threshold.powf(q) / w_n));
            break;
        }
        let mut h = h_base.min(h_start + 0.1 * t).min(opts.theta * r);
        let mut accepted = None;
        while h >= resolution(t) {
            match st.try_step(t + h) {
                Ok(c) => {
                    accepted = Some(c);
                    break;
                }
                Err(StepError::NonPositive { .. }) | Err(StepError::NonFinite { .. }) => h *= 0.5,
                Err(StepError::Evaluation(e)) => return Err(SolverError::Evaluation(e)),
            }
        }
        let c = accepted.ok_or(SolverError::StepCollapse { t_last: t, u_last: st.last_u() })?;
        st.commit(c);
    }
    let (times, values) = st.into_parts();
    let n = times.len() - 1;
    let touch_time = match extrapolated {
        Some(t) => t,
        None => {
            let (w0, w1, wt) = (values[n - 1].powf(q), values[n].powf(q), threshold.powf(q));
            times[n - 1] + (w0 - wt) / (w0 - w1) * (times[n] - times[n - 1])
        }
    };
    let strictly_decreasing = values.windows(2).all(|w| w[1] < w[0]);
    Ok(ExtinctionReport {
        touch_time,
        upper_bound_time: extinction_upper_bound(a, p, gamma, u0),
        strictly_decreasing,
        resolution_limited: extrapolated.is_some(),
        t_last: times[n],
        u_last: values[n],
        steps: n,
        times,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_power_touches_before_the_bound() {
        let prob = FracProblem::power_law(0.5, -1.0, -1.0, 1.0, 1.0).unwrap();
        let rep = detect_extinction(&prob, &ExtinctionOptions::default()).unwrap();
        assert!((rep.upper_bound_time - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!(rep.touch_time > 0.0 && rep.touch_time <= std::f64::consts::FRAC_PI_4 * 1.02, "{}", rep.touch_time);
        assert!(rep.strictly_decreasing);
        assert!(rep.touch_time >= rep.t_last);
    }

    #[test]
    fn regime_guard() {
        let prob = FracProblem::power_law(0.5, 1.0, -1.0, 1.0, 1.0).unwrap();
        assert!(matches!(detect_extinction(&prob, &ExtinctionOptions::default()), Err(SolverError::WrongRegime(_))));
    }
}
