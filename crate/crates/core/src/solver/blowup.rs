//! Adaptive runs into a finite-time blow-up of `D^γ u = A u^p`, `A > 0`, `p > 1`.
//!
//! Steps are capped by `θ·R`, where `R` is the remaining time read off the
//! locally linear `w = u^{−(p−1)/γ}`, so they shrink geometrically as the
//! singularity approaches. A run ends at `u_max` or when the next step would
//! fall below the time resolution of `f64`. `T_b` and the constant `C` of
//! `u ≈ C (T_b − t)^{−γ/(p−1)}` come from regressing `w` on `t` over the last
//! resolved decade of remaining time; the exponent is refitted freely from
//! `log u` against `log(T_b − t)` on the same nodes.

use serde::{Deserialize, Serialize};

use super::{remaining_time, FracProblem, SolverError, StepError, Stepper};
use crate::asymptotics::blowup_constant_theory;
use crate::regress::line_fit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlowupOptions {
    pub u_max: f64,
    /// Number of runs, each with half the base step and half the shrink factor.
    pub refine_levels: usize,
    /// Regular steps per unit horizon at the coarsest level.
    pub base_steps: usize,
    /// Step cap as a fraction of the remaining time, coarsest level.
    pub theta: f64,
    pub corrector_sweeps: usize,
    pub max_steps: usize,
}

impl Default for BlowupOptions {
    fn default() -> Self {
        Self { u_max: 1e8, refine_levels: 3, base_steps: 200, theta: 0.05, corrector_sweeps: 2, max_steps: 200_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupLevel {
    pub h_base: f64,
    pub theta: f64,
    pub steps: usize,
    pub t_last: f64,
    pub u_last: f64,
    pub stop_reason: String,
    #[serde(rename = "Tb_estimate")]
    pub tb_estimate: f64,
    pub exponent_fit: f64,
    pub constant_fit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupReport {
    #[serde(rename = "Tb_estimate")]
    pub tb_estimate: f64,
    pub exponent_fit: f64,
    pub constant_fit: f64,
    pub theory_exponent: f64,
    pub theory_constant: f64,
    /// Relative change of `T_b` between the two finest levels.
    pub refinement_drift: f64,
    /// Remaining-time range `(T_b − t)` used by the finest fit.
    pub fit_window: (f64, f64),
    pub fit_nodes: usize,
    pub levels: Vec<BlowupLevel>,
}

/// Smallest exponent accepted; below it the theory constant is ill-conditioned.
pub const MIN_BLOWUP_EXPONENT: f64 = 1.01;

pub fn detect_blowup(prob: &FracProblem, opts: &BlowupOptions) -> Result<BlowupReport, SolverError> {
    let pl = prob
        .rhs
        .as_power_law()
        .ok_or_else(|| SolverError::WrongRegime("blow-up detection needs a power-law right-hand side A*u^p".into()))?;
    let (a, p, gamma) = (pl.a, pl.p, prob.gamma);
    if !(a > 0.0) {
        return Err(SolverError::WrongRegime(format!("blow-up needs A > 0, got {a}")));
    }
    if !(p >= MIN_BLOWUP_EXPONENT) {
        return Err(SolverError::WrongRegime(format!("blow-up detection needs p >= {MIN_BLOWUP_EXPONENT}, got {p}")));
    }
    if !(prob.u0 > 0.0) {
        return Err(SolverError::WrongRegime(format!("blow-up detection needs u0 > 0, got {}", prob.u0)));
    }
    let theory_exponent = gamma / (p - 1.0);
    let theory_constant = blowup_constant_theory(a, p, gamma).map_err(|e| SolverError::Fit(e.to_string()))?;

    let mut levels = Vec::new();
    let mut last_fit = None;
    for level in 0..opts.refine_levels.max(1) {
        let scale = 0.5f64.powi(level as i32);
        let h_base = prob.t_end * scale / opts.base_steps.max(1) as f64;
        let theta = opts.theta * scale;
        let run = run_level(prob, p, h_base, theta, opts)?;
        let fit = fit_tail(&run.t, &run.u, p, gamma, opts.u_max)?;
        levels.push(BlowupLevel {
            h_base,
            theta,
            steps: run.t.len() - 1,
            t_last: *run.t.last().expect("nonempty"),
            u_last: *run.u.last().expect("nonempty"),
            stop_reason: run.stop_reason,
            tb_estimate: fit.tb,
            exponent_fit: fit.exponent,
            constant_fit: fit.constant,
        });
        last_fit = Some(fit);
    }
    let fit = last_fit.expect("at least one level");
    let refinement_drift = match levels.as_slice() {
        [.., prev, last] => ((last.tb_estimate - prev.tb_estimate) / last.tb_estimate).abs(),
        _ => f64::NAN,
    };
    Ok(BlowupReport {
        tb_estimate: fit.tb,
        exponent_fit: fit.exponent,
        constant_fit: fit.constant,
        theory_exponent,
        theory_constant,
        refinement_drift,
        fit_window: fit.window,
        fit_nodes: fit.nodes,
        levels,
    })
}

struct LevelRun {
    t: Vec<f64>,
    u: Vec<f64>,
    stop_reason: String,
}

fn run_level(prob: &FracProblem, p: f64, h_base: f64, theta: f64, opts: &BlowupOptions) -> Result<LevelRun, SolverError> {
    let q = (1.0 - p) / prob.gamma;
    let mut st = Stepper::new(prob, opts.corrector_sweeps, true).map_err(step_err)?;
    let h_start = h_base * 1e-4;
    let horizon = 100.0 * prob.t_end;
    let stop_reason = loop {
        let (t, u) = (st.last_t(), st.last_u());
        if u > opts.u_max {
            break format!("u exceeded u_max = {:e}", opts.u_max);
        }
        if t > horizon {
            return Err(SolverError::NoBlowup { t_last: t, u_last: u, u_max: opts.u_max });
        }
        if st.len() > opts.max_steps {
            return Err(SolverError::StepBudget { max_steps: opts.max_steps, t_last: t });
        }
        let r = remaining_time(st.times(), st.values(), q);
        let mut h = h_base.min(h_start + 0.1 * t).min(theta * r);
        if h < 64.0 * f64::EPSILON * t {
            break "time resolution of f64 reached".to_string();
        }
        let mut tries = 0;
        let c = loop {
            match st.try_step(t + h) {
                Ok(c) => break Some(c),
                Err(StepError::NonFinite { .. }) | Err(StepError::NonPositive { .. }) if tries < 30 => {
                    h *= 0.5;
                    tries += 1;
                }
                Err(StepError::Evaluation(e)) => return Err(SolverError::Evaluation(e)),
                Err(_) => break None,
            }
        };
        match c {
            Some(c) => st.commit(c),
            None => break "step rejected repeatedly".to_string(),
        }
    };
    let (t, u) = st.into_parts();
    Ok(LevelRun { t, u, stop_reason })
}

fn step_err(e: StepError) -> SolverError {
    match e {
        StepError::Evaluation(e) => SolverError::Evaluation(e),
        StepError::NonPositive { t, u } | StepError::NonFinite { t, u } => SolverError::StepCollapse { t_last: t, u_last: u },
    }
}

struct TailFit {
    tb: f64,
    exponent: f64,
    constant: f64,
    window: (f64, f64),
    nodes: usize,
}

fn fit_tail(t: &[f64], u: &[f64], p: f64, gamma: f64, u_max: f64) -> Result<TailFit, SolverError> {
    let q = (p - 1.0) / gamma;
    let n = t.len();
    let r_last = remaining_time(t, u, -q);
    if !r_last.is_finite() {
        return Err(SolverError::Fit("solution is not approaching a singularity".into()));
    }
    let mut tb = t[n - 1] + r_last;
    let mut window = (0.0, 0.0);
    let mut idx: Vec<usize> = Vec::new();
    let mut slope = 0.0;
    for _ in 0..4 {
        // below this the time grid cannot resolve T_b − t to a few digits
        let r_lo = (1e5 * f64::EPSILON * tb).max(2.0 * (tb - t[n - 1]));
        window = (r_lo, 10.0 * r_lo);
        idx = (0..n).filter(|&j| u[j] <= u_max && (tb - t[j]) >= window.0 && (tb - t[j]) <= window.1).collect();
        if idx.len() < 10 {
            return Err(SolverError::Fit(format!(
                "only {} nodes in the last resolved decade [{:e}, {:e}] before T_b",
                idx.len(),
                window.0,
                window.1
            )));
        }
        let xs: Vec<f64> = idx.iter().map(|&j| t[j] - t[idx[0]]).collect();
        let ws: Vec<f64> = idx.iter().map(|&j| u[j].powf(-q)).collect();
        let fit = line_fit(&xs, &ws).ok_or_else(|| SolverError::Fit("degenerate regression".into()))?;
        if !(fit.slope < 0.0) {
            return Err(SolverError::Fit("w = u^{-(p-1)/gamma} is not decreasing".into()));
        }
        slope = fit.slope;
        tb = t[idx[0]] + fit.intercept / -fit.slope;
    }
    let constant = (-slope).powf(-1.0 / q);
    let xs: Vec<f64> = idx.iter().map(|&j| (tb - t[j]).ln()).collect();
    let ys: Vec<f64> = idx.iter().map(|&j| u[j].ln()).collect();
    let free = line_fit(&xs, &ys).ok_or_else(|| SolverError::Fit("degenerate log-log regression".into()))?;
    Ok(TailFit { tb, exponent: -free.slope, constant, window, nodes: idx.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_blowup_matches_theory() {
        let prob = FracProblem::power_law(0.5, 1.0, 2.0, 1.0, 1.0).unwrap();
        let rep = detect_blowup(&prob, &BlowupOptions::default()).unwrap();
        assert!((rep.theory_constant - 0.564_189_583_547_756).abs() < 1e-12);
        assert!((rep.exponent_fit / 0.5 - 1.0).abs() < 0.03, "{rep:?}");
        assert!((rep.constant_fit / rep.theory_constant - 1.0).abs() < 0.1, "{rep:?}");
        assert!(rep.refinement_drift < 0.01, "{rep:?}");
        assert!(rep.tb_estimate > rep.levels.last().unwrap().t_last);
    }

    #[test]
    fn exponent_guard() {
        let prob = FracProblem::power_law(0.5, 1.0, 1.0001, 1.0, 1.0).unwrap();
        assert!(matches!(detect_blowup(&prob, &BlowupOptions::default()), Err(SolverError::WrongRegime(_))));
        let prob = FracProblem::power_law(0.5, -1.0, 2.0, 1.0, 1.0).unwrap();
        assert!(matches!(detect_blowup(&prob, &BlowupOptions::default()), Err(SolverError::WrongRegime(_))));
    }
}
