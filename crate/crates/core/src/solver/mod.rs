//! Fractional Adams predictor–corrector for `D^γ u = f(t, u)`, `u(0) = u0`,
//! solved in its Volterra form
//! `u(t) = u0 + 1/Γ(γ) ∫₀ᵗ (t−s)^{γ−1} f(s, u(s)) ds`.
//!
//! Each step predicts with a product rectangle on the newest interval (the
//! history keeps its trapezoid weights), then runs `corrector_sweeps`
//! fixed-point sweeps of the product-trapezoid corrector, then one final
//! evaluation of `f`. Weights come from exact kernel moments, so any mesh
//! works, including meshes chosen on the fly by [`Stepper`].

mod blowup;
mod extinction;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use blowup::{detect_blowup, BlowupLevel, BlowupOptions, BlowupReport};
pub use extinction::{detect_extinction, extinction_upper_bound, ExtinctionOptions, ExtinctionReport};

use crate::expr::{EvalError, Rhs};
use crate::fracops::{kernel_moments, Mesh, SampledFn};
use crate::specfun::gamma_fn;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolverError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("{0}")]
    WrongRegime(String),
    #[error("no blow-up: u stayed at {u_last:e} up to t = {t_last} (u_max = {u_max:e})")]
    NoBlowup { t_last: f64, u_last: f64, u_max: f64 },
    #[error("step size collapsed at t = {t_last} with u = {u_last:e}")]
    StepCollapse { t_last: f64, u_last: f64 },
    #[error("step budget of {max_steps} exhausted at t = {t_last}")]
    StepBudget { max_steps: usize, t_last: f64 },
    #[error(transparent)]
    Evaluation(#[from] EvalError),
    #[error("fit failed: {0}")]
    Fit(String),
}

/// `D^γ u = f(t, u)` on `[0, T]` with `u(0) = u0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FracProblem {
    pub gamma: f64,
    pub rhs: Rhs,
    pub u0: f64,
    pub t_end: f64,
}

impl FracProblem {
    pub fn new(gamma: f64, rhs: Rhs, u0: f64, t_end: f64) -> Result<Self, SolverError> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(SolverError::InvalidProblem(format!("gamma must lie in (0, 1), got {gamma}")));
        }
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(SolverError::InvalidProblem(format!("horizon must be positive, got {t_end}")));
        }
        if !u0.is_finite() {
            return Err(SolverError::InvalidProblem(format!("initial value must be finite, got {u0}")));
        }
        if let Some(pl) = rhs.as_power_law() {
            if !pl.a.is_finite() || !pl.p.is_finite() {
                return Err(SolverError::InvalidProblem(format!("non-finite power law {}*u^{}", pl.a, pl.p)));
            }
            if pl.p != pl.p.trunc() && !(u0 > 0.0) {
                return Err(SolverError::InvalidProblem(format!(
                    "power law with non-integer exponent {} needs u0 > 0, got {u0}",
                    pl.p
                )));
            }
        }
        Ok(Self { gamma, rhs, u0, t_end })
    }

    /// `D^γ u = A u^p`.
    pub fn power_law(gamma: f64, a: f64, p: f64, u0: f64, t_end: f64) -> Result<Self, SolverError> {
        Self::new(gamma, Rhs::power_law(a, p), u0, t_end)
    }

    /// True when the right-hand side is only defined for `u > 0`.
    pub fn requires_positive(&self) -> bool {
        self.rhs.as_power_law().is_some_and(|pl| pl.p != 0.0 && (pl.p < 0.0 || pl.p != pl.p.trunc()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveOptions {
    pub corrector_sweeps: usize,
    /// Stop with [`SolveStatus::ExtinctionSuspected`] instead of stepping
    /// through `u ≤ 0` when the right-hand side needs `u > 0`.
    pub positivity_guard: bool,
    /// `|u|` above this ends the run with [`SolveStatus::BlowupSuspected`].
    pub u_max: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { corrector_sweeps: 2, positivity_guard: true, u_max: 1e8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Completed,
    BlowupSuspected,
    ExtinctionSuspected,
    EvaluationFailure,
}

/// A computed trajectory. When the run stops early, `values` covers only a
/// prefix of the mesh; [`SolutionPath::nodes`] returns the matching prefix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionPath {
    pub mesh: Mesh,
    pub values: Vec<f64>,
    /// Corrector sweeps per step.
    pub corrector_iterations: usize,
    pub status: SolveStatus,
    pub message: Option<String>,
}

impl SolutionPath {
    pub fn nodes(&self) -> &[f64] {
        &self.mesh.nodes()[..self.values.len()]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> (f64, f64) {
        let n = self.values.len() - 1;
        (self.mesh.nodes()[n], self.values[n])
    }

    /// The resolved prefix as a sampled function; `None` with fewer than two nodes.
    pub fn to_sampled(&self) -> Option<SampledFn> {
        let mesh = Mesh::from_nodes(self.nodes().to_vec()).ok()?;
        SampledFn::new(mesh, self.values.clone()).ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepError {
    Evaluation(EvalError),
    NonPositive { t: f64, u: f64 },
    NonFinite { t: f64, u: f64 },
}

/// A tentative step that can be committed or discarded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub t: f64,
    pub u: f64,
    f: f64,
}

/// Incremental integrator over a mesh that grows one node at a time.
#[derive(Debug, Clone)]
pub struct Stepper<'p> {
    prob: &'p FracProblem,
    sweeps: usize,
    guard: bool,
    inv_gamma: f64,
    t: Vec<f64>,
    u: Vec<f64>,
    f: Vec<f64>,
}

impl<'p> Stepper<'p> {
    pub fn new(prob: &'p FracProblem, sweeps: usize, positivity_guard: bool) -> Result<Self, StepError> {
        let f0 = prob.rhs.eval(0.0, prob.u0).map_err(StepError::Evaluation)?;
        let inv_gamma = 1.0 / gamma_fn(prob.gamma).expect("gamma in (0, 1)");
        Ok(Self {
            prob,
            sweeps: sweeps.max(1),
            guard: positivity_guard && prob.requires_positive(),
            inv_gamma,
            t: vec![0.0],
            u: vec![prob.u0],
            f: vec![f0],
        })
    }

    pub fn with_capacity(mut self, n: usize) -> Self {
        self.t.reserve(n);
        self.u.reserve(n);
        self.f.reserve(n);
        self
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    pub fn last_t(&self) -> f64 {
        *self.t.last().expect("nonempty")
    }

    pub fn last_u(&self) -> f64 {
        *self.u.last().expect("nonempty")
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.t, self.u)
    }

    /// Computes the value at `t_next > last_t()` without committing it.
    pub fn try_step(&self, t_next: f64) -> Result<Candidate, StepError> {
        let n = self.t.len() - 1;
        debug_assert!(t_next > self.t[n]);
        let e = self.prob.gamma - 1.0;
        let mut hist = 0.0;
        let mut w_new = 0.0;
        for j in 0..=n {
            let a = self.t[j];
            let h = if j < n { self.t[j + 1] - a } else { t_next - a };
            let d_a = t_next - a;
            let (m0, m1) = kernel_moments(e, h, d_a, d_a.powf(e));
            hist += (m0 - m1) * self.f[j];
            if j < n {
                hist += m1 * self.f[j + 1];
            } else {
                w_new = m1;
            }
        }
        // rectangle on the new interval only: the history keeps its trapezoid
        // weights, so the predictor error is local rather than first order
        // across the whole history
        let u0 = self.prob.u0;
        let mut u = u0 + (hist + w_new * self.f[n]) * self.inv_gamma;
        for _ in 0..self.sweeps {
            let f = self.eval(t_next, u)?;
            u = u0 + (hist + w_new * f) * self.inv_gamma;
        }
        let f = self.eval(t_next, u)?;
        Ok(Candidate { t: t_next, u, f })
    }

    pub fn commit(&mut self, c: Candidate) {
        self.t.push(c.t);
        self.u.push(c.u);
        self.f.push(c.f);
    }

    /// `try_step` followed by `commit`.
    pub fn advance(&mut self, t_next: f64) -> Result<f64, StepError> {
        let c = self.try_step(t_next)?;
        self.commit(c);
        Ok(c.u)
    }

    fn eval(&self, t: f64, u: f64) -> Result<f64, StepError> {
        if !u.is_finite() {
            return Err(StepError::NonFinite { t, u });
        }
        if self.guard && u <= 0.0 {
            return Err(StepError::NonPositive { t, u });
        }
        self.prob.rhs.eval(t, u).map_err(StepError::Evaluation)
    }
}

/// Solves on a fixed mesh that must end at or before the problem horizon.
pub fn solve(prob: &FracProblem, mesh: &Mesh, opts: &SolveOptions) -> SolutionPath {
    let sweeps = opts.corrector_sweeps.max(1);
    let done = |values: Vec<f64>, status, message: Option<String>| SolutionPath {
        mesh: mesh.clone(),
        values,
        corrector_iterations: sweeps,
        status,
        message,
    };
    let mut stepper = match Stepper::new(prob, sweeps, opts.positivity_guard) {
        Ok(s) => s.with_capacity(mesh.len()),
        Err(e) => {
            let (status, msg) = classify(&e);
            return done(vec![prob.u0], status, Some(msg));
        }
    };
    for &t in &mesh.nodes()[1..] {
        match stepper.advance(t) {
            Ok(u) if u.abs() > opts.u_max => {
                let msg = format!("|u| = {:e} exceeded u_max = {:e} at t = {t}", u.abs(), opts.u_max);
                return done(stepper.into_parts().1, SolveStatus::BlowupSuspected, Some(msg));
            }
            Ok(_) => {}
            Err(e) => {
                let (status, msg) = classify(&e);
                return done(stepper.into_parts().1, status, Some(msg));
            }
        }
    }
    done(stepper.into_parts().1, SolveStatus::Completed, None)
}

fn classify(e: &StepError) -> (SolveStatus, String) {
    match e {
        StepError::NonPositive { t, u } => {
            (SolveStatus::ExtinctionSuspected, format!("u would reach {u:e} <= 0 at t = {t}"))
        }
        StepError::NonFinite { t, u } => (SolveStatus::BlowupSuspected, format!("u became {u} at t = {t}")),
        StepError::Evaluation(err) => (SolveStatus::EvaluationFailure, err.to_string()),
    }
}

/// Time left before `u` reaches its singular value, from the last two nodes,
/// assuming `u^{1/β}` is locally linear in time (`β = γ/(1−p)`).
pub(crate) fn remaining_time(t: &[f64], u: &[f64], q: f64) -> f64 {
    let n = t.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let w1 = u[n - 1].abs().powf(q);
    let w0 = u[n - 2].abs().powf(q);
    if !(w0 > w1) {
        return f64::INFINITY;
    }
    w1 * (t[n - 1] - t[n - 2]) / (w0 - w1)
}
