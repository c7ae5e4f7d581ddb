//! Numerical checks of order preservation.
//!
//! Each check solves one or two problems on a graded mesh and inspects the
//! computed paths: ordered initial data should stay ordered, a problem with a
//! larger right-hand side should stay above, the difference quotient
//! `y = (u₂−u₁)/(u₂₀−u₁₀)` should stay positive and below a Mittag-Leffler
//! envelope, and the resolvent of the kernel `λ t^{γ−1}` should be positive.
//! The random corpus draws bounded polynomial right-hand sides from a seeded
//! ChaCha stream, so a seed fully determines every trial.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{lipschitz_probe, BinOp, EvalError, Expr, Func, Rhs, Var};
use crate::fracops::{caputo_l1, frac_integral, FracOpsError, Mesh, SampledFn};
use crate::par;
use crate::solver::{solve, FracProblem, SolutionPath, SolveOptions, SolveStatus, SolverError};
use crate::specfun::{gamma_fn, mittag_leffler_one, resolvent, ResolventQuery, SpecialFnError};

/// Seed of the shipped random corpus.
pub const DEFAULT_SEED: u64 = 271_828;
/// Margins below `−ORDER_TOLERANCE` count as ordering violations.
pub const ORDER_TOLERANCE: f64 = 1e-9;
/// Differences smaller than this fraction of the initial gap are treated as
/// underflowed in the stability ratio.
pub const UNDERFLOW_RATIO: f64 = 1e-13;
/// Relative slack allowed above the Mittag-Leffler envelope.
pub const ENVELOPE_SLACK: f64 = 1e-2;
const LIPSCHITZ_INFLATION: f64 = 1.5;
const LIPSCHITZ_GRID: usize = 33;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<VerifyError>,
    },
    #[error("solver stopped early ({status:?}) at t = {t}: {message}")]
    Incomplete { status: SolveStatus, t: f64, message: String },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Evaluation(#[from] EvalError),
    #[error(transparent)]
    Operator(#[from] FracOpsError),
    #[error(transparent)]
    Special(#[from] SpecialFnError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub trials: usize,
    /// Smallest `upper − lower` over all trials and nodes.
    pub min_margin: f64,
    /// Nodes with `upper − lower < −ORDER_TOLERANCE`.
    pub violations: usize,
}

impl ComparisonReport {
    fn from_margins(margins: impl Iterator<Item = f64>) -> Self {
        let (mut min_margin, mut violations) = (f64::INFINITY, 0);
        for m in margins {
            min_margin = min_margin.min(m);
            violations += usize::from(m < -ORDER_TOLERANCE);
        }
        Self { trials: 1, min_margin, violations }
    }

    fn merge(self, other: Self) -> Self {
        Self {
            trials: self.trials + other.trials,
            min_margin: self.min_margin.min(other.min_margin),
            violations: self.violations + other.violations,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    /// `(u₂−u₁)/(u₂₀−u₁₀)` at every node.
    pub y_path: SampledFn,
    pub min_y: f64,
    /// `max |y|`, an empirical stability constant.
    pub sup_ratio: f64,
    pub ml_envelope_ok: bool,
    /// Probed Lipschitz constant (already inflated) used by the envelope.
    pub lipschitz: f64,
    /// `max |y + ∫(t−s)^{γ−1} v y ds − 1|` with `v` rebuilt from the paths.
    pub volterra_residual: f64,
    /// Nodes whose difference underflowed; excluded from `min_y` and `sup_ratio`.
    pub underflow_nodes: Vec<usize>,
}

impl StabilityReport {
    pub fn passed(&self) -> bool {
        self.min_y > 0.0 && self.sup_ratio.is_finite() && self.ml_envelope_ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventCheck {
    pub lambda: f64,
    pub gamma: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub n: usize,
    /// Largest residual of `r + λ∫(t−s)^{γ−1} r ds = λ t^{γ−1}` over `t ≥ 10T/N`.
    pub max_residual: f64,
    pub min_r: f64,
    /// Largest `|1 − ∫₀ᵗ r − E_γ(−λΓ(γ)t^γ)|` over all nodes.
    pub identity_error: f64,
}

/// Running-maximum nodes of a path, where the Caputo derivative must be
/// nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxPointCheck {
    pub nodes_checked: usize,
    pub min_derivative: Option<f64>,
    pub ok: bool,
}

fn graded_mesh(gamma: f64, t_end: f64, n: usize) -> Result<Mesh, VerifyError> {
    Ok(Mesh::graded_for_order(t_end, n, gamma)?)
}

fn problem(gamma: f64, rhs: &Rhs, u0: f64, t_end: f64) -> Result<FracProblem, VerifyError> {
    Ok(FracProblem::new(gamma, rhs.clone(), u0, t_end)?)
}

fn completed(path: SolutionPath) -> Result<SolutionPath, VerifyError> {
    if path.status == SolveStatus::Completed {
        return Ok(path);
    }
    Err(VerifyError::Incomplete {
        status: path.status,
        t: path.last().0,
        message: path.message.unwrap_or_default(),
    })
}

/// Solves `D^γ u = f` from `u10` and from `u20` on the same graded mesh.
pub fn solve_pair(
    f: &Rhs,
    gamma: f64,
    u10: f64,
    u20: f64,
    t_end: f64,
    n: usize,
) -> Result<(SolutionPath, SolutionPath), VerifyError> {
    let mesh = graded_mesh(gamma, t_end, n)?;
    let opts = SolveOptions::default();
    let lower = completed(solve(&problem(gamma, f, u10, t_end)?, &mesh, &opts))?;
    let upper = completed(solve(&problem(gamma, f, u20, t_end)?, &mesh, &opts))?;
    Ok((lower, upper))
}

fn value_range(paths: &[&[f64]]) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in paths.iter().flat_map(|p| p.iter()) {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    if hi - lo < 1e-6 {
        (lo - 1e-3, hi + 1e-3)
    } else {
        (lo, hi)
    }
}

/// Finite-difference Lipschitz constant of `f` over `[0, T]` and the range
/// of the given paths, inflated by half.
fn probe_lipschitz(f: &Rhs, t_end: f64, paths: &[&[f64]]) -> Result<f64, VerifyError> {
    let l = lipschitz_probe(f, (0.0, t_end), value_range(paths), LIPSCHITZ_GRID)?;
    if !l.is_finite() {
        return Err(VerifyError::Invalid(format!("right-hand side is not Lipschitz on the reachable range (probe gave {l})")));
    }
    Ok(LIPSCHITZ_INFLATION * l)
}

/// Ordering of the solutions from `u10 ≤ u20` under the same right-hand side.
pub fn check_comparison(f: &Rhs, gamma: f64, u10: f64, u20: f64, t_end: f64, n: usize) -> Result<ComparisonReport, VerifyError> {
    if !(u10 <= u20) {
        return Err(VerifyError::Invalid(format!("need u10 <= u20, got {u10} and {u20}")));
    }
    let (lower, upper) = solve_pair(f, gamma, u10, u20, t_end, n)?;
    probe_lipschitz(f, t_end, &[&lower.values, &upper.values])?;
    Ok(ComparisonReport::from_margins(upper.values.iter().zip(&lower.values).map(|(b, a)| b - a)))
}

/// Solves with `f` and with `f + delta` from the same `u0` and checks that
/// the second path stays above the first on their common computed range.
/// Runs that blow up are compared up to where they stop; `t = 0` is left out
/// of the margin.
pub fn check_subsupersolution(
    f: &Rhs,
    delta: &Rhs,
    gamma: f64,
    u0: f64,
    t_end: f64,
    n: usize,
) -> Result<ComparisonReport, VerifyError> {
    let mesh = graded_mesh(gamma, t_end, n)?;
    let forced = Rhs::Expr(Expr::binary(BinOp::Add, f.to_expr(), delta.to_expr()));
    let opts = SolveOptions::default();
    let keep = |p: SolutionPath| match p.status {
        SolveStatus::Completed | SolveStatus::BlowupSuspected => Ok(p),
        _ => completed(p),
    };
    let u = keep(solve(&problem(gamma, f, u0, t_end)?, &mesh, &opts))?;
    let v = keep(solve(&problem(gamma, &forced, u0, t_end)?, &mesh, &opts))?;
    let common = u.values.len().min(v.values.len());
    let nodes = &mesh.nodes()[..common];

    let (lo, hi) = value_range(&[&u.values[..common], &v.values[..common]]);
    let grid = (0..LIPSCHITZ_GRID).flat_map(|i| {
        let s = i as f64 / (LIPSCHITZ_GRID - 1) as f64;
        (0..LIPSCHITZ_GRID).map(move |k| (s * nodes[common - 1], lo + (hi - lo) * k as f64 / (LIPSCHITZ_GRID - 1) as f64))
    });
    let on_paths = nodes.iter().zip(&u.values).chain(nodes.iter().zip(&v.values)).map(|(t, x)| (*t, *x));
    for (t, x) in on_paths.chain(grid) {
        let d = delta.eval(t, x)?;
        if d < 0.0 {
            return Err(VerifyError::Invalid(format!("delta is negative ({d}) at t = {t}, u = {x}")));
        }
    }
    // both start at u0, so the margin is measured for t > 0
    let margins = v.values[1..common].iter().zip(&u.values[1..common]).map(|(b, a)| b - a);
    Ok(ComparisonReport::from_margins(margins))
}

/// Difference-quotient analysis of a solved pair with distinct initial values.
fn stability_of_pair(
    f: &Rhs,
    gamma: f64,
    t_end: f64,
    lower: &SolutionPath,
    upper: &SolutionPath,
) -> Result<StabilityReport, VerifyError> {
    let (u1, u2) = (&lower.values, &upper.values);
    let gap = u2[0] - u1[0];
    if gap == 0.0 {
        return Err(VerifyError::Invalid("stability needs distinct initial values".into()));
    }
    let t = lower.mesh.nodes();
    let gamma_g = gamma_fn(gamma)?;
    let mut y = Vec::with_capacity(t.len());
    let mut v = Vec::with_capacity(t.len());
    let mut underflow_nodes = Vec::new();
    for k in 0..t.len() {
        let d = u2[k] - u1[k];
        y.push(d / gap);
        if d.abs() < UNDERFLOW_RATIO * gap.abs() {
            underflow_nodes.push(k);
            v.push(0.0);
        } else {
            v.push(-(f.eval(t[k], u2[k])? - f.eval(t[k], u1[k])?) / d / gamma_g);
        }
    }
    let vy: Vec<f64> = v.iter().zip(&y).map(|(a, b)| a * b).collect();
    let conv = frac_integral(gamma, &SampledFn::new(lower.mesh.clone(), vy)?)?;
    let volterra_residual =
        y.iter().zip(conv.values()).map(|(yk, c)| (yk + gamma_g * c - 1.0).abs()).fold(0.0, f64::max);

    let lipschitz = probe_lipschitz(f, t_end, &[u1, u2])?;
    let counted = || (0..t.len()).filter(|k| underflow_nodes.binary_search(k).is_err()).map(|k| y[k]);
    let min_y = counted().fold(f64::INFINITY, f64::min);
    let sup_ratio = counted().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut ml_envelope_ok = true;
    for (tk, yk) in t.iter().zip(&y) {
        // overflow of the envelope means it cannot be violated
        let bound = mittag_leffler_one(gamma, lipschitz * gamma_g * tk.powf(gamma)).unwrap_or(f64::INFINITY);
        if *yk > bound * (1.0 + ENVELOPE_SLACK) {
            ml_envelope_ok = false;
            break;
        }
    }
    Ok(StabilityReport {
        y_path: SampledFn::new(lower.mesh.clone(), y)?,
        min_y,
        sup_ratio,
        ml_envelope_ok,
        lipschitz,
        volterra_residual,
        underflow_nodes,
    })
}

/// Dependence of the solution on its initial value.
pub fn stability_experiment(f: &Rhs, gamma: f64, u10: f64, u20: f64, t_end: f64, n: usize) -> Result<StabilityReport, VerifyError> {
    if u10 == u20 {
        return Err(VerifyError::Invalid("stability needs u10 != u20".into()));
    }
    let (lower, upper) = solve_pair(f, gamma, u10, u20, t_end, n)?;
    stability_of_pair(f, gamma, t_end, &lower, &upper)
}

/// At nodes where `u` reaches its running maximum, the L1 Caputo derivative
/// of the piecewise-linear interpolant is nonnegative up to roundoff.
pub fn max_point_check(gamma: f64, u: &SampledFn, u0: f64) -> Result<MaxPointCheck, VerifyError> {
    let d = caputo_l1(gamma, u, u0)?;
    let scale = d.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-10 * (1.0 + scale);
    let mut running = u0;
    let mut nodes_checked = 0;
    let mut min_derivative: Option<f64> = None;
    for (&x, &dk) in u.values().iter().zip(d.values()).skip(1) {
        if x >= running {
            running = x;
            nodes_checked += 1;
            min_derivative = Some(min_derivative.map_or(dk, |m| m.min(dk)));
        }
    }
    Ok(MaxPointCheck { nodes_checked, min_derivative, ok: min_derivative.is_none_or(|m| m >= -tol) })
}

/// Resolvent of the kernel `λ t^{γ−1}` on a graded mesh.
pub fn check_resolvent(lambda: f64, gamma: f64, t_end: f64, n: usize) -> Result<ResolventCheck, VerifyError> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(VerifyError::Invalid(format!("lambda must be positive, got {lambda}")));
    }
    let mesh = graded_mesh(gamma, t_end, n)?;
    let t = mesh.nodes();
    let c = lambda * gamma_fn(gamma)?;
    let relax = |s: f64| mittag_leffler_one(gamma, -c * s.powf(gamma));
    let mut r = Vec::with_capacity(t.len());
    // r is integrably singular at 0; node 0 carries its mean over the first interval
    let first_mass = 1.0 - relax(t[1])?;
    r.push(first_mass / t[1]);
    for &tk in &t[1..] {
        r.push(resolvent(ResolventQuery { lambda, gamma, t: tk })?);
    }
    let min_r = r[1..].iter().copied().fold(f64::INFINITY, f64::min);
    let gamma_g = gamma_fn(gamma)?;
    let conv = frac_integral(gamma, &SampledFn::new(mesh.clone(), r.clone())?)?;
    let t_min = 10.0 * t_end / n as f64;
    let max_residual = (1..t.len())
        .filter(|&k| t[k] >= t_min)
        .map(|k| (r[k] + lambda * gamma_g * conv.values()[k] - lambda * t[k].powf(gamma - 1.0)).abs())
        .fold(0.0, f64::max);

    let mut mass = first_mass;
    let mut identity_error = (1.0 - mass - relax(t[1])?).abs();
    for k in 2..t.len() {
        mass += 0.5 * (t[k] - t[k - 1]) * (r[k] + r[k - 1]);
        identity_error = identity_error.max((1.0 - mass - relax(t[k])?).abs());
    }
    Ok(ResolventCheck { lambda, gamma, t_end, n, max_residual, min_r, identity_error })
}

/// Settings for the random comparison corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusOptions {
    pub trials: usize,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub n: usize,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        Self { trials: 100, t_end: 1.0, n: 512 }
    }
}

/// One randomly drawn problem pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusCase {
    pub gamma: f64,
    pub rhs: Rhs,
    pub u10: f64,
    pub u20: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusTrial {
    pub index: usize,
    pub gamma: f64,
    pub rhs: String,
    pub u10: f64,
    pub u20: f64,
    pub min_margin: f64,
    pub violations: usize,
    pub min_y: f64,
    pub sup_ratio: f64,
    pub lipschitz: f64,
    pub ml_envelope_ok: bool,
    pub volterra_residual: f64,
    pub underflow_nodes: usize,
    pub max_point_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusReport {
    pub seed: u64,
    pub comparison: ComparisonReport,
    pub min_y: f64,
    pub max_sup_ratio: f64,
    pub envelope_failures: usize,
    pub max_point_failures: usize,
    pub records: Vec<CorpusTrial>,
}

impl CorpusReport {
    pub fn passed(&self) -> bool {
        self.comparison.passed() && self.min_y > 0.0 && self.envelope_failures == 0 && self.max_point_failures == 0
    }
}

/// Range that corpus trajectories are clipped to inside the right-hand side.
const CLIP: f64 = 10.0;
/// Bound on the polynomial part over `[0, T] × [−CLIP, CLIP]`, and the
/// tighter bound used inside `exp`.
const POLY_BOUND: f64 = 20.0;
const EXP_POLY_BOUND: f64 = 2.0;

#[derive(Clone, Copy)]
enum Outer {
    Plain,
    Sin,
    Exp,
}

fn random_rhs(rng: &mut ChaCha8Rng, t_end: f64) -> Rhs {
    let outer = [Outer::Plain, Outer::Sin, Outer::Exp][rng.gen_range(0..3)];
    let clipped = Expr::call(
        Func::Min,
        vec![Expr::call(Func::Max, vec![Expr::var(Var::U), Expr::neg(Expr::num(CLIP))]), Expr::num(CLIP)],
    );
    let mut terms = Vec::new();
    for i in 0..=3i32 {
        for j in 0..=(3 - i) {
            if rng.gen_bool(0.5) {
                terms.push((i, j, rng.gen_range(-2.0..=2.0)));
            }
        }
    }
    if terms.is_empty() {
        terms.push((0, 1, rng.gen_range(-2.0..=2.0)));
    }
    let bound = match outer {
        Outer::Exp => EXP_POLY_BOUND,
        Outer::Plain | Outer::Sin => POLY_BOUND,
    };
    let size: f64 = terms.iter().map(|&(i, j, c): &(i32, i32, f64)| c.abs() * t_end.powi(i) * CLIP.powi(j)).sum();
    let scale = if size > bound { bound / size } else { 1.0 };
    let monomial = |i: i32, j: i32| {
        let pow = |base: Expr, k: i32| match k {
            0 => None,
            1 => Some(base),
            _ => Some(Expr::binary(BinOp::Pow, base, Expr::num(k as f64))),
        };
        match (pow(Expr::var(Var::T), i), pow(clipped.clone(), j)) {
            (Some(a), Some(b)) => Some(Expr::binary(BinOp::Mul, a, b)),
            (a, b) => a.or(b),
        }
    };
    let poly = terms
        .into_iter()
        .map(|(i, j, c)| {
            let c = c * scale;
            let coef = if c < 0.0 { Expr::neg(Expr::num(-c)) } else { Expr::num(c) };
            match monomial(i, j) {
                Some(m) => Expr::binary(BinOp::Mul, coef, m),
                None => coef,
            }
        })
        .reduce(|a, b| Expr::binary(BinOp::Add, a, b))
        .expect("nonempty");
    let composed = match outer {
        Outer::Plain => poly,
        Outer::Sin => Expr::call(Func::Sin, vec![poly]),
        Outer::Exp => Expr::call(Func::Exp, vec![poly]),
    };
    Rhs::Expr(composed)
}

/// Draws `trials` problems from the stream seeded by `seed`.
pub fn corpus(seed: u64, trials: usize, t_end: f64) -> Vec<CorpusCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let gamma = [0.3, 0.5, 0.8][rng.gen_range(0..3)];
            let rhs = random_rhs(&mut rng, t_end);
            let u10 = rng.gen_range(-2.0..=2.0);
            let gap = 10f64.powf(rng.gen_range(-3.0..=0.0));
            CorpusCase { gamma, rhs, u10, u20: u10 + gap }
        })
        .collect()
}

fn run_case(index: usize, case: &CorpusCase, opts: &CorpusOptions) -> Result<CorpusTrial, VerifyError> {
    let (lower, upper) = solve_pair(&case.rhs, case.gamma, case.u10, case.u20, opts.t_end, opts.n)?;
    let cmp = ComparisonReport::from_margins(upper.values.iter().zip(&lower.values).map(|(b, a)| b - a));
    let st = stability_of_pair(&case.rhs, case.gamma, opts.t_end, &lower, &upper)?;
    let mut max_point_ok = true;
    for path in [&lower, &upper] {
        let sampled = SampledFn::new(path.mesh.clone(), path.values.clone())?;
        max_point_ok &= max_point_check(case.gamma, &sampled, path.values[0])?.ok;
    }
    Ok(CorpusTrial {
        index,
        gamma: case.gamma,
        rhs: case.rhs.to_string(),
        u10: case.u10,
        u20: case.u20,
        min_margin: cmp.min_margin,
        violations: cmp.violations,
        min_y: st.min_y,
        sup_ratio: st.sup_ratio,
        lipschitz: st.lipschitz,
        ml_envelope_ok: st.ml_envelope_ok,
        volterra_residual: st.volterra_residual,
        underflow_nodes: st.underflow_nodes.len(),
        max_point_ok,
    })
}

/// Comparison, stability and maximum-point checks over a seeded random corpus.
/// Trials run in parallel; the report does not depend on their order.
pub fn comparison_corpus(seed: u64, opts: &CorpusOptions) -> Result<CorpusReport, VerifyError> {
    let cases = corpus(seed, opts.trials, opts.t_end);
    let indexed: Vec<(usize, &CorpusCase)> = cases.iter().enumerate().collect();
    let outcomes = par::map_slice(&indexed, |&(i, c)| {
        run_case(i, c, opts).map_err(|e| VerifyError::Trial { trial: i, source: Box::new(e) })
    });
    let records = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
    let comparison = records
        .iter()
        .map(|r| ComparisonReport { trials: 1, min_margin: r.min_margin, violations: r.violations })
        .reduce(ComparisonReport::merge)
        .unwrap_or(ComparisonReport { trials: 0, min_margin: f64::INFINITY, violations: 0 });
    Ok(CorpusReport {
        seed,
        comparison,
        min_y: records.iter().map(|r| r.min_y).fold(f64::INFINITY, f64::min),
        max_sup_ratio: records.iter().map(|r| r.sup_ratio).fold(0.0, f64::max),
        envelope_failures: records.iter().filter(|r| !r.ml_envelope_ok).count(),
        max_point_failures: records.iter().filter(|r| !r.max_point_ok).count(),
        records,
    })
}
