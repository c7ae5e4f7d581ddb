//! One handler per subcommand. Each fills its defaults into the config
//! before running, so the echoed config reproduces the run exactly.

use std::io::Write;
use std::path::{Path, PathBuf};

use fracode_core::asymptotics::{eval_envelope, fit_power, supersolution_params, AsymptoticsError, Envelope, FitMode};
use fracode_core::expr::{ParseError, Rhs};
use fracode_core::fracops::{caputo_l1, frac_integral, FracOpsError, Mesh, SampledFn};
use fracode_core::solver::{
    detect_blowup, detect_extinction, solve, BlowupOptions, ExtinctionOptions, FracProblem, SolveOptions, SolveStatus,
    SolverError,
};
use fracode_core::specfun::{mittag_leffler, MlQuery, SpecialFnError};
use fracode_core::verify::{self, CorpusOptions, VerifyError};
use serde::Serialize;

use crate::config::{defaults, required, resolve_seed, RunConfig};
use crate::error::CliError;
use crate::io::{emit, read_series, report_json, series_csv};

pub fn run(cfg: &mut RunConfig) -> Result<(), CliError> {
    match cfg.subcommand.as_deref() {
        Some("solve") => solve_cmd(cfg),
        Some("ml") => ml_cmd(cfg),
        Some("caputo") => operator_cmd(cfg, true),
        Some("jint") => operator_cmd(cfg, false),
        Some("blowup") => blowup_cmd(cfg),
        Some("extinction") => extinction_cmd(cfg),
        Some("asympt") => asympt_cmd(cfg),
        Some("envelope") => envelope_cmd(cfg),
        Some("verify") => match cfg.check.as_deref() {
            Some("comparison") => comparison_cmd(cfg),
            Some("resolvent") => resolvent_cmd(cfg),
            Some("stability") => stability_cmd(cfg),
            Some(other) => Err(CliError::usage(format!(
                "unknown verify check {other:?}; expected comparison, resolvent or stability"
            ))),
            None => Err(CliError::usage("verify needs a check: comparison, resolvent or stability")),
        },
        Some(other) => Err(CliError::usage(format!("unknown subcommand {other:?}"))),
        None => Err(CliError::usage("no subcommand given on the command line or in the config")),
    }
}

fn or_default<T: Clone>(slot: &mut Option<T>, default: T) -> T {
    slot.get_or_insert(default).clone()
}

fn parse_rhs(src: &str, flag: &str) -> Result<Rhs, CliError> {
    Rhs::parse(src).map_err(|e: ParseError| CliError::usage(format!("--{flag} {src:?}: {e}")))
}

fn solver_err(e: SolverError) -> CliError {
    match e {
        SolverError::InvalidProblem(_) | SolverError::WrongRegime(_) => CliError::usage(e.to_string()),
        _ => CliError::numerical(e),
    }
}

fn ops_err(e: FracOpsError) -> CliError {
    CliError::usage(e.to_string())
}

fn special_err(e: SpecialFnError) -> CliError {
    match e {
        SpecialFnError::Domain(_) => CliError::usage(e.to_string()),
        _ => CliError::numerical(e),
    }
}

fn asympt_err(e: AsymptoticsError) -> CliError {
    match e {
        AsymptoticsError::Domain(_) | AsymptoticsError::InsufficientWindow { .. } => CliError::usage(e.to_string()),
        _ => CliError::numerical(e),
    }
}

fn verify_err(e: VerifyError) -> CliError {
    match e {
        VerifyError::Invalid(_) => CliError::usage(e.to_string()),
        VerifyError::Solver(s) => solver_err(s),
        VerifyError::Operator(o) => ops_err(o),
        _ => CliError::numerical(e),
    }
}

fn out_path(cfg: &RunConfig) -> Option<&Path> {
    cfg.out.as_deref()
}

fn emit_report<R: Serialize>(cfg: &RunConfig, result: R) -> Result<(), CliError> {
    emit(out_path(cfg), &report_json(cfg, result))
}

fn build_mesh(cfg: &mut RunConfig, gamma: f64, t_end: f64) -> Result<Mesh, CliError> {
    let kind = or_default(&mut cfg.mesh, defaults::MESH.to_string());
    let mesh = match kind.as_str() {
        "uniform" => Mesh::uniform(t_end, or_default(&mut cfg.n, defaults::N)),
        "graded" => {
            let r = or_default(&mut cfg.grading, (2.0 / gamma).max(1.0));
            Mesh::graded(t_end, or_default(&mut cfg.n, defaults::N), r)
        }
        "geometric" => {
            let ratio = or_default(&mut cfg.ratio, defaults::RATIO);
            match (cfg.max_step, cfg.t_start) {
                (Some(cap), Some(h0)) => Mesh::geometric_capped(t_end, h0, ratio, cap),
                (Some(_), None) => return Err(CliError::usage("--max-step needs --t-start")),
                _ => Mesh::geometric(t_end, or_default(&mut cfg.n, defaults::N), ratio),
            }
        }
        other => return Err(CliError::usage(format!("unknown mesh {other:?}; expected uniform, graded or geometric"))),
    };
    mesh.map_err(ops_err)
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    status: SolveStatus,
    message: Option<&'a str>,
    rows: usize,
    t_last: f64,
    u_last: f64,
    corrector_iterations: usize,
}

/// Writes the path as CSV. The JSON summary goes to stdout, or to stderr
/// when the CSV itself goes to stdout. Early stops from blow-up or
/// extinction exit 0 with the status in the summary; evaluation failures
/// exit 3 after writing the computed prefix.
fn solve_cmd(cfg: &mut RunConfig) -> Result<(), CliError> {
    let gamma = required(&cfg.gamma, "gamma")?;
    let rhs_src = required(&cfg.rhs, "rhs")?;
    let u0 = required(&cfg.u0, "u0")?;
    let t_end = or_default(&mut cfg.t_end, defaults::T);
    let rhs = parse_rhs(&rhs_src, "rhs")?;
    let prob = FracProblem::new(gamma, rhs, u0, t_end).map_err(solver_err)?;
    let mesh = build_mesh(cfg, gamma, t_end)?;
    let opts = SolveOptions {
        corrector_sweeps: or_default(&mut cfg.corrector_sweeps, defaults::CORRECTOR_SWEEPS),
        positivity_guard: or_default(&mut cfg.positivity_guard, defaults::POSITIVITY_GUARD),
        u_max: or_default(&mut cfg.u_max, defaults::U_MAX),
    };
    let path = solve(&prob, &mesh, &opts);
    emit(out_path(cfg), &series_csv(path.nodes(), &path.values))?;

    let (t_last, u_last) = path.last();
    let summary = SolveSummary {
        status: path.status,
        message: path.message.as_deref(),
        rows: path.len(),
        t_last,
        u_last,
        corrector_iterations: path.corrector_iterations,
    };
    let bytes = report_json(cfg, &summary);
    let to_stdout = matches!(out_path(cfg), Some(p) if p != Path::new("-"));
    let written =
        if to_stdout { std::io::stdout().write_all(&bytes) } else { std::io::stderr().write_all(&bytes) };
    written.map_err(|e| CliError::Io(format!("cannot write summary: {e}")))?;
    if path.status == SolveStatus::EvaluationFailure {
        return Err(CliError::Numerical(path.message.unwrap_or_else(|| "right-hand side evaluation failed".into())));
    }
    Ok(())
}

fn ml_cmd(cfg: &mut RunConfig) -> Result<(), CliError> {
    let alpha = required(&cfg.alpha, "alpha")?;
    let z = required(&cfg.z, "z")?;
    let beta = or_default(&mut cfg.beta, defaults::BETA);
    let v = mittag_leffler(MlQuery::new(alpha, beta, z)).map_err(special_err)?;
    emit(None, format!("{v}\n").as_bytes())
}

fn read_sampled(path: &Path) -> Result<SampledFn, CliError> {
    let (t, u) = read_series(path)?;
    let mesh = Mesh::from_nodes(t).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    SampledFn::new(mesh, u).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn operator_cmd(cfg: &mut RunConfig, derivative: bool) -> Result<(), CliError> {
    let gamma = required(&cfg.gamma, "gamma")?;
    let input: PathBuf = required(&cfg.input, "input")?;
    let g = read_sampled(&input)?;
    let out = if derivative {
        let u0 = or_default(&mut cfg.u0, g.values()[0]);
        caputo_l1(gamma, &g, u0)
    } else {
        frac_integral(gamma, &g)
    }
    .map_err(ops_err)?;
    emit(out_path(cfg), &series_csv(out.nodes(), out.values()))
}

fn blowup_cmd(cfg: &mut RunConfig) -> Result<(), CliError> {
    let (gamma, a, p, u0) = power_law(cfg)?;
    let t_end = or_default(&mut cfg.t_end, defaults::T);
    let d = BlowupOptions::default();
    let opts = BlowupOptions {
        u_max: or_default(&mut cfg.u_max, d.u_max),
        refine_levels: or_default(&mut cfg.refine_levels, d.refine_levels),
        base_steps: or_default(&mut cfg.base_steps, d.base_steps),
        theta: or_default(&mut cfg.theta, d.theta),
        corrector_sweeps: or_default(&mut cfg.corrector_sweeps, d.corrector_sweeps),
        max_steps: or_default(&mut cfg.max_steps, d.max_steps),
    };
    let prob = FracProblem::power_law(gamma, a, p, u0, t_end).map_err(solver_err)?;
    let report = detect_blowup(&prob, &opts).map_err(solver_err)?;
    emit_report(cfg, report)
}

fn extinction_cmd(cfg: &mut RunConfig) -> Result<(), CliError> {
    let (gamma, a, p, u0) = power_law(cfg)?;
    let t_end = or_default(&mut cfg.t_end, defaults::T);
    let d = ExtinctionOptions::default();
    let opts = ExtinctionOptions {
        eps_touch: or_default(&mut cfg.eps_touch, d.eps_touch),
        base_steps: or_default(&mut cfg.base_steps, d.base_steps),
        theta: or_default(&mut cfg.theta, d.theta),
        corrector_sweeps: or_default(&mut cfg.corrector_sweeps, d.corrector_sweeps),
        max_steps: or_default(&mut cfg.max_steps, d.max_steps),
    };
    let prob = FracProblem::power_law(gamma, a, p, u0, t_end).map_err(solver_err)?;
    let report = detect_extinction(&prob, &opts).map_err(solver_err)?;
    emit_report(cfg, report)
}

fn power_law(cfg: &RunConfig) -> Result<(f64, f64, f64, f64), CliError> {
    Ok((required(&cfg.gamma, "gamma")?, required(&cfg.a_coef, "A")?, required(&cfg.p, "p")?, required(&cfg.u0, "u0")?))
}

fn asympt_cmd(cfg: &mut RunConfig) -> Result<(), CliError> {
    let input: PathBuf = required(&cfg.input, "input")?;
    let (t, u) = read_series(&input)?;
    let t_last = *t.last().ok_or_else(|| CliError::usage(format!("{} holds no samples", input.display())))?;
    let lo = or_default(&mut cfg.window_lo, t_last / 10.0);
    let hi = or_default(&mut cfg.window_hi, t_last);
    let mode = match cfg.tb {
        Some(tb) => FitMode::BlowUp { tb },
        None => FitMode::Growth,
    };
    let fit = fit_power(&t, &u, Some((lo, hi)), mode).map_err(asympt_err)?;
    emit_report(cfg, fit)
}

#[derive(Serialize)]
struct EnvelopeSample {
    t: f64,
    sub: f64,
    #[serde(rename = "super")]
    sup: f64,
}

#[derive(Serialize)]
struct EnvelopeOutput {
    params: fracode_core::asymptotics::EnvelopeParams,
    samples: Vec<EnvelopeSample>,
}

fn envelope_cmd(cfg: &mut RunConfig) -> Result<(), CliError> {
    let (gamma, a, p, u0) = power_law(cfg)?;
    let t_end = or_default(&mut cfg.t_end, defaults::T);
    let n = or_default(&mut cfg.samples, defaults::ENVELOPE_SAMPLES);
    if n < 2 || !(t_end > 0.0) {
        return Err(CliError::usage("envelope needs --samples >= 2 and --T > 0"));
    }
    let params = supersolution_params(a, p, gamma, u0).map_err(asympt_err)?;
    let samples = (0..n)
        .map(|i| {
            let t = t_end * i as f64 / (n - 1) as f64;
            EnvelopeSample { t, sub: eval_envelope(&params, Envelope::Sub, t), sup: eval_envelope(&params, Envelope::Super, t) }
        })
        .collect();
    emit_report(cfg, EnvelopeOutput { params, samples })
}

fn verdict(passed: bool, what: &str) -> Result<(), CliError> {
    if passed {
        Ok(())
    } else {
        Err(CliError::Verification(what.to_string()))
    }
}

/// Without `--rhs`, runs the seeded corpus. With `--rhs` and `--delta`,
/// checks f against f + delta from one `u0`; with `--rhs` alone, checks the
/// pair started from `u10 ≤ u20`.
fn comparison_cmd(cfg: &mut RunConfig) -> Result<(), CliError> {
    let t_end = or_default(&mut cfg.t_end, defaults::T);
    match cfg.rhs.clone() {
        Some(src) => {
            let f = parse_rhs(&src, "rhs")?;
            let gamma = required(&cfg.gamma, "gamma")?;
            let n = or_default(&mut cfg.n, defaults::N);
            let report = match cfg.delta.clone() {
                Some(d) => {
                    let delta = parse_rhs(&d, "delta")?;
                    let u0 = required(&cfg.u0, "u0")?;
                    verify::check_subsupersolution(&f, &delta, gamma, u0, t_end, n)
                }
                None => {
                    let (u10, u20) = (required(&cfg.u10, "u10")?, required(&cfg.u20, "u20")?);
                    verify::check_comparison(&f, gamma, u10, u20, t_end, n)
                }
            }
            .map_err(verify_err)?;
            emit_report(cfg, report)?;
            verdict(report.passed(), &format!("{} ordering violations", report.violations))
        }
        None => {
            let seed = resolve_seed(cfg, verify::DEFAULT_SEED)?;
            cfg.seed = Some(seed);
            let opts = CorpusOptions {
                trials: or_default(&mut cfg.trials, defaults::TRIALS),
                t_end,
                n: or_default(&mut cfg.n, defaults::CORPUS_N),
            };
            let report = verify::comparison_corpus(seed, &opts).map_err(verify_err)?;
            emit_report(cfg, &report)?;
            verdict(
                report.passed(),
                &format!(
                    "corpus seed {seed}: {} ordering violations, min y {:e}, {} envelope failures, {} max-point failures",
                    report.comparison.violations, report.min_y, report.envelope_failures, report.max_point_failures
                ),
            )
        }
    }
}

#[derive(Serialize)]
struct ResolventOutput {
    #[serde(flatten)]
    check: verify::ResolventCheck,
    tol: f64,
    passed: bool,
}

fn resolvent_cmd(cfg: &mut RunConfig) -> Result<(), CliError> {
    let lambda = or_default(&mut cfg.lambda, defaults::LAMBDA);
    let gamma = or_default(&mut cfg.gamma, defaults::GAMMA_RESOLVENT);
    let t_end = or_default(&mut cfg.t_end, defaults::T);
    let n = or_default(&mut cfg.n, defaults::RESOLVENT_N);
    let tol = or_default(&mut cfg.tol, defaults::RESOLVENT_TOL);
    let check = verify::check_resolvent(lambda, gamma, t_end, n).map_err(verify_err)?;
    let passed = check.max_residual <= tol && check.identity_error <= tol && check.min_r > 0.0;
    emit_report(cfg, ResolventOutput { check, tol, passed })?;
    verdict(
        passed,
        &format!(
            "resolvent residual {:e}, identity error {:e} (tolerance {tol:e}), min r {:e}",
            check.max_residual, check.identity_error, check.min_r
        ),
    )
}

fn stability_cmd(cfg: &mut RunConfig) -> Result<(), CliError> {
    let f = parse_rhs(&required(&cfg.rhs, "rhs")?, "rhs")?;
    let gamma = required(&cfg.gamma, "gamma")?;
    let (u10, u20) = (required(&cfg.u10, "u10")?, required(&cfg.u20, "u20")?);
    let t_end = or_default(&mut cfg.t_end, defaults::T);
    let n = or_default(&mut cfg.n, defaults::N);
    let report = verify::stability_experiment(&f, gamma, u10, u20, t_end, n).map_err(verify_err)?;
    emit_report(cfg, &report)?;
    verdict(
        report.passed(),
        &format!("min y {:e}, Mittag-Leffler envelope ok: {}", report.min_y, report.ml_envelope_ok),
    )
}
