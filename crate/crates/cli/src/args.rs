//! Command-line grammar. Every flag maps onto one [`RunConfig`] field.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "fracode", version, about = "Solvers and checks for scalar Caputo fractional ODEs D^γ u = f(t, u)")]
pub struct Cli {
    /// JSON config file; flags given on the command line override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve on a fixed mesh and write the path as CSV.
    Solve(SolveArgs),
    /// Evaluate the Mittag-Leffler function E_{α,β}(z).
    Ml(MlArgs),
    /// L1 Caputo derivative of a sampled function.
    Caputo(OperatorArgs),
    /// Riemann-Liouville fractional integral of a sampled function.
    Jint(OperatorArgs),
    /// Adaptive run into a finite-time blow-up of D^γ u = A u^p.
    Blowup(BlowupArgs),
    /// Adaptive run to extinction of D^γ u = A u^p with A < 0, p < 0.
    Extinction(ExtinctionArgs),
    /// Power-law fit of a sampled path.
    Asympt(AsymptArgs),
    /// Sub- and supersolution envelopes for sublinear growth.
    Envelope(EnvelopeArgs),
    /// Order-preservation checks.
    Verify {
        #[command(subcommand)]
        check: Option<VerifyCommand>,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Ordering of solution pairs: a seeded random corpus, or one problem with --rhs.
    Comparison(ComparisonArgs),
    /// Resolvent of the kernel λ t^{γ-1}.
    Resolvent(ResolventArgs),
    /// Dependence on the initial value.
    Stability(StabilityArgs),
}

pub trait Apply {
    fn apply(&self, cfg: &mut RunConfig);
}

macro_rules! set {
    ($cfg:ident, $self:ident; $($field:ident),*) => {
        $( if $self.$field.is_some() { $cfg.$field = $self.$field.clone(); } )*
    };
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Output file; `-` or absent writes to stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

impl Apply for OutArg {
    fn apply(&self, cfg: &mut RunConfig) {
        set!(cfg, self; out);
    }
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    /// Number of mesh steps.
    #[arg(long)]
    pub n: Option<usize>,
    /// Mesh kind: uniform, graded or geometric.
    #[arg(long)]
    pub mesh: Option<String>,
    /// Grading exponent r ≥ 1 for graded meshes (default 2/γ).
    #[arg(long)]
    pub grading: Option<f64>,
    /// Step ratio for geometric meshes.
    #[arg(long)]
    pub ratio: Option<f64>,
    /// First step of a capped geometric mesh.
    #[arg(long)]
    pub t_start: Option<f64>,
    /// Step cap; turns a geometric mesh into a capped one built from --t-start.
    #[arg(long)]
    pub max_step: Option<f64>,
}

impl Apply for MeshArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set!(cfg, self; n, mesh, grading, ratio, t_start, max_step);
    }
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long)]
    pub corrector_sweeps: Option<usize>,
    /// Stop instead of stepping through u ≤ 0 when f needs u > 0.
    #[arg(long, value_name = "BOOL")]
    pub positivity_guard: Option<bool>,
    /// |u| beyond which the run stops as a suspected blow-up.
    #[arg(long)]
    pub u_max: Option<f64>,
}

impl Apply for SolverArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set!(cfg, self; corrector_sweeps, positivity_guard, u_max);
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Fractional order in (0, 1).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Right-hand side f(t, u), e.g. "-1*u" or "sin(t) - u^3".
    #[arg(long, allow_hyphen_values = true)]
    pub rhs: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub u0: Option<f64>,
    /// Horizon.
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    #[command(flatten)]
    pub mesh: MeshArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub out: OutArg,
}

impl Apply for SolveArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set!(cfg, self; gamma, rhs, u0, t_end);
        self.mesh.apply(cfg);
        self.solver.apply(cfg);
        self.out.apply(cfg);
    }
}

#[derive(Debug, Args)]
pub struct MlArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<f64>,
}

impl Apply for MlArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set!(cfg, self; alpha, beta, z);
    }
}

#[derive(Debug, Args)]
pub struct OperatorArgs {
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Input CSV with header `t,u`; the first t must be 0.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Initial value for the Caputo derivative (default: the first sample).
    #[arg(long, allow_hyphen_values = true)]
    pub u0: Option<f64>,
    #[command(flatten)]
    pub out: OutArg,
}

impl Apply for OperatorArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set!(cfg, self; gamma, input, u0);
        self.out.apply(cfg);
    }
}

#[derive(Debug, Args)]
pub struct PowerLawArgs {
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Coefficient A of A u^p.
    #[arg(long = "A", allow_hyphen_values = true)]
    pub a_coef: Option<f64>,
    /// Exponent p of A u^p.
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<f64>,
    #[arg(long)]
    pub u0: Option<f64>,
}

impl Apply for PowerLawArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set!(cfg, self; gamma, a_coef, p, u0);
    }
}

#[derive(Debug, Args)]
pub struct BlowupArgs {
    #[command(flatten)]
    pub law: PowerLawArgs,
    /// Horizon that sets the base step (base step = T / base_steps).
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub u_max: Option<f64>,
    #[arg(long)]
    pub refine_levels: Option<usize>,
    #[arg(long)]
    pub base_steps: Option<usize>,
    /// Step cap as a fraction of the estimated remaining time.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub corrector_sweeps: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[command(flatten)]
    pub out: OutArg,
}

impl Apply for BlowupArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        self.law.apply(cfg);
        set!(cfg, self; t_end, u_max, refine_levels, base_steps, theta, corrector_sweeps, max_steps);
        self.out.apply(cfg);
    }
}

#[derive(Debug, Args)]
pub struct ExtinctionArgs {
    #[command(flatten)]
    pub law: PowerLawArgs,
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    /// The run stops once u < eps_touch·u0.
    #[arg(long)]
    pub eps_touch: Option<f64>,
    #[arg(long)]
    pub base_steps: Option<usize>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub corrector_sweeps: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[command(flatten)]
    pub out: OutArg,
}

impl Apply for ExtinctionArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        self.law.apply(cfg);
        set!(cfg, self; t_end, eps_touch, base_steps, theta, corrector_sweeps, max_steps);
        self.out.apply(cfg);
    }
}

#[derive(Debug, Args)]
pub struct AsymptArgs {
    /// Input CSV with header `t,u`.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Fit window start (default: a tenth of the last time).
    #[arg(long)]
    pub window_lo: Option<f64>,
    /// Fit window end (default: the last time).
    #[arg(long)]
    pub window_hi: Option<f64>,
    /// Blow-up time; fits u ≈ C (T_b − t)^{−k} instead of u ≈ C t^k.
    #[arg(long)]
    pub tb: Option<f64>,
    #[command(flatten)]
    pub out: OutArg,
}

impl Apply for AsymptArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set!(cfg, self; input, window_lo, window_hi, tb);
        self.out.apply(cfg);
    }
}

#[derive(Debug, Args)]
pub struct EnvelopeArgs {
    #[command(flatten)]
    pub law: PowerLawArgs,
    /// Envelopes are sampled on [0, T].
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[command(flatten)]
    pub out: OutArg,
}

impl Apply for EnvelopeArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        self.law.apply(cfg);
        set!(cfg, self; t_end, samples);
        self.out.apply(cfg);
    }
}

#[derive(Debug, Args)]
pub struct ComparisonArgs {
    /// Corpus seed (falls back to FRACODE_SEED, then the shipped seed).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Check this right-hand side instead of the corpus.
    #[arg(long, allow_hyphen_values = true)]
    pub rhs: Option<String>,
    /// With --rhs: compare f against f + delta from the same u0.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub u0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub u10: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub u20: Option<f64>,
    #[command(flatten)]
    pub out: OutArg,
}

impl Apply for ComparisonArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set!(cfg, self; seed, trials, t_end, n, rhs, delta, gamma, u0, u10, u20);
        self.out.apply(cfg);
    }
}

#[derive(Debug, Args)]
pub struct ResolventArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Pass threshold for the residual and the integral identity.
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub out: OutArg,
}

impl Apply for ResolventArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set!(cfg, self; lambda, gamma, t_end, n, tol);
        self.out.apply(cfg);
    }
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub rhs: Option<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub u10: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub u20: Option<f64>,
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub out: OutArg,
}

impl Apply for StabilityArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set!(cfg, self; rhs, gamma, u10, u20, t_end, n);
        self.out.apply(cfg);
    }
}

impl Command {
    /// The flag values, tagged with the subcommand and `verify` check names.
    pub fn to_config(&self) -> RunConfig {
        let (name, check, args): (&str, Option<&str>, Option<&dyn Apply>) = match self {
            Command::Solve(a) => ("solve", None, Some(a)),
            Command::Ml(a) => ("ml", None, Some(a)),
            Command::Caputo(a) => ("caputo", None, Some(a)),
            Command::Jint(a) => ("jint", None, Some(a)),
            Command::Blowup(a) => ("blowup", None, Some(a)),
            Command::Extinction(a) => ("extinction", None, Some(a)),
            Command::Asympt(a) => ("asympt", None, Some(a)),
            Command::Envelope(a) => ("envelope", None, Some(a)),
            Command::Verify { check: None } => ("verify", None, None),
            Command::Verify { check: Some(VerifyCommand::Comparison(a)) } => ("verify", Some("comparison"), Some(a)),
            Command::Verify { check: Some(VerifyCommand::Resolvent(a)) } => ("verify", Some("resolvent"), Some(a)),
            Command::Verify { check: Some(VerifyCommand::Stability(a)) } => ("verify", Some("stability"), Some(a)),
        };
        let mut cfg = RunConfig::default();
        if let Some(a) = args {
            a.apply(&mut cfg);
        }
        cfg.subcommand = Some(name.to_string());
        cfg.check = check.map(str::to_string);
        cfg
    }
}
