//! Run configuration: JSON files, flag overrides and the defaults table.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Every default the front end applies, in one place.
pub mod defaults {
    /// Mesh steps for `solve` and the verification checks.
    pub const N: usize = 1024;
    /// Horizon for `solve`, `stability` and `resolvent`.
    pub const T: f64 = 1.0;
    /// Mesh kind; graded meshes use exponent `2/γ` unless `grading` is set.
    pub const MESH: &str = "graded";
    /// Ratio for geometric meshes.
    pub const RATIO: f64 = 1.05;
    pub const CORRECTOR_SWEEPS: usize = 2;
    pub const POSITIVITY_GUARD: bool = true;
    /// `|u|` beyond which `solve` reports suspected blow-up.
    pub const U_MAX: f64 = 1e8;
    /// Mittag-Leffler second parameter.
    pub const BETA: f64 = 1.0;
    /// Corpus size for `verify comparison`.
    pub const TRIALS: usize = 100;
    /// Corpus mesh steps.
    pub const CORPUS_N: usize = 512;
    /// Pass threshold for `verify resolvent` (residual and integral identity).
    pub const RESOLVENT_TOL: f64 = 1e-3;
    pub const LAMBDA: f64 = 1.0;
    pub const GAMMA_RESOLVENT: f64 = 0.5;
    pub const RESOLVENT_N: usize = 4096;
    /// Sample count for `envelope` output.
    pub const ENVELOPE_SAMPLES: usize = 100;
    /// Environment variable consulted when no seed is given.
    pub const SEED_ENV: &str = "FRACODE_SEED";
}

/// All settings a run can take. Unset fields fall back to [`defaults`] or
/// are required by the chosen subcommand. The effective configuration, with
/// defaults filled in, is echoed into every JSON report and can be fed back
/// through `--config`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<String>,
    /// `comparison`, `resolvent` or `stability` for `verify`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<String>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u0: Option<f64>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub a_coef: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grading: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrector_sweeps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positivity_guard: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refine_levels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_touch: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tb: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u10: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u20: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($dst:expr, $src:expr; $($field:ident),* $(,)?) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )*
    };
}

impl RunConfig {
    /// Copies every field set in `flags` over `self`.
    pub fn overlay(&mut self, flags: &RunConfig) {
        overlay!(self, flags;
            subcommand, check, gamma, rhs, u0, t_end, a_coef, p, n, mesh, grading, ratio, t_start, max_step,
            corrector_sweeps, positivity_guard, u_max, refine_levels, base_steps, theta, eps_touch, max_steps,
            alpha, beta, z, window_lo, window_hi, tb, samples, lambda, seed, trials, u10, u20, delta, tol,
            input, out,
        );
    }
}

/// Reads a strict JSON config. Syntax errors carry line and column; unknown
/// keys are named.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// A required setting, or a usage error naming its flag.
pub fn required<T: Clone>(value: &Option<T>, flag: &str) -> Result<T, CliError> {
    value.clone().ok_or_else(|| CliError::missing(flag))
}

/// Seed from the config, else `FRACODE_SEED`, else the shipped default.
pub fn resolve_seed(cfg: &RunConfig, fallback: u64) -> Result<u64, CliError> {
    if let Some(s) = cfg.seed {
        return Ok(s);
    }
    match std::env::var(defaults::SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("{} must be an unsigned integer, got {v:?}", defaults::SEED_ENV))),
        Err(_) => Ok(fallback),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_named() {
        let err = serde_json::from_str::<RunConfig>(r#"{"subcommand":"solve","gama":0.5}"#).unwrap_err();
        assert!(err.to_string().contains("gama"), "{err}");
    }

    #[test]
    fn flags_win_over_file_values() {
        let mut cfg: RunConfig = serde_json::from_str(r#"{"n":16,"gamma":0.5}"#).unwrap();
        cfg.overlay(&RunConfig { n: Some(32), ..Default::default() });
        assert_eq!((cfg.n, cfg.gamma), (Some(32), Some(0.5)));
    }

    #[test]
    fn echo_parses_back() {
        let cfg = RunConfig { subcommand: Some("solve".into()), t_end: Some(2.0), rhs: Some("-u".into()), ..Default::default() };
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"T\":2.0"));
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }
}
