//! Special functions: Gamma, Beta, Mittag-Leffler, the power kernels
//! `t^β/Γ(1+β)` and the resolvent of the kernel `λ t^{γ−1}`.

mod gamma;
mod mittag_leffler;

use thiserror::Error;

pub use gamma::{beta_fn, gamma_fn, gamma_ratio, ln_gamma, reciprocal_gamma, GAMMA_MAX_ARG};
pub use mittag_leffler::{
    mittag_leffler, mittag_leffler_one, mittag_leffler_with_estimate, MlMethod, MlQuery, MlValue, ACCEPT_TOL, TARGET_TOL,
};

use crate::par;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpecialFnError {
    #[error("pole of the gamma function at {0}")]
    Pole(f64),
    #[error("gamma function overflows at argument {0}")]
    Overflow(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("Mittag-Leffler E_{{{}, {}}}({}) lost accuracy: best error estimate {achieved:e} (value {best})", query.alpha, query.beta, query.z)]
    AccuracyLoss { query: MlQuery, achieved: f64, best: f64 },
}

/// Evaluates `E_{α,β}` at many arguments; output order follows `zs`.
pub fn mittag_leffler_batch(alpha: f64, beta: f64, zs: &[f64]) -> Result<Vec<f64>, SpecialFnError> {
    par::map_slice(zs, |&z| mittag_leffler(MlQuery::new(alpha, beta, z))).into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ResolventQuery {
    pub lambda: f64,
    pub gamma: f64,
    pub t: f64,
}

/// Resolvent `r_λ(t) = −d/dt E_γ(−λΓ(γ)t^γ) = λΓ(γ) t^{γ−1} E_{γ,γ}(−λΓ(γ)t^γ)`
/// of the kernel `λ t^{γ−1}`.
pub fn resolvent(q: ResolventQuery) -> Result<f64, SpecialFnError> {
    let ResolventQuery { lambda, gamma, t } = q;
    if !(lambda > 0.0 && gamma > 0.0 && gamma < 1.0 && t > 0.0) || !lambda.is_finite() || !t.is_finite() {
        return Err(SpecialFnError::Domain(format!(
            "resolvent needs lambda > 0, gamma in (0,1), t > 0; got ({lambda}, {gamma}, {t})"
        )));
    }
    let c = lambda * gamma_fn(gamma)?;
    let e = mittag_leffler(MlQuery::new(gamma, gamma, -c * t.powf(gamma)))?;
    Ok(c * t.powf(gamma - 1.0) * e)
}

/// `θ(t) t^β / Γ(1+β)` for `β > −1`; `g_{1+γ}(t) = t^γ/Γ(1+γ)` is the
/// antiderivative convention used for the constant right-hand side.
pub fn power_kernel(beta: f64, t: f64) -> Result<f64, SpecialFnError> {
    if !(beta > -1.0) || !beta.is_finite() {
        return Err(SpecialFnError::Domain(format!(
            "power kernel with beta = {beta} <= -1 is a distribution, not a function"
        )));
    }
    if !(t >= 0.0) {
        return Err(SpecialFnError::Domain(format!("power kernel needs t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(if beta == 0.0 { 1.0 } else if beta > 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(t.powf(beta) * reciprocal_gamma(1.0 + beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_kernel_examples() {
        assert_relative_eq!(power_kernel(0.5, 1.0).unwrap(), std::f64::consts::FRAC_2_SQRT_PI, max_relative = 1e-13);
        assert_relative_eq!(power_kernel(1.5, 1.0).unwrap(), 0.752_252_778_063_675, max_relative = 1e-13);
        assert_eq!(power_kernel(1.0, 2.0).unwrap(), 2.0);
        assert_eq!(power_kernel(0.3, 0.0).unwrap(), 0.0);
        assert!(power_kernel(-1.0, 1.0).is_err());
        assert!(power_kernel(-2.5, 1.0).is_err());
    }

    #[test]
    fn resolvent_is_positive_and_singular_at_zero() {
        for &lambda in &[0.1, 1.0, 10.0] {
            for &gamma in &[0.2, 0.5, 0.9] {
                for &t in &[1e-6, 0.01, 1.0, 50.0] {
                    let r = resolvent(ResolventQuery { lambda, gamma, t }).unwrap();
                    assert!(r > 0.0, "r({lambda},{gamma},{t}) = {r}");
                }
            }
        }
        // λ=1, γ=1/2: r(t) ≈ t^{-1/2} as t → 0
        let t: f64 = 1e-10;
        let r = resolvent(ResolventQuery { lambda: 1.0, gamma: 0.5, t }).unwrap();
        assert_relative_eq!(r * t.sqrt(), 1.0, max_relative = 1e-4);
    }

    #[test]
    fn resolvent_rejects_bad_queries() {
        assert!(resolvent(ResolventQuery { lambda: 0.0, gamma: 0.5, t: 1.0 }).is_err());
        assert!(resolvent(ResolventQuery { lambda: 1.0, gamma: 1.0, t: 1.0 }).is_err());
        assert!(resolvent(ResolventQuery { lambda: 1.0, gamma: 0.5, t: 0.0 }).is_err());
    }
}
