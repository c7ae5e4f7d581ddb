//! Gamma, log-gamma, reciprocal gamma and Beta on the real line.
//!
//! Gamma uses the Lanczos approximation with `g = 7` and nine coefficients,
//! with the reflection formula below one half.

use std::f64::consts::PI;

use super::SpecialFnError;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Largest argument for which `Γ(x)` is representable as an `f64`.
pub const GAMMA_MAX_ARG: f64 = 171.624_376_956_302_7;

const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_5;
const LN_SQRT_TWO_PI: f64 = 0.918_938_533_204_672_8;

fn lanczos_sum(x: f64) -> f64 {
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    acc
}

/// `sin(πx)` with exact argument reduction, so zeros at the integers are exact.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let r = x % 2.0;
    let r = if r < 0.0 { r + 2.0 } else { r };
    // r in [0, 2)
    let (s, sign) = if r < 1.0 { (r, 1.0) } else { (r - 1.0, -1.0) };
    let s = if s > 0.5 { 1.0 - s } else { s };
    if s == 0.0 {
        return 0.0;
    }
    sign * (PI * s).sin()
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// `Γ(x)` for real `x`.
///
/// Errors with [`SpecialFnError::Pole`] at `0, −1, −2, …` and with
/// [`SpecialFnError::Overflow`] above [`GAMMA_MAX_ARG`].
pub fn gamma_fn(x: f64) -> Result<f64, SpecialFnError> {
    if !x.is_finite() {
        return Err(SpecialFnError::Domain(format!("gamma of non-finite argument {x}")));
    }
    if is_nonpositive_integer(x) {
        return Err(SpecialFnError::Pole(x));
    }
    if x > GAMMA_MAX_ARG {
        return Err(SpecialFnError::Overflow(x));
    }
    if x < 0.5 {
        let s = sin_pi(x);
        let g = gamma_pos(1.0 - x);
        if !g.is_finite() {
            // Γ(1 − x) overflowed: the reflected value underflows toward zero.
            return Ok(0.0);
        }
        return Ok(PI / (s * g));
    }
    if x == x.floor() && x <= 23.0 {
        // exact factorials
        let mut acc = 1.0;
        let mut k = 2.0;
        while k < x {
            acc *= k;
            k += 1.0;
        }
        return Ok(acc);
    }
    Ok(gamma_pos(x))
}

/// Lanczos evaluation for `x >= 0.5`.
fn gamma_pos(x: f64) -> f64 {
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    let a = lanczos_sum(xm);
    // split the power so t^(xm + 1/2) does not overflow before e^(-t) is applied
    let half = t.powf(0.5 * (xm + 0.5));
    SQRT_TWO_PI * half * (half * (-t).exp()) * a
}

/// `ln |Γ(x)|` for real `x` away from the poles.
pub fn ln_gamma(x: f64) -> Result<f64, SpecialFnError> {
    if !x.is_finite() {
        return Err(SpecialFnError::Domain(format!("ln_gamma of non-finite argument {x}")));
    }
    if is_nonpositive_integer(x) {
        return Err(SpecialFnError::Pole(x));
    }
    if x < 0.5 {
        let s = sin_pi(x).abs();
        return Ok(PI.ln() - s.ln() - ln_gamma_pos(1.0 - x));
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos(x: f64) -> f64 {
    if x < 15.0 {
        return gamma_pos(x).ln();
    }
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    LN_SQRT_TWO_PI + (xm + 0.5) * t.ln() - t + lanczos_sum(xm).ln()
}

/// `1/Γ(x)`, a total function: zero at the poles and for arguments so large
/// that `Γ` overflows.
pub fn reciprocal_gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x > GAMMA_MAX_ARG {
        return (-ln_gamma_pos(x)).exp();
    }
    if x < -GAMMA_MAX_ARG {
        // 1/Γ(x) = sin(πx) Γ(1−x) / π, which may overflow; report it as is.
        return sin_pi(x) * (ln_gamma_pos(1.0 - x)).exp() / PI;
    }
    match gamma_fn(x) {
        Ok(g) => 1.0 / g,
        Err(_) => 0.0,
    }
}

/// Beta function `B(a, b) = Γ(a)Γ(b)/Γ(a+b)` for positive arguments.
pub fn beta_fn(a: f64, b: f64) -> Result<f64, SpecialFnError> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(SpecialFnError::Domain(format!("beta({a}, {b}) needs positive finite arguments")));
    }
    if a + b < 150.0 {
        return Ok(gamma_fn(a)? * (gamma_fn(b)? / gamma_fn(a + b)?));
    }
    let ln_b = ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?;
    let v = ln_b.exp();
    if !v.is_finite() {
        return Err(SpecialFnError::Overflow(ln_b));
    }
    Ok(v)
}

/// `Γ(x)/Γ(x + d)` via log-gamma, for ratios whose factors overflow separately.
pub fn gamma_ratio(x: f64, d: f64) -> Result<f64, SpecialFnError> {
    if x > 0.0 && x + d > 0.0 && x + d < 150.0 && x < 150.0 {
        return Ok(gamma_fn(x)? / gamma_fn(x + d)?);
    }
    let sign = gamma_sign(x) * gamma_sign(x + d);
    Ok(sign * (ln_gamma(x)? - ln_gamma(x + d)?).exp())
}

fn gamma_sign(x: f64) -> f64 {
    if x > 0.0 || (x.floor() as i64) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn factorials_are_exact() {
        assert_eq!(gamma_fn(5.0).unwrap(), 24.0);
        assert_eq!(gamma_fn(1.0).unwrap(), 1.0);
        assert_eq!(gamma_fn(2.0).unwrap(), 1.0);
        assert_eq!(gamma_fn(11.0).unwrap(), 3_628_800.0);
    }

    #[test]
    fn half_integer_values() {
        let sqrt_pi = PI.sqrt();
        assert_relative_eq!(gamma_fn(0.5).unwrap(), 1.772_453_850_905_516, max_relative = 1e-14);
        assert_relative_eq!(gamma_fn(1.5).unwrap(), 0.886_226_925_452_758, max_relative = 1e-14);
        assert_relative_eq!(gamma_fn(-0.5).unwrap(), -2.0 * sqrt_pi, max_relative = 1e-14);
        assert_relative_eq!(gamma_fn(-1.5).unwrap(), 4.0 * sqrt_pi / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn poles_and_overflow() {
        for x in [0.0, -1.0, -2.0, -17.0] {
            assert!(matches!(gamma_fn(x), Err(SpecialFnError::Pole(_))));
        }
        assert!(matches!(gamma_fn(171.7), Err(SpecialFnError::Overflow(_))));
        assert!(gamma_fn(171.6).unwrap().is_finite());
        assert_eq!(reciprocal_gamma(-3.0), 0.0);
        assert_eq!(reciprocal_gamma(0.0), 0.0);
    }

    #[test]
    fn large_arguments_match_log_gamma() {
        // 170! from its logarithm
        let g = gamma_fn(171.0).unwrap();
        assert_relative_eq!(g.ln(), ln_gamma(171.0).unwrap(), max_relative = 1e-14);
        assert_relative_eq!(gamma_fn(150.5).unwrap().ln(), ln_gamma(150.5).unwrap(), max_relative = 1e-14);
    }

    #[test]
    fn small_arguments() {
        // Γ(x) ~ 1/x − γ_E near zero
        let x = 1e-3;
        assert_relative_eq!(gamma_fn(x).unwrap(), 999.423_772_484_595_5, max_relative = 1e-13);
    }

    #[test]
    fn beta_values() {
        assert_relative_eq!(beta_fn(1.0, 1.0).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(beta_fn(0.5, 0.5).unwrap(), PI, max_relative = 1e-13);
        assert_relative_eq!(beta_fn(2.0, 3.0).unwrap(), 1.0 / 12.0, max_relative = 1e-14);
        assert_relative_eq!(beta_fn(200.0, 0.5).unwrap(), 0.125_409_770_267_378_16, max_relative = 1e-12);
        assert!(beta_fn(-1.0, 2.0).is_err());
    }

    #[test]
    fn ratio_matches_direct_quotient() {
        assert_relative_eq!(gamma_ratio(2.0, 0.5).unwrap(), 1.0 / gamma_fn(2.5).unwrap(), max_relative = 1e-14);
        let big = gamma_ratio(1000.0, 0.5).unwrap();
        // Γ(x)/Γ(x+½) ≈ x^{-1/2}(1 + 1/(8x))
        assert_relative_eq!(big, 1000f64.powf(-0.5) * (1.0 + 1.0 / 8000.0), max_relative = 1e-6);
    }
}
