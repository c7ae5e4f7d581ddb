use approx::assert_relative_eq;
use fracode_core::specfun::*;
use proptest::prelude::*;
use statrs::function::erf::erfc;

#[test]
fn beta_examples() {
    assert_relative_eq!(beta_fn(0.5, 0.5).unwrap(), std::f64::consts::PI, max_relative = 1e-13);
    assert_relative_eq!(beta_fn(2.0, 3.0).unwrap(), 1.0 / 12.0, max_relative = 1e-13);
    assert_relative_eq!(beta_fn(1.5, 0.5).unwrap(), std::f64::consts::FRAC_PI_2, max_relative = 1e-13);
}

#[test]
fn half_order_against_erfc() {
    for i in 0..=600 {
        let x = i as f64 * 0.01;
        let oracle = (x * x).exp() * erfc(x);
        let v = mittag_leffler_one(0.5, -x).unwrap();
        assert!((v - oracle).abs() <= 1e-8, "x = {x}: {v} vs {oracle}");
    }
}

#[test]
fn relaxation_is_monotone_on_a_long_range() {
    for gamma in [0.3, 0.5, 0.8] {
        let mut prev = f64::INFINITY;
        for i in 0..=400 {
            let x = if i == 0 { 0.0 } else { 10f64.powf(-3.0 + 7.0 * i as f64 / 400.0) };
            let v = mittag_leffler_one(gamma, -x).unwrap();
            assert!(v > 0.0 && v <= prev + 1e-13, "gamma {gamma}, x {x}: {v} after {prev}");
            prev = v;
        }
    }
}

proptest! {
    #[test]
    fn gamma_recurrence(x in 0.01f64..30.0) {
        let lhs = gamma_fn(x + 1.0).unwrap();
        let rhs = x * gamma_fn(x).unwrap();
        prop_assert!((lhs / rhs - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn ln_gamma_matches_log_of_gamma(x in 0.05f64..150.0) {
        let direct = gamma_fn(x).unwrap().ln();
        prop_assert!((ln_gamma(x).unwrap() - direct).abs() <= 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn unit_order_is_exponential(x in -20.0f64..20.0) {
        let v = mittag_leffler_one(1.0, x).unwrap();
        prop_assert!((v - x.exp()).abs() / x.exp() <= 1e-12);
    }

    #[test]
    fn beta_is_symmetric(a in 0.1f64..10.0, b in 0.1f64..10.0) {
        let (x, y) = (beta_fn(a, b).unwrap(), beta_fn(b, a).unwrap());
        prop_assert!((x - y).abs() <= 1e-14 * x.abs());
    }

    #[test]
    fn lowering_beta_by_alpha(alpha in 0.2f64..0.95, beta in 1.2f64..2.0, z in -30.0f64..-0.1) {
        // E_{α,β−α}(z) = z E_{α,β}(z) + 1/Γ(β−α)
        let lhs = mittag_leffler(MlQuery::new(alpha, beta - alpha, z)).unwrap();
        let rhs = z * mittag_leffler(MlQuery::new(alpha, beta, z)).unwrap() + reciprocal_gamma(beta - alpha);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
    }
}
