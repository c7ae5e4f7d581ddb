use fracode_core::expr::Rhs;
use fracode_core::fracops::Mesh;
use fracode_core::solver::*;
use fracode_core::specfun::mittag_leffler_one;
use proptest::prelude::*;

fn linear_error(gamma: f64, a: f64, n: usize) -> f64 {
    let prob = FracProblem::power_law(gamma, a, 1.0, 1.0, 1.0).unwrap();
    let mesh = Mesh::graded_for_order(1.0, n, gamma).unwrap();
    let path = solve(&prob, &mesh, &SolveOptions::default());
    assert_eq!(path.status, SolveStatus::Completed);
    path.nodes()
        .iter()
        .zip(&path.values)
        .map(|(t, u)| (u - mittag_leffler_one(gamma, a * t.powf(gamma)).unwrap()).abs())
        .fold(0.0, f64::max)
}

#[test]
fn linear_problems_converge_at_first_order_or_better() {
    for gamma in [0.4, 0.7] {
        for a in [-1.0, 1.0] {
            let (e1, e2) = (linear_error(gamma, a, 128), linear_error(gamma, a, 256));
            let order = (e1 / e2).log2();
            assert!(order >= 1.0, "gamma {gamma}, A {a}: {e1:e} -> {e2:e}, order {order}");
        }
    }
}

#[test]
fn self_convergence_on_a_nonlinear_problem() {
    let prob = FracProblem::new(0.6, Rhs::parse("sin(t) - u^3").unwrap(), 0.5, 2.0).unwrap();
    let at_end = |n: usize| {
        let path = solve(&prob, &Mesh::graded_for_order(2.0, n, 0.6).unwrap(), &SolveOptions::default());
        path.last().1
    };
    let (a, b, c) = (at_end(128), at_end(256), at_end(512));
    let order = ((a - b) / (b - c)).abs().log2();
    assert!(order >= 1.0, "{a} {b} {c}: order {order}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ordered_data_stay_ordered(gamma in 0.2f64..0.9, a in -2.0f64..1.0, u1 in -1.0f64..1.0, gap in 1e-3f64..1.0) {
        let mesh = Mesh::graded_for_order(1.0, 200, gamma).unwrap();
        let rhs = Rhs::parse(&format!("{a:?} * u - u^3 + cos(t)")).unwrap();
        let p1 = FracProblem::new(gamma, rhs.clone(), u1, 1.0).unwrap();
        let p2 = FracProblem::new(gamma, rhs, u1 + gap, 1.0).unwrap();
        let (s1, s2) = (solve(&p1, &mesh, &SolveOptions::default()), solve(&p2, &mesh, &SolveOptions::default()));
        prop_assert_eq!(s1.status, SolveStatus::Completed);
        prop_assert_eq!(s2.status, SolveStatus::Completed);
        prop_assert!(s1.values.iter().zip(&s2.values).all(|(x, y)| y > x));
    }

    #[test]
    fn decay_is_monotone(gamma in 0.2f64..0.9, a in 0.1f64..3.0, u0 in 0.1f64..5.0) {
        let prob = FracProblem::power_law(gamma, -a, 1.0, u0, 3.0).unwrap();
        let path = solve(&prob, &Mesh::graded_for_order(3.0, 200, gamma).unwrap(), &SolveOptions::default());
        prop_assert!(path.values.windows(2).all(|w| w[1] <= w[0] && w[1] > 0.0));
    }

    #[test]
    fn runs_are_reproducible(gamma in 0.2f64..0.9, u0 in -2.0f64..2.0) {
        let prob = FracProblem::new(gamma, Rhs::parse("exp(-t) * u - 0.5 * u^2").unwrap(), u0, 1.0).unwrap();
        let mesh = Mesh::uniform(1.0, 300).unwrap();
        let (a, b) = (solve(&prob, &mesh, &SolveOptions::default()), solve(&prob, &mesh, &SolveOptions::default()));
        prop_assert_eq!(a, b);
    }
}
