//! Discrete fractional operators on sampled functions.
//!
//! `frac_integral` is the Riemann–Liouville integral
//! `J^γ g(t) = 1/Γ(γ) ∫₀ᵗ (t−s)^{γ−1} g(s) ds` with product-trapezoidal
//! weights (exact for piecewise-linear `g`); `caputo_l1` is the L1 Caputo
//! derivative (exact for piecewise-linear `u`). Both accept arbitrary meshes
//! and cost `O(N²)`.

mod mesh;

use thiserror::Error;

pub use mesh::{Mesh, MeshKind, SampledFn};

use crate::par;
use crate::specfun::{gamma_fn, reciprocal_gamma};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FracOpsError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("mesh has {nodes} nodes but {values} values were supplied")]
    LengthMismatch { nodes: usize, values: usize },
    #[error("value {value} at index {index} is not finite")]
    NonFinite { index: usize, value: f64 },
    #[error("fractional order {0} outside (0, 1)")]
    InvalidOrder(f64),
}

pub(crate) fn check_order(gamma: f64) -> Result<(), FracOpsError> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(FracOpsError::InvalidOrder(gamma))
    }
}

/// Moments of the kernel `(t−s)^e` over one interval `[a, b]` with `h = b − a`
/// and `d_a = t − a ≥ h`:
/// `m0 = ∫ₐᵇ (t−s)^e ds` and `m1 = ∫ₐᵇ (t−s)^e (s−a)/h ds`.
///
/// `d_a_pow` must be `d_a^e`. With `x = h/d_a`, both are `h d_a^e` times a
/// function of `x` alone; for `x ≤ 1/2` that function is summed as a binomial
/// series, which avoids the cancellation of the closed form on long histories.
#[inline]
pub(crate) fn kernel_moments(e: f64, h: f64, d_a: f64, d_a_pow: f64) -> (f64, f64) {
    let x = (h / d_a).min(1.0);
    let scale = h * d_a_pow;
    if x > 0.5 {
        let one_minus = (1.0 - x).max(0.0);
        let p1 = one_minus.powf(e + 1.0);
        let p2 = p1 * one_minus;
        let s0 = (1.0 - p1) / (x * (e + 1.0));
        let s1 = ((1.0 - p1) / (e + 1.0) - (1.0 - p2) / (e + 2.0)) / (x * x);
        return (scale * s0, scale * s1);
    }
    let mut c = 1.0;
    let mut xp = 1.0;
    let mut s0 = 1.0;
    let mut s1 = 0.5;
    let mut k = 0.0;
    loop {
        c *= (k - e) / (k + 1.0);
        xp *= x;
        k += 1.0;
        let t = c * xp;
        s0 += t / (k + 1.0);
        s1 += t / (k + 2.0);
        if t.abs() < 1e-17 {
            break;
        }
    }
    (scale * s0, scale * s1)
}

/// `J^γ g` at every node of `g`'s mesh; output at `t = 0` is zero.
pub fn frac_integral(gamma: f64, g: &SampledFn) -> Result<SampledFn, FracOpsError> {
    check_order(gamma)?;
    let inv_gamma = 1.0 / gamma_fn(gamma).map_err(|_| FracOpsError::InvalidOrder(gamma))?;
    let t = g.nodes();
    let v = g.values();
    let e = gamma - 1.0;
    let out = par::map_range(t.len(), |n| {
        if n == 0 {
            return 0.0;
        }
        let tn = t[n];
        let mut acc = 0.0;
        for j in 0..n {
            let h = t[j + 1] - t[j];
            let d_a = tn - t[j];
            let (m0, m1) = kernel_moments(e, h, d_a, d_a.powf(e));
            acc += (m0 - m1) * v[j] + m1 * v[j + 1];
        }
        acc * inv_gamma
    });
    SampledFn::new(g.mesh().clone(), out)
}

/// L1 Caputo derivative of order `γ` with initial value `u0`; the first
/// difference uses `u[1] − u0`, and the output at `t = 0` is zero.
pub fn caputo_l1(gamma: f64, u: &SampledFn, u0: f64) -> Result<SampledFn, FracOpsError> {
    check_order(gamma)?;
    let scale = reciprocal_gamma(1.0 - gamma);
    let t = u.nodes();
    let v = u.values();
    let e = -gamma;
    let out = par::map_range(t.len(), |n| {
        if n == 0 {
            return 0.0;
        }
        let tn = t[n];
        let mut acc = 0.0;
        for j in 0..n {
            let h = t[j + 1] - t[j];
            let d_a = tn - t[j];
            let (m0, _) = kernel_moments(e, h, d_a, d_a.powf(e));
            let left = if j == 0 { u0 } else { v[j] };
            acc += (v[j + 1] - left) / h * m0;
        }
        acc * scale
    });
    SampledFn::new(u.mesh().clone(), out)
}

/// Largest nodal defect of `J^γ(D^γ u) − (u − u0)`.
pub fn group_roundtrip(gamma: f64, u: &SampledFn, u0: f64) -> Result<f64, FracOpsError> {
    let d = caputo_l1(gamma, u, u0)?;
    let back = frac_integral(gamma, &d)?;
    Ok(back
        .values()
        .iter()
        .zip(u.values())
        .map(|(b, x)| (b - (x - u0)).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Direct closed forms of the two moments, for comparison.
    fn moments_closed(e: f64, a: f64, b: f64, t: f64) -> (f64, f64) {
        let h = b - a;
        let (da, db) = (t - a, t - b);
        let m0 = (da.powf(e + 1.0) - db.powf(e + 1.0)) / (e + 1.0);
        // ∫(t−s)^e (s−a) ds = da·m0 − ∫ w^{e+1} dw
        let m1 = (da * m0 - (da.powf(e + 2.0) - db.powf(e + 2.0)) / (e + 2.0)) / h;
        (m0, m1)
    }

    #[test]
    fn moments_match_closed_form_where_it_is_stable() {
        for &e in &[-0.5, -0.2, -0.8] {
            for &(a, b, t) in &[(0.0, 1.0, 1.0), (0.0, 1.0, 1.5), (1.0, 1.5, 3.0), (0.3, 0.4, 0.9), (0.0, 0.1, 0.25)] {
                let (m0, m1) = kernel_moments(e, b - a, t - a, (t - a).powf(e));
                let (c0, c1) = moments_closed(e, a, b, t);
                assert_relative_eq!(m0, c0, max_relative = 1e-13);
                assert_relative_eq!(m1, c1, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn moments_stay_accurate_on_tiny_intervals() {
        // h/d = 1e-12: m1/m0 must be 1/2 to leading order, m0 ≈ h d^e
        let (m0, m1) = kernel_moments(-0.5, 1e-12, 1.0, 1.0);
        assert_relative_eq!(m0, 1e-12, max_relative = 1e-11);
        assert_relative_eq!(m1 / m0, 0.5, max_relative = 1e-11);
    }

    #[test]
    fn integral_of_constant_is_exact() {
        let m = Mesh::uniform(1.0, 64).unwrap();
        let g = SampledFn::from_fn(m, |_| 1.0).unwrap();
        let j = frac_integral(0.5, &g).unwrap();
        assert_relative_eq!(*j.values().last().unwrap(), std::f64::consts::FRAC_2_SQRT_PI, epsilon = 1e-12);
        assert_eq!(j.values()[0], 0.0);
    }

    #[test]
    fn integral_of_linear_is_exact_on_any_mesh() {
        for m in [Mesh::uniform(1.0, 33).unwrap(), Mesh::graded(1.0, 33, 3.0).unwrap()] {
            let g = SampledFn::from_fn(m, |t| t).unwrap();
            let j = frac_integral(0.5, &g).unwrap();
            assert_relative_eq!(*j.values().last().unwrap(), 0.752_252_778_063_675, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let m = Mesh::graded(2.0, 40, 2.0).unwrap();
        let g = SampledFn::from_fn(m, |_| 0.0).unwrap();
        assert!(frac_integral(0.3, &g).unwrap().values().iter().all(|&v| v == 0.0));
        assert!(caputo_l1(0.3, &g, 0.0).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn caputo_of_linear_is_exact() {
        let m = Mesh::graded(1.0, 50, 2.0).unwrap();
        let u = SampledFn::from_fn(m, |t| t).unwrap();
        let d = caputo_l1(0.5, &u, 0.0).unwrap();
        assert_relative_eq!(*d.values().last().unwrap(), std::f64::consts::FRAC_2_SQRT_PI, epsilon = 1e-12);
        // at every node, t^{1/2}/Γ(3/2)
        for (t, v) in d.nodes().iter().zip(d.values()).skip(1) {
            assert_relative_eq!(*v, t.sqrt() / 0.886_226_925_452_758, max_relative = 1e-11);
        }
    }

    #[test]
    fn caputo_of_constant_vanishes() {
        let m = Mesh::uniform(1.0, 20).unwrap();
        let u = SampledFn::from_fn(m, |_| 3.0).unwrap();
        assert!(caputo_l1(0.7, &u, 3.0).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn order_outside_unit_interval_is_rejected() {
        let m = Mesh::uniform(1.0, 4).unwrap();
        let g = SampledFn::from_fn(m, |t| t).unwrap();
        assert!(matches!(frac_integral(1.0, &g), Err(FracOpsError::InvalidOrder(_))));
        assert!(matches!(caputo_l1(0.0, &g, 0.0), Err(FracOpsError::InvalidOrder(_))));
    }

    #[test]
    fn roundtrip_of_constant_is_zero() {
        let m = Mesh::uniform(1.0, 64).unwrap();
        let u = SampledFn::from_fn(m, |_| 2.5).unwrap();
        assert_eq!(group_roundtrip(0.4, &u, 2.5).unwrap(), 0.0);
    }

    #[test]
    fn caputo_of_scaled_root_is_near_one_away_from_the_origin() {
        let g = gamma_fn(1.5).unwrap();
        let err_at = |n: usize| {
            let u = SampledFn::from_fn(Mesh::uniform(1.0, n).unwrap(), |t| t.sqrt() / g).unwrap();
            let d = caputo_l1(0.5, &u, 0.0).unwrap();
            // the first nodes carry an O(1) defect that does not shrink with h
            d.nodes()
                .iter()
                .zip(d.values())
                .filter(|(t, _)| **t >= 0.01)
                .map(|(_, v)| (v - 1.0).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err_at(1024), err_at(2048));
        assert!(e1 <= 5e-2, "{e1}");
        assert!(e2 < e1);
    }

    #[test]
    fn roundtrip_of_linear_converges() {
        let defect = |n: usize| {
            let u = SampledFn::from_fn(Mesh::uniform(1.0, n).unwrap(), |t| 1.0 + t).unwrap();
            group_roundtrip(0.5, &u, 1.0).unwrap()
        };
        let (d1, d2) = (defect(1024), defect(2048));
        assert!(d1 <= 1e-3, "{d1}");
        assert!(d1 / d2 >= 1.5, "{d1} {d2}");
    }
}
