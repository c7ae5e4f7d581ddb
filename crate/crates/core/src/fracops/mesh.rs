use serde::{Deserialize, Serialize};

use super::FracOpsError;

/// How a mesh was generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshKind {
    Uniform,
    /// `t_j = T (j/N)^exponent`.
    Graded { exponent: f64 },
    /// Steps grow by `ratio` starting from `t_start`, optionally capped at `max_step`.
    Geometric { ratio: f64, t_start: f64, max_step: Option<f64> },
    /// Nodes supplied from outside (adaptive runs, CSV input).
    Custom,
}

/// Strictly increasing time nodes starting at zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mesh {
    nodes: Vec<f64>,
    kind: MeshKind,
}

impl Mesh {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self, FracOpsError> {
        Self::with_kind(nodes, MeshKind::Custom)
    }

    fn with_kind(nodes: Vec<f64>, kind: MeshKind) -> Result<Self, FracOpsError> {
        if nodes.len() < 2 {
            return Err(FracOpsError::InvalidMesh(format!("need at least 2 nodes, got {}", nodes.len())));
        }
        if nodes[0] != 0.0 {
            return Err(FracOpsError::InvalidMesh(format!("first node must be 0, got {}", nodes[0])));
        }
        for (i, w) in nodes.windows(2).enumerate() {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(FracOpsError::InvalidMesh(format!(
                    "nodes must be finite and strictly increasing: t[{}] = {}, t[{}] = {}",
                    i,
                    w[0],
                    i + 1,
                    w[1]
                )));
            }
        }
        Ok(Self { nodes, kind })
    }

    pub fn uniform(t_end: f64, n: usize) -> Result<Self, FracOpsError> {
        check_span(t_end, n)?;
        let nodes = (0..=n).map(|j| if j == n { t_end } else { t_end * j as f64 / n as f64 }).collect();
        Self::with_kind(nodes, MeshKind::Uniform)
    }

    pub fn graded(t_end: f64, n: usize, exponent: f64) -> Result<Self, FracOpsError> {
        check_span(t_end, n)?;
        if !(exponent >= 1.0) || !exponent.is_finite() {
            return Err(FracOpsError::InvalidMesh(format!("grading exponent must be >= 1, got {exponent}")));
        }
        let nodes = (0..=n)
            .map(|j| if j == n { t_end } else { t_end * (j as f64 / n as f64).powf(exponent) })
            .collect();
        Self::with_kind(nodes, MeshKind::Graded { exponent })
    }

    /// Default grading `r = 2/γ` (at least 1) for solutions with a `t^γ` layer.
    pub fn graded_for_order(t_end: f64, n: usize, gamma: f64) -> Result<Self, FracOpsError> {
        Self::graded(t_end, n, (2.0 / gamma).max(1.0))
    }

    /// `n` steps growing by `ratio`, scaled so they sum to `t_end`.
    pub fn geometric(t_end: f64, n: usize, ratio: f64) -> Result<Self, FracOpsError> {
        check_span(t_end, n)?;
        if !(ratio > 1.0) || !ratio.is_finite() {
            return Err(FracOpsError::InvalidMesh(format!("geometric ratio must be > 1, got {ratio}")));
        }
        let h0 = t_end * (ratio - 1.0) / (ratio.powi(n as i32) - 1.0);
        if !(h0 > 0.0) {
            return Err(FracOpsError::InvalidMesh(format!("geometric mesh with ratio {ratio} and {n} steps underflows")));
        }
        let mut nodes = Vec::with_capacity(n + 1);
        nodes.push(0.0);
        let mut h = h0;
        let mut t = 0.0;
        for j in 1..=n {
            t += h;
            h *= ratio;
            nodes.push(if j == n { t_end } else { t });
        }
        Self::with_kind(nodes, MeshKind::Geometric { ratio, t_start: h0, max_step: None })
    }

    /// Steps `t_start·ratio^k`, capped at `max_step`, until `t_end` is reached.
    pub fn geometric_capped(t_end: f64, t_start: f64, ratio: f64, max_step: f64) -> Result<Self, FracOpsError> {
        if !(t_end > 0.0 && t_start > 0.0 && t_start < t_end && ratio > 1.0 && max_step >= t_start) {
            return Err(FracOpsError::InvalidMesh(format!(
                "capped geometric mesh needs 0 < t_start < t_end, ratio > 1, max_step >= t_start; \
                 got t_end={t_end}, t_start={t_start}, ratio={ratio}, max_step={max_step}"
            )));
        }
        let mut nodes = vec![0.0];
        let mut t = 0.0;
        let mut h = t_start;
        while t + h < t_end {
            t += h;
            nodes.push(t);
            h = (h * ratio).min(max_step);
        }
        let last = *nodes.last().expect("nonempty");
        if nodes.len() > 1 && t_end - last < 0.1 * h {
            *nodes.last_mut().expect("nonempty") = t_end;
        } else {
            nodes.push(t_end);
        }
        Self::with_kind(nodes, MeshKind::Geometric { ratio, t_start, max_step: Some(max_step) })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of intervals.
    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn t_end(&self) -> f64 {
        *self.nodes.last().expect("mesh has at least two nodes")
    }

    pub fn max_step(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

fn check_span(t_end: f64, n: usize) -> Result<(), FracOpsError> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(FracOpsError::InvalidMesh(format!("horizon must be positive, got {t_end}")));
    }
    if n == 0 {
        return Err(FracOpsError::InvalidMesh("need at least one interval".into()));
    }
    Ok(())
}

/// Function values sampled on a mesh.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledFn {
    mesh: Mesh,
    values: Vec<f64>,
}

impl SampledFn {
    pub fn new(mesh: Mesh, values: Vec<f64>) -> Result<Self, FracOpsError> {
        if values.len() != mesh.len() {
            return Err(FracOpsError::LengthMismatch { nodes: mesh.len(), values: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FracOpsError::NonFinite { index: i, value: values[i] });
        }
        Ok(Self { mesh, values })
    }

    pub fn from_fn(mesh: Mesh, f: impl Fn(f64) -> f64) -> Result<Self, FracOpsError> {
        let values = mesh.nodes().iter().map(|&t| f(t)).collect();
        Self::new(mesh, values)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nodes(&self) -> &[f64] {
        self.mesh.nodes()
    }

    pub fn into_parts(self) -> (Mesh, Vec<f64>) {
        (self.mesh, self.values)
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Result<Self, FracOpsError> {
        let values = self.nodes().iter().zip(&self.values).map(|(&t, &v)| f(t, v)).collect();
        Self::new(self.mesh.clone(), values)
    }

    /// Largest absolute difference from another function on the same mesh.
    pub fn max_abs_diff(&self, other: &SampledFn) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_hit_the_horizon_exactly() {
        for m in [
            Mesh::uniform(3.0, 7).unwrap(),
            Mesh::graded(3.0, 7, 4.0).unwrap(),
            Mesh::geometric(3.0, 50, 1.05).unwrap(),
            Mesh::geometric_capped(3.0, 1e-4, 1.2, 0.25).unwrap(),
        ] {
            assert_eq!(m.nodes()[0], 0.0);
            assert_eq!(m.t_end(), 3.0);
        }
    }

    #[test]
    fn capped_geometric_respects_the_cap() {
        let m = Mesh::geometric_capped(100.0, 1e-6, 1.05, 0.5).unwrap();
        assert!(m.max_step() <= 0.5 + 1e-12);
        let h: Vec<f64> = m.nodes().windows(2).map(|w| w[1] - w[0]).collect();
        assert!((h[1] / h[0] - 1.05).abs() < 1e-9);
    }

    #[test]
    fn invalid_meshes_are_rejected() {
        assert!(Mesh::from_nodes(vec![0.0]).is_err());
        assert!(Mesh::from_nodes(vec![0.1, 0.2]).is_err());
        assert!(Mesh::from_nodes(vec![0.0, 0.2, 0.2]).is_err());
        assert!(Mesh::uniform(-1.0, 4).is_err());
        assert!(Mesh::graded(1.0, 4, 0.5).is_err());
        assert!(Mesh::geometric(1.0, 4, 1.0).is_err());
    }

    #[test]
    fn sampled_fn_checks_lengths_and_finiteness() {
        let m = Mesh::uniform(1.0, 2).unwrap();
        assert!(matches!(SampledFn::new(m.clone(), vec![1.0]), Err(FracOpsError::LengthMismatch { .. })));
        assert!(matches!(SampledFn::new(m, vec![1.0, f64::NAN, 0.0]), Err(FracOpsError::NonFinite { index: 1, .. })));
    }
}
