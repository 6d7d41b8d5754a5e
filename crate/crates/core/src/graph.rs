//! Lyapunov graphs and their finite-scale upper bounds.

use serde::{Deserialize, Serialize};

use crate::cocycle::CyclicCocycle;
use crate::error::{CoreError, Result};
use crate::exterior::WedgeCocycle;
use crate::schur::PeriodicSchur;

/// Absolute tolerance of the convexity invariant.
pub const CONVEXITY_TOL: f64 = 1e-9;

/// Partial sums `σ_0 = 0, σ_1, …, σ_d` of the ascending exponents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct LyapunovGraph {
    sigma: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    dim: usize,
    sigma: Vec<f64>,
}

impl TryFrom<GraphFile> for LyapunovGraph {
    type Error = CoreError;

    fn try_from(f: GraphFile) -> Result<Self> {
        if f.sigma.len() != f.dim + 1 {
            return Err(CoreError::Schema(format!(
                "graph of dim {} needs {} values, found {}",
                f.dim,
                f.dim + 1,
                f.sigma.len()
            )));
        }
        LyapunovGraph::new(f.sigma)
    }
}

impl From<LyapunovGraph> for GraphFile {
    fn from(g: LyapunovGraph) -> Self {
        GraphFile { dim: g.dim(), sigma: g.sigma }
    }
}

impl LyapunovGraph {
    /// Requires `σ_0 = 0`, finite entries and `d ≥ 1`; convexity is checked separately.
    pub fn new(sigma: Vec<f64>) -> Result<Self> {
        if sigma.len() < 2 {
            return Err(CoreError::Argument("a graph needs at least σ_0 and σ_1".into()));
        }
        if sigma[0] != 0.0 {
            return Err(CoreError::Argument(format!("σ_0 must be 0, found {}", sigma[0])));
        }
        if sigma.iter().any(|x| !x.is_finite()) {
            return Err(CoreError::Argument("graph values must be finite".into()));
        }
        Ok(Self { sigma })
    }

    /// From exponents in any order.
    pub fn from_exponents(exponents: &[f64]) -> Self {
        let mut l = exponents.to_vec();
        l.sort_by(f64::total_cmp);
        let mut sigma = Vec::with_capacity(l.len() + 1);
        sigma.push(0.0);
        let mut acc = 0.0;
        for v in l {
            acc += v;
            sigma.push(acc);
        }
        Self { sigma }
    }

    pub fn dim(&self) -> usize {
        self.sigma.len() - 1
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn into_sigma(self) -> Vec<f64> {
        self.sigma
    }

    /// `λ_i = σ_i − σ_{i−1}` for `i = 1..d`, ascending for a convex graph.
    pub fn exponents(&self) -> Vec<f64> {
        self.sigma.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `Δ²σ_{i} = σ_{i+2} − 2σ_{i+1} + σ_i`.
    pub fn second_difference(&self, i: usize) -> f64 {
        self.sigma[i + 2] - 2.0 * self.sigma[i + 1] + self.sigma[i]
    }

    pub fn is_convex(&self, tol: f64) -> bool {
        (0..self.dim().saturating_sub(1)).all(|i| self.second_difference(i) >= -tol)
    }

    /// Sup-norm distance.
    pub fn distance(&self, other: &LyapunovGraph) -> f64 {
        self.sigma.iter().zip(&other.sigma).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Lyapunov graph of the cocycle; `σ_d` is the mean log-determinant.
pub fn lyapunov_graph(c: &CyclicCocycle) -> Result<LyapunovGraph> {
    let schur = PeriodicSchur::new(c)?;
    Ok(graph_from_schur(c, &schur))
}

/// Graph assembled from a precomputed frame.
pub fn graph_from_schur(c: &CyclicCocycle, schur: &PeriodicSchur) -> LyapunovGraph {
    let mut g = LyapunovGraph::from_exponents(&schur.exponents_desc());
    let d = g.dim();
    g.sigma[d] = c.mean_log_det();
    g
}

/// Entry `i` is the phase average of `(1/m) log‖∧^i A^m(x)‖`; entry 0 is 0.
pub fn finite_time_graph(c: &CyclicCocycle, m: usize) -> Result<Vec<f64>> {
    let n = c.period();
    if m == 0 || m > n {
        return Err(CoreError::Argument(format!("scale {m} must lie in 1..={n}")));
    }
    let d = c.dim();
    let mut out = vec![0.0; d + 1];
    for (i, slot) in out.iter_mut().enumerate().skip(1) {
        if i == d {
            *slot = c.mean_log_det();
            continue;
        }
        let w = WedgeCocycle::new(c, i)?;
        let total: f64 = (0..n).map(|x| w.log_norm(x, m)).sum();
        *slot = total / (n as f64 * m as f64);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    #[test]
    fn identity_graph_is_flat() {
        let g = lyapunov_graph(&CyclicCocycle::identity(3, 5)).unwrap();
        assert_eq!(g.sigma().len(), 4);
        assert!(g.sigma().iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn symmetric_determinant_one() {
        let c = CyclicCocycle::new(vec![Matrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 2.0])]).unwrap();
        let g = lyapunov_graph(&c).unwrap();
        assert!((g.sigma()[1] + 2f64.ln()).abs() < 1e-14);
        assert!(g.sigma()[2].abs() < 1e-14);
    }

    #[test]
    fn json_shape() {
        let g = LyapunovGraph::new(vec![0.0, -1.0, 0.0]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"dim":2,"sigma":[0.0,-1.0,0.0]}"#);
        let back: LyapunovGraph = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<LyapunovGraph>(r#"{"dim":3,"sigma":[0.0,1.0]}"#).is_err());
    }

    #[test]
    fn finite_time_of_cancellation() {
        let h = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let r = crate::linalg::rotation2(std::f64::consts::FRAC_PI_2);
        let c = CyclicCocycle::new(vec![h.clone(), &r * &h * r.transpose()]).unwrap();
        let f = finite_time_graph(&c, 1).unwrap();
        assert!((f[1] - 2f64.ln()).abs() < 1e-13);
        let g = lyapunov_graph(&c).unwrap();
        assert!(g.sigma()[1].abs() < 1e-13);
    }
}
