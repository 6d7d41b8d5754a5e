//! The cyclic cocycle: `n` invertible maps composed around a periodic orbit.

use crate::error::{CoreError, Result};
use crate::linalg::{log_abs_det, singular_values, Matrix};

/// Relative conorm below which a map is treated as singular.
const SINGULAR_RTOL: f64 = 1e-14;

/// Period-`n` sequence of invertible `d×d` maps; `maps[j]` sends the fiber over
/// `x_j` to the fiber over `x_{j+1 mod n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicCocycle {
    dim: usize,
    maps: Vec<Matrix>,
}

impl CyclicCocycle {
    /// Validates shape, finiteness and invertibility of every map.
    pub fn new(maps: Vec<Matrix>) -> Result<Self> {
        let c = Self::from_maps_unchecked(maps)?;
        for (phase, a) in c.maps.iter().enumerate() {
            if a.iter().any(|x| !x.is_finite()) {
                return Err(CoreError::NonFinite { phase });
            }
            let s = singular_values(a);
            let norm = s[0];
            let conorm = *s.last().unwrap();
            if !(conorm > SINGULAR_RTOL * norm) {
                return Err(CoreError::Singular { phase, conorm, norm });
            }
        }
        Ok(c)
    }

    /// Checks shapes only. For maps produced by composing valid maps with
    /// orthogonal or near-identity factors.
    pub fn from_maps_unchecked(maps: Vec<Matrix>) -> Result<Self> {
        let first = maps.first().ok_or_else(|| CoreError::Argument("a cocycle needs at least one map".into()))?;
        let dim = first.nrows();
        if dim == 0 {
            return Err(CoreError::Argument("dimension must be positive".into()));
        }
        for a in &maps {
            if a.nrows() != dim || a.ncols() != dim {
                return Err(CoreError::Dimension { expected: dim, found: a.nrows().max(a.ncols()) });
            }
        }
        Ok(Self { dim, maps })
    }

    pub fn identity(dim: usize, period: usize) -> Self {
        Self { dim, maps: vec![Matrix::identity(dim, dim); period.max(1)] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[Matrix] {
        &self.maps
    }

    pub fn into_maps(self) -> Vec<Matrix> {
        self.maps
    }

    /// Map at `phase`, read cyclically.
    pub fn map(&self, phase: usize) -> &Matrix {
        &self.maps[phase % self.maps.len()]
    }

    /// `K = max_j max(‖A_j‖, 1/𝔪(A_j))`.
    pub fn bound(&self) -> f64 {
        self.maps
            .iter()
            .map(|a| {
                let s = singular_values(a);
                s[0].max(1.0 / s[s.len() - 1])
            })
            .fold(1.0, f64::max)
    }

    /// `(1/n) Σ_j log|det A_j|`, the top entry of the Lyapunov graph.
    pub fn mean_log_det(&self) -> f64 {
        self.maps.iter().map(|a| log_abs_det(a).0).sum::<f64>() / self.period() as f64
    }

    /// Inverse cocycle over `T^{-1}`: phase `k` sits over the fiber
    /// [`Self::reversed_fiber`]`(k)` and its map is `A_{n-1-k}^{-1}`.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.period();
        let mut maps = Vec::with_capacity(n);
        for k in 0..n {
            let j = n - 1 - k;
            let inv =
                self.maps[j].clone().try_inverse().ok_or(CoreError::Singular { phase: j, conorm: 0.0, norm: 0.0 })?;
            maps.push(inv);
        }
        Ok(Self { dim: self.dim, maps })
    }

    /// Adjoint cocycle `A_{n-1-k}^T`, indexed like [`Self::inverse`].
    pub fn adjoint(&self) -> Self {
        let n = self.period();
        let maps = (0..n).map(|k| self.maps[n - 1 - k].transpose()).collect();
        Self { dim: self.dim, maps }
    }

    /// Fiber of the original orbit that phase `k` of the reversed cocycle sits over.
    pub fn reversed_fiber(&self, k: usize) -> usize {
        let n = self.period();
        (n - k % n) % n
    }

    /// `max_j ‖A_j − B_j‖` in operator norm.
    pub fn max_deviation(&self, other: &CyclicCocycle) -> Result<f64> {
        if other.dim != self.dim {
            return Err(CoreError::Dimension { expected: self.dim, found: other.dim });
        }
        if other.period() != self.period() {
            return Err(CoreError::Argument(format!("period mismatch: {} vs {}", self.period(), other.period())));
        }
        Ok(self.maps.iter().zip(&other.maps).map(|(a, b)| crate::linalg::op_norm(&(a - b))).fold(0.0, f64::max))
    }

    /// Per-phase operator-norm deviations from `other`.
    pub fn deviations(&self, other: &CyclicCocycle) -> Vec<f64> {
        self.maps.iter().zip(&other.maps).map(|(a, b)| crate::linalg::op_norm(&(a - b))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_singular_maps() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(CyclicCocycle::new(vec![a]), Err(CoreError::Singular { .. })));
    }

    #[test]
    fn rejects_ragged_maps() {
        let err = CyclicCocycle::new(vec![Matrix::identity(2, 2), Matrix::identity(3, 3)]);
        assert!(matches!(err, Err(CoreError::Dimension { .. })));
    }

    #[test]
    fn inverse_composes_to_identity() {
        let a = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 0.5]);
        let b = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 3.0, 1.0]);
        let c = CyclicCocycle::new(vec![a.clone(), b.clone()]).unwrap();
        let inv = c.inverse().unwrap();
        // inverse phase 0 sits over fiber 0 and undoes A_1: x_2 = x_0 → x_1
        assert_eq!(c.reversed_fiber(0), 0);
        assert!((inv.map(0) * &b - Matrix::identity(2, 2)).amax() < 1e-14);
        assert!((inv.map(1) * &a - Matrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn bound_of_diagonal() {
        let c = CyclicCocycle::new(vec![Matrix::from_row_slice(2, 2, &[0.25, 0.0, 0.0, 3.0])]).unwrap();
        assert!((c.bound() - 4.0).abs() < 1e-12);
    }
}
