//! Exterior powers on the lexicographic wedge basis.

use crate::cocycle::CyclicCocycle;
use crate::error::{CoreError, Result};
use crate::linalg::{scaled_product, Matrix};

/// Increasing `i`-subsets of `0..d` in lexicographic order.
pub fn combinations(d: usize, i: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..i).collect();
    if i > d {
        return out;
    }
    loop {
        out.push(cur.clone());
        // Rightmost position that can still advance.
        let mut k = i;
        while k > 0 && cur[k - 1] == d - i + k - 1 {
            k -= 1;
        }
        if k == 0 {
            return out;
        }
        cur[k - 1] += 1;
        for t in k..i {
            cur[t] = cur[t - 1] + 1;
        }
    }
}

/// `∧^i M` on the basis `e_{j_1} ∧ … ∧ e_{j_i}`, `j_1 < … < j_i`, lexicographic.
pub fn exterior_power(m: &Matrix, i: usize) -> Result<Matrix> {
    let d = m.nrows();
    if m.ncols() != d {
        return Err(CoreError::Dimension { expected: d, found: m.ncols() });
    }
    if i == 0 || i > d {
        return Err(CoreError::Argument(format!("exterior index {i} outside 1..={d}")));
    }
    let idx = combinations(d, i);
    let k = idx.len();
    let mut out = Matrix::zeros(k, k);
    let mut minor = Matrix::zeros(i, i);
    for (r, rows) in idx.iter().enumerate() {
        for (c, cols) in idx.iter().enumerate() {
            for (a, &ra) in rows.iter().enumerate() {
                for (b, &cb) in cols.iter().enumerate() {
                    minor[(a, b)] = m[(ra, cb)];
                }
            }
            out[(r, c)] = minor.clone().determinant();
        }
    }
    Ok(out)
}

/// The `i`-th exterior power of every map of a cocycle.
#[derive(Clone, Debug)]
pub struct WedgeCocycle {
    maps: Vec<Matrix>,
}

impl WedgeCocycle {
    pub fn new(c: &CyclicCocycle, i: usize) -> Result<Self> {
        let maps = c.maps().iter().map(|a| exterior_power(a, i)).collect::<Result<Vec<_>>>()?;
        Ok(Self { maps })
    }

    /// `log‖∧^i A^len(x_phase)‖`.
    pub fn log_norm(&self, phase: usize, len: usize) -> f64 {
        let n = self.maps.len();
        let k = self.maps[0].nrows();
        scaled_product(k, (0..len).map(|t| &self.maps[(phase + t) % n])).log_norm()
    }

    /// `log ρ(∧^i A^len(x_phase))`.
    pub fn log_spectral_radius(&self, phase: usize, len: usize) -> f64 {
        let n = self.maps.len();
        let k = self.maps[0].nrows();
        scaled_product(k, (0..len).map(|t| &self.maps[(phase + t) % n])).log_spectral_radius()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_pairs() {
        assert_eq!(combinations(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(combinations(4, 4), vec![vec![0, 1, 2, 3]]);
        assert_eq!(combinations(5, 2).len(), 10);
    }

    #[test]
    fn diagonal_second_power() {
        let m = Matrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[3.0, 2.0, 1.0]));
        let w = exterior_power(&m, 2).unwrap();
        let want = Matrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[6.0, 3.0, 2.0]));
        assert!((w - want).amax() < 1e-14);
    }

    #[test]
    fn top_power_is_determinant() {
        let m = Matrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 3.0, 2.0, 1.0, 1.0]);
        let w = exterior_power(&m, 3).unwrap();
        assert_eq!(w.shape(), (1, 1));
        assert!((w[(0, 0)] - m.determinant()).abs() < 1e-12);
    }

    #[test]
    fn index_out_of_range() {
        assert!(exterior_power(&Matrix::identity(2, 2), 3).is_err());
        assert!(exterior_power(&Matrix::identity(2, 2), 0).is_err());
    }
}
