//! Subspaces and the angles between them.

use crate::error::{CoreError, Result};
use crate::linalg::{
    left_singular_vectors, orthogonal_complement, orthogonality_defect, orthonormalize, singular_values, Matrix,
};

/// Column-orthonormality tolerance of [`Subspace`].
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// A subspace of `ℝ^d` held as an orthonormal column basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    /// `basis` must already be orthonormal.
    pub fn new(basis: Matrix) -> Result<Self> {
        if basis.ncols() == 0 {
            return Err(CoreError::Argument("zero subspace".into()));
        }
        if basis.ncols() > basis.nrows() {
            return Err(CoreError::Argument("more basis vectors than the ambient dimension".into()));
        }
        let defect = orthogonality_defect(&basis);
        if defect > ORTHONORMAL_TOL {
            return Err(CoreError::Argument(format!("basis is not orthonormal (defect {defect:.3e})")));
        }
        Ok(Self { basis })
    }

    /// Span of the columns of `m`, orthonormalized.
    pub fn span(m: &Matrix) -> Result<Self> {
        if m.ncols() == 0 {
            return Err(CoreError::Argument("zero subspace".into()));
        }
        Self::new(orthonormalize(m)?)
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> Matrix {
        &self.basis * self.basis.transpose()
    }

    pub fn complement(&self) -> Option<Subspace> {
        if self.dim() == self.ambient_dim() {
            return None;
        }
        Some(Subspace { basis: orthogonal_complement(&self.basis) })
    }

    /// `F ⊕ G` (the span of both).
    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        let d = self.ambient_dim();
        let mut m = Matrix::zeros(d, self.dim() + other.dim());
        m.columns_mut(0, self.dim()).copy_from(&self.basis);
        m.columns_mut(self.dim(), other.dim()).copy_from(&other.basis);
        Subspace::span(&m)
    }

    /// Image of the subspace in `h^⊥` under orthogonal projection; directions
    /// lying inside `h` drop out.
    pub fn project_away(&self, h: &Subspace) -> Result<Subspace> {
        let d = self.ambient_dim();
        let p = (Matrix::identity(d, d) - h.projector()) * &self.basis;
        let (s, u) = left_singular_vectors(&p);
        let rank = s.iter().filter(|&&v| v > 1e-12).count();
        if rank == 0 {
            return Err(CoreError::Argument("subspace lies inside the quotient kernel".into()));
        }
        Ok(Subspace { basis: u.columns(0, rank).into_owned() })
    }
}

/// Smallest principal angle between `f` and `g`; zero iff they intersect.
pub fn principal_angle(f: &Subspace, g: &Subspace) -> Result<f64> {
    if f.ambient_dim() != g.ambient_dim() {
        return Err(CoreError::Dimension { expected: f.ambient_dim(), found: g.ambient_dim() });
    }
    let (small, big) = if f.dim() <= g.dim() { (f, g) } else { (g, f) };
    let cos = singular_values(&(small.basis.transpose() * &big.basis))[0].min(1.0);
    let resid = &small.basis - big.projector() * &small.basis;
    let sin = singular_values(&resid).last().copied().unwrap_or(0.0).min(1.0);
    Ok(sin.atan2(cos))
}

/// `∠(F/H, G/H)`: the angle between the images of `f` and `g` in `ℝ^d / H ≅ H^⊥`.
pub fn quotient_angle(f: &Subspace, g: &Subspace, h: &Subspace) -> Result<f64> {
    principal_angle(&f.project_away(h)?, &g.project_away(h)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn line(v: &[f64]) -> Subspace {
        Subspace::span(&Matrix::from_column_slice(v.len(), 1, v)).unwrap()
    }

    #[test]
    fn coordinate_axes() {
        let a = principal_angle(&line(&[1.0, 0.0]), &line(&[0.0, 1.0])).unwrap();
        assert!((a - FRAC_PI_2).abs() < 1e-15);
        let b = principal_angle(&line(&[1.0, 0.0]), &line(&[1.0, 1.0])).unwrap();
        assert!((b - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn intersecting_planes_have_zero_angle() {
        let p = Subspace::span(&Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0])).unwrap();
        let q = Subspace::span(&Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 1.0])).unwrap();
        assert!(principal_angle(&p, &q).unwrap() < 1e-15);
    }

    #[test]
    fn tiny_angles_keep_precision() {
        let t: f64 = 1e-9;
        let a = principal_angle(&line(&[1.0, 0.0]), &line(&[t.cos(), t.sin()])).unwrap();
        assert!((a - t).abs() < 1e-20);
    }

    #[test]
    fn zero_subspace_rejected() {
        assert!(Subspace::new(Matrix::zeros(3, 0)).is_err());
        assert!(Subspace::new(Matrix::from_row_slice(2, 1, &[1.0, 1.0])).is_err());
    }

    #[test]
    fn quotient_by_common_line() {
        // F = span(e1, e2), G = span(e1, e3), H = span(e1): images are e2 and e3.
        let f = Subspace::span(&Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0])).unwrap();
        let g = Subspace::span(&Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0])).unwrap();
        let h = line(&[1.0, 0.0, 0.0]);
        let a = quotient_angle(&f, &g, &h).unwrap();
        assert!((a - FRAC_PI_2).abs() < 1e-12);
    }
}
