//! Small dense helpers shared by every module.
//!
//! Everything here works on `DMatrix<f64>` with dimensions in the single
//! digits, so clarity wins over blocking or in-place tricks.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{CoreError, Result};

pub type Matrix = DMatrix<f64>;

/// Thin QR with a non-negative diagonal in `R`.
pub fn qr_positive(m: &Matrix) -> (Matrix, Matrix) {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for k in 0..r.nrows().min(r.ncols()) {
        if r[(k, k)] < 0.0 {
            r.row_mut(k).neg_mut();
            q.column_mut(k).neg_mut();
        }
    }
    (q, r)
}

/// Singular values in descending order.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Operator 2-norm.
pub fn op_norm(m: &Matrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Smallest singular value, the conorm 𝔪 of a square or tall matrix.
pub fn conorm(m: &Matrix) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Right singular vectors sorted by descending singular value.
pub fn right_singular_vectors(m: &Matrix) -> (Vec<f64>, Matrix) {
    let k = m.ncols();
    let rows = m.nrows();
    // Pad short matrices so that the SVD returns a full set of right vectors.
    let padded = if rows < k {
        let mut p = Matrix::zeros(k, k);
        p.view_mut((0, 0), (rows, k)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested right vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut v = Matrix::zeros(k, order.len());
    let mut s = Vec::with_capacity(order.len());
    for (c, &o) in order.iter().enumerate() {
        s.push(svd.singular_values[o]);
        v.set_column(c, &vt.row(o).transpose());
    }
    (s, v)
}

/// Left singular vectors sorted by descending singular value.
pub fn left_singular_vectors(m: &Matrix) -> (Vec<f64>, Matrix) {
    right_singular_vectors(&m.transpose())
}

/// Orthonormal basis of the `k`-dimensional approximate null space.
pub fn null_space(m: &Matrix, k: usize) -> Matrix {
    let (_, v) = right_singular_vectors(m);
    let c = v.ncols();
    v.columns(c - k, k).into_owned()
}

/// Orthonormal basis of the orthogonal complement of the column span of `basis`.
pub fn orthogonal_complement(basis: &Matrix) -> Matrix {
    let d = basis.nrows();
    let k = basis.ncols();
    if k == 0 {
        return Matrix::identity(d, d);
    }
    null_space(&basis.transpose(), d - k)
}

/// Orthonormalize the columns of `m`; errors when they are numerically dependent.
pub fn orthonormalize(m: &Matrix) -> Result<Matrix> {
    let (q, r) = qr_positive(m);
    let scale = m.amax().max(f64::MIN_POSITIVE);
    for k in 0..r.ncols() {
        if r[(k, k)] <= 1e-12 * scale {
            return Err(CoreError::Argument(format!(
                "columns are linearly dependent (pivot {k} is {:.3e})",
                r[(k, k)]
            )));
        }
    }
    Ok(q)
}

/// Extend an orthonormal set of columns to a full orthonormal basis.
pub fn complete_basis(basis: &Matrix) -> Matrix {
    let d = basis.nrows();
    let k = basis.ncols();
    let comp = orthogonal_complement(basis);
    let mut full = Matrix::zeros(d, d);
    full.columns_mut(0, k).copy_from(basis);
    full.columns_mut(k, d - k).copy_from(&comp);
    full
}

/// Plane rotation by `theta` (counter-clockwise).
pub fn rotation2(theta: f64) -> Matrix {
    let (s, c) = theta.sin_cos();
    Matrix::from_row_slice(2, 2, &[c, -s, s, c])
}

/// `d×d` rotation by `theta` acting on coordinates `(p, q)`.
pub fn givens(d: usize, p: usize, q: usize, theta: f64) -> Matrix {
    let (s, c) = theta.sin_cos();
    let mut g = Matrix::identity(d, d);
    g[(p, p)] = c;
    g[(q, q)] = c;
    g[(q, p)] = s;
    g[(p, q)] = -s;
    g
}

/// Eigenvalues of a small real matrix.
pub fn eigenvalues(m: &Matrix) -> Vec<Complex<f64>> {
    match nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 10_000) {
        Some(s) => s.complex_eigenvalues().iter().copied().collect(),
        None => m.clone().complex_eigenvalues().iter().copied().collect(),
    }
}

/// Spectral radius of a small real matrix.
pub fn spectral_radius(m: &Matrix) -> f64 {
    eigenvalues(m).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `log|det m|` and the sign of the determinant.
pub fn log_abs_det(m: &Matrix) -> (f64, f64) {
    let lu = m.clone().lu();
    let u = lu.u();
    let log = (0..u.nrows()).map(|k| u[(k, k)].abs().ln()).sum();
    (log, lu.determinant().signum())
}

/// A matrix carried together with a log-scale: the value is `exp(log_scale) * m`.
#[derive(Clone, Debug)]
pub struct ScaledMatrix {
    pub m: Matrix,
    pub log_scale: f64,
}

impl ScaledMatrix {
    pub fn identity(d: usize) -> Self {
        Self { m: Matrix::identity(d, d), log_scale: 0.0 }
    }

    pub fn new(m: Matrix) -> Self {
        let mut s = Self { m, log_scale: 0.0 };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        let a = self.m.amax();
        if a > 0.0 && a.is_finite() {
            self.m /= a;
            self.log_scale += a.ln();
        }
    }

    /// `other * self`, renormalized.
    pub fn left_mul(&self, other: &Matrix) -> Self {
        let mut s = Self { m: other * &self.m, log_scale: self.log_scale };
        s.normalize();
        s
    }

    /// `self * other` with both scaled.
    pub fn mul(&self, other: &ScaledMatrix) -> Self {
        let mut s = Self { m: &self.m * &other.m, log_scale: self.log_scale + other.log_scale };
        s.normalize();
        s
    }

    pub fn log_norm(&self) -> f64 {
        op_norm(&self.m).ln() + self.log_scale
    }

    pub fn log_conorm(&self) -> f64 {
        conorm(&self.m).ln() + self.log_scale
    }

    pub fn log_spectral_radius(&self) -> f64 {
        spectral_radius(&self.m).ln() + self.log_scale
    }
}

/// Product `ms[last] ⋯ ms[0]` as a scaled matrix.
pub fn scaled_product<'a, I>(d: usize, ms: I) -> ScaledMatrix
where
    I: IntoIterator<Item = &'a Matrix>,
{
    let mut acc = ScaledMatrix::identity(d);
    for m in ms {
        acc = acc.left_mul(m);
    }
    acc
}

/// Frobenius-normalized column vector.
pub fn unit(v: &DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        v.clone()
    }
}

/// A fixed, generic orthogonal matrix used to seed subspace iterations.
#[allow(clippy::approx_constant)]
pub fn generic_orthogonal(d: usize) -> Matrix {
    let m = Matrix::from_fn(d, d, |r, c| {
        let x = 1.0 + r as f64 * 0.754_877_666 + c as f64 * 0.569_840_290_998;
        (x * x * 2.718_281_828).sin() + if r == c { 0.5 } else { 0.0 }
    });
    qr_positive(&m).0
}

/// Deviation of `q^T q` from the identity.
pub fn orthogonality_defect(q: &Matrix) -> f64 {
    let k = q.ncols();
    (q.transpose() * q - Matrix::identity(k, k)).amax()
}
