//! Overflow-safe period products via a running QR.

use crate::cocycle::CyclicCocycle;
use crate::error::{CoreError, Result};
use crate::linalg::{qr_positive, Matrix};

/// Largest `|log_scale|` for which [`StabilizedProduct::to_matrix`] still succeeds.
const MAX_LOG_SCALE: f64 = 700.0;

/// `A^len(x) = exp(log_scale) · q · r` with `q` orthogonal and `r` upper triangular.
#[derive(Clone, Debug)]
pub struct StabilizedProduct {
    pub q: Matrix,
    pub r: Matrix,
    pub log_scale: f64,
}

impl StabilizedProduct {
    /// Dense product; a range error if it would over- or underflow.
    pub fn to_matrix(&self) -> Result<Matrix> {
        let amax = self.r.amax().max(f64::MIN_POSITIVE).ln();
        if (self.log_scale + amax).abs() > MAX_LOG_SCALE {
            return Err(CoreError::Range { log_scale: self.log_scale });
        }
        Ok(&self.q * &self.r * self.log_scale.exp())
    }
}

/// `A^n` at `phase`.
pub fn period_product(c: &CyclicCocycle, phase: usize) -> Result<StabilizedProduct> {
    if phase >= c.period() {
        return Err(CoreError::Argument(format!("phase {phase} out of range for period {}", c.period())));
    }
    Ok(stabilized_product(c, phase, c.period()))
}

/// `A^len` starting at `phase`, wrapping cyclically.
pub fn stabilized_product(c: &CyclicCocycle, phase: usize, len: usize) -> StabilizedProduct {
    let d = c.dim();
    let mut q = Matrix::identity(d, d);
    let mut r = Matrix::identity(d, d);
    let mut log_scale = 0.0;
    for k in 0..len {
        let (q1, rk) = qr_positive(&(c.map(phase + k) * &q));
        q = q1;
        r = rk * r;
        let a = r.amax();
        r /= a;
        log_scale += a.ln();
    }
    StabilizedProduct { q, r, log_scale }
}
