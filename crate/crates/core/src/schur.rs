//! Periodic Schur-like frames for cyclic products.
//!
//! Orthogonal iteration around the orbit produces per-phase orthonormal frames
//! `U_j` in which every `T_j = U_{j+1}^T A_j U_j` is upper triangular, apart
//! from 2×2 diagonal blocks carrying complex-conjugate pairs of `A^n`. The
//! diagonal of the frame is ordered by decreasing modulus. All spectral data
//! are read off the diagonal blocks, so long products are never formed.

use crate::cocycle::CyclicCocycle;
use crate::error::{CoreError, Result};
use crate::linalg::{
    eigenvalues, generic_orthogonal, log_abs_det, null_space, orthogonal_complement, qr_positive, scaled_product,
    Matrix,
};

/// Two moduli `|μ_a|, |μ_b|` of `A^n` are tied when `|log|μ_a| − log|μ_b|| ≤ TIE_TOL`.
pub const TIE_TOL: f64 = 1e-8;

/// A 2×2 pair with `(tr² − 4 det)/(tr² + 4|det|)` above `−PARABOLIC_TOL` counts as real.
pub const PARABOLIC_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct SchurOptions {
    pub max_sweeps: usize,
    /// Off-block entries of `U_0^T U_n` below this split the frame.
    pub split_tol: f64,
}

impl Default for SchurOptions {
    fn default() -> Self {
        Self { max_sweeps: 60, split_tol: 1e-11 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BlockKind {
    Real { sign: f64 },
    Complex { argument: f64 },
}

/// A diagonal block of the frame; `log_modulus` is `log|μ|` for `A^n` itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchurBlock {
    pub start: usize,
    pub size: usize,
    pub log_modulus: f64,
    pub kind: BlockKind,
}

impl SchurBlock {
    pub fn is_real(&self) -> bool {
        matches!(self.kind, BlockKind::Real { .. })
    }
}

#[derive(Clone, Debug)]
pub struct PeriodicSchur {
    /// `U_j` for `j < n`; the frame after a full turn is `U_0` again.
    pub frames: Vec<Matrix>,
    /// `T_j = U_{j+1}^T A_j U_j`.
    pub factors: Vec<Matrix>,
    pub blocks: Vec<SchurBlock>,
    pub sweeps: usize,
}

impl PeriodicSchur {
    pub fn new(c: &CyclicCocycle) -> Result<Self> {
        Self::compute(c, None, SchurOptions::default())
    }

    /// Starts the iteration from `start`, typically the frame of a nearby cocycle.
    pub fn warm(c: &CyclicCocycle, start: &Matrix) -> Result<Self> {
        Self::compute(c, Some(start), SchurOptions::default())
    }

    pub fn compute(c: &CyclicCocycle, start: Option<&Matrix>, opts: SchurOptions) -> Result<Self> {
        let d = c.dim();
        let n = c.period();
        let mut q0 = match start {
            Some(s) if s.nrows() == d && s.ncols() == d => s.clone(),
            _ => generic_orthogonal(d),
        };
        let mut prev: Option<Vec<usize>> = None;
        let mut stable = 0;
        let mut sweeps = 0;
        let mut prev_coupling: Option<f64> = None;
        let (qs, rs, partition) = loop {
            sweeps += 1;
            let mut qs = Vec::with_capacity(n + 1);
            let mut rs = Vec::with_capacity(n);
            qs.push(q0.clone());
            for j in 0..n {
                let (q, r) = qr_positive(&(c.map(j) * &qs[j]));
                qs.push(q);
                rs.push(r);
            }
            let p = qs[0].transpose() * &qs[n];
            let partition = split_points(&p, opts.split_tol);
            if prev.as_ref() == Some(&partition) {
                stable += 1;
            } else {
                stable = 0;
            }
            // Keep sweeping while the coupling between blocks still shrinks:
            // it perturbs the block products, and near-parabolic pairs are
            // classified by a discriminant far below split_tol.
            let coupling = off_block(&p, &partition);
            let settled = coupling < 1e-15 || prev_coupling.is_some_and(|c: f64| coupling > 0.5 * c);
            let fully_split = partition.len() == d + 1;
            if ((fully_split || stable >= 3) && settled) || sweeps >= opts.max_sweeps {
                break (qs, rs, partition);
            }
            prev_coupling = Some(coupling);
            prev = Some(partition);
            q0 = qs[n].clone();
        };

        let mut frames: Vec<Matrix> = qs[..n].to_vec();
        let mut factors = rs;
        let p = qs[0].transpose() * &qs[n];
        factors[n - 1] = &p * &factors[n - 1];

        let mut bounds = partition;
        let mut coarse = coarse_blocks(&factors, &bounds);
        // Merge neighbours whose moduli are out of order; refinement sorts them.
        loop {
            let mut merged = false;
            for b in 0..coarse.len().saturating_sub(1) {
                if coarse[b + 1].1 > coarse[b].0 + TIE_TOL {
                    bounds.remove(b + 1);
                    merged = true;
                    break;
                }
            }
            if !merged {
                break;
            }
            coarse = coarse_blocks(&factors, &bounds);
        }

        let mut layout: Vec<(usize, usize)> = Vec::with_capacity(d);
        for w in bounds.windows(2) {
            let (s, e) = (w[0], w[1]);
            let k = e - s;
            if k == 1 {
                layout.push((s, 1));
                continue;
            }
            let diag: Vec<Matrix> = factors.iter().map(|t| t.view((s, s), (k, k)).into_owned()).collect();
            let (w_basis, sub) = refine_block(&diag)?;
            let mut sj = w_basis;
            for j in 0..n {
                let cols = frames[j].columns(s, k) * &sj;
                frames[j].columns_mut(s, k).copy_from(&cols);
                if j + 1 < n {
                    sj = qr_positive(&(&diag[j] * &sj)).0;
                }
            }
            let mut off = s;
            for size in sub {
                layout.push((off, size));
                off += size;
            }
        }

        for j in 0..n {
            factors[j] = frames[(j + 1) % n].transpose() * c.map(j) * &frames[j];
        }
        let blocks = layout.into_iter().map(|(s, k)| describe_block(&factors, s, k)).collect();
        Ok(Self { frames, factors, blocks, sweeps })
    }

    pub fn dim(&self) -> usize {
        self.frames[0].nrows()
    }

    pub fn period(&self) -> usize {
        self.frames.len()
    }

    /// Whether every eigenvalue of `A^n` is real.
    pub fn is_real(&self) -> bool {
        self.blocks.iter().all(SchurBlock::is_real)
    }

    /// `log|μ|` per frame position, largest first.
    pub fn log_moduli(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        for b in &self.blocks {
            for _ in 0..b.size {
                out.push(b.log_modulus);
            }
        }
        out
    }

    /// Frame positions grouped into modulus ties, as `(start, size)`.
    pub fn tie_clusters(&self) -> Vec<(usize, usize)> {
        tie_clusters(&self.log_moduli())
    }

    /// Lyapunov exponents per frame position (largest first), averaged within ties.
    pub fn exponents_desc(&self) -> Vec<f64> {
        let lm = self.log_moduli();
        let n = self.period() as f64;
        let mut out = vec![0.0; lm.len()];
        for (s, k) in tie_clusters(&lm) {
            let mean = lm[s..s + k].iter().sum::<f64>() / k as f64;
            for v in &mut out[s..s + k] {
                *v = mean / n;
            }
        }
        out
    }

    /// Block containing frame position `pos`.
    pub fn block_at(&self, pos: usize) -> &SchurBlock {
        self.blocks.iter().find(|b| pos >= b.start && pos < b.start + b.size).expect("position inside the frame")
    }
}

/// Boundaries `0 = b_0 < b_1 < … = d` of the finest block-upper-triangular
/// partition of `p` at tolerance `tol`.
fn split_points(p: &Matrix, tol: f64) -> Vec<usize> {
    let d = p.nrows();
    let mut out = vec![0];
    for k in 1..d {
        let lower = p.view((k, 0), (d - k, k)).amax();
        if lower < tol {
            out.push(k);
        }
    }
    out.push(d);
    out
}

/// Largest entry of `p` below the diagonal blocks of `bounds`.
fn off_block(p: &Matrix, bounds: &[usize]) -> f64 {
    let d = p.nrows();
    bounds[1..bounds.len() - 1].iter().map(|&k| p.view((k, 0), (d - k, k)).amax()).fold(0.0, f64::max)
}

/// (min, max) of `log|μ|` over each block of the partition.
fn coarse_blocks(factors: &[Matrix], bounds: &[usize]) -> Vec<(f64, f64)> {
    bounds
        .windows(2)
        .map(|w| {
            let (s, k) = (w[0], w[1] - w[0]);
            if k == 1 {
                let l: f64 = factors.iter().map(|t| t[(s, s)].abs().ln()).sum();
                return (l, l);
            }
            let diag: Vec<Matrix> = factors.iter().map(|t| t.view((s, s), (k, k)).into_owned()).collect();
            let prod = scaled_product(k, diag.iter());
            let lm: Vec<f64> = eigenvalues(&prod.m).iter().map(|z| z.norm().ln() + prod.log_scale).collect();
            (lm.iter().copied().fold(f64::INFINITY, f64::min), lm.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        })
        .collect()
}

fn tie_clusters(lm: &[f64]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut s = 0;
    for k in 1..=lm.len() {
        if k == lm.len() || (lm[k - 1] - lm[k]).abs() > TIE_TOL {
            out.push((s, k - s));
            s = k;
        }
    }
    out
}

/// Relative discriminant `(tr² − 4 det)/(tr² + 4|det|)` of a scaled 2×2 product.
pub fn relative_discriminant(m: &Matrix) -> f64 {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let denom = tr * tr + 4.0 * det.abs();
    if denom == 0.0 {
        return 0.0;
    }
    (tr * tr - 4.0 * det) / denom
}

/// Unit eigenvector of the larger-modulus eigenvalue of a 2×2 matrix with a
/// (numerically) real spectrum.
fn dominant_vector(m: &Matrix) -> Matrix {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let root = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let big = if tr >= 0.0 { (tr + root) / 2.0 } else { (tr - root) / 2.0 };
    null_space(&(m - Matrix::identity(2, 2) * big), 1)
}

/// Orthonormal basis of a `k×k` diagonal-block sequence whose flag is
/// invariant for the block product, largest modulus first, plus the sizes of
/// the resulting sub-blocks.
fn refine_block(diag: &[Matrix]) -> Result<(Matrix, Vec<usize>)> {
    let k = diag[0].nrows();
    let prod = scaled_product(k, diag.iter());
    let m = prod.m;
    if k == 2 {
        let disc = relative_discriminant(&m);
        if disc < -PARABOLIC_TOL {
            return Ok((Matrix::identity(2, 2), vec![2]));
        }
        let v = dominant_vector(&m);
        let mut w = Matrix::zeros(2, 2);
        w.set_column(0, &v.column(0));
        w.set_column(1, &orthogonal_complement(&v).column(0));
        return Ok((w, vec![1, 1]));
    }
    let mut basis = Matrix::identity(k, k);
    let mut cur = m;
    let mut w = Matrix::zeros(k, k);
    let mut filled = 0;
    let mut sizes = Vec::new();
    while filled < k {
        let left = k - filled;
        if left == 1 {
            w.columns_mut(filled, 1).copy_from(&basis);
            sizes.push(1);
            break;
        }
        let ev = eigenvalues(&cur);
        let z = ev
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .ok_or_else(|| CoreError::Numerical { reason: "empty spectrum".into(), condition: f64::NAN })?;
        let id = Matrix::identity(left, left);
        let mut complex = z.im.abs() > 1e-6 * z.norm();
        let mut pair = None;
        if complex {
            // Decide on the discriminant of the compression, as for k = 2:
            // eigenvalues of a near-parabolic pair only carry half the digits.
            let q = &cur * &cur - &cur * (2.0 * z.re) + &id * z.norm_sqr();
            let plane = if left == 2 { id.clone() } else { null_space(&q, 2) };
            let b = plane.transpose() * &cur * &plane;
            if relative_discriminant(&b) < -PARABOLIC_TOL {
                pair = Some(plane);
            } else {
                complex = false;
                pair = Some(plane * dominant_vector(&b));
            }
        }
        if complex && left == 2 {
            w.columns_mut(filled, 2).copy_from(&basis);
            sizes.push(2);
            break;
        }
        let (nv, s) = match pair {
            Some(v) if complex => (v, 2),
            Some(v) => (v, 1),
            None => (null_space(&(&cur - &id * z.re), 1), 1),
        };
        let comp = orthogonal_complement(&nv);
        w.columns_mut(filled, s).copy_from(&(&basis * &nv));
        basis = &basis * &comp;
        cur = comp.transpose() * &cur * &comp;
        filled += s;
        sizes.push(s);
    }
    Ok((w, sizes))
}

fn describe_block(factors: &[Matrix], s: usize, k: usize) -> SchurBlock {
    if k == 1 {
        let mut sign = 1.0;
        let mut log = 0.0;
        for t in factors {
            let v = t[(s, s)];
            log += v.abs().ln();
            if v < 0.0 {
                sign = -sign;
            }
        }
        return SchurBlock { start: s, size: 1, log_modulus: log, kind: BlockKind::Real { sign } };
    }
    let diag: Vec<Matrix> = factors.iter().map(|t| t.view((s, s), (k, k)).into_owned()).collect();
    let log_det: f64 = diag.iter().map(|b| log_abs_det(b).0).sum();
    let prod = scaled_product(k, diag.iter());
    let argument = eigenvalues(&prod.m).iter().map(|z| z.im.atan2(z.re).abs()).fold(0.0, f64::max);
    SchurBlock { start: s, size: k, log_modulus: log_det / k as f64, kind: BlockKind::Complex { argument } }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> Matrix {
        Matrix::from_diagonal(&nalgebra::DVector::from_row_slice(v))
    }

    #[test]
    fn diagonal_map_orders_descending() {
        let c = CyclicCocycle::new(vec![diag(&[0.5, 3.0, 1.5])]).unwrap();
        let s = PeriodicSchur::new(&c).unwrap();
        let lm = s.log_moduli();
        let want = [3f64.ln(), 1.5f64.ln(), 0.5f64.ln()];
        for (a, b) in lm.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{lm:?}");
        }
        assert!(s.is_real());
    }

    #[test]
    fn rotation_is_one_complex_block() {
        let r = crate::linalg::rotation2(std::f64::consts::PI / 3.0);
        let c = CyclicCocycle::new(vec![r * 2.0]).unwrap();
        let s = PeriodicSchur::new(&c).unwrap();
        assert_eq!(s.blocks.len(), 1);
        match s.blocks[0].kind {
            BlockKind::Complex { argument } => {
                assert!((argument - std::f64::consts::PI / 3.0).abs() < 1e-12)
            }
            _ => panic!("expected a complex block"),
        }
        assert!((s.blocks[0].log_modulus - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn factors_are_quasi_triangular() {
        let a = Matrix::from_row_slice(3, 3, &[1.0, 2.0, 0.1, -0.3, 0.8, 1.0, 0.2, 0.0, 1.5]);
        let b = Matrix::from_row_slice(3, 3, &[0.9, 0.0, -1.0, 0.4, 1.1, 0.3, 0.0, 0.7, 0.6]);
        let c = CyclicCocycle::new(vec![a, b]).unwrap();
        let s = PeriodicSchur::new(&c).unwrap();
        for t in &s.factors {
            for blk in &s.blocks {
                let below = blk.start + blk.size;
                for r in below..3 {
                    for col in blk.start..below {
                        assert!(t[(r, col)].abs() < 1e-9, "{t}");
                    }
                }
            }
        }
        let lm = s.log_moduli();
        assert!(lm.windows(2).all(|w| w[0] >= w[1] - 1e-12));
    }

    #[test]
    fn equal_moduli_are_one_tie() {
        let c = CyclicCocycle::new(vec![diag(&[2.0, -2.0, 0.5])]).unwrap();
        let s = PeriodicSchur::new(&c).unwrap();
        assert_eq!(s.tie_clusters(), vec![(0, 2), (2, 1)]);
    }
}
