//! Dominated splittings of cyclic cocycles.
//!
//! Invariant splittings of a cyclic cocycle are sums of generalized
//! eigenspaces of `A^n` grouped by modulus. The fast bundles come from the
//! forward Schur frames, the slow ones as orthogonal complements of the
//! dominant subspaces of the adjoint cocycle; one pass over each gives every
//! cut at once.

use serde::{Deserialize, Serialize};

use crate::angle::Subspace;
use crate::cocycle::CyclicCocycle;
use crate::error::{CoreError, Result};
use crate::linalg::{null_space, orthogonal_complement, orthonormalize, singular_values, Matrix, ScaledMatrix};
use crate::schur::{PeriodicSchur, TIE_TOL};

/// Invariance tolerance (sine of the largest principal angle).
pub const INVARIANCE_TOL: f64 = 1e-8;

/// Threshold of the domination ratio.
pub const DOMINATION_THRESHOLD: f64 = 0.5;

/// An invariant splitting: per phase, bundles ordered from slowest to fastest.
#[derive(Clone, Debug)]
pub struct InvariantSplitting {
    /// Cumulative dimensions `i_1 < … < i_{m−1}` of the cuts.
    pub indices: Vec<usize>,
    /// `bundles[j][b]` is bundle `b` over phase `j`.
    pub bundles: Vec<Vec<Subspace>>,
}

impl InvariantSplitting {
    pub fn bundle_count(&self) -> usize {
        self.indices.len() + 1
    }

    pub fn is_trivial(&self) -> bool {
        self.indices.is_empty()
    }

    /// Per-phase sum of the first `b` bundles (dimension `indices[b−1]`).
    pub fn slow_sum(&self, b: usize) -> Result<Vec<Subspace>> {
        self.bundles
            .iter()
            .map(|bs| {
                let mut acc = bs[0].clone();
                for s in &bs[1..b] {
                    acc = acc.sum(s)?;
                }
                Ok(acc)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub index: usize,
    pub ell: usize,
    /// `max_x ‖A^ℓ|F(x)‖ / 𝔪(A^ℓ|G(x))`; absent without an invariant splitting.
    pub worst_ratio: Option<f64>,
    pub worst_phase: Option<usize>,
    pub dominated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Natural log of the worst ratio, kept for ratios that underflow.
    #[serde(skip)]
    pub worst_log_ratio: f64,
}

/// Forward and adjoint frames of a cocycle, from which every invariant
/// index-`i` splitting is read off.
#[derive(Clone, Debug)]
pub struct SplittingFrames {
    fast: Vec<Matrix>,
    slow: Vec<Matrix>,
    log_moduli: Vec<f64>,
}

impl SplittingFrames {
    pub fn new(c: &CyclicCocycle) -> Result<Self> {
        let fwd = PeriodicSchur::new(c)?;
        let adj_c = c.adjoint();
        let adj = PeriodicSchur::new(&adj_c)?;
        let n = c.period();
        let mut slow = vec![Matrix::zeros(0, 0); n];
        for k in 0..n {
            slow[c.reversed_fiber(k)] = adj.frames[k].clone();
        }
        Ok(Self { log_moduli: fwd.log_moduli(), fast: fwd.frames, slow })
    }

    pub fn dim(&self) -> usize {
        self.log_moduli.len()
    }

    pub fn period(&self) -> usize {
        self.fast.len()
    }

    /// Whether the cut at `i` separates two moduli of `A^n`.
    pub fn cut_allowed(&self, i: usize) -> bool {
        let d = self.dim();
        i > 0 && i < d && self.log_moduli[d - i - 1] - self.log_moduli[d - i] > TIE_TOL
    }

    /// Orthonormal basis of the slow `i`-dimensional bundle over phase `j`.
    pub fn slow_basis(&self, j: usize, i: usize) -> Matrix {
        let d = self.dim();
        self.slow[j % self.period()].columns(d - i, i).into_owned()
    }

    /// Orthonormal basis of the fast `(d−i)`-dimensional bundle over phase `j`.
    pub fn fast_basis(&self, j: usize, i: usize) -> Matrix {
        self.fast[j % self.period()].columns(0, self.dim() - i).into_owned()
    }

    /// Basis of `F_b ∩ G_a` (the bundle between cuts `a < b`) over phase `j`.
    pub fn band_basis(&self, j: usize, a: usize, b: usize) -> Result<Matrix> {
        let d = self.dim();
        let s = if b == d { Matrix::identity(d, d) } else { self.slow_basis(j, b) };
        if a == 0 {
            return Ok(s);
        }
        let g = self.fast_basis(j, a);
        let resid = &s - &g * (g.transpose() * &s);
        let coeff = null_space(&resid, b - a);
        orthonormalize(&(s * coeff))
    }

    /// Worst log of the domination ratio for the cut at `i`, with its phase.
    pub fn worst_log_ratio(&self, c: &CyclicCocycle, i: usize, ell: usize) -> Result<(usize, f64)> {
        let n = self.period();
        let f: Vec<Matrix> = (0..n).map(|j| self.slow_basis(j, i)).collect();
        let g: Vec<Matrix> = (0..n).map(|j| self.fast_basis(j, i)).collect();
        worst_log_ratio(c, &f, &g, ell)
    }

    pub fn report(&self, c: &CyclicCocycle, i: usize, ell: usize) -> Result<DominationReport> {
        check_ell(ell)?;
        if !self.cut_allowed(i) {
            return Ok(DominationReport {
                index: i,
                ell,
                worst_ratio: None,
                worst_phase: None,
                dominated: false,
                reason: Some("no_invariant_splitting".into()),
                worst_log_ratio: f64::INFINITY,
            });
        }
        let (phase, worst) = self.worst_log_ratio(c, i, ell)?;
        Ok(DominationReport {
            index: i,
            ell,
            worst_ratio: Some(worst.exp()),
            worst_phase: Some(phase),
            dominated: worst < DOMINATION_THRESHOLD.ln(),
            reason: None,
            worst_log_ratio: worst,
        })
    }

    /// Splitting cut at exactly `cuts` (each must be allowed).
    pub fn splitting(&self, cuts: &[usize]) -> Result<InvariantSplitting> {
        let d = self.dim();
        let mut edges = vec![0];
        edges.extend_from_slice(cuts);
        edges.push(d);
        let bundles = (0..self.period())
            .map(|j| {
                edges.windows(2).map(|w| Subspace::new(self.band_basis(j, w[0], w[1])?)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(InvariantSplitting { indices: cuts.to_vec(), bundles })
    }
}

fn check_ell(ell: usize) -> Result<()> {
    if ell == 0 || !ell.is_power_of_two() {
        return Err(CoreError::Argument(format!("ell = {ell} is not a power of two")));
    }
    Ok(())
}

/// The invariant splitting `F ⊕ G` with `dim F = i` (slow) when the cut at `i`
/// separates moduli of `A^n`.
pub fn candidate_splitting(c: &CyclicCocycle, i: usize) -> Result<Option<InvariantSplitting>> {
    if i == 0 || i >= c.dim() {
        return Err(CoreError::Argument(format!("index {i} outside 1..{}", c.dim())));
    }
    let frames = SplittingFrames::new(c)?;
    if !frames.cut_allowed(i) {
        return Ok(None);
    }
    frames.splitting(&[i]).map(Some)
}

/// Evaluates the ℓ-domination ratio of the index-`i` splitting at every phase.
pub fn check_domination(c: &CyclicCocycle, i: usize, ell: usize) -> Result<DominationReport> {
    if i == 0 || i >= c.dim() {
        return Err(CoreError::Argument(format!("index {i} outside 1..{}", c.dim())));
    }
    SplittingFrames::new(c)?.report(c, i, ell)
}

/// Cuts of the finest ℓ-dominated splitting.
pub fn dominated_indices(c: &CyclicCocycle, ell: usize) -> Result<Vec<usize>> {
    let frames = SplittingFrames::new(c)?;
    dominated_indices_with(c, &frames, ell)
}

pub fn dominated_indices_with(c: &CyclicCocycle, frames: &SplittingFrames, ell: usize) -> Result<Vec<usize>> {
    check_ell(ell)?;
    let mut out = Vec::new();
    for i in 1..c.dim() {
        if frames.report(c, i, ell)?.dominated {
            out.push(i);
        }
    }
    Ok(out)
}

/// The finest ℓ-dominated splitting (trivial when nothing is dominated).
pub fn finest_splitting(c: &CyclicCocycle, ell: usize) -> Result<InvariantSplitting> {
    let frames = SplittingFrames::new(c)?;
    let cuts = dominated_indices_with(c, &frames, ell)?;
    frames.splitting(&cuts)
}

/// `max_j` of the sine of the largest principal angle between `A_j F_j` and `F_{j+1}`.
pub fn invariance_residual(c: &CyclicCocycle, f: &[Subspace]) -> Result<(usize, f64)> {
    let n = c.period();
    if f.len() != n {
        return Err(CoreError::Argument(format!("{} subspaces for period {n}", f.len())));
    }
    let mut worst = (0, 0.0);
    for j in 0..n {
        let img = orthonormalize(&(c.map(j) * f[j].basis()))?;
        let next = f[(j + 1) % n].basis();
        let resid = &img - next * (next.transpose() * &img);
        let r = singular_values(&resid)[0];
        if r > worst.1 {
            worst = (j, r);
        }
    }
    Ok(worst)
}

/// Worst log-ratio `max_x log(‖A^ℓ|F(x)‖ / 𝔪(A^ℓ|G(x)))` for explicitly given
/// invariant bundles `f` and `g` (not necessarily complementary).
pub fn bundle_log_ratio(c: &CyclicCocycle, f: &[Subspace], g: &[Subspace], ell: usize) -> Result<f64> {
    check_ell(ell)?;
    if f.len() != c.period() || g.len() != c.period() {
        return Err(CoreError::Argument("bundles must be given at every phase".into()));
    }
    let f: Vec<Matrix> = f.iter().map(|s| s.basis().clone()).collect();
    let g: Vec<Matrix> = g.iter().map(|s| s.basis().clone()).collect();
    Ok(worst_log_ratio(c, &f, &g, ell)?.1)
}

/// Ratio windows of length `ell` are assembled by doubling, so every phase
/// costs `log2 ell` block products.
fn worst_log_ratio(c: &CyclicCocycle, f: &[Matrix], g: &[Matrix], ell: usize) -> Result<(usize, f64)> {
    let n = c.period();
    let mut fwd = Vec::with_capacity(n);
    let mut inv = Vec::with_capacity(n);
    for j in 0..n {
        let bf = f[(j + 1) % n].transpose() * c.map(j) * &f[j];
        let bg = g[(j + 1) % n].transpose() * c.map(j) * &g[j];
        let bg_inv = bg.try_inverse().ok_or_else(|| CoreError::Numerical {
            reason: format!("restricted block at phase {j} is singular"),
            condition: f64::INFINITY,
        })?;
        fwd.push(ScaledMatrix::new(bf));
        inv.push(ScaledMatrix::new(bg_inv));
    }
    let mut h = 1;
    while h < ell {
        fwd = (0..n).map(|j| fwd[(j + h) % n].mul(&fwd[j])).collect();
        inv = (0..n).map(|j| inv[j].mul(&inv[(j + h) % n])).collect();
        h *= 2;
    }
    Ok((0..n)
        .map(|j| (j, fwd[j].log_norm() + inv[j].log_norm()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("period is positive"))
}

/// Per-phase frames `[F_j | F_j^⊥]` adapted to an invariant subbundle.
pub fn adapted_frames(f: &[Subspace]) -> Vec<Matrix> {
    f.iter()
        .map(|s| {
            let d = s.ambient_dim();
            let k = s.dim();
            let mut w = Matrix::zeros(d, d);
            w.columns_mut(0, k).copy_from(s.basis());
            w.columns_mut(k, d - k).copy_from(&orthogonal_complement(s.basis()));
            w
        })
        .collect()
}

fn check_subbundle(c: &CyclicCocycle, f: &[Subspace]) -> Result<usize> {
    let n = c.period();
    if f.len() != n {
        return Err(CoreError::Argument(format!("{} subspaces for period {n}", f.len())));
    }
    let k = f[0].dim();
    for s in f {
        if s.ambient_dim() != c.dim() {
            return Err(CoreError::Dimension { expected: c.dim(), found: s.ambient_dim() });
        }
        if s.dim() != k {
            return Err(CoreError::Argument("subbundle dimension varies along the orbit".into()));
        }
    }
    if k >= c.dim() {
        return Err(CoreError::Argument("subbundle must be proper".into()));
    }
    let (phase, residual) = invariance_residual(c, f)?;
    if residual > INVARIANCE_TOL {
        return Err(CoreError::NotInvariant { phase, residual });
    }
    Ok(k)
}

/// `(A|F, A/F)` in orthonormal coordinates of `F` and `F^⊥`.
pub fn restrict_and_quotient(c: &CyclicCocycle, f: &[Subspace]) -> Result<(CyclicCocycle, CyclicCocycle)> {
    let k = check_subbundle(c, f)?;
    let d = c.dim();
    let n = c.period();
    let w = adapted_frames(f);
    let mut res = Vec::with_capacity(n);
    let mut quo = Vec::with_capacity(n);
    for j in 0..n {
        let b = w[(j + 1) % n].transpose() * c.map(j) * &w[j];
        res.push(b.view((0, 0), (k, k)).into_owned());
        quo.push(b.view((k, k), (d - k, d - k)).into_owned());
    }
    Ok((CyclicCocycle::from_maps_unchecked(res)?, CyclicCocycle::from_maps_unchecked(quo)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    Restricted,
    Quotient,
}

/// Replaces `A|F` or `A/F` by `replacement`, keeping the off-diagonal block.
pub fn extend_over(
    c: &CyclicCocycle,
    f: &[Subspace],
    replacement: &CyclicCocycle,
    which: Block,
) -> Result<CyclicCocycle> {
    let k = check_subbundle(c, f)?;
    let d = c.dim();
    let n = c.period();
    let (off, size) = match which {
        Block::Restricted => (0, k),
        Block::Quotient => (k, d - k),
    };
    if replacement.dim() != size {
        return Err(CoreError::Dimension { expected: size, found: replacement.dim() });
    }
    if replacement.period() != n {
        return Err(CoreError::Argument(format!("replacement period {} differs from {n}", replacement.period())));
    }
    let w = adapted_frames(f);
    let maps = (0..n)
        .map(|j| {
            let mut b = w[(j + 1) % n].transpose() * c.map(j) * &w[j];
            b.view_mut((off, off), (size, size)).copy_from(replacement.map(j));
            &w[(j + 1) % n] * b * w[j].transpose()
        })
        .collect();
    CyclicCocycle::from_maps_unchecked(maps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::lyapunov_graph;

    fn diag(v: &[f64]) -> Matrix {
        Matrix::from_diagonal(&nalgebra::DVector::from_row_slice(v))
    }

    #[test]
    fn diagonal_ratio() {
        let c = CyclicCocycle::new(vec![diag(&[0.5, 2.0])]).unwrap();
        let r = check_domination(&c, 1, 1).unwrap();
        assert!((r.worst_ratio.unwrap() - 0.25).abs() < 1e-14);
        assert!(r.dominated);
    }

    #[test]
    fn weak_gap_needs_longer_time() {
        let c = CyclicCocycle::new(vec![diag(&[0.9, 1.1])]).unwrap();
        let r1 = check_domination(&c, 1, 1).unwrap();
        assert!((r1.worst_ratio.unwrap() - 9.0 / 11.0).abs() < 1e-14);
        assert!(!r1.dominated);
        let r8 = check_domination(&c, 1, 8).unwrap();
        assert!((r8.worst_ratio.unwrap() - (9.0f64 / 11.0).powi(8)).abs() < 1e-13);
        assert!(r8.dominated);
    }

    #[test]
    fn identity_is_never_dominated() {
        let c = CyclicCocycle::identity(3, 4);
        for i in 1..3 {
            let r = check_domination(&c, i, 4).unwrap();
            assert!(!r.dominated);
            assert_eq!(r.reason.as_deref(), Some("no_invariant_splitting"));
        }
        assert!(finest_splitting(&c, 1).unwrap().is_trivial());
    }

    #[test]
    fn three_bundles() {
        let c = CyclicCocycle::new(vec![diag(&[0.25, 1.0, 4.0])]).unwrap();
        let s = finest_splitting(&c, 1).unwrap();
        assert_eq!(s.indices, vec![1, 2]);
        let b = &s.bundles[0];
        for (k, sub) in b.iter().enumerate() {
            assert_eq!(sub.dim(), 1);
            assert!((sub.basis()[(k, 0)].abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_has_no_candidate() {
        let r = crate::linalg::rotation2(std::f64::consts::PI / 3.0);
        let c = CyclicCocycle::new(vec![r]).unwrap();
        assert!(candidate_splitting(&c, 1).unwrap().is_none());
    }

    #[test]
    fn ell_must_be_power_of_two() {
        let c = CyclicCocycle::identity(2, 1);
        assert!(check_domination(&c, 1, 3).is_err());
    }

    #[test]
    fn upper_triangular_quotient() {
        let a = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 0.7]);
        let b = Matrix::from_row_slice(2, 2, &[1.5, -0.4, 0.0, 0.3]);
        let c = CyclicCocycle::new(vec![a, b]).unwrap();
        let e1 = Subspace::span(&Matrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
        let (res, quo) = restrict_and_quotient(&c, &[e1.clone(), e1]).unwrap();
        assert!((res.map(0)[(0, 0)] - 2.0).abs() < 1e-14);
        assert!((quo.map(0)[(0, 0)].abs() - 0.7).abs() < 1e-14);
        assert!((quo.map(1)[(0, 0)].abs() - 0.3).abs() < 1e-14);
    }

    #[test]
    fn replace_restricted_block() {
        let c = CyclicCocycle::new(vec![diag(&[0.5, 2.0])]).unwrap();
        let e1 = Subspace::span(&Matrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
        let one = CyclicCocycle::new(vec![Matrix::identity(1, 1)]).unwrap();
        let out = extend_over(&c, &[e1], &one, Block::Restricted).unwrap();
        let g = lyapunov_graph(&out).unwrap();
        assert!(g.sigma()[1].abs() < 1e-14);
        assert!((g.sigma()[2] - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn non_invariant_subbundle_rejected() {
        let r = crate::linalg::rotation2(0.3);
        let c = CyclicCocycle::new(vec![r]).unwrap();
        let e1 = Subspace::span(&Matrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
        assert!(matches!(restrict_and_quotient(&c, &[e1]), Err(CoreError::NotInvariant { .. })));
    }
}
