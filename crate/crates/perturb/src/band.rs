//! Rotations inside a two-dimensional band of a periodic Schur frame.
//!
//! Frame positions `(p, p+1)` carry 2×2 diagonal blocks `B_j` of
//! `T_j = U_{j+1}^T A_j U_j`. Composing `A_j` with a rotation of that plane at
//! fiber `j+1` rotates the rows of `B_j` and leaves the block-triangular shape
//! of the frame intact, so every other eigenvalue of `A^n` and `|det|` stay
//! exactly where they were.

use std::f64::consts::PI;

use cocycle_core::linalg::{op_norm, rotation2, scaled_product, ScaledMatrix};
use cocycle_core::schur::relative_discriminant;
use cocycle_core::{CyclicCocycle, Matrix, PeriodicSchur};

use crate::error::{PerturbError, Result};
use crate::path::PathBuilder;

/// A band of the frame together with the rotations applied to it so far.
pub(crate) struct Band {
    /// Columns `p, p+1` of `U_{j+1}`, indexed by `j`.
    planes: Vec<Matrix>,
    /// `A_j` before any rotation of this band.
    start: Vec<Matrix>,
    norms: Vec<f64>,
    blocks: Vec<Matrix>,
    angles: Vec<f64>,
    limits: Vec<f64>,
    maps: Vec<Matrix>,
}

impl Band {
    /// `limits[j]` caps the total rotation angle at phase `j`.
    pub fn new(c: &CyclicCocycle, schur: &PeriodicSchur, p: usize, limits: Vec<f64>) -> Self {
        let n = c.period();
        let planes = (0..n).map(|j| schur.frames[(j + 1) % n].columns(p, 2).into_owned()).collect();
        let blocks = schur.factors.iter().map(|t| t.view((p, p), (2, 2)).into_owned()).collect();
        let start: Vec<Matrix> = c.maps().to_vec();
        let norms = start.iter().map(op_norm).collect();
        Self { planes, maps: start.clone(), start, norms, blocks, angles: vec![0.0; n], limits }
    }

    pub fn period(&self) -> usize {
        self.blocks.len()
    }

    fn map_at(&self, j: usize, angle: f64) -> Matrix {
        let w = &self.planes[j];
        let g = rotation2(angle) - Matrix::identity(2, 2);
        &self.start[j] + w * g * (w.transpose() * &self.start[j])
    }

    /// `∏ B_j` started at fiber `k+1`, for every `k`: the product a rotation at
    /// phase `k` multiplies from the left.
    fn products(&self) -> Vec<ScaledMatrix> {
        let n = self.period();
        let mut prefix = Vec::with_capacity(n);
        let mut acc = ScaledMatrix::identity(2);
        for b in &self.blocks {
            acc = acc.left_mul(b);
            prefix.push(acc.clone());
        }
        let mut suffix = vec![ScaledMatrix::identity(2); n + 1];
        for k in (0..n).rev() {
            suffix[k] = suffix[k + 1].mul(&ScaledMatrix::new(self.blocks[k].clone()));
        }
        (0..n).map(|k| prefix[k].mul(&suffix[k + 1])).collect()
    }

    /// Band product at fiber 0.
    pub fn product(&self) -> ScaledMatrix {
        scaled_product(2, self.blocks.iter())
    }

    /// Log-moduli gap `log|μ_big| − log|μ_small|` of the band product.
    pub fn gap(&self) -> f64 {
        let m = self.product().m;
        gap_of(trace(&m).abs(), det(&m))
    }

    /// Rotates phase `k` by `delta`, pushing samples at most `spacing` apart.
    fn rotate(&mut self, k: usize, delta: f64, spacing: f64, out: &mut PathBuilder) -> Result<()> {
        let steps = ((delta.abs() * self.norms[k]) / spacing).ceil().max(1.0) as usize;
        let from = self.angles[k];
        for s in 1..=steps {
            let a = from + delta * s as f64 / steps as f64;
            self.maps[k] = self.map_at(k, a);
            out.push(CyclicCocycle::from_maps_unchecked(self.maps.clone())?)?;
        }
        self.angles[k] = from + delta;
        self.blocks[k] = rotation2(delta) * &self.blocks[k];
        Ok(())
    }

    /// Greedy single-phase rotations shrinking the gap to `target`.
    ///
    /// Each move turns one phase away from the maximum of `δ ↦ |tr R_δ X|`,
    /// which lowers the big modulus monotonically, and picks the phase whose
    /// move lowers the gap most.
    pub fn shrink_gap(&mut self, target: f64, spacing: f64, out: &mut PathBuilder) -> Result<()> {
        let n = self.period();
        let max_moves = 20 * n + 200;
        let mut stalls = 0;
        for _ in 0..max_moves {
            let cur = self.gap();
            // The gap of the n-step product is 2n times the exponent gap.
            if cur <= target + 1e-13 * (1.0 + target) + 2e-8 * n as f64 {
                return Ok(());
            }
            let mut best: Option<(usize, f64, f64, bool)> = None;
            for (k, x) in self.products().iter().enumerate() {
                let m = &x.m;
                let dt = det(m);
                let mut want = target_trace(dt, target);
                if target == 0.0 && dt > 0.0 {
                    // Aim just inside the parabolic tolerance: the moduli then agree exactly.
                    want *= 1.0 - 2e-13;
                }
                let (lo, hi) = (-self.limits[k] - self.angles[k], self.limits[k] - self.angles[k]);
                let Some((delta, reached)) = trace_move(trace(m), m[(0, 1)] - m[(1, 0)], want, lo, hi) else {
                    continue;
                };
                let done = reached <= want * (1.0 + 1e-15);
                let g = if done { target } else { gap_of(reached, dt) };
                let better = match best {
                    None => true,
                    Some((_, bd, bg, bdone)) => match (done, bdone) {
                        (true, true) => delta.abs() < bd.abs(),
                        (true, false) => true,
                        (false, true) => false,
                        (false, false) => g < bg,
                    },
                };
                if better {
                    best = Some((k, delta, g, done));
                }
            }
            let Some((k, delta, g, _)) = best else {
                return Err(PerturbError::capability(
                    "no phase has rotation budget left",
                    cur - target,
                    Some(out.snapshot()),
                ));
            };
            if cur - g <= 1e-12 * (1.0 + cur) {
                return Err(PerturbError::capability(
                    "rotation budget exhausted before the gap closed",
                    cur - target,
                    Some(out.snapshot()),
                ));
            }
            self.rotate(k, delta, spacing, out)?;
            stalls = if self.gap() < cur { 0 } else { stalls + 1 };
            if stalls >= 3 {
                return Err(PerturbError::capability(
                    "rotations no longer shrink the gap",
                    cur - target,
                    Some(out.snapshot()),
                ));
            }
        }
        Err(PerturbError::capability("move limit reached", self.gap() - target, Some(out.snapshot())))
    }

    fn uniform_discriminant(&self, t: f64, sign: f64) -> f64 {
        let rotated: Vec<Matrix> =
            self.blocks.iter().zip(&self.limits).map(|(b, &lim)| rotation2(sign * t.min(lim)) * b).collect();
        relative_discriminant(&scaled_product(2, rotated.iter()).m)
    }

    /// Bisects in `[lo, hi]` for the first angle where the relative
    /// discriminant reaches `−PARABOLIC_TOL/2`: counted as real, with the two
    /// moduli equal and rounding unable to split them.
    fn first_real(&self, mut lo: f64, mut hi: f64, sign: f64) -> f64 {
        let level = -0.5 * cocycle_core::schur::PARABOLIC_TOL;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.uniform_discriminant(mid, sign) >= level {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Rotates every phase by the same angle until the band product first has
    /// a real spectrum. Until then the pair is complex with modulus
    /// `√det`, so the graph does not move.
    pub fn realify(&mut self, spacing: f64, out: &mut PathBuilder) -> Result<()> {
        let tol = cocycle_core::schur::PARABOLIC_TOL;
        let d0 = self.uniform_discriminant(0.0, 1.0);
        if d0 >= -tol {
            return Ok(());
        }
        let n = self.period();
        let tmax = self.limits.iter().copied().fold(0.0, f64::max);
        let h = (tmax / 32.0).min(PI / (8.0 * n as f64)).max(tmax / 1e6);
        let mut hit: Option<(f64, f64)> = None;
        let mut residual = d0;
        for sign in [-1.0, 1.0] {
            let mut prev = 0.0;
            let mut t = 0.0;
            let (mut d_prev2, mut d_prev) = (f64::NEG_INFINITY, d0);
            while t < tmax {
                t = (t + h).min(tmax);
                let dv = self.uniform_discriminant(t, sign);
                residual = residual.max(dv);
                // A local maximum may only touch zero (parabolic products).
                if dv < 0.0 && d_prev > d_prev2 && d_prev >= dv {
                    let lo = (prev - h).max(0.0);
                    let (tm, vm) = golden_max(|x| self.uniform_discriminant(x, sign), lo, t);
                    residual = residual.max(vm);
                    if vm >= -tol {
                        let first = if vm > -0.5 * tol { self.first_real(lo, tm, sign) } else { tm };
                        if hit.is_none_or(|(bt, _)| first < bt * (1.0 - 1e-9)) {
                            hit = Some((first, sign));
                        }
                        break;
                    }
                }
                d_prev2 = d_prev;
                d_prev = dv;
                if dv >= 0.0 {
                    let first = self.first_real(prev, t, sign);
                    if hit.is_none_or(|(bt, _)| first < bt * (1.0 - 1e-9)) {
                        hit = Some((first, sign));
                    }
                    break;
                }
                prev = t;
            }
        }
        let Some((t_hit, sign)) = hit else {
            return Err(PerturbError::capability(
                "no uniform band rotation within budget reaches a real spectrum",
                residual,
                Some(out.snapshot()),
            ));
        };
        let top = self.norms.iter().zip(&self.limits).map(|(k, l)| k * t_hit.min(*l)).fold(0.0, f64::max);
        let steps = (top / spacing).ceil().max(1.0) as usize;
        for s in 1..=steps {
            let t = t_hit * s as f64 / steps as f64;
            for j in 0..n {
                self.maps[j] = self.map_at(j, sign * t.min(self.limits[j]));
            }
            out.push(CyclicCocycle::from_maps_unchecked(self.maps.clone())?)?;
        }
        for j in 0..n {
            let a = sign * t_hit.min(self.limits[j]);
            self.angles[j] = a;
            self.blocks[j] = rotation2(a) * &self.blocks[j];
        }
        Ok(())
    }
}

/// Maximizer of `f` on `[lo, hi]` by golden-section search.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..100 {
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        }
    }
    if fa >= fb {
        (a, fa)
    } else {
        (b, fb)
    }
}

/// Per-phase rotation angles keeping `‖A_t(x) − base(x)‖ ≤ cap`, given the
/// current deviation of `cur` from `base`.
pub(crate) fn angle_limits(base: &CyclicCocycle, cur: &CyclicCocycle, cap: f64) -> Vec<f64> {
    base.maps()
        .iter()
        .zip(cur.maps())
        .map(|(a, b)| {
            let room = cap - op_norm(&(b - a));
            if room <= 0.0 {
                return 0.0;
            }
            // ‖(R_θ − I)B‖ ≤ 2 sin(θ/2)‖B‖.
            let s = (room / (2.0 * op_norm(b))).min(1.0);
            (2.0 * s.asin()).min(PI / 2.0) * (1.0 - 1e-12)
        })
        .collect()
}

pub(crate) fn trace(m: &Matrix) -> f64 {
    m[(0, 0)] + m[(1, 1)]
}

pub(crate) fn det(m: &Matrix) -> f64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Gap `log|μ_1/μ_2|` of a real 2×2 spectrum from `|tr|` and `det`; zero for a complex pair.
pub(crate) fn gap_of(abs_trace: f64, det: f64) -> f64 {
    let r = abs_trace / (2.0 * det.abs().sqrt());
    if det > 0.0 {
        if r <= 1.0 {
            0.0
        } else {
            2.0 * r.acosh()
        }
    } else {
        2.0 * r.asinh()
    }
}

/// `|tr|` at which a 2×2 matrix with determinant `det` has gap `gap`.
pub(crate) fn target_trace(det: f64, gap: f64) -> f64 {
    let s = 2.0 * det.abs().sqrt();
    if det > 0.0 {
        s * (gap / 2.0).cosh()
    } else {
        s * (gap / 2.0).sinh()
    }
}

/// `δ ∈ [lo, hi]` moving `|a cos δ + b sin δ|` monotonically from `|a|`
/// down towards `want`, and the value reached. `None` when `|a|` is already
/// at or below `want` or no budget points the right way.
pub(crate) fn trace_move(a: f64, b: f64, want: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let (a, b) = if a < 0.0 { (-a, -b) } else { (a, b) };
    if a <= want {
        return None;
    }
    let r = a.hypot(b);
    let phi = b.atan2(a);
    let dir = if phi > 0.0 || (phi == 0.0 && hi < -lo) { -1.0 } else { 1.0 };
    let room = if dir > 0.0 { hi } else { -lo };
    if room <= 0.0 {
        return None;
    }
    // Angle from φ to acos(want/r), written without cancellation.
    let bb = b.abs();
    let s = ((r - want) * (r + want)).sqrt();
    let full = (r * r * (a - want) * (a + want) / (s * a + want * bb)).atan2(want * a + s * bb);
    let t = full.clamp(0.0, room);
    let reached = if t >= full { want } else { r * (t + phi.abs()).cos() };
    Some((dir * t, reached))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_and_target_trace_invert() {
        for det in [2.0, 0.3, -1.5] {
            for g in [0.0, 0.1, 3.0] {
                let tr = target_trace(det, g);
                assert!((gap_of(tr, det) - g).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trace_move_reaches_target() {
        // tr(R_δ diag(2, 1/2)) = 2.5 cos δ; |tr| = 2 at δ = acos(0.8).
        let (delta, reached) = trace_move(2.5, 0.0, 2.0, -1.0, 1.0).unwrap();
        assert!((delta.abs() - 0.8f64.acos()).abs() < 1e-15);
        assert_eq!(reached, 2.0);
        let (delta, reached) = trace_move(2.5, 0.0, 2.0, -0.1, 0.1).unwrap();
        assert!((delta.abs() - 0.1).abs() < 1e-15);
        assert!((reached - 2.5 * 0.1f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn trace_move_refuses_wrong_direction() {
        // φ > 0 wants a negative δ; a budget on the positive side only is useless.
        assert!(trace_move(1.0, 1.0, 0.5, 0.0, 1.0).is_none());
    }
}
