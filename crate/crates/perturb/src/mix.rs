//! Mixing two neighbouring exponents.

use cocycle_core::{check_domination, CyclicCocycle, Matrix, PeriodicSchur};

use crate::band::{angle_limits, det, target_trace, trace, trace_move, Band};
use crate::error::{PerturbError, Result};
use crate::path::{PathBuilder, PerturbationPath};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixOptions {
    /// Scale at which the index must not be dominated.
    pub ell: usize,
    /// Stop once `σ_i` reaches this value instead of the midpoint.
    pub target: Option<f64>,
}

impl Default for MixOptions {
    fn default() -> Self {
        Self { ell: 64, target: None }
    }
}

/// Raises `σ_i` to `(σ_{i−1} + σ_{i+1})/2` along an `eps`-short path.
pub fn mix_two_exponents(c: &CyclicCocycle, i: usize, eps: f64) -> Result<PerturbationPath> {
    mix_with(c, i, eps, &MixOptions::default())
}

pub fn mix_with(c: &CyclicCocycle, i: usize, eps: f64, opts: &MixOptions) -> Result<PerturbationPath> {
    let d = c.dim();
    if d < 2 || i == 0 || i >= d {
        return Err(PerturbError::Argument(format!("index {i} outside 1..{d}")));
    }
    if !(eps > 0.0) {
        return Err(PerturbError::Argument(format!("eps must be positive, got {eps}")));
    }
    let mut out = PathBuilder::new(c.clone(), eps)?;
    let s = out.current_graph().sigma().to_vec();
    let mid = 0.5 * (s[i - 1] + s[i + 1]);
    let goal = opts.target.unwrap_or(mid);
    if goal > mid + 1e-12 {
        return Err(PerturbError::Range(format!("target σ_{i} = {goal} lies above the midpoint {mid}")));
    }
    // Also covers a complex pair at i, whose two exponents already agree.
    if goal <= s[i] + 1e-12 {
        return Ok(out.finish());
    }
    let schur = PeriodicSchur::new(c)?;
    if !schur.is_real() {
        return Err(PerturbError::Precondition("the period product has complex eigenvalues".into()));
    }
    let report = check_domination(c, i, opts.ell)?;
    if report.dominated {
        return Err(PerturbError::Dominated { index: i, ell: opts.ell, ratio: report.worst_ratio.unwrap_or(f64::NAN) });
    }
    let limits = angle_limits(c, c, eps);
    mix_step(&mut out, &schur, i, goal, limits, eps / 16.0)?;
    Ok(out.finish())
}

/// Raises `σ_i` of the builder's current cocycle to `goal` inside the frame
/// `schur` of that cocycle.
pub(crate) fn mix_step(
    out: &mut PathBuilder,
    schur: &PeriodicSchur,
    i: usize,
    goal: f64,
    limits: Vec<f64>,
    spacing: f64,
) -> Result<()> {
    let d = schur.dim();
    let n = schur.period() as f64;
    let p = d - i - 1;
    if !schur.block_at(p).is_real() || !schur.block_at(p + 1).is_real() {
        return Err(PerturbError::Precondition(format!("band at σ_{i} carries a complex pair")));
    }
    let s = out.current_graph().sigma().to_vec();
    let mid = 0.5 * (s[i - 1] + s[i + 1]);
    let mut band = Band::new(out.current(), schur, p, limits);
    let gap = band.gap();
    // Moving σ_i up by r moves log|μ_small| up and log|μ_big| down by n·r.
    let target = if goal >= mid - 1e-12 { 0.0 } else { (gap - 2.0 * n * (goal - s[i])).max(0.0) };
    band.shrink_gap(target, spacing, out)
}

/// Least rotation angle `β` and direction `s` such that `θ ↦ ρ(R_{sθ}B)`
/// decreases on `[0, β]` down to the value where the two moduli meet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusShrink {
    pub beta: f64,
    pub sign: f64,
}

/// For a 2×2 `b` with real spectrum: `β` is the least `θ ≥ 0` with
/// `|tr R_{sθ}b| = 2√det` (or `tr = 0` when `det < 0`).
pub fn radius_shrink(b: &Matrix) -> Result<RadiusShrink> {
    if b.shape() != (2, 2) {
        return Err(PerturbError::Argument("radius_shrink needs a 2×2 matrix".into()));
    }
    let dt = det(b);
    if dt == 0.0 {
        return Err(PerturbError::Argument("matrix is singular".into()));
    }
    let want = target_trace(dt, 0.0);
    match trace_move(trace(b), b[(0, 1)] - b[(1, 0)], want, -std::f64::consts::PI, std::f64::consts::PI) {
        Some((delta, _)) => Ok(RadiusShrink { beta: delta.abs(), sign: if delta < 0.0 { -1.0 } else { 1.0 } }),
        None => Ok(RadiusShrink { beta: 0.0, sign: 1.0 }),
    }
}
