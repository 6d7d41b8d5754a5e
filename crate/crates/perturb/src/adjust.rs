//! Small spectrum adjustment in triangular frames.
//!
//! With a real spectrum every `T_j = U_{j+1}^T A_j U_j` is upper triangular,
//! so scaling row `k` of each `T_j` by `e^{tΔ_k}` moves the `k`-th exponent by
//! `tΔ_k` and nothing else.

use cocycle_core::graph::CONVEXITY_TOL;
use cocycle_core::linalg::op_norm;
use cocycle_core::{CyclicCocycle, LyapunovGraph, Matrix, PeriodicSchur};

use crate::error::{PerturbError, Result};
use crate::path::{PathBuilder, PerturbationPath};

/// Path along which the graph is the affine interpolation from `graph(c)` to `target`.
pub fn adjust_spectrum(c: &CyclicCocycle, target: &LyapunovGraph, eps: f64) -> Result<PerturbationPath> {
    if !(eps > 0.0) {
        return Err(PerturbError::Argument(format!("eps must be positive, got {eps}")));
    }
    if target.dim() != c.dim() {
        return Err(PerturbError::Argument(format!("target of dim {} for a cocycle of dim {}", target.dim(), c.dim())));
    }
    if !target.is_convex(CONVEXITY_TOL) {
        return Err(PerturbError::Argument("target graph is not convex".into()));
    }
    let schur = PeriodicSchur::new(c)?;
    if !schur.is_real() {
        return Err(PerturbError::Precondition("the period product has complex eigenvalues".into()));
    }
    let mut out = PathBuilder::new(c.clone(), eps)?;
    let caps = vec![eps; c.period()];
    adjust_step(&mut out, &schur, target, &caps, eps / 16.0)?;
    Ok(out.finish())
}

/// Moves the builder's current cocycle (with real frame `schur`) to `target`;
/// `caps[j]` bounds the extra deviation allowed at phase `j`.
pub(crate) fn adjust_step(
    out: &mut PathBuilder,
    schur: &PeriodicSchur,
    target: &LyapunovGraph,
    caps: &[f64],
    spacing: f64,
) -> Result<()> {
    let c = out.current().clone();
    let n = c.period();
    let d = c.dim();
    let cur = schur.exponents_desc();
    let mut want = target.exponents();
    want.reverse();
    let delta: Vec<f64> = want.iter().zip(&cur).map(|(w, c)| w - c).collect();
    let top = delta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if top == 0.0 {
        return Ok(());
    }
    let scale = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(d, delta.iter().map(|v| v.exp_m1())));
    let mut worst = 0.0f64;
    for j in 0..n {
        let dev = op_norm(&(&scale * &schur.factors[j]));
        if dev > caps[j] {
            return Err(PerturbError::Range(format!(
                "target needs deviation {dev:.3e} at phase {j}, budget {:.3e}",
                caps[j]
            )));
        }
        worst = worst.max(top * top.exp() * op_norm(&schur.factors[j]));
    }
    let steps = (worst / spacing).ceil().max(1.0) as usize;
    for s in 1..=steps {
        let t = s as f64 / steps as f64;
        let diag = nalgebra::DVector::from_iterator(d, delta.iter().map(|v| (t * v).exp_m1()));
        let maps = (0..n)
            .map(|j| {
                let u = &schur.frames[(j + 1) % n];
                let row_scaled = Matrix::from_diagonal(&diag) * &schur.factors[j];
                c.map(j) + u * row_scaled * schur.frames[j].transpose()
            })
            .collect();
        out.push(CyclicCocycle::from_maps_unchecked(maps)?)?;
    }
    Ok(())
}
