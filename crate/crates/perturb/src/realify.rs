//! Removing complex pairs from the spectrum of the period product.

use cocycle_core::{CyclicCocycle, PeriodicSchur};

use crate::band::{angle_limits, Band};
use crate::error::{PerturbError, Result};
use crate::path::{PathBuilder, PerturbationPath};

/// An `eps`-short path to a cocycle whose period product has real
/// eigenvalues, along which the Lyapunov graph stays put.
pub fn make_eigenvalues_real(c: &CyclicCocycle, eps: f64) -> Result<PerturbationPath> {
    if !(eps > 0.0) {
        return Err(PerturbError::Argument(format!("eps must be positive, got {eps}")));
    }
    let mut out = PathBuilder::new(c.clone(), eps)?;
    let schur = PeriodicSchur::new(c)?;
    for b in schur.blocks.iter().filter(|b| !b.is_real()) {
        let limits = angle_limits(c, out.current(), eps);
        let cur = out.current().clone();
        Band::new(&cur, &schur, b.start, limits).realify(eps / 16.0, &mut out)?;
    }
    Ok(out.finish())
}
