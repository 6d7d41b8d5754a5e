//! Majorization order and indices of graphs.

use std::ops::RangeInclusive;

use cocycle_core::LyapunovGraph;

use crate::error::{MajorizationError, Result};

/// Absolute tolerance of coordinate comparisons.
pub const ORDER_TOL: f64 = 1e-12;

/// Outcome of comparing `a` with `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Majorization {
    /// `a ⪯ b`: every `a_i ≤ b_i`.
    Below,
    Above,
    Equal,
    Incomparable,
    EndpointMismatch,
}

pub fn majorization_cmp(a: &LyapunovGraph, b: &LyapunovGraph) -> Result<Majorization> {
    majorization_cmp_slices(a.sigma(), b.sigma())
}

pub(crate) fn majorization_cmp_slices(a: &[f64], b: &[f64]) -> Result<Majorization> {
    if a.len() != b.len() {
        return Err(MajorizationError::Argument(format!("graphs of dims {} and {}", a.len() - 1, b.len() - 1)));
    }
    let d = a.len() - 1;
    if (a[d] - b[d]).abs() > ORDER_TOL || (a[0] - b[0]).abs() > ORDER_TOL {
        return Ok(Majorization::EndpointMismatch);
    }
    let below = a.iter().zip(b).all(|(x, y)| *x <= y + ORDER_TOL);
    let above = a.iter().zip(b).all(|(x, y)| *x >= y - ORDER_TOL);
    Ok(match (below, above) {
        (true, true) => Majorization::Equal,
        (true, false) => Majorization::Below,
        (false, true) => Majorization::Above,
        (false, false) => Majorization::Incomparable,
    })
}

/// `Some(p)` when `σ_p` is the unique strict minimum (by more than [`ORDER_TOL`]).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphIndex(pub Option<usize>);

pub fn graph_index(s: &LyapunovGraph) -> GraphIndex {
    GraphIndex(index_of(s.sigma()))
}

pub(crate) fn index_of(s: &[f64]) -> Option<usize> {
    let (p, &min) = s.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1))?;
    s.iter().enumerate().all(|(i, &v)| i == p || v > min + ORDER_TOL).then_some(p)
}

/// Largest gap `chord_i − y_i` of a convex sequence and the certified bound
/// `k²γ/4` with `γ = max Δ²y`.
pub fn nearly_affine_bound(y: &[f64]) -> Result<(f64, f64)> {
    if y.len() < 3 {
        return Ok((0.0, 0.0));
    }
    let k = (y.len() - 1) as f64;
    let mut gamma = 0.0f64;
    for w in y.windows(3) {
        let dd = w[0] - 2.0 * w[1] + w[2];
        if dd < -ORDER_TOL {
            return Err(MajorizationError::Argument(format!("sequence is not convex (Δ² = {dd:e})")));
        }
        gamma = gamma.max(dd);
    }
    let (y0, yk) = (y[0], y[y.len() - 1]);
    let deviation = y
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let t = i as f64 / k;
            (1.0 - t) * y0 + t * yk - v
        })
        .fold(0.0, f64::max);
    let bound = k * k * gamma / 4.0;
    // Rounding in the chord can exceed an exact zero bound by a few ulps.
    let slack = 1e-12 * (1.0 + y.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    if deviation > bound + slack {
        return Err(MajorizationError::Bound(format!("deviation {deviation:e} above k²γ/4 = {bound:e}")));
    }
    Ok((deviation, bound))
}

/// `{k : σ_k ≤ min_j σ_{i_j}}` for cuts `0 = i_0 < … < i_m = d`.
pub fn admissible_indices(s: &LyapunovGraph, splitting_indices: &[usize]) -> Result<RangeInclusive<usize>> {
    let d = s.dim();
    let idx = splitting_indices;
    let nested = idx.first() == Some(&0) && idx.last() == Some(&d) && idx.windows(2).all(|w| w[0] < w[1]);
    if !nested {
        return Err(MajorizationError::Argument(format!("indices {idx:?} are not 0 = i_0 < … < i_m = {d}")));
    }
    let sigma = s.sigma();
    let cutoff = idx.iter().map(|&i| sigma[i]).fold(f64::INFINITY, f64::min);
    let ks: Vec<usize> = (0..=d).filter(|&k| sigma[k] <= cutoff + ORDER_TOL).collect();
    let (lo, hi) = (ks[0], ks[ks.len() - 1]);
    if ks.len() != hi - lo + 1 {
        return Err(MajorizationError::Bound(format!("admissible set {ks:?} is not an interval")));
    }
    if !idx.windows(2).any(|w| w[0] <= lo && hi <= w[1]) {
        return Err(MajorizationError::Bound(format!("interval {lo}..={hi} straddles a cut of {idx:?}")));
    }
    Ok(lo..=hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(v: &[f64]) -> LyapunovGraph {
        LyapunovGraph::new(v.to_vec()).unwrap()
    }

    #[test]
    fn comparisons() {
        let a = g(&[0.0, -1.0, 0.0]);
        let b = g(&[0.0, -0.5, 0.0]);
        assert_eq!(majorization_cmp(&a, &b).unwrap(), Majorization::Below);
        assert_eq!(majorization_cmp(&b, &a).unwrap(), Majorization::Above);
        assert_eq!(majorization_cmp(&a, &a).unwrap(), Majorization::Equal);
        assert_eq!(majorization_cmp(&a, &g(&[0.0, -0.5, 0.1])).unwrap(), Majorization::EndpointMismatch);
        let c = g(&[0.0, -1.0, -1.5, 0.0]);
        let e = g(&[0.0, -0.5, -2.0, 0.0]);
        assert_eq!(majorization_cmp(&c, &e).unwrap(), Majorization::Incomparable);
        assert!(majorization_cmp(&a, &c).is_err());
    }

    #[test]
    fn indices() {
        assert_eq!(graph_index(&g(&[0.0, -1.0, 0.0])), GraphIndex(Some(1)));
        assert_eq!(graph_index(&g(&[0.0, 0.0, 1.0])), GraphIndex(None));
        assert_eq!(graph_index(&g(&[0.0, 1.0, 3.0])), GraphIndex(Some(0)));
    }

    #[test]
    fn affine_and_square() {
        assert_eq!(nearly_affine_bound(&[1.0, 2.0, 3.0, 4.0]).unwrap(), (0.0, 0.0));
        let k = 8;
        let y: Vec<f64> = (0..=k).map(|i| (i * i) as f64).collect();
        let (dev, bound) = nearly_affine_bound(&y).unwrap();
        assert_eq!(dev, (k * k) as f64 / 4.0);
        assert_eq!(bound, (k * k) as f64 / 2.0);
        assert!(nearly_affine_bound(&[0.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn trivial_splitting_admits_every_nonpositive_point() {
        let s = g(&[0.0, -1.0, -1.0, 0.0]);
        assert_eq!(admissible_indices(&s, &[0, 3]).unwrap(), 0..=3);
        assert!(admissible_indices(&s, &[0, 2]).is_err());
        assert!(admissible_indices(&s, &[1, 3]).is_err());
    }
}
