//! Zigzag paths of graphs.
//!
//! Each step raises a single interior coordinate `i` to
//! `min(dst_i, (σ_{i−1} + σ_{i+1})/2)`, where `i` is the smallest free
//! coordinate maximizing `Δ²σ_{i−1}`. A coordinate that touches `dst` is
//! pinned for the rest of the plan, which splits the problem at that point.
//! Choosing the maximizer over all free coordinates at once interleaves the
//! pieces of the split and keeps the whole-graph area ratio at `1 − 2/d³`.

use std::io::Write;

use cocycle_core::LyapunovGraph;

use crate::error::{MajorizationError, Result};
use crate::order::{index_of, majorization_cmp_slices, Majorization};

/// Absolute tolerance of the exact-contact test against `dst`.
pub const CONTACT_TOL: f64 = 1e-12;

/// Hard cap on plan length.
const MAX_STEPS: usize = 10_000_000;

/// A `⪯`-monotone sequence of graphs, one coordinate moved per step.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphPathPlan {
    pub vertices: Vec<LyapunovGraph>,
    /// `moved_index[j]` is the coordinate changed between vertices `j` and `j+1`.
    pub moved_index: Vec<usize>,
}

impl GraphPathPlan {
    pub fn steps(&self) -> usize {
        self.moved_index.len()
    }

    pub fn last(&self) -> &LyapunovGraph {
        self.vertices.last().expect("a plan has a start vertex")
    }

    /// Checks convexity, monotonicity, one interior move per step and fixed endpoints.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if self.vertices.len() != self.moved_index.len() + 1 {
            return Err(MajorizationError::Argument("vertex and move counts disagree".into()));
        }
        for (j, v) in self.vertices.iter().enumerate() {
            if !v.is_convex(tol) {
                return Err(MajorizationError::Bound(format!("vertex {j} is not convex")));
            }
        }
        for (j, w) in self.vertices.windows(2).enumerate() {
            let (a, b) = (w[0].sigma(), w[1].sigma());
            let d = a.len() - 1;
            let moved = self.moved_index[j];
            if moved == 0 || moved >= d {
                return Err(MajorizationError::Bound(format!("step {j} moves endpoint {moved}")));
            }
            for i in 0..=d {
                if i != moved && a[i] != b[i] {
                    return Err(MajorizationError::Bound(format!("step {j} also moves {i}")));
                }
            }
            if b[moved] < a[moved] - tol {
                return Err(MajorizationError::Bound(format!("step {j} lowers coordinate {moved}")));
            }
        }
        Ok(())
    }

    /// Rows `step, moved_index, sigma_0..sigma_d`; the start row has an empty move.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let d = self.vertices[0].dim();
        let mut header = vec!["step".to_string(), "moved_index".to_string()];
        header.extend((0..=d).map(|i| format!("sigma_{i}")));
        out.write_record(&header)?;
        for (j, v) in self.vertices.iter().enumerate() {
            let mut row = vec![j.to_string(), if j == 0 { String::new() } else { self.moved_index[j - 1].to_string() }];
            row.extend(v.sigma().iter().map(|x| format!("{x:.16e}")));
            out.write_record(&row)?;
        }
        out.flush().map_err(|e| MajorizationError::Csv(e.to_string()))?;
        Ok(())
    }
}

/// Area between two graphs with common endpoints (unit spacing).
pub fn area_between(lower: &[f64], upper: &[f64]) -> f64 {
    let d = lower.len() - 1;
    (1..d).map(|i| upper[i] - lower[i]).sum()
}

/// `N(d, c, δ)`: non-splitting steps from the contraction `1 − 2/d³` applied
/// to the initial area `≤ c·d(d−1)`, plus `d − 1` contact steps.
pub fn step_bound(d: usize, c: f64, delta: f64) -> usize {
    if d < 2 {
        return 0;
    }
    let a0 = c * (d * (d - 1)) as f64;
    let rate = 1.0 - 2.0 / (d as f64).powi(3);
    let contracting = if a0 <= delta { 0.0 } else { ((a0 / delta).ln() / -rate.ln()).ceil() };
    contracting as usize + (d - 1)
}

/// Plan from `src` towards `dst ⪰ src` ending `delta`-close (sup norm) and below `dst`.
pub fn zigzag_path(
    src: &LyapunovGraph,
    dst: &LyapunovGraph,
    delta: f64,
    preserve_index: bool,
) -> Result<GraphPathPlan> {
    if !(delta > 0.0) {
        return Err(MajorizationError::Argument(format!("delta must be positive, got {delta}")));
    }
    let (a, b) = (src.sigma(), dst.sigma());
    match majorization_cmp_slices(a, b)? {
        Majorization::Below | Majorization::Equal => {}
        Majorization::EndpointMismatch => {
            return Err(MajorizationError::Order("endpoints of src and dst differ".into()));
        }
        _ => return Err(MajorizationError::Order("src is not below dst".into())),
    }
    for (name, g) in [("src", src), ("dst", dst)] {
        if !g.is_convex(cocycle_core::graph::CONVEXITY_TOL) {
            return Err(MajorizationError::Argument(format!("{name} is not convex")));
        }
    }
    let d = src.dim();
    let mut walk = Walk { cur: a.to_vec(), vertices: vec![a.to_vec()], moved: Vec::new() };
    if preserve_index {
        let p = index_of(a);
        if p.is_none() || p != index_of(b) {
            return Err(MajorizationError::Index(format!("src has index {:?}, dst has index {:?}", p, index_of(b))));
        }
        let p = p.unwrap();
        if p == 0 || p == d {
            // Every graph between the two keeps an extreme index.
            walk.approach(b, &mut vec![false; d + 1], delta)?;
        } else {
            walk.index_preserving(b, p, delta)?;
        }
    } else {
        walk.approach(b, &mut vec![false; d + 1], delta)?;
    }
    let vertices = walk
        .vertices
        .into_iter()
        .map(LyapunovGraph::new)
        .collect::<cocycle_core::Result<Vec<_>>>()
        .map_err(|e| MajorizationError::Argument(e.to_string()))?;
    Ok(GraphPathPlan { vertices, moved_index: walk.moved })
}

struct Walk {
    cur: Vec<f64>,
    vertices: Vec<Vec<f64>>,
    moved: Vec<usize>,
}

impl Walk {
    fn set(&mut self, i: usize, v: f64) -> Result<()> {
        if self.moved.len() >= MAX_STEPS {
            return Err(MajorizationError::Bound(format!("plan exceeded {MAX_STEPS} steps")));
        }
        self.cur[i] = v;
        self.vertices.push(self.cur.clone());
        self.moved.push(i);
        Ok(())
    }

    /// Plain zigzag towards `dst`; `pinned` coordinates are never moved.
    fn approach(&mut self, dst: &[f64], pinned: &mut [bool], delta: f64) -> Result<()> {
        let d = dst.len() - 1;
        loop {
            let mut gap = 0.0f64;
            for i in 1..d {
                if !pinned[i] && dst[i] - self.cur[i] <= CONTACT_TOL {
                    pinned[i] = true;
                }
                if !pinned[i] {
                    gap = gap.max(dst[i] - self.cur[i]);
                }
            }
            if gap <= delta {
                return Ok(());
            }
            let c = &self.cur;
            let mut best: Option<(usize, f64)> = None;
            for i in (1..d).filter(|&i| !pinned[i]) {
                let dd = c[i - 1] - 2.0 * c[i] + c[i + 1];
                if best.is_none_or(|(_, b)| dd > b) {
                    best = Some((i, dd));
                }
            }
            let (i, dd) = best.expect("a free coordinate exists while the gap is open");
            let next = dst[i].min(0.5 * (c[i - 1] + c[i + 1]));
            if !(next > c[i]) {
                return Err(MajorizationError::Bound(format!(
                    "stalled at coordinate {i} with Δ² = {dd:e} and gap {gap:e}"
                )));
            }
            self.set(i, next)?;
            if dst[i] - next <= CONTACT_TOL {
                pinned[i] = true;
            }
        }
    }

    /// Alternates plain zigzags on both sides of `p` (with `σ_p` frozen) and
    /// gap steps `σ_p ← min(dst_p, σ_p + 0.9 E)`.
    fn index_preserving(&mut self, dst: &[f64], p: usize, delta: f64) -> Result<()> {
        let d = dst.len() - 1;
        let inner = delta / 4.0;
        for _ in 0..MAX_STEPS {
            if sup_gap(&self.cur, dst) <= delta {
                return Ok(());
            }
            let bar = pinned_minorant(dst, p, self.cur[p]);
            let mut pinned = vec![false; d + 1];
            pinned[p] = true;
            self.approach(&bar, &mut pinned, inner)?;
            if sup_gap(&self.cur, dst) <= delta {
                return Ok(());
            }
            let c = &self.cur;
            let e = (c[p - 1] - c[p]).min(c[p + 1] - c[p]);
            let next = dst[p].min(c[p] + 0.9 * e);
            if next > c[p] {
                self.set(p, next)?;
            }
        }
        Err(MajorizationError::Bound("index-preserving plan did not converge".into()))
    }
}

fn sup_gap(cur: &[f64], dst: &[f64]) -> f64 {
    cur.iter().zip(dst).map(|(a, b)| b - a).fold(0.0, f64::max)
}

/// Largest convex graph `≤ dst` whose value at `p` is `value` (`≤ dst_p`):
/// the lower convex hull of `dst` with the point at `p` lowered.
fn pinned_minorant(dst: &[f64], p: usize, value: f64) -> Vec<f64> {
    let mut y = dst.to_vec();
    y[p] = value;
    let mut hull: Vec<usize> = Vec::with_capacity(y.len());
    for i in 0..y.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop b when it lies on or above the chord from a to i.
            let lhs = (y[b] - y[a]) * (i - a) as f64;
            let rhs = (y[i] - y[a]) * (b - a) as f64;
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = y.clone();
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        for (i, slot) in out.iter_mut().enumerate().take(b).skip(a + 1) {
            let t = (i - a) as f64 / (b - a) as f64;
            *slot = (1.0 - t) * y[a] + t * y[b];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(v: &[f64]) -> LyapunovGraph {
        LyapunovGraph::new(v.to_vec()).unwrap()
    }

    #[test]
    fn identical_graphs_give_empty_plan() {
        let a = g(&[0.0, -1.0, -1.5, 0.0]);
        let plan = zigzag_path(&a, &a, 1e-3, false).unwrap();
        assert_eq!(plan.steps(), 0);
        assert_eq!(plan.vertices, vec![a]);
    }

    #[test]
    fn two_dimensional_single_step() {
        let plan = zigzag_path(&g(&[0.0, -1.0, 0.0]), &g(&[0.0, -0.2, 0.0]), 1e-3, false).unwrap();
        assert_eq!(plan.steps(), 1);
        assert_eq!(plan.moved_index, vec![1]);
        assert_eq!(plan.last().sigma(), &[0.0, -0.2, 0.0]);
    }

    #[test]
    fn order_errors() {
        let a = g(&[0.0, -1.0, 0.0]);
        let b = g(&[0.0, -0.2, 0.0]);
        assert!(matches!(zigzag_path(&b, &a, 1e-3, false), Err(MajorizationError::Order(_))));
        assert!(matches!(zigzag_path(&a, &g(&[0.0, -0.2, 0.5]), 1e-3, false), Err(MajorizationError::Order(_))));
        let flat = g(&[0.0, 0.0, 0.0]);
        assert!(matches!(zigzag_path(&a, &flat, 1e-3, true), Err(MajorizationError::Index(_))));
    }

    #[test]
    fn minorant_is_convex_and_below() {
        let dst = [0.0, -1.0, -1.5, -1.6, -1.2, 0.0];
        let bar = pinned_minorant(&dst, 3, -2.5);
        assert_eq!(bar[3], -2.5);
        for i in 0..dst.len() {
            assert!(bar[i] <= dst[i]);
        }
        for w in bar.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-15);
        }
    }

    #[test]
    fn csv_layout() {
        let plan = zigzag_path(&g(&[0.0, -1.0, 0.0]), &g(&[0.0, -0.5, 0.0]), 1e-3, false).unwrap();
        let mut buf = Vec::new();
        plan.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "step,moved_index,sigma_0,sigma_1,sigma_2");
        assert!(lines[1].starts_with("0,,"));
        assert!(lines[2].starts_with("1,1,"));
    }
}
