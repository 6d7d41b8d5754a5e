//! Raising a Lyapunov graph to a prescribed target.
//!
//! The pipeline removes complex pairs, walks a zigzag plan of single
//! coordinate moves (each realized by mixing two neighbouring exponents up to
//! the plan vertex) and closes the remaining gap with a diagonal adjustment.
//! Budgets: a quarter of `eps` for the complex pairs, three quarters in total
//! by the end of the plan, the rest for the adjustment.

use cocycle_core::graph::CONVEXITY_TOL;
use cocycle_core::linalg::op_norm;
use cocycle_core::{
    check_domination, extend_over, finest_splitting, restrict_and_quotient, Block, CyclicCocycle, LyapunovGraph,
    PeriodicSchur, SplittingFrames, Subspace,
};
use cocycle_majorization::{graph_index, zigzag_path};

use crate::adjust::adjust_step;
use crate::band::{angle_limits, Band};
use crate::error::{PerturbError, Result};
use crate::mix::mix_step;
use crate::path::{EngineSchedule, PathBuilder, PerturbationPath};

/// Tolerance for order and pinning checks on targets.
pub const TARGET_TOL: f64 = 1e-9;

/// Largest distance between the final graph and the target that counts as reached.
pub const REACH_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct RaiseOptions {
    /// Keep the cuts of the finest splitting at this scale fixed and work bundle by bundle.
    pub respect_finest: Option<usize>,
    /// Raise the graph of the restriction to this invariant subbundle, keeping the quotient.
    pub subbundle: Option<Vec<Subspace>>,
    pub preserve_index: bool,
    /// Scale of the non-domination checks.
    pub ell: usize,
}

impl Default for RaiseOptions {
    fn default() -> Self {
        Self { respect_finest: None, subbundle: None, preserve_index: false, ell: 64 }
    }
}

/// An `eps`-short path from `c` to a cocycle whose graph is `target`.
pub fn raise_graph(
    c: &CyclicCocycle,
    target: &LyapunovGraph,
    eps: f64,
    opts: &RaiseOptions,
) -> Result<PerturbationPath> {
    if !(eps > 0.0) {
        return Err(PerturbError::Argument(format!("eps must be positive, got {eps}")));
    }
    if !opts.ell.is_power_of_two() {
        return Err(PerturbError::Argument(format!("ell = {} is not a power of two", opts.ell)));
    }
    if let Some(f) = &opts.subbundle {
        return raise_on_subbundle(c, f, target, eps, opts);
    }
    match opts.respect_finest {
        Some(ell) => raise_finest(c, target, eps, ell, opts),
        None => raise_plain(c, target, eps, opts.preserve_index, opts.ell),
    }
}

/// Checks `target ⪰ current` with equal endpoints; returns the target with
/// `σ_d` snapped to the current value.
fn checked_target(current: &LyapunovGraph, target: &LyapunovGraph) -> Result<LyapunovGraph> {
    let d = current.dim();
    if target.dim() != d {
        return Err(PerturbError::Argument(format!("target of dim {} for a graph of dim {d}", target.dim())));
    }
    if !target.is_convex(CONVEXITY_TOL) {
        return Err(PerturbError::Argument("target graph is not convex".into()));
    }
    let (a, b) = (current.sigma(), target.sigma());
    if (a[d] - b[d]).abs() > TARGET_TOL {
        return Err(PerturbError::Order(format!("target σ_{d} = {} differs from the current {}", b[d], a[d])));
    }
    if let Some(i) = (1..d).find(|&i| b[i] < a[i] - TARGET_TOL) {
        return Err(PerturbError::Order(format!("target σ_{i} = {} lies below the current {}", b[i], a[i])));
    }
    let mut s = b.to_vec();
    s[d] = a[d];
    Ok(LyapunovGraph::new(s)?)
}

fn raise_plain(
    c: &CyclicCocycle,
    target: &LyapunovGraph,
    eps: f64,
    preserve_index: bool,
    ell: usize,
) -> Result<PerturbationPath> {
    let mut out = PathBuilder::new(c.clone(), eps)?;
    let start = out.current_graph().clone();
    let goal = checked_target(&start, target)?;
    if preserve_index {
        let (a, b) = (graph_index(&start), graph_index(&goal));
        if a.0.is_none() || a != b {
            return Err(PerturbError::Order(format!(
                "index of the target {:?} differs from the current {:?}",
                b.0, a.0
            )));
        }
    }
    if start.distance(&goal) <= 1e-12 {
        return Ok(out.finish());
    }
    let d = c.dim();
    for i in 1..d {
        if goal.sigma()[i] > start.sigma()[i] + TARGET_TOL {
            let r = check_domination(c, i, ell)?;
            if r.dominated {
                return Err(PerturbError::Dominated { index: i, ell, ratio: r.worst_ratio.unwrap_or(f64::NAN) });
            }
        }
    }
    let spacing = eps / 16.0;

    let schur = PeriodicSchur::new(c)?;
    for b in schur.blocks.iter().filter(|b| !b.is_real()) {
        let limits = angle_limits(c, out.current(), eps / 4.0);
        let cur = out.current().clone();
        Band::new(&cur, &schur, b.start, limits).realify(spacing, &mut out)?;
    }

    // Plan resolution small enough that the final adjustment fits a quarter of eps.
    let k = c.maps().iter().map(op_norm).fold(1.0, f64::max);
    let delta = (eps / (16.0 * k)).min(1e-3);
    let here = out.current_graph().clone();
    let low: Vec<f64> = here.sigma().iter().zip(goal.sigma()).map(|(a, b)| a.min(*b)).collect();
    let plan = zigzag_path(&LyapunovGraph::new(low)?, &goal, delta, preserve_index)?;

    let mut schedule = EngineSchedule::default();
    let mut frame = schur.frames[0].clone();
    for (step, &i) in plan.moved_index.iter().enumerate() {
        let value = plan.vertices[step + 1].sigma()[i];
        let before = out.current().clone();
        let used = max_dev(c, &before);
        schedule.eps_ladder.push(eps - used);
        schedule.ell_ladder.push(ell);
        if value <= out.current_graph().sigma()[i] + 1e-15 {
            schedule.stability_margins.push(0.0);
            schedule.certified.push(true);
            continue;
        }
        let schur = PeriodicSchur::warm(&before, &frame)?;
        if !schur.is_real() {
            return Err(PerturbError::Numerical(format!("complex pair appeared before plan step {step}")));
        }
        frame = schur.frames[0].clone();
        let limits = angle_limits(c, &before, 0.75 * eps);
        let free_before = !check_domination(&before, i, 2 * ell)?.dominated;
        mix_step(&mut out, &schur, i, value, limits, spacing)?;
        let free_after = !check_domination(out.current(), i, ell)?.dominated;
        schedule.stability_margins.push(max_dev(&before, out.current()));
        schedule.certified.push(!free_before || free_after);
    }

    let cur = out.current().clone();
    let schur = PeriodicSchur::warm(&cur, &frame)?;
    if !schur.is_real() {
        return Err(PerturbError::Numerical("complex pair appeared before the final adjustment".into()));
    }
    let caps: Vec<f64> = c.deviations(&cur).iter().map(|v| (eps - v).max(0.0)).collect();
    adjust_step(&mut out, &schur, &goal, &caps, spacing)?;
    out.set_schedule(schedule);
    let miss = out.current_graph().distance(&goal);
    if miss > REACH_TOL {
        return Err(PerturbError::capability("final graph misses the target", miss, Some(out.snapshot())));
    }
    Ok(out.finish())
}

fn max_dev(a: &CyclicCocycle, b: &CyclicCocycle) -> f64 {
    a.deviations(b).into_iter().fold(0.0, f64::max)
}

/// Raises the graph of `A|F` to `target`, leaving `A/F` untouched.
fn raise_on_subbundle(
    c: &CyclicCocycle,
    f: &[Subspace],
    target: &LyapunovGraph,
    eps: f64,
    opts: &RaiseOptions,
) -> Result<PerturbationPath> {
    let (res, _) = restrict_and_quotient(c, f)?;
    let inner = RaiseOptions { subbundle: None, ..opts.clone() };
    let path = raise_graph(&res, target, eps, &inner)?;
    let mut out = PathBuilder::new(c.clone(), eps)?;
    for s in &path.samples()[1..] {
        out.push(extend_over(c, f, s, Block::Restricted)?)?;
    }
    if let Some(s) = path.schedule() {
        out.set_schedule(s.clone());
    }
    Ok(out.finish())
}

/// Bundle-by-bundle raise keeping the cuts of the finest splitting pinned.
fn raise_finest(
    c: &CyclicCocycle,
    target: &LyapunovGraph,
    eps: f64,
    finest_ell: usize,
    opts: &RaiseOptions,
) -> Result<PerturbationPath> {
    let split = finest_splitting(c, finest_ell)?;
    let mut out = PathBuilder::new(c.clone(), eps)?;
    let start = out.current_graph().clone();
    let goal = checked_target(&start, target)?;
    for &i in &split.indices {
        let (t, s) = (goal.sigma()[i], start.sigma()[i]);
        if (t - s).abs() > TARGET_TOL {
            return Err(PerturbError::Pinned { index: i, target: t, current: s });
        }
    }
    if split.is_trivial() {
        return raise_plain(c, &goal, eps, opts.preserve_index, finest_ell);
    }
    let d = c.dim();
    let mut edges = vec![0];
    edges.extend_from_slice(&split.indices);
    edges.push(d);
    let index = graph_index(&start).0;
    let todo: Vec<(usize, usize)> = edges
        .windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|&(a, b)| b - a >= 2 && (a + 1..b).any(|k| goal.sigma()[k] > start.sigma()[k] + 1e-12))
        .collect();
    let mut schedule = EngineSchedule::default();
    for (left, &(a, b)) in todo.iter().enumerate() {
        let cur = out.current().clone();
        let used = max_dev(c, &cur);
        let budget = (eps - used) / (todo.len() - left) as f64;
        let frames = SplittingFrames::new(&cur)?;
        let bundle: Vec<Subspace> =
            (0..cur.period()).map(|j| Ok(Subspace::new(frames.band_basis(j, a, b)?)?)).collect::<Result<_>>()?;
        let sub: Vec<f64> = goal.sigma()[a..=b].iter().map(|v| v - goal.sigma()[a]).collect();
        let (res, _) = restrict_and_quotient(&cur, &bundle)?;
        let inner_index = matches!(index, Some(p) if opts.preserve_index && a < p && p < b);
        // Inside a bundle of the finest splitting nothing is dominated at its scale.
        let path = raise_plain(&res, &LyapunovGraph::new(sub)?, budget, inner_index, finest_ell)?;
        for s in &path.samples()[1..] {
            out.push(extend_over(&cur, &bundle, s, Block::Restricted)?)?;
        }
        if let Some(s) = path.schedule() {
            let shift = eps - used - budget;
            schedule.eps_ladder.extend(s.eps_ladder.iter().map(|e| e + shift));
            schedule.ell_ladder.extend(&s.ell_ladder);
            schedule.stability_margins.extend(&s.stability_margins);
            schedule.certified.extend(&s.certified);
        }
    }
    out.set_schedule(schedule);
    let miss = out.current_graph().distance(&goal);
    if miss > REACH_TOL {
        return Err(PerturbError::capability("final graph misses the target", miss, Some(out.snapshot())));
    }
    Ok(out.finish())
}
