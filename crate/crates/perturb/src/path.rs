//! Discretized perturbation paths and the schedule record of an engine run.

use std::io::Write;

use cocycle_core::graph::graph_from_schur;
use cocycle_core::{CyclicCocycle, LyapunovGraph, Matrix, PeriodicSchur};

use crate::error::Result;

/// Samples `A_t` of an ε-short path, each with its Lyapunov graph.
#[derive(Clone, Debug)]
pub struct PerturbationPath {
    samples: Vec<CyclicCocycle>,
    graphs: Vec<LyapunovGraph>,
    eps_bound: f64,
    schedule: Option<EngineSchedule>,
}

/// Summary statistics of a path, measured on its samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathAudit {
    /// `max_t max_x ‖A_t(x) − A_0(x)‖`.
    pub max_deviation: f64,
    /// Largest per-phase distance between consecutive samples.
    pub max_step: f64,
    /// `max_t |σ_d(A_t) − σ_d(A_0)|`.
    pub top_drift: f64,
    /// Largest decrease of any coordinate between consecutive samples.
    pub worst_decrease: f64,
}

impl PathAudit {
    /// Whether the eps bound, the `eps/16` spacing and monotonicity up to `tol` hold.
    pub fn holds(&self, eps: f64, tol: f64) -> bool {
        let slack = 1e-12 * (1.0 + eps);
        self.max_deviation <= eps + slack && self.max_step <= eps / 16.0 + slack && self.worst_decrease <= tol
    }
}

impl PerturbationPath {
    /// The single-sample path at `base`.
    pub fn constant(base: CyclicCocycle, eps_bound: f64) -> Result<Self> {
        Ok(PathBuilder::new(base, eps_bound)?.finish())
    }

    pub fn base(&self) -> &CyclicCocycle {
        &self.samples[0]
    }

    pub fn samples(&self) -> &[CyclicCocycle] {
        &self.samples
    }

    pub fn graphs(&self) -> &[LyapunovGraph] {
        &self.graphs
    }

    pub fn eps_bound(&self) -> f64 {
        self.eps_bound
    }

    pub fn schedule(&self) -> Option<&EngineSchedule> {
        self.schedule.as_ref()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn endpoint(&self) -> &CyclicCocycle {
        self.samples.last().expect("a path holds its base")
    }

    pub fn end_graph(&self) -> &LyapunovGraph {
        self.graphs.last().expect("a path holds its base")
    }

    /// Per-sample `max_x ‖A_t(x) − A_0(x)‖`.
    pub fn deviations(&self) -> Vec<f64> {
        let base = self.base();
        self.samples.iter().map(|s| max_dev(base, s)).collect()
    }

    pub fn audit(&self) -> PathAudit {
        let max_deviation = self.deviations().into_iter().fold(0.0, f64::max);
        let max_step = self.samples.windows(2).map(|w| max_dev(&w[0], &w[1])).fold(0.0, f64::max);
        let d = self.graphs[0].dim();
        let top = self.graphs[0].sigma()[d];
        let top_drift = self.graphs.iter().map(|g| (g.sigma()[d] - top).abs()).fold(0.0, f64::max);
        let worst_decrease = self
            .graphs
            .windows(2)
            .flat_map(|w| w[0].sigma().iter().zip(w[1].sigma()).map(|(a, b)| a - b))
            .fold(0.0, f64::max);
        PathAudit { max_deviation, max_step, top_drift, worst_decrease }
    }

    /// Rows `sample, max_deviation, sigma_0..sigma_d`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let d = self.graphs[0].dim();
        let mut header = vec!["sample".to_string(), "max_deviation".to_string()];
        header.extend((0..=d).map(|i| format!("sigma_{i}")));
        out.write_record(&header)?;
        for (k, (dev, g)) in self.deviations().into_iter().zip(&self.graphs).enumerate() {
            let mut row = vec![k.to_string(), format!("{dev:.16e}")];
            row.extend(g.sigma().iter().map(|x| format!("{x:.16e}")));
            out.write_record(&row)?;
        }
        out.flush().map_err(|e| crate::error::PerturbError::Csv(e.to_string()))?;
        Ok(())
    }
}

fn max_dev(a: &CyclicCocycle, b: &CyclicCocycle) -> f64 {
    a.deviations(b).into_iter().fold(0.0, f64::max)
}

/// Per-rung record of a graph-raising run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EngineSchedule {
    /// Budget still available when each rung starts.
    pub eps_ladder: Vec<f64>,
    pub ell_ladder: Vec<usize>,
    /// Per-phase distance between the cocycles at the start and end of each rung.
    pub stability_margins: Vec<f64>,
    /// Whether the rung's end cocycle was checked free of an `ℓ`-dominated
    /// splitting at the moved index, given none at `2ℓ` before the rung.
    pub certified: Vec<bool>,
}

impl EngineSchedule {
    pub fn rungs(&self) -> usize {
        self.eps_ladder.len()
    }

    /// Ladder shape: budgets non-increasing, `ℓ` non-decreasing powers of two.
    pub fn is_well_formed(&self) -> bool {
        let n = self.rungs();
        self.ell_ladder.len() == n
            && self.stability_margins.len() == n
            && self.certified.len() == n
            && self.eps_ladder.windows(2).all(|w| w[1] <= w[0] + 1e-15)
            && self.ell_ladder.windows(2).all(|w| w[0] <= w[1])
            && self.ell_ladder.iter().all(|l| l.is_power_of_two())
    }
}

/// Accumulates samples and their graphs, warm-starting each frame computation.
pub(crate) struct PathBuilder {
    samples: Vec<CyclicCocycle>,
    graphs: Vec<LyapunovGraph>,
    eps_bound: f64,
    frame: Matrix,
    schedule: Option<EngineSchedule>,
}

impl PathBuilder {
    pub fn new(base: CyclicCocycle, eps_bound: f64) -> Result<Self> {
        let schur = PeriodicSchur::new(&base)?;
        let g = graph_from_schur(&base, &schur);
        Ok(Self { frame: schur.frames[0].clone(), samples: vec![base], graphs: vec![g], eps_bound, schedule: None })
    }

    pub fn current(&self) -> &CyclicCocycle {
        self.samples.last().expect("builder holds its base")
    }

    pub fn current_graph(&self) -> &LyapunovGraph {
        self.graphs.last().expect("builder holds its base")
    }

    pub fn push(&mut self, c: CyclicCocycle) -> Result<()> {
        let schur = PeriodicSchur::warm(&c, &self.frame)?;
        self.graphs.push(graph_from_schur(&c, &schur));
        self.frame = schur.frames[0].clone();
        self.samples.push(c);
        Ok(())
    }

    pub fn set_schedule(&mut self, s: EngineSchedule) {
        self.schedule = Some(s);
    }

    pub fn snapshot(&self) -> PerturbationPath {
        PerturbationPath {
            samples: self.samples.clone(),
            graphs: self.graphs.clone(),
            eps_bound: self.eps_bound,
            schedule: self.schedule.clone(),
        }
    }

    pub fn finish(self) -> PerturbationPath {
        PerturbationPath {
            samples: self.samples,
            graphs: self.graphs,
            eps_bound: self.eps_bound,
            schedule: self.schedule,
        }
    }
}
