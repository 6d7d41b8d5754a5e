#![allow(dead_code)]

use cocycle_core::linalg::rotation2;
use cocycle_core::{lyapunov_graph, CyclicCocycle, LyapunovGraph, Matrix, PeriodicSchur};
use cocycle_perturb::PerturbationPath;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(d: usize, k: usize, r: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(d, k, |_, _| StandardNormal.sample(r))
}

pub fn orthogonal(d: usize, r: &mut ChaCha8Rng) -> Matrix {
    gaussian(d, d, r).qr().q()
}

pub fn diag(v: &[f64]) -> Matrix {
    Matrix::from_diagonal(&nalgebra::DVector::from_row_slice(v))
}

/// `Q_1 diag(e^{u}) Q_2` with `u` uniform in `[-spread, spread]`.
pub fn mild_map(d: usize, spread: f64, r: &mut ChaCha8Rng) -> Matrix {
    let q1 = orthogonal(d, r);
    let q2 = orthogonal(d, r);
    let u: Vec<f64> = (0..d).map(|_| (spread * r.random_range(-1.0..1.0)).exp()).collect();
    q1 * diag(&u) * q2
}

/// Determinant-one maps `R_θ diag(e^s, e^{−s})` with random `θ` and small `s`;
/// rotation-dominated, hence free of dominated splittings at moderate scales.
pub fn near_isometry_2d(n: usize, s: f64, r: &mut ChaCha8Rng) -> CyclicCocycle {
    let maps = (0..n)
        .map(|_| {
            let t = r.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let u = s * r.random_range(0.2..1.0);
            rotation2(t) * diag(&[u.exp(), (-u).exp()])
        })
        .collect();
    CyclicCocycle::new(maps).unwrap()
}

/// `diag(4, 1/4)` blocks followed by an identity stretch of the same length.
pub fn block_cocycle(k: usize) -> CyclicCocycle {
    let mut maps = vec![diag(&[4.0, 0.25]); k];
    maps.extend(vec![Matrix::identity(2, 2); k]);
    CyclicCocycle::new(maps).unwrap()
}

pub fn near_isometry(d: usize, n: usize, spread: f64, r: &mut ChaCha8Rng) -> CyclicCocycle {
    CyclicCocycle::new((0..n).map(|_| mild_map(d, spread, r)).collect()).unwrap()
}

/// Draws from `draw` until the period product has a real spectrum.
pub fn real_spectrum(mut draw: impl FnMut() -> CyclicCocycle) -> CyclicCocycle {
    loop {
        let c = draw();
        if PeriodicSchur::new(&c).unwrap().is_real() {
            return c;
        }
    }
}

/// Dense product `A_{phase+len−1} ⋯ A_{phase}`.
pub fn naive_product(c: &CyclicCocycle, phase: usize, len: usize) -> Matrix {
    let d = c.dim();
    let mut p = Matrix::identity(d, d);
    for k in 0..len {
        p = c.map(phase + k) * p;
    }
    p
}

pub fn graph(c: &CyclicCocycle) -> LyapunovGraph {
    lyapunov_graph(c).unwrap()
}

/// Checks the path contract: base, eps bound, spacing, monotonicity and `σ_d`.
pub fn assert_path_contract(path: &PerturbationPath, eps: f64, tol: f64) {
    let a = path.audit();
    assert!(a.max_deviation <= eps * (1.0 + 1e-12), "deviation {} > {eps}", a.max_deviation);
    assert!(a.max_step <= eps / 16.0 * (1.0 + 1e-9), "step {} > {}", a.max_step, eps / 16.0);
    assert!(a.worst_decrease <= tol, "graph decreased by {}", a.worst_decrease);
    assert!(a.top_drift <= tol, "σ_d drifted by {}", a.top_drift);
}

/// Maximum over samples of `|σ_j(t) − σ_j(0)|`.
pub fn coordinate_drift(path: &PerturbationPath, j: usize) -> f64 {
    let s0 = path.graphs()[0].sigma()[j];
    path.graphs().iter().map(|g| (g.sigma()[j] - s0).abs()).fold(0.0, f64::max)
}
