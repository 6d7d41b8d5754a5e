#![allow(dead_code)]

use cocycle_core::{CyclicCocycle, Matrix, Subspace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(d: usize, k: usize, r: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(d, k, |_, _| StandardNormal.sample(r))
}

/// Gaussian matrix rescaled to unit Frobenius norm per column block, kept well conditioned.
pub fn random_map(d: usize, r: &mut ChaCha8Rng) -> Matrix {
    loop {
        let m = gaussian(d, d, r) / (d as f64).sqrt();
        let s = m.clone().svd(false, false).singular_values;
        let (hi, lo) = (s.max(), s.min());
        if lo > 0.05 && hi / lo < 50.0 {
            return m;
        }
    }
}

pub fn random_cocycle(d: usize, n: usize, r: &mut ChaCha8Rng) -> CyclicCocycle {
    CyclicCocycle::new((0..n).map(|_| random_map(d, r)).collect()).unwrap()
}

pub fn random_subspace(d: usize, k: usize, r: &mut ChaCha8Rng) -> Subspace {
    Subspace::span(&gaussian(d, k, r)).unwrap()
}

/// Dense product `A_{n-1} ⋯ A_0`.
pub fn naive_product(c: &CyclicCocycle, phase: usize, len: usize) -> Matrix {
    let d = c.dim();
    let mut p = Matrix::identity(d, d);
    for k in 0..len {
        p = c.map(phase + k) * p;
    }
    p
}

/// Graph from a dense eigensolve of the explicit product.
pub fn dense_graph(c: &CyclicCocycle) -> Vec<f64> {
    let p = naive_product(c, 0, c.period());
    let mut l: Vec<f64> = p.complex_eigenvalues().iter().map(|z| z.norm().ln() / c.period() as f64).collect();
    l.sort_by(f64::total_cmp);
    let mut out = vec![0.0];
    for v in l {
        out.push(out.last().unwrap() + v);
    }
    out
}

/// `Q_1 diag(e^{u}) Q_2` with `u` uniform in `[-spread, spread]`.
pub fn mild_map(d: usize, spread: f64, r: &mut ChaCha8Rng) -> Matrix {
    let q1 = gaussian(d, d, r).qr().q();
    let q2 = gaussian(d, d, r).qr().q();
    let u = Matrix::from_diagonal(&nalgebra::DVector::from_fn(d, |_, _| {
        (spread * (2.0 * rand::Rng::random::<f64>(r) - 1.0)).exp()
    }));
    q1 * u * q2
}

pub fn mild_cocycle(d: usize, n: usize, spread: f64, r: &mut ChaCha8Rng) -> CyclicCocycle {
    CyclicCocycle::new((0..n).map(|_| mild_map(d, spread, r)).collect()).unwrap()
}

/// Maps `U_{j+1} T_j U_j^T` with `T_j` upper triangular, positive diagonal
/// `e^{u}` (`u` uniform in `[-spread, spread]`) and unit off-diagonal scale.
/// The period product has real spectrum and a known invariant flag.
pub fn triangular_cocycle(d: usize, n: usize, spread: f64, r: &mut ChaCha8Rng) -> CyclicCocycle {
    let frames: Vec<Matrix> = (0..n).map(|_| gaussian(d, d, r).qr().q()).collect();
    let maps = (0..n)
        .map(|j| {
            let mut t = gaussian(d, d, r).upper_triangle() * 0.5;
            for k in 0..d {
                t[(k, k)] = (spread * (2.0 * rand::Rng::random::<f64>(r) - 1.0)).exp();
            }
            &frames[(j + 1) % n] * t * frames[j].transpose()
        })
        .collect();
    CyclicCocycle::new(maps).unwrap()
}
