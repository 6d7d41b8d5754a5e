//! Seeded cocycle generators.
//!
//! Every generator draws from a ChaCha8 stream keyed by `GeneratorSpec::seed`, so a
//! spec always produces the same matrices on every platform.

use std::f64::consts::PI;

use cocycle_core::linalg::rotation2;
use cocycle_core::{finest_splitting, lyapunov_graph, CyclicCocycle, LyapunovGraph, Matrix, PeriodicSchur};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ForgeError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    RandomBounded,
    Dominated,
    Cancellation,
    Elliptic,
    NearIsometry,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: Kind,
    pub dim: usize,
    pub period: usize,
    /// Bound `K` on `‖A‖` and `1/𝔪(A)`.
    pub bound: f64,
    pub seed: u64,
}

/// Facts established while generating, written next to the cocycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub spec: GeneratorSpec,
    pub graph: LyapunovGraph,
    pub real_spectrum: bool,
    /// For `dominated`: smallest `ℓ` at which the finest splitting is nontrivial, with its cuts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominated_at: Option<(usize, Vec<usize>)>,
    /// Number of rejected draws before the accepted one.
    pub rejected: usize,
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub cocycle: CyclicCocycle,
    pub metadata: Metadata,
}

const MAX_DRAWS: usize = 1000;

pub fn generate(spec: &GeneratorSpec) -> Result<Generated> {
    let (d, n, k) = (spec.dim, spec.period, spec.bound);
    if d == 0 || n == 0 {
        return Err(ForgeError::Input(format!("dim and period must be positive, got {d} and {n}")));
    }
    if !(k >= 1.0) || !k.is_finite() {
        return Err(ForgeError::Input(format!("bound must be a finite number ≥ 1, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rejected = 0;
    let mut dominated_at = None;
    let cocycle = match spec.kind {
        Kind::RandomBounded => bounded(d, n, k.ln(), &mut rng),
        Kind::NearIsometry => bounded(d, n, k.ln().min(0.5), &mut rng),
        Kind::Cancellation => cancellation(d, n, k)?,
        Kind::Dominated => {
            let c = dominated(d, n, k, &mut rng)?;
            dominated_at = first_dominated_scale(&c)?;
            c
        }
        Kind::Elliptic => loop {
            let c = elliptic(d, n, k, &mut rng)?;
            if !PeriodicSchur::new(&c)?.is_real() {
                break c;
            }
            rejected += 1;
            if rejected >= MAX_DRAWS {
                return Err(ForgeError::Input(format!("no elliptic draw in {MAX_DRAWS} attempts")));
            }
        },
    };
    let graph = lyapunov_graph(&cocycle)?;
    let real_spectrum = PeriodicSchur::new(&cocycle)?.is_real();
    Ok(Generated { cocycle, metadata: Metadata { spec: spec.clone(), graph, real_spectrum, dominated_at, rejected } })
}

pub fn gaussian(d: usize, k: usize, r: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(d, k, |_, _| StandardNormal.sample(r))
}

pub fn orthogonal(d: usize, r: &mut ChaCha8Rng) -> Matrix {
    let (q, rr) = gaussian(d, d, r).qr().unpack();
    // Sign fix makes the draw Haar distributed.
    let signs = Matrix::from_diagonal(&rr.diagonal().map(|v| if v < 0.0 { -1.0 } else { 1.0 }));
    q * signs
}

fn diag(v: &[f64]) -> Matrix {
    Matrix::from_diagonal(&nalgebra::DVector::from_row_slice(v))
}

/// `Q_1 diag(e^u) Q_2` with `u` uniform in `[−s, s]`, so that `K = e^s` bounds the map.
fn bounded(d: usize, n: usize, s: f64, r: &mut ChaCha8Rng) -> CyclicCocycle {
    let maps = (0..n)
        .map(|_| {
            let u: Vec<f64> = (0..d).map(|_| (s * r.random_range(-1.0..=1.0)).exp()).collect();
            orthogonal(d, r) * diag(&u) * orthogonal(d, r)
        })
        .collect();
    CyclicCocycle::new(maps).expect("bounded draws are invertible")
}

/// `H, R H R⁻¹, H, …` where `H = diag(K^{a_1}, …)` has log-spectrum symmetric
/// about zero and `R` is a rotation reversing the coordinate order.
fn cancellation(d: usize, n: usize, k: f64) -> Result<CyclicCocycle> {
    if d < 2 || n % 2 == 1 {
        return Err(ForgeError::Input(format!("cancellation needs d ≥ 2 and an even period, got d = {d}, n = {n}")));
    }
    let h: Vec<f64> = (0..d).map(|i| k.powf(1.0 - 2.0 * i as f64 / (d - 1) as f64)).collect();
    let h = diag(&h);
    let rot = if d == 2 {
        rotation2(PI / 2.0)
    } else {
        let mut p = Matrix::zeros(d, d);
        for i in 0..d {
            p[(d - 1 - i, i)] = 1.0;
        }
        if p.determinant() < 0.0 {
            p[(d - 1, 0)] = -1.0;
        }
        p
    };
    let conj = &rot * &h * rot.transpose();
    Ok(CyclicCocycle::new((0..n).map(|j| if j % 2 == 0 { h.clone() } else { conj.clone() }).collect())?)
}

/// `A_j = Q_{j+1} T_j Q_j^T` with `T_j` upper triangular, diagonal spread
/// over `[1/K, K]` and small off-diagonal entries.
fn dominated(d: usize, n: usize, k: f64, r: &mut ChaCha8Rng) -> Result<CyclicCocycle> {
    if d >= 2 && k.powf(2.0 / (d - 1) as f64) < 4.0 {
        return Err(ForgeError::Input(format!(
            "bound {k} is too small to separate {d} exponents at scale 1 (need K ≥ {})",
            4f64.powf((d - 1) as f64 / 2.0)
        )));
    }
    let frames: Vec<Matrix> = (0..n).map(|_| orthogonal(d, r)).collect();
    let maps = (0..n)
        .map(|j| {
            let mut t = Matrix::zeros(d, d);
            for i in 0..d {
                let a = if d == 1 { 0.0 } else { 1.0 - 2.0 * i as f64 / (d - 1) as f64 };
                t[(i, i)] = k.powf(a) * r.random_range(0.9..1.0);
                for c in i + 1..d {
                    t[(i, c)] = 0.1 * r.random_range(-1.0..1.0);
                }
            }
            &frames[(j + 1) % n] * t * frames[j].transpose()
        })
        .collect();
    Ok(CyclicCocycle::new(maps)?)
}

fn first_dominated_scale(c: &CyclicCocycle) -> Result<Option<(usize, Vec<usize>)>> {
    for ell in [1, 2, 4, 8, 16, 32, 64] {
        let s = finest_splitting(c, ell)?;
        if !s.is_trivial() {
            return Ok(Some((ell, s.indices)));
        }
    }
    Ok(None)
}

/// Rotation blocks `R_θ diag(e^s, e^{−s})` in a fixed random frame, with a
/// trailing `1` in odd dimension.
fn elliptic(d: usize, n: usize, k: f64, r: &mut ChaCha8Rng) -> Result<CyclicCocycle> {
    if d < 2 {
        return Err(ForgeError::Input("elliptic cocycles need d ≥ 2".into()));
    }
    let q = orthogonal(d, r);
    let s = k.ln().min(0.3);
    let maps = (0..n)
        .map(|_| {
            let mut b = Matrix::identity(d, d);
            for p in 0..d / 2 {
                let t = r.random_range(-PI..PI);
                let u = s * r.random_range(0.0..=1.0);
                b.view_mut((2 * p, 2 * p), (2, 2)).copy_from(&(rotation2(t) * diag(&[u.exp(), (-u).exp()])));
            }
            &q * b * q.transpose()
        })
        .collect();
    Ok(CyclicCocycle::new(maps)?)
}
