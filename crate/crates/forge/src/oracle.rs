//! Brute-force domination oracle.
//!
//! For each cut the two candidate bundles are found by plain orthogonal
//! iteration around the orbit (forward for the fast bundle, backward through
//! the inverses for the slow one), checked for invariance, and then tested
//! against the raw definition `‖A^ℓ|F‖ / 𝔪(A^ℓ|G) < 1/2` at every phase.
//! Every subset of cuts is enumerated.

use cocycle_core::{CyclicCocycle, Matrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::generate::gaussian;

/// Largest invariance residual accepted for an iterated bundle.
const INVARIANCE_TOL: f64 = 1e-8;

/// `A^len(phase)` up to a positive factor.
fn dense_product(c: &CyclicCocycle, phase: usize, len: usize) -> Matrix {
    let d = c.dim();
    let mut p = Matrix::identity(d, d);
    for k in 0..len {
        p = c.map(phase + k) * p;
        let s = p.norm();
        p /= s;
    }
    p
}

fn orth(m: Matrix) -> Matrix {
    m.qr().q()
}

/// Per-fiber bases of the `k`-dimensional bundle attracting orthogonal
/// iteration along `steps` (maps `fiber j → next(j)`).
fn iterate(
    n: usize,
    k: usize,
    periods: usize,
    d: usize,
    step: impl Fn(usize, &Matrix) -> (usize, Matrix),
) -> Vec<Matrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut q = orth(gaussian(d, k, &mut rng));
    let mut at = 0;
    for _ in 0..periods * n {
        let (next, m) = step(at, &q);
        q = orth(m);
        at = next;
    }
    let mut out = vec![Matrix::zeros(d, k); n];
    for _ in 0..n {
        out[at] = q.clone();
        let (next, m) = step(at, &q);
        q = orth(m);
        at = next;
    }
    out
}

/// `‖(I − P_{to}) m‖` for orthonormal `to`.
fn residual(m: &Matrix, to: &Matrix) -> f64 {
    let m = orth(m.clone());
    (&m - to * (to.transpose() * &m)).norm()
}

/// Whether index `i` is `ℓ`-dominated, straight from the definition.
pub fn index_dominated(c: &CyclicCocycle, i: usize, ell: usize) -> bool {
    let n = c.period();
    let d = c.dim();
    // A dominated cut contracts the modulus ratio by 2^{−n/ℓ} per period,
    // so this many periods converge to far below the invariance tolerance.
    let periods = 80 * ell / n + 20;
    let inverses: Vec<Matrix> = match c.maps().iter().map(|a| a.clone().try_inverse()).collect() {
        Some(v) => v,
        None => return false,
    };
    let fast = iterate(n, d - i, periods, d, |j, q| ((j + 1) % n, c.map(j) * q));
    let slow = iterate(n, i, periods, d, |j, q| {
        let prev = (j + n - 1) % n;
        (prev, &inverses[prev] * q)
    });
    for j in 0..n {
        let next = (j + 1) % n;
        if residual(&(c.map(j) * &fast[j]), &fast[next]) > INVARIANCE_TOL
            || residual(&(c.map(j) * &slow[j]), &slow[next]) > INVARIANCE_TOL
        {
            return false;
        }
    }
    (0..n).all(|j| {
        let a = dense_product(c, j, ell);
        let top = (&a * &slow[j]).singular_values().max();
        let low = (&a * &fast[j]).singular_values().min();
        top < 0.5 * low
    })
}

/// Cuts of the finest `ℓ`-dominated splitting: the largest subset of
/// `{1, …, d−1}` all of whose cuts are dominated, found by enumeration.
pub fn finest_cuts(c: &CyclicCocycle, ell: usize) -> Vec<usize> {
    let d = c.dim();
    let ok: Vec<bool> = (0..d).map(|i| i > 0 && index_dominated(c, i, ell)).collect();
    let mut best: Vec<usize> = Vec::new();
    for mask in 0u32..(1 << (d - 1)) {
        let cuts: Vec<usize> = (1..d).filter(|i| mask & (1 << (i - 1)) != 0).collect();
        if cuts.iter().all(|&i| ok[i]) && cuts.len() > best.len() {
            best = cuts;
        }
    }
    best
}
