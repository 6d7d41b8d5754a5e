//! Lowering Lyapunov graphs by undoing cancellations.
//!
//! At scale `m` the finite-time functionals
//! `Z_i(y) = (1/n) Σ_p log‖∧^i A^m(T^{pm} y)‖` bound the top-`i` sums of the
//! exponents from above. Small rotations inserted between consecutive blocks
//! of length `m` align each block's image flag with the expanding flag of the
//! next, so that the norms of the blocks multiply up to a bounded loss.

use cocycle_core::graph::CONVEXITY_TOL;
use cocycle_core::linalg::{eigenvalues, ScaledMatrix};
use cocycle_core::linalg::{
    left_singular_vectors, op_norm, orthogonality_defect, right_singular_vectors, singular_values,
};
use cocycle_core::product::stabilized_product;
use cocycle_core::{
    extend_over, finest_splitting, lyapunov_graph, principal_angle, restrict_and_quotient, Block, CyclicCocycle,
    LyapunovGraph, Matrix, SplittingFrames, Subspace,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{PerturbError, Result};
use crate::path::PerturbationPath;
use crate::raise::{raise_graph, RaiseOptions, TARGET_TOL};

/// Smallest alignment angle counted as transverse.
pub const ALPHA_FLOOR: f64 = 1e-4;

/// Lower bound on the selection slack.
pub const SLACK_FLOOR: f64 = 1e-9;

/// Finite-time functionals at scale `m`, one row per phase.
#[derive(Clone, Debug)]
pub struct ZScoreTable {
    pub scale: usize,
    /// Number of whole blocks, `⌊n/m⌋`.
    pub blocks: usize,
    /// `rows[y][i − 1] = Z_i(y)` for `i = 1..d`.
    pub rows: Vec<Vec<f64>>,
    /// Phase averages `L_i^fin`.
    pub finite: Vec<f64>,
    /// Tightest slack at which some phase is good for every `i`.
    pub slack: f64,
    /// Smallest phase that is good at `slack`.
    pub good_phase: usize,
    /// Smallest slack at which every `i` has fewer than `n/d` bad phases.
    pub pigeonhole_slack: f64,
}

impl ZScoreTable {
    /// Fraction of phases with `Z_i(y) < L_i^fin − slack`.
    pub fn bad_fraction(&self, i: usize, slack: f64) -> f64 {
        let bad = self.rows.iter().filter(|r| r[i - 1] < self.finite[i - 1] - slack).count();
        bad as f64 / self.rows.len() as f64
    }

    pub fn dim(&self) -> usize {
        self.finite.len()
    }
}

/// `Z_i(y)` for every phase and `i = 1..d`.
pub fn z_scores(c: &CyclicCocycle, m: usize) -> Result<ZScoreTable> {
    let n = c.period();
    let d = c.dim();
    if m == 0 || 2 * m > n {
        return Err(PerturbError::Argument(format!("scale {m} outside 1..={}", n / 2)));
    }
    let q = n / m;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|y| {
            let mut z = vec![0.0; d];
            for p in 0..q {
                let logs = log_singular_values_of_block(c, y + p * m, m);
                let mut acc = 0.0;
                for (i, l) in logs.iter().enumerate() {
                    acc += l;
                    z[i] += acc;
                }
            }
            z.iter().map(|v| v / n as f64).collect()
        })
        .collect();
    let finite: Vec<f64> = (0..d).map(|i| rows.iter().map(|r| r[i]).sum::<f64>() / n as f64).collect();
    let deficit = |r: &Vec<f64>| (0..d).map(|i| finite[i] - r[i]).fold(0.0f64, f64::max);
    let tight = rows.iter().map(deficit).fold(f64::INFINITY, f64::min);
    let slack = tight.max(SLACK_FLOOR);
    let good_phase = rows.iter().position(|r| deficit(r) <= slack).expect("the minimizing phase is good");
    let allowed = n.div_ceil(d) - 1;
    let pigeonhole_slack = (0..d)
        .map(|i| {
            let mut e: Vec<f64> = rows.iter().map(|r| finite[i] - r[i]).collect();
            e.sort_by(|a, b| b.total_cmp(a));
            e[allowed].max(0.0)
        })
        .fold(SLACK_FLOOR, f64::max);
    Ok(ZScoreTable { scale: m, blocks: q, rows, finite, slack, good_phase, pigeonhole_slack })
}

/// Descending log singular values of `A^len(phase)`.
fn log_singular_values_of_block(c: &CyclicCocycle, phase: usize, len: usize) -> Vec<f64> {
    let p = stabilized_product(c, phase, len);
    singular_values(&p.r).iter().map(|s| s.ln() + p.log_scale).collect()
}

#[derive(Clone, Debug)]
pub struct AlignOptions {
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
    /// The identity is kept when it already achieves this angle.
    pub accept: f64,
}

impl Default for AlignOptions {
    fn default() -> Self {
        Self { restarts: 24, iterations: 200, seed: 0, accept: std::f64::consts::PI / 8.0 }
    }
}

#[derive(Clone, Debug)]
pub struct FlagAlignment {
    pub rotation: Matrix,
    /// `min_i ∠(R F_i, G_{d−i})`.
    pub alpha: f64,
}

/// Orthogonal `R` with `‖R − Id‖ < eps` making `R F_i` transverse to
/// `G_{d−i}` for all `i`. Flags are orthonormal `d × d` matrices whose first
/// `i` columns span the `i`-th subspace.
pub fn align_flags(flag_f: &Matrix, flag_g: &Matrix, eps: f64, opts: &AlignOptions) -> Result<FlagAlignment> {
    let d = flag_f.nrows();
    for f in [flag_f, flag_g] {
        if f.shape() != (d, d) || orthogonality_defect(f) > 1e-8 {
            return Err(PerturbError::Argument("flags must be orthonormal d×d matrices".into()));
        }
    }
    if !(eps > 0.0) {
        return Err(PerturbError::Argument(format!("eps must be positive, got {eps}")));
    }
    let id = Matrix::identity(d, d);
    let base = flag_alpha(flag_f, flag_g);
    if base >= opts.accept || d < 2 {
        return Ok(FlagAlignment { rotation: id, alpha: base });
    }
    // Cayley parameter bound for ‖R − Id‖ < eps.
    let t = (eps / 2.0).min(1.0);
    let cap = if t >= 1.0 { 1e3 } else { t / (1.0 - t * t).sqrt() * (1.0 - 1e-9) };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let score = |s: &Matrix| flag_alpha(&(cayley(s) * flag_f), flag_g);
    let mut best = (Matrix::zeros(d, d), base);
    for _ in 0..opts.restarts {
        let mut s = clamp(random_skew(d, &mut rng), cap * rng.random_range(0.05..1.0));
        let mut f = score(&s);
        let mut step = 0.25 * cap;
        for _ in 0..opts.iterations {
            let trial = clamp(&s + random_skew(d, &mut rng) * step, cap);
            let ft = score(&trial);
            if ft > f {
                s = trial;
                f = ft;
                step *= 1.5;
            } else {
                step *= 0.7;
            }
            if step < 1e-7 * cap {
                break;
            }
        }
        if f > best.1 {
            best = (s, f);
        }
    }
    if best.1 < ALPHA_FLOOR {
        return Err(PerturbError::capability(
            format!("eps = {eps} does not clear the angle floor {ALPHA_FLOOR}"),
            best.1,
            None,
        ));
    }
    let rotation = cayley(&best.0);
    Ok(FlagAlignment { rotation, alpha: best.1 })
}

fn flag_alpha(f: &Matrix, g: &Matrix) -> f64 {
    let d = f.nrows();
    (1..d)
        .map(|i| {
            let a = Subspace::new(f.columns(0, i).into_owned());
            let b = Subspace::new(g.columns(0, d - i).into_owned());
            match (a, b) {
                (Ok(a), Ok(b)) => principal_angle(&a, &b).unwrap_or(0.0),
                _ => 0.0,
            }
        })
        .fold(std::f64::consts::FRAC_PI_2, f64::min)
}

fn random_skew(d: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let mut s = Matrix::zeros(d, d);
    for r in 0..d {
        for c in r + 1..d {
            let v: f64 = rng.random_range(-1.0..1.0);
            s[(r, c)] = v;
            s[(c, r)] = -v;
        }
    }
    s
}

fn clamp(s: Matrix, cap: f64) -> Matrix {
    let n = op_norm(&s);
    if n > cap {
        s * (cap / n)
    } else {
        s
    }
}

/// `(I − S)^{-1}(I + S)`, orthogonal for skew `S`.
fn cayley(s: &Matrix) -> Matrix {
    let d = s.nrows();
    let id = Matrix::identity(d, d);
    (&id - s).lu().solve(&(&id + s)).expect("I − S is invertible for skew S")
}

#[derive(Clone, Debug)]
pub struct RadiusAlignment {
    pub rotation: Matrix,
    pub alpha: f64,
    /// `max_i ‖∧^i M‖ / ρ(∧^i R M)`.
    pub c_emp: f64,
}

/// Orthogonal `R` near the identity with `ρ(∧^i R M)` comparable to `‖∧^i M‖`.
pub fn norm_to_radius(m: &Matrix, eps: f64, opts: &AlignOptions) -> Result<RadiusAlignment> {
    let (flag_f, flag_g) = image_and_kernel_flags(m, m)?;
    let a = align_flags(&flag_f, &flag_g, eps, opts)?;
    let c_emp = radius_loss(m, &(&a.rotation * m));
    Ok(RadiusAlignment { rotation: a.rotation, alpha: a.alpha, c_emp })
}

/// Left singular flag of `before` and the ascending right singular flag of `after`.
fn image_and_kernel_flags(before: &Matrix, after: &Matrix) -> Result<(Matrix, Matrix)> {
    if before.nrows() != before.ncols() || before.determinant() == 0.0 {
        return Err(PerturbError::Argument("matrix must be square and invertible".into()));
    }
    let (_, u) = left_singular_vectors(before);
    let (_, v) = right_singular_vectors(after);
    let d = v.ncols();
    let mut g = Matrix::zeros(d, d);
    for k in 0..d {
        g.set_column(k, &v.column(d - 1 - k));
    }
    Ok((u, g))
}

/// `max_i ‖∧^i m‖ / ρ(∧^i rm)`.
fn radius_loss(m: &Matrix, rm: &Matrix) -> f64 {
    let s = singular_values(m);
    let mut ev: Vec<f64> = eigenvalues(rm).iter().map(|z| z.norm()).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    let (mut ls, mut le, mut worst) = (0.0, 0.0, 0.0f64);
    for (a, b) in s.iter().zip(&ev) {
        ls += a.ln();
        le += b.ln();
        worst = worst.max(ls - le);
    }
    worst.exp()
}

#[derive(Clone, Debug, Default)]
pub struct SeparateOptions {
    pub align: AlignOptions,
    /// Fail when the achieved slack exceeds this value.
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Separation {
    pub cocycle: CyclicCocycle,
    pub table: ZScoreTable,
    pub good_phase: usize,
    /// Map indices that received a rotation, in insertion order.
    pub phases: Vec<usize>,
    /// `‖R − Id‖` of each rotation.
    pub rotation_norms: Vec<f64>,
    pub alphas: Vec<f64>,
    pub c_emp: f64,
    /// Top-`i` sums of the exponents of the output, `i = 1..d`.
    pub achieved: Vec<f64>,
    /// `max_i (Z_i(good) − achieved_i)⁺`.
    pub slack_emp: f64,
}

/// Inserts rotations `‖R − Id‖ < eps` at the block boundaries of the good phase.
pub fn separate_exponents(c: &CyclicCocycle, m: usize, eps: f64, opts: &SeparateOptions) -> Result<Separation> {
    if !(eps > 0.0) {
        return Err(PerturbError::Argument(format!("eps must be positive, got {eps}")));
    }
    let table = z_scores(c, m)?;
    let n = c.period();
    let d = c.dim();
    let y = table.good_phase;
    let q = table.blocks;
    let mut maps = c.maps().to_vec();
    let block = |p: usize| scaled_block(c, y + p * m, m);
    let mut prod = block(0);
    let mut phases = Vec::new();
    let mut norms = Vec::new();
    let mut alphas = Vec::new();
    for p in 1..q {
        let next = block(p);
        let (flag_f, flag_g) = image_and_kernel_flags(&prod.m, &next.m)?;
        let align_opts = AlignOptions { seed: opts.align.seed.wrapping_add(p as u64), ..opts.align.clone() };
        let a = align_flags(&flag_f, &flag_g, eps, &align_opts).map_err(|e| at_phase(e, y + p * m))?;
        let j = (y + p * m - 1) % n;
        maps[j] = &a.rotation * &maps[j];
        norms.push(op_norm(&(&a.rotation - Matrix::identity(d, d))));
        phases.push(j);
        alphas.push(a.alpha);
        prod = next.mul(&ScaledMatrix { m: &a.rotation * &prod.m, log_scale: prod.log_scale });
    }
    let rest = scaled_block(c, y + q * m, n - q * m);
    let full = rest.mul(&prod);
    let last = norm_to_radius(&full.m, eps, &opts.align).map_err(|e| at_phase(e, y + n - 1))?;
    let j = (y + n - 1) % n;
    maps[j] = &last.rotation * &maps[j];
    norms.push(op_norm(&(&last.rotation - Matrix::identity(d, d))));
    phases.push(j);
    alphas.push(last.alpha);

    let cocycle = CyclicCocycle::from_maps_unchecked(maps)?;
    let g = lyapunov_graph(&cocycle)?;
    let s = g.sigma();
    let achieved: Vec<f64> = (1..=d).map(|i| s[d] - s[d - i]).collect();
    let z = &table.rows[y];
    let slack_emp = (0..d).map(|i| z[i] - achieved[i]).fold(0.0f64, f64::max);
    if let Some(tol) = opts.tolerance {
        if slack_emp > tol {
            return Err(PerturbError::capability(
                format!("separation slack {slack_emp:.3e} exceeds the tolerance {tol:.3e}"),
                slack_emp,
                None,
            ));
        }
    }
    Ok(Separation {
        cocycle,
        good_phase: y,
        phases,
        rotation_norms: norms,
        alphas,
        c_emp: last.c_emp,
        achieved,
        slack_emp,
        table,
    })
}

fn scaled_block(c: &CyclicCocycle, phase: usize, len: usize) -> ScaledMatrix {
    let p = stabilized_product(c, phase, len);
    let mut s = ScaledMatrix::new(&p.q * &p.r);
    s.log_scale += p.log_scale;
    s
}

fn at_phase(e: PerturbError, phase: usize) -> PerturbError {
    match e {
        PerturbError::Capability { reason, residual, partial } => {
            PerturbError::Capability { reason: format!("{reason} (insertion at phase {phase})"), residual, partial }
        }
        other => other,
    }
}

#[derive(Clone, Debug)]
pub struct Realization {
    pub cocycle: CyclicCocycle,
    /// One separation per bundle of the finest splitting that was separated.
    pub separations: Vec<Separation>,
    pub path: PerturbationPath,
}

#[derive(Clone, Debug)]
pub struct RealizeOptions {
    pub separate: SeparateOptions,
    /// Scale of the finest splitting whose cuts stay pinned.
    pub ell: usize,
}

impl Default for RealizeOptions {
    fn default() -> Self {
        Self { separate: SeparateOptions::default(), ell: 64 }
    }
}

/// Final graphs closer than this to the target count as realized.
pub const REALIZE_TOL: f64 = 1e-5;

/// Separates at scale `m` inside each finest bundle with half the budget, then
/// raises to `target` with the other half keeping the finest cuts pinned.
pub fn realize_graph(
    c: &CyclicCocycle,
    target: &LyapunovGraph,
    m: usize,
    eps: f64,
    opts: &RealizeOptions,
) -> Result<Realization> {
    let d = c.dim();
    if target.dim() != d {
        return Err(PerturbError::Argument(format!("target of dim {} for a cocycle of dim {d}", target.dim())));
    }
    if !target.is_convex(CONVEXITY_TOL) {
        return Err(PerturbError::Argument("target graph is not convex".into()));
    }
    let start = lyapunov_graph(c)?;
    if (start.sigma()[d] - target.sigma()[d]).abs() > TARGET_TOL {
        return Err(PerturbError::Order(format!(
            "target σ_{d} = {} differs from the current {}",
            target.sigma()[d],
            start.sigma()[d]
        )));
    }
    let split = finest_splitting(c, opts.ell)?;
    for &i in &split.indices {
        let (t, s) = (target.sigma()[i], start.sigma()[i]);
        if (t - s).abs() > TARGET_TOL {
            return Err(PerturbError::Pinned { index: i, target: t, current: s });
        }
    }
    let half = eps / 2.0;
    let mut edges = vec![0];
    edges.extend_from_slice(&split.indices);
    edges.push(d);
    let mut cur = c.clone();
    let mut separations = Vec::new();
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a < 2 {
            continue;
        }
        if a == 0 && b == d {
            let s = separate_exponents(&cur, m, half, &opts.separate)?;
            cur = s.cocycle.clone();
            separations.push(s);
            continue;
        }
        let frames = SplittingFrames::new(&cur)?;
        let bundle: Vec<Subspace> =
            (0..cur.period()).map(|j| Ok(Subspace::new(frames.band_basis(j, a, b)?)?)).collect::<Result<_>>()?;
        let (res, _) = restrict_and_quotient(&cur, &bundle)?;
        let s = separate_exponents(&res, m, half, &opts.separate)?;
        cur = extend_over(&cur, &bundle, &s.cocycle, Block::Restricted)?;
        separations.push(s);
    }
    let raise = RaiseOptions { respect_finest: Some(opts.ell), ell: opts.ell, ..RaiseOptions::default() };
    let path = raise_graph(&cur, target, half, &raise)?;
    let miss = path.end_graph().distance(target);
    if miss > REALIZE_TOL {
        return Err(PerturbError::capability("final graph misses the target", miss, Some(path)));
    }
    Ok(Realization { cocycle: path.endpoint().clone(), separations, path })
}

/// Outcome of `jac M ≤ C_1 · jac(M|F) · jac(M|G)` with `C_1 = (sin α)^{−d}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobianCheck {
    pub alpha: f64,
    pub jac: f64,
    pub bound: f64,
}

impl JacobianCheck {
    pub fn holds(&self) -> bool {
        self.jac <= self.bound * (1.0 + 1e-12)
    }
}

/// Compares the Jacobian of `m` with those of its restrictions to a splitting `F ⊕ G`.
pub fn two_jacobians(m: &Matrix, f: &Subspace, g: &Subspace) -> Result<JacobianCheck> {
    let d = m.nrows();
    if f.dim() + g.dim() != d || f.ambient_dim() != d || g.ambient_dim() != d {
        return Err(PerturbError::Argument("F and G must be complementary".into()));
    }
    let alpha = principal_angle(f, g)?;
    let jac_on = |s: &Subspace| singular_values(&(m * s.basis())).iter().product::<f64>();
    let jac = m.determinant().abs();
    let bound = alpha.sin().powi(-(d as i32)) * jac_on(f) * jac_on(g);
    Ok(JacobianCheck { alpha, jac, bound })
}
