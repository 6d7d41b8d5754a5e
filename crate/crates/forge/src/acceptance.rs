//! The nine acceptance criteria, each with its tolerances and time budget.

use std::f64::consts::PI;
use std::time::Instant;

use cocycle_core::linalg::{op_norm, rotation2, spectral_radius};
use cocycle_core::{
    check_domination, exterior_power, finest_splitting, lyapunov_graph, principal_angle, CyclicCocycle, LyapunovGraph,
    Matrix, PeriodicSchur, Subspace,
};
use cocycle_majorization::{area_between, step_bound, zigzag_path};
use cocycle_perturb::{
    finite_order_perturbation, mix_two_exponents, radius_shrink, raise_graph, separate_exponents, RaiseOptions,
    SeparateOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::generate::{gaussian, generate, orthogonal, GeneratorSpec, Kind};
use crate::oracle;

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    /// Wall-clock budget in seconds, when the criterion has one.
    pub budget: Option<f64>,
}

impl Outcome {
    pub fn line(&self) -> String {
        let budget = self.budget.map(|b| format!(" / {b:.1} s")).unwrap_or_default();
        format!(
            "[{}] {}. {}: {} ({:.2} s{budget})",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.seconds
        )
    }
}

/// Criteria that cannot be met as stated; their failure is expected.
pub const KNOWN_INFEASIBLE: &[usize] = &[4];

type Check = fn() -> (bool, String);

pub const CRITERIA: [(usize, &str, Option<f64>, Check); 9] = [
    (1, "zigzag contraction", Some(1.0), zigzag_contraction),
    (2, "two-exponent mixing, d = 2", Some(30.0), two_exponent_mixing),
    (3, "rotation closed form", Some(0.1), rotation_closed_form),
    (4, "anti-cancellation", Some(5.0), anti_cancellation),
    (5, "domination oracle equivalence", Some(10.0), domination_oracle),
    (6, "end-to-end raise, d = 3", Some(60.0), end_to_end_raise),
    (7, "finest pinning", None, finest_pinning),
    (8, "finite order", None, finite_order),
    (9, "exterior-power and angle identities", None, identities),
];

pub fn run(id: usize) -> Outcome {
    let (id, title, budget, check) = CRITERIA[id - 1];
    let t = Instant::now();
    let (ok, detail) = check();
    let seconds = t.elapsed().as_secs_f64();
    let passed = ok && budget.is_none_or(|b| seconds <= b);
    Outcome { id, title, passed, detail, seconds, budget }
}

pub fn run_all() -> Vec<Outcome> {
    (1..=CRITERIA.len()).map(run).collect()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random pair `src ⪯ dst` of graphs with exponents in `[−c, c]`:
/// `dst` comes from Robin Hood averaging of `src`'s exponents.
pub fn random_graph_pair(d: usize, c: f64, r: &mut ChaCha8Rng) -> (LyapunovGraph, LyapunovGraph) {
    let mut x: Vec<f64> = (0..d).map(|_| r.random_range(-c..c)).collect();
    x.sort_by(f64::total_cmp);
    let src = LyapunovGraph::from_exponents(&x);
    for _ in 0..3 * d {
        let a = r.random_range(0..d);
        let b = r.random_range(0..d);
        let s = r.random_range(0.5..1.0);
        let (xa, xb) = (x[a], x[b]);
        x[a] = s * xa + (1.0 - s) * xb;
        x[b] = (1.0 - s) * xa + s * xb;
    }
    x.sort_by(f64::total_cmp);
    // Re-anchor so that rounding in the partial sums cannot break the order.
    let mut t = LyapunovGraph::from_exponents(&x).into_sigma();
    t[d] = src.sigma()[d];
    for i in 1..d {
        t[i] = t[i].max(src.sigma()[i]);
    }
    (src, LyapunovGraph::new(t).expect("finite partial sums"))
}

fn zigzag_contraction() -> (bool, String) {
    let mut r = rng(1001);
    let (delta, c) = (1e-3, 5.0);
    let mut worst = f64::NEG_INFINITY;
    let mut longest = 0.0f64;
    let mut done = 0;
    while done < 100 {
        let d = r.random_range(2..=6);
        let (src, dst) = random_graph_pair(d, c, &mut r);
        if !dst.is_convex(1e-9) {
            continue;
        }
        done += 1;
        let plan = match zigzag_path(&src, &dst, delta, false) {
            Ok(p) => p,
            Err(e) => return (false, format!("pair {done}: {e}")),
        };
        if let Err(e) = plan.validate(1e-12) {
            return (false, format!("pair {done}: {e}"));
        }
        longest = longest.max(plan.steps() as f64 / step_bound(d, c, delta) as f64);
        let rate = 1.0 - 2.0 / (d as f64).powi(3);
        for (j, w) in plan.vertices.windows(2).enumerate() {
            let i = plan.moved_index[j];
            if (dst.sigma()[i] - w[1].sigma()[i]).abs() <= 1e-12 {
                continue;
            }
            let before = area_between(w[0].sigma(), dst.sigma());
            let after = area_between(w[1].sigma(), dst.sigma());
            worst = worst.max(after - rate * before);
        }
    }
    let ok = worst <= 1e-12 && longest <= 1.0;
    (ok, format!("worst area excess {worst:.2e} (tol 1e-12), longest plan {:.3} of N(d,c,δ)", longest))
}

fn two_exponent_mixing() -> (bool, String) {
    let mut seed = 2000;
    let mut done = 0;
    let (mut gap, mut drift, mut dec, mut dev) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    while done < 100 {
        seed += 1;
        let spec = GeneratorSpec { kind: Kind::NearIsometry, dim: 2, period: 256, bound: 0.3f64.exp(), seed };
        let c = generate(&spec).expect("valid spec").cocycle;
        if !PeriodicSchur::new(&c).is_ok_and(|s| s.is_real())
            || check_domination(&c, 1, 64).map_or(true, |r| r.dominated)
        {
            continue;
        }
        done += 1;
        let p = match mix_two_exponents(&c, 1, 0.5) {
            Ok(p) => p,
            Err(e) => return (false, format!("seed {seed}: {e}")),
        };
        let a = p.audit();
        let e = p.end_graph().exponents();
        gap = gap.max((e[1] - e[0]).abs());
        drift = drift.max(a.top_drift);
        dec = dec.max(a.worst_decrease);
        dev = dev.max(a.max_deviation);
    }
    let ok = gap <= 1e-6 && drift <= 1e-9 && dec <= 1e-9 && dev <= 0.5;
    (
        ok,
        format!(
            "|λ1−λ2| {gap:.2e} (≤1e-6), σ2 drift {drift:.2e} (≤1e-9), decrease {dec:.2e} (≤1e-9), deviation {dev:.4} (≤0.5); last seed {seed}"
        ),
    )
}

fn rotation_closed_form() -> (bool, String) {
    let b = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
    let s = match radius_shrink(&b) {
        Ok(s) => s,
        Err(e) => return (false, e.to_string()),
    };
    let err = (s.beta - 0.8f64.acos()).abs();
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    for k in 0..=1000 {
        let rho = spectral_radius(&(rotation2(s.sign * s.beta * k as f64 / 1000.0) * &b));
        monotone &= rho < prev;
        prev = rho;
    }
    (err <= 1e-9 && monotone, format!("|β − arccos(4/5)| {err:.2e} (≤1e-9), strictly decreasing: {monotone}"))
}

/// Largest top exponent over common rotation angles `θ` at every phase (or
/// alternating `±θ`) with `‖R_θ − I‖ < eps`, for the period-2 pattern.
pub fn cancellation_oracle(c: &CyclicCocycle, eps: f64) -> f64 {
    let max = 2.0 * (eps / 2.0).asin();
    let mut best = f64::NEG_INFINITY;
    for k in 0..=2000 {
        let t = max * (k as f64 / 1000.0 - 1.0) * (1.0 - 1e-9);
        for sign in [1.0, -1.0] {
            let m = rotation2(sign * t) * c.map(1) * rotation2(t) * c.map(0);
            best = best.max(spectral_radius(&m).ln() / 2.0);
        }
    }
    best
}

fn anti_cancellation() -> (bool, String) {
    let spec = GeneratorSpec { kind: Kind::Cancellation, dim: 2, period: 64, bound: 2.0, seed: 0 };
    let c = generate(&spec).expect("valid spec").cocycle;
    let eps = 0.3;
    let oracle = cancellation_oracle(&c, eps);
    let want = 2f64.ln() - 0.1;
    let s = match separate_exponents(&c, 1, eps, &SeparateOptions::default()) {
        Ok(s) => s,
        Err(e) => return (false, format!("{e}; grid oracle max {oracle:.4}")),
    };
    let g = lyapunov_graph(&s.cocycle).expect("valid cocycle");
    let top = g.sigma()[2] - g.sigma()[1];
    let drift = (g.sigma()[2] - lyapunov_graph(&c).expect("valid cocycle").sigma()[2]).abs();
    let ok = top >= want && drift <= 1e-12;
    (
        ok,
        format!(
            "top exponent {top:.4} (≥ ln2 − 0.1 = {want:.4}), σ2 drift {drift:.1e} (≤1e-12), grid oracle max {oracle:.4} (target attainable: {})",
            oracle >= want
        ),
    )
}

fn domination_oracle() -> (bool, String) {
    let mut r = rng(5005);
    let mut mismatches = Vec::new();
    let mut nontrivial = 0;
    for k in 0..1000u64 {
        let d = r.random_range(1..=4);
        let n = r.random_range(1..=32);
        let ell = 1 << r.random_range(0..4);
        let (kind, bound) = if d >= 2 && r.random_bool(0.3) {
            (Kind::Dominated, 10.0)
        } else {
            (Kind::RandomBounded, r.random_range(1.2..3.0))
        };
        let c =
            generate(&GeneratorSpec { kind, dim: d, period: n, bound, seed: 50_000 + k }).expect("valid spec").cocycle;
        let mine = match finest_splitting(&c, ell) {
            Ok(s) => s.indices,
            Err(e) => return (false, format!("cocycle {k}: {e}")),
        };
        let brute = oracle::finest_cuts(&c, ell);
        nontrivial += usize::from(!brute.is_empty());
        if mine != brute {
            mismatches.push(k);
        }
    }
    (
        mismatches.is_empty(),
        format!("{} of 1000 disagree {:?}; {nontrivial} with a nontrivial splitting", mismatches.len(), mismatches),
    )
}

/// `σ + t(line − σ)`, where `line` is the chord with the same endpoint.
pub fn lifted(g: &LyapunovGraph, t: f64) -> LyapunovGraph {
    let d = g.dim();
    let top = g.sigma()[d];
    let s = g.sigma().iter().enumerate().map(|(i, s)| s + t * (top * i as f64 / d as f64 - s)).collect();
    LyapunovGraph::new(s).expect("finite values")
}

fn end_to_end_raise() -> (bool, String) {
    let mut r = rng(6006);
    let mut seed = 6000;
    let mut done = 0;
    let (mut miss, mut dev, mut dec) = (0.0f64, 0.0f64, 0.0f64);
    while done < 25 {
        seed += 1;
        let spec = GeneratorSpec { kind: Kind::NearIsometry, dim: 3, period: 64, bound: 0.25f64.exp(), seed };
        let c = generate(&spec).expect("valid spec").cocycle;
        if !PeriodicSchur::new(&c).is_ok_and(|s| s.is_real())
            || (1..3).any(|i| check_domination(&c, i, 64).map_or(true, |r| r.dominated))
        {
            continue;
        }
        done += 1;
        let target = lifted(&lyapunov_graph(&c).expect("valid cocycle"), r.random_range(0.1..=1.0));
        let p = match raise_graph(&c, &target, 0.5, &RaiseOptions::default()) {
            Ok(p) => p,
            Err(e) => return (false, format!("seed {seed}: {e}")),
        };
        let a = p.audit();
        miss = miss.max(p.end_graph().distance(&target));
        dev = dev.max(a.max_deviation);
        dec = dec.max(a.worst_decrease);
    }
    let ok = miss <= 1e-6 && dev <= 0.5 && dec <= 1e-9;
    (ok, format!("target miss {miss:.2e} (≤1e-6), deviation {dev:.4} (≤0.5), decrease {dec:.2e} (≤1e-9)"))
}

/// A rotating 2-plane and an invariant line scaled by `line`, in a fixed random frame.
pub fn plane_and_line(n: usize, line: f64, r: &mut ChaCha8Rng) -> CyclicCocycle {
    let q = orthogonal(3, r);
    let at = if line > 1.0 { 2 } else { 0 };
    let maps = (0..n)
        .map(|_| {
            let t = r.random_range(-PI..PI);
            let u: f64 = r.random_range(0.05..0.3);
            let plane =
                rotation2(t) * Matrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[u.exp(), (-u).exp()]));
            let mut b = Matrix::zeros(3, 3);
            let p0 = if at == 2 { 0 } else { 1 };
            b.view_mut((p0, p0), (2, 2)).copy_from(&plane);
            b[(at, at)] = line;
            &q * b * q.transpose()
        })
        .collect();
    CyclicCocycle::new(maps).expect("invertible maps")
}

fn finest_pinning() -> (bool, String) {
    let mut r = rng(7007);
    let mut done = 0;
    let (mut pinned, mut miss) = (0.0f64, 0.0f64);
    while done < 25 {
        let line = if done % 2 == 0 { 3.0 } else { 1.0 / 3.0 };
        let c = plane_and_line(64, line, &mut r);
        let cut = if line > 1.0 { 2 } else { 1 };
        if !PeriodicSchur::new(&c).is_ok_and(|s| s.is_real())
            || finest_splitting(&c, 4).map_or(true, |s| s.indices != vec![cut])
        {
            continue;
        }
        done += 1;
        let s = lyapunov_graph(&c).expect("valid cocycle").into_sigma();
        let free = 3 - cut;
        let mut t = s.clone();
        t[free] = s[free] + r.random_range(0.2..=1.0) * (0.5 * (s[free - 1] + s[free + 1]) - s[free]);
        let target = LyapunovGraph::new(t).expect("finite values");
        let o = RaiseOptions { respect_finest: Some(4), ..RaiseOptions::default() };
        let p = match raise_graph(&c, &target, 0.5, &o) {
            Ok(p) => p,
            Err(e) => return (false, format!("cocycle {done}: {e}")),
        };
        for g in p.graphs() {
            pinned = pinned.max((g.sigma()[cut] - s[cut]).abs()).max((g.sigma()[3] - s[3]).abs());
        }
        miss = miss.max((p.end_graph().sigma()[free] - target.sigma()[free]).abs());
    }
    (pinned <= 1e-8 && miss <= 1e-6, format!("pinned drift {pinned:.2e} (≤1e-8), unpinned miss {miss:.2e} (≤1e-6)"))
}

/// `P D P⁻¹` where `D` holds `±1`, rotation blocks and possibly Jordan blocks.
pub fn unit_spectrum_matrix(d: usize, r: &mut ChaCha8Rng) -> Matrix {
    let mut b = Matrix::zeros(d, d);
    let mut k = 0;
    while k < d {
        if k + 1 < d && r.random_bool(0.5) {
            b.view_mut((k, k), (2, 2)).copy_from(&rotation2(r.random_range(0.1..PI - 0.1)));
            k += 2;
        } else {
            b[(k, k)] = if r.random_bool(0.5) { 1.0 } else { -1.0 };
            if k + 1 < d && r.random_bool(0.3) {
                b[(k + 1, k + 1)] = b[(k, k)];
                b[(k, k + 1)] = r.random_range(-0.5..0.5);
                k += 1;
            }
            k += 1;
        }
    }
    let p = Matrix::identity(d, d) + gaussian(d, d, r) * 0.2;
    let inv = p.clone().try_inverse().expect("near-identity conjugator");
    p * b * inv
}

fn finite_order() -> (bool, String) {
    let mut r = rng(8008);
    let (mut dev, mut res, mut max_q) = (0.0f64, 0.0f64, 0);
    for k in 0..100 {
        let d = r.random_range(1..=4);
        let l = unit_spectrum_matrix(d, &mut r);
        let f = match finite_order_perturbation(&l, 0.1) {
            Ok(f) => f,
            Err(e) => return (false, format!("matrix {k}: {e}")),
        };
        let mut p = Matrix::identity(d, d);
        for _ in 0..f.order {
            p = &p * &f.matrix;
        }
        dev = dev.max(op_norm(&(&f.matrix - &l)));
        res = res.max(op_norm(&(p - Matrix::identity(d, d))));
        max_q = max_q.max(f.order);
    }
    (dev <= 0.1 && res <= 1e-8, format!("‖L̃ − L‖ {dev:.4} (≤0.1), ‖L̃^q − Id‖ {res:.2e} (≤1e-8), largest q {max_q}"))
}

fn identities() -> (bool, String) {
    let mut r = rng(9009);
    let mut ext = 0.0f64;
    let mut angle = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let d = r.random_range(2..=6);
        let m = gaussian(d, d, &mut r);
        let i = r.random_range(1..=d);
        let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        let mut want: Vec<f64> =
            cocycle_core::exterior::combinations(d, i).iter().map(|c| c.iter().map(|&k| s[k]).product()).collect();
        want.sort_by(|a, b| b.total_cmp(a));
        let mut got: Vec<f64> = exterior_power(&m, i).expect("valid power").singular_values().iter().copied().collect();
        got.sort_by(|a, b| b.total_cmp(a));
        for (g, w) in got.iter().zip(&want) {
            ext = ext.max((g - w).abs() / w.max(f64::MIN_POSITIVE));
        }
        // sin∠(W, U ⊕ V) ≥ sin∠(W, U) · sin∠(U ⊕ W, V) for a random triple.
        if d >= 3 {
            let a = r.random_range(1..=d - 2);
            let b = r.random_range(1..=d - 1 - a);
            let c = r.random_range(1..=d - a - b);
            let sub = |k: usize, r: &mut ChaCha8Rng| Subspace::span(&gaussian(d, k, r)).expect("generic span");
            let (u, v, w) = (sub(a, &mut r), sub(b, &mut r), sub(c, &mut r));
            let lhs = principal_angle(&w, &u.sum(&v).expect("direct sum")).expect("nonzero").sin();
            let rhs = principal_angle(&w, &u).expect("nonzero").sin()
                * principal_angle(&u.sum(&w).expect("direct sum"), &v).expect("nonzero").sin();
            angle = angle.max(rhs - lhs);
        }
    }
    (
        ext <= 1e-8 && angle <= 1e-12,
        format!("exterior singular values rel. error {ext:.2e} (≤1e-8), angle inequality excess {angle:.2e} (≤1e-12)"),
    )
}
