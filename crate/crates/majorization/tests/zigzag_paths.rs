use cocycle_core::LyapunovGraph;
use cocycle_majorization::{
    admissible_indices, area_between, graph_index, majorization_cmp, nearly_affine_bound, step_bound, zigzag_path,
    GraphIndex, Majorization,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn exponents(d: usize, c: f64, r: &mut ChaCha8Rng) -> Vec<f64> {
    (0..d).map(|_| r.random_range(-c..c)).collect()
}

/// Random Robin Hood averaging of pairs; the result is majorized by the input.
/// With `block` set, transfers stay on one side of it so the graphs touch there.
fn robin_hood(l: &[f64], moves: usize, block: Option<usize>, r: &mut ChaCha8Rng) -> Vec<f64> {
    let mut x = l.to_vec();
    x.sort_by(f64::total_cmp);
    let d = x.len();
    for _ in 0..moves {
        let (lo, hi) = match block {
            Some(b) if r.random_bool(0.5) => (0, b),
            Some(b) => (b, d),
            None => (0, d),
        };
        if hi - lo < 2 {
            continue;
        }
        let a = r.random_range(lo..hi);
        let b = r.random_range(lo..hi);
        if a == b {
            continue;
        }
        let s = r.random_range(0.5..1.0);
        let (xa, xb) = (x[a], x[b]);
        x[a] = s * xa + (1.0 - s) * xb;
        x[b] = (1.0 - s) * xa + s * xb;
    }
    x
}

fn random_pair(d: usize, c: f64, r: &mut ChaCha8Rng) -> (LyapunovGraph, LyapunovGraph) {
    let l = exponents(d, c, r);
    let block = if d > 2 && r.random_bool(0.3) { Some(r.random_range(1..d)) } else { None };
    let m = robin_hood(&l, 3 * d, block, r);
    (LyapunovGraph::from_exponents(&l), LyapunovGraph::from_exponents(&m))
}

/// Exact `σ_d` agreement: the partial sums of the two vectors can differ in
/// the last bits, so the target is re-anchored on the source endpoint.
fn anchored(src: &LyapunovGraph, dst: &LyapunovGraph) -> LyapunovGraph {
    let mut s = dst.sigma().to_vec();
    let d = s.len() - 1;
    s[d] = src.sigma()[d];
    for i in 1..d {
        s[i] = s[i].max(src.sigma()[i]);
    }
    LyapunovGraph::new(s).unwrap()
}

#[test]
fn contraction_and_step_bound_on_random_pairs() {
    let mut r = rng(31);
    let delta = 1e-3;
    let c = 5.0;
    for _ in 0..200 {
        let d = r.random_range(2..=6);
        let (src, dst) = random_pair(d, c, &mut r);
        let dst = anchored(&src, &dst);
        if !dst.is_convex(1e-9) {
            continue;
        }
        let plan = zigzag_path(&src, &dst, delta, false).unwrap();
        plan.validate(1e-12).unwrap();
        assert!(plan.steps() <= step_bound(d, c, delta), "{} > {}", plan.steps(), step_bound(d, c, delta));
        let end = plan.last().sigma();
        for i in 0..=d {
            assert!(end[i] <= dst.sigma()[i] + 1e-15);
            assert!(dst.sigma()[i] - end[i] <= delta);
        }
        let rate = 1.0 - 2.0 / (d as f64).powi(3);
        for (j, w) in plan.vertices.windows(2).enumerate() {
            let i = plan.moved_index[j];
            if (dst.sigma()[i] - w[1].sigma()[i]).abs() <= 1e-12 {
                continue;
            }
            let before = area_between(w[0].sigma(), dst.sigma());
            let after = area_between(w[1].sigma(), dst.sigma());
            assert!(after <= rate * before + 1e-12, "step {j}: {after} > {rate}·{before}");
        }
    }
}

#[test]
fn three_dimensional_pair_contracts_by_two_over_27() {
    let src = LyapunovGraph::from_exponents(&[-2.0, 0.5, 1.0]);
    let dst = LyapunovGraph::new(vec![0.0, -0.3, -0.3 + -0.15 + 0.0, -0.5]).unwrap();
    assert_eq!(majorization_cmp(&src, &dst).unwrap(), Majorization::Below);
    let plan = zigzag_path(&src, &dst, 1e-3, false).unwrap();
    assert!(plan.steps() > 2);
    for (j, w) in plan.vertices.windows(2).enumerate() {
        let i = plan.moved_index[j];
        if (dst.sigma()[i] - w[1].sigma()[i]).abs() > 1e-12 {
            let ratio = area_between(w[1].sigma(), dst.sigma()) / area_between(w[0].sigma(), dst.sigma());
            assert!(ratio <= 1.0 - 2.0 / 27.0 + 1e-12);
        }
    }
}

#[test]
fn index_is_preserved_on_every_vertex() {
    let mut r = rng(32);
    let mut done = 0;
    while done < 60 {
        let d = r.random_range(3..=6);
        let (src, dst) = random_pair(d, 3.0, &mut r);
        let dst = anchored(&src, &dst);
        let p = graph_index(&src);
        let Some(pv) = p.0 else { continue };
        if pv == 0 || pv == d || graph_index(&dst) != p || !dst.is_convex(1e-9) {
            continue;
        }
        done += 1;
        let plan = zigzag_path(&src, &dst, 1e-4, true).unwrap();
        plan.validate(1e-12).unwrap();
        for v in &plan.vertices {
            assert_eq!(graph_index(v), p);
        }
        assert!(plan.last().distance(&dst) <= 1e-4);
    }
}

#[test]
fn figure_one_triple_is_transitive() {
    // Three convex graphs in dimension 5 with a common endpoint σ_5.
    let s0 = LyapunovGraph::from_exponents(&[-2.0, -1.0, 0.0, 1.0, 2.5]);
    let s1 = LyapunovGraph::from_exponents(&[-1.5, -1.0, 0.0, 0.75, 2.25]);
    let s2 = LyapunovGraph::from_exponents(&[-0.5, -0.25, 0.0, 0.5, 0.75]);
    for g in [&s1, &s2] {
        assert!((g.sigma()[5] - s0.sigma()[5]).abs() < 1e-12);
    }
    assert_eq!(majorization_cmp(&s0, &s1).unwrap(), Majorization::Below);
    assert_eq!(majorization_cmp(&s1, &s2).unwrap(), Majorization::Below);
    assert_eq!(majorization_cmp(&s0, &s2).unwrap(), Majorization::Below);
    assert_eq!(majorization_cmp(&s2, &s0).unwrap(), Majorization::Above);
}

#[test]
fn index_matches_scan() {
    let mut r = rng(33);
    for _ in 0..500 {
        let d = r.random_range(1..=7);
        let g = LyapunovGraph::from_exponents(&exponents(d, 2.0, &mut r));
        let s = g.sigma();
        let argmin = (0..=d).min_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap();
        let strict = (0..=d).all(|i| i == argmin || s[i] > s[argmin]);
        assert_eq!(graph_index(&g), GraphIndex(strict.then_some(argmin)));
        let l = g.exponents();
        if let Some(p) = graph_index(&g).0 {
            assert!(p == 0 || l[p - 1] < 0.0);
            assert!(p == d || l[p] > 0.0);
        }
    }
}

#[test]
fn nearly_affine_on_random_convex_sequences() {
    let mut r = rng(34);
    for _ in 0..1000 {
        let k = r.random_range(2..20);
        let g = LyapunovGraph::from_exponents(&exponents(k, 3.0, &mut r));
        let (dev, bound) = nearly_affine_bound(g.sigma()).unwrap();
        assert!(dev <= bound + 1e-12);
    }
}

#[test]
fn figure_two_interval() {
    // Cuts {0, 2, 5, 6}; the minimum over cuts sits uniquely at i = 5.
    let g = LyapunovGraph::from_exponents(&[-1.0, -0.6, -0.1, 0.02, 0.06, 1.0]);
    let cuts = [0, 2, 5, 6];
    let s = g.sigma();
    let min = cuts.iter().map(|&i| s[i]).fold(f64::INFINITY, f64::min);
    assert_eq!(cuts.iter().filter(|&&i| s[i] == min).count(), 1);
    let scan: Vec<usize> = (0..=6).filter(|&k| s[k] <= min).collect();
    assert_eq!(scan, vec![3, 4, 5]);
    assert_eq!(admissible_indices(&g, &cuts).unwrap(), 3..=5);
}

#[test]
fn hyperbolic_graph_admits_only_its_index() {
    let g = LyapunovGraph::from_exponents(&[-1.0, -0.5, 0.3, 0.8]);
    assert_eq!(graph_index(&g), GraphIndex(Some(2)));
    assert_eq!(admissible_indices(&g, &[0, 2, 4]).unwrap(), 2..=2);
}

#[test]
fn admissible_sets_are_intervals() {
    let mut r = rng(35);
    for _ in 0..1000 {
        let d = r.random_range(1..=7);
        let g = LyapunovGraph::from_exponents(&exponents(d, 2.0, &mut r));
        let mut cuts: Vec<usize> = (1..d).filter(|_| r.random_bool(0.4)).collect();
        cuts.insert(0, 0);
        cuts.push(d);
        let range = admissible_indices(&g, &cuts).unwrap();
        let min = cuts.iter().map(|&i| g.sigma()[i]).fold(f64::INFINITY, f64::min);
        for k in 0..=d {
            assert_eq!(range.contains(&k), g.sigma()[k] <= min + 1e-12);
        }
    }
}
