mod common;

use cocycle_core::linalg::rotation2;
use cocycle_core::{check_domination, finest_splitting, CyclicCocycle, LyapunovGraph, Matrix};
use cocycle_majorization::graph_index;
use cocycle_perturb::{raise_graph, PerturbError, RaiseOptions};
use common::*;
use rand::Rng;

fn opts(ell: usize) -> RaiseOptions {
    RaiseOptions { ell, ..RaiseOptions::default() }
}

#[test]
fn current_graph_gives_constant_path() {
    let mut r = rng(50);
    let c = near_isometry(3, 16, 0.3, &mut r);
    let p = raise_graph(&c, &graph(&c), 0.5, &RaiseOptions::default()).unwrap();
    assert_eq!(p.len(), 1);
}

#[test]
fn determinant_one_cocycle_reaches_target() {
    let c = block_cocycle(8);
    assert!(!check_domination(&c, 1, 8).unwrap().dominated);
    let target = LyapunovGraph::new(vec![0.0, -0.1, 0.0]).unwrap();
    let p = raise_graph(&c, &target, 0.5, &opts(8)).unwrap();
    assert_path_contract(&p, 0.5, 1e-9);
    assert!(p.end_graph().distance(&target) <= 1e-6, "miss {}", p.end_graph().distance(&target));
    assert!(p.schedule().unwrap().is_well_formed());
}

/// Random admissible target: a convex combination of the current graph and
/// the straight line with the same endpoint.
fn lifted(g: &LyapunovGraph, t: f64) -> LyapunovGraph {
    let d = g.dim();
    let top = g.sigma()[d];
    LyapunovGraph::new(g.sigma().iter().enumerate().map(|(i, s)| s + t * (top * i as f64 / d as f64 - s)).collect())
        .unwrap()
}

#[test]
fn three_dimensional_targets_are_reached() {
    let mut r = rng(51);
    let mut done = 0;
    while done < 3 {
        let c = real_spectrum(|| near_isometry(3, 64, 0.25, &mut r));
        if (1..3).any(|i| check_domination(&c, i, 64).unwrap().dominated) {
            continue;
        }
        done += 1;
        let target = lifted(&graph(&c), r.random_range(0.2..1.0));
        let p = raise_graph(&c, &target, 0.5, &RaiseOptions::default()).unwrap();
        assert_path_contract(&p, 0.5, 1e-9);
        assert!(p.end_graph().distance(&target) <= 1e-6);
    }
}

/// A rotating 2-plane next to a strongly expanded line, in a fixed random frame.
fn pinned_cocycle(r: &mut rand_chacha::ChaCha8Rng) -> CyclicCocycle {
    let q = orthogonal(3, r);
    let maps = (0..64)
        .map(|_| {
            let t = r.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let u: f64 = r.random_range(0.05..0.3);
            let mut b = Matrix::zeros(3, 3);
            b.view_mut((0, 0), (2, 2)).copy_from(&(rotation2(t) * diag(&[u.exp(), (-u).exp()])));
            b[(2, 2)] = 3.0;
            &q * b * q.transpose()
        })
        .collect();
    CyclicCocycle::new(maps).unwrap()
}

#[test]
fn finest_cut_stays_pinned() {
    let mut r = rng(52);
    let mut done = 0;
    while done < 3 {
        let c = real_spectrum(|| pinned_cocycle(&mut r));
        if finest_splitting(&c, 4).unwrap().indices != vec![2] {
            continue;
        }
        done += 1;
        let g = graph(&c);
        let s = g.sigma();
        let target = LyapunovGraph::new(vec![0.0, s[2] / 2.0, s[2], s[3]]).unwrap();
        let o = RaiseOptions { respect_finest: Some(4), ..RaiseOptions::default() };
        let p = raise_graph(&c, &target, 0.5, &o).unwrap();
        assert_path_contract(&p, 0.5, 1e-9);
        assert!(coordinate_drift(&p, 2) <= 1e-8, "σ_2 drift {}", coordinate_drift(&p, 2));
        assert!(coordinate_drift(&p, 3) <= 1e-8);
        assert!((p.end_graph().sigma()[1] - s[2] / 2.0).abs() <= 1e-6);
    }
}

#[test]
fn pinned_coordinate_cannot_move() {
    let mut r = rng(53);
    let c = loop {
        let c = real_spectrum(|| pinned_cocycle(&mut r));
        if finest_splitting(&c, 4).unwrap().indices == vec![2] {
            break c;
        }
    };
    let target = lifted(&graph(&c), 0.5);
    let o = RaiseOptions { respect_finest: Some(4), ..RaiseOptions::default() };
    assert!(matches!(raise_graph(&c, &target, 0.5, &o), Err(PerturbError::Pinned { index: 2, .. })));
}

#[test]
fn index_is_preserved_along_the_path() {
    let mut r = rng(54);
    let mut done = 0;
    while done < 2 {
        let c = real_spectrum(|| near_isometry(3, 64, 0.25, &mut r));
        let g = graph(&c);
        let target = lifted(&g, 0.5);
        let index = graph_index(&g);
        if index.0.is_none()
            || graph_index(&target) != index
            || (1..3).any(|i| check_domination(&c, i, 64).unwrap().dominated)
        {
            continue;
        }
        done += 1;
        let o = RaiseOptions { preserve_index: true, ..RaiseOptions::default() };
        let p = raise_graph(&c, &target, 0.5, &o).unwrap();
        assert!(p.end_graph().distance(&target) <= 1e-6);
        assert!(p.graphs().iter().all(|h| graph_index(h) == index));
    }
}

#[test]
fn lower_target_is_an_order_error() {
    let c = block_cocycle(8);
    let target = LyapunovGraph::new(vec![0.0, -1.0, 0.0]).unwrap();
    assert!(matches!(raise_graph(&c, &target, 0.5, &opts(8)), Err(PerturbError::Order(_))));
    let shifted = LyapunovGraph::new(vec![0.0, -0.1, 0.1]).unwrap();
    assert!(matches!(raise_graph(&c, &shifted, 0.5, &opts(8)), Err(PerturbError::Order(_))));
}

#[test]
fn dominated_move_is_refused() {
    let c = CyclicCocycle::new(vec![diag(&[0.5, 2.0])]).unwrap();
    let target = LyapunovGraph::new(vec![0.0, -0.5, 0.0]).unwrap();
    assert!(matches!(raise_graph(&c, &target, 0.5, &opts(1)), Err(PerturbError::Dominated { index: 1, .. })));
}
