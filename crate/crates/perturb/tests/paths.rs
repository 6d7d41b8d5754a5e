mod common;

use cocycle_core::{CyclicCocycle, LyapunovGraph};
use cocycle_perturb::{adjust_spectrum, mix_with, MixOptions, PerturbationPath};
use common::*;
use proptest::prelude::*;

#[test]
fn csv_has_one_row_per_sample() {
    let c = block_cocycle(4);
    let p = mix_with(&c, 1, 0.5, &MixOptions { ell: 4, target: Some(-0.5) }).unwrap();
    let mut buf = Vec::new();
    p.write_csv(&mut buf).unwrap();
    let mut rd = csv::Reader::from_reader(buf.as_slice());
    let header: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["sample", "max_deviation", "sigma_0", "sigma_1", "sigma_2"]);
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), p.len());
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[0].parse::<usize>().unwrap(), k);
        let s1: f64 = row[3].parse().unwrap();
        assert_eq!(s1, p.graphs()[k].sigma()[1]);
    }
}

#[test]
fn constant_path_is_trivially_valid() {
    let p = PerturbationPath::constant(CyclicCocycle::identity(2, 3), 0.1).unwrap();
    assert_eq!(p.len(), 1);
    assert!(p.audit().holds(0.1, 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diagonal_adjustments_keep_the_contract(
        a in prop::collection::vec(-1.0f64..1.0, 3),
        shift in prop::collection::vec(-1e-3f64..1e-3, 3),
        n in 1usize..6,
    ) {
        let mut e = a.clone();
        e.sort_by(f64::total_cmp);
        let maps = (0..n).map(|_| diag(&e.iter().map(|v| v.exp()).collect::<Vec<_>>())).collect();
        let c = CyclicCocycle::new(maps).unwrap();
        let mut t: Vec<f64> = e.iter().zip(&shift).map(|(x, s)| x + s).collect();
        t.sort_by(f64::total_cmp);
        let target = LyapunovGraph::from_exponents(&t);
        let p = adjust_spectrum(&c, &target, 0.1).unwrap();
        let audit = p.audit();
        prop_assert!(audit.max_deviation <= 0.1);
        prop_assert!(audit.max_step <= 0.1 / 16.0 * (1.0 + 1e-9));
        prop_assert!(p.end_graph().distance(&target) < 1e-9);
    }
}
