use std::collections::BTreeSet;

use canon_core::algebra::solve::{real_points, solution_set};
use canon_core::nonlinear::{
    catalog_maximal, chain_system, doubling_witness, pair_scan, probe_greedy_distinct, reduced_table,
    verify_small_case, Domain, GreedyOptions,
};
use canon_core::system::{satisfied_subset, universe};
use canon_core::{CanonicalSystem, Config, QuadExt, SolutionKind, Universe};

fn exact_points(sys: &CanonicalSystem) -> Vec<Vec<QuadExt>> {
    let s = solution_set(sys, &Config::default()).unwrap();
    assert_eq!(s.kind, SolutionKind::ZeroDimensional);
    let mut v: Vec<_> = s.points.iter().map(|p| p.exact_values().unwrap()).collect();
    v.sort();
    v
}

fn ints(v: &[i64]) -> Vec<QuadExt> {
    v.iter().map(|&x| QuadExt::from_int(x)).collect()
}

#[test]
fn chain_has_two_solutions() {
    assert_eq!(exact_points(&chain_system(4).unwrap()), vec![ints(&[0, 0, 0, 0]), ints(&[2, 4, 16, 256])]);
}

#[test]
fn doubling_witness_is_the_unique_solution_of_its_subset() {
    for n in 2..=4 {
        let w = doubling_witness(n);
        let sys = satisfied_subset(&w, Universe::E).unwrap();
        assert_eq!(exact_points(&sys), vec![w]);
    }
}

#[test]
fn reduced_table_has_sixteen_distinct_equations() {
    let t = reduced_table();
    assert_eq!(t.len(), 16);
    let polys: BTreeSet<String> = t.iter().map(|e| format!("{:?}", e.poly())).collect();
    assert_eq!(polys.len(), 16);
}

#[test]
fn real_pair_scan_is_clean() {
    let r = pair_scan(Domain::Real, false, &Config::default()).unwrap();
    assert_eq!(r.pairs.len(), 120);
    assert!(r.is_clean(), "{}", r.summary());
}

#[test]
fn two_variable_catalog_entries_are_maximal() {
    let cfg = Config::default();
    let e2 = universe(2, Universe::E);
    let cat = catalog_maximal(2, Domain::Real, &cfg).unwrap();
    assert!(!cat.partial);
    for entry in &cat.entries {
        assert!(!entry.solutions.points.is_empty());
        for pt in &entry.solutions.points {
            assert!(entry.system.is_solved_by(&pt.exact_values().unwrap()).unwrap());
        }
        for eq in &e2 {
            if entry.system.contains(eq) {
                continue;
            }
            let mut bigger = entry.system.clone();
            bigger.insert(*eq).unwrap();
            let s = solution_set(&bigger, &cfg).unwrap();
            let real = match s.kind {
                SolutionKind::ZeroDimensional => real_points(&s).unwrap().points.len(),
                SolutionKind::Inconsistent => 0,
                SolutionKind::PositiveDimensional => panic!("positive-dimensional extension of {eq:?}"),
            };
            assert_eq!(real, 0, "adding {eq:?} keeps a real solution");
        }
    }
}

#[test]
fn small_cases_admit_small_solutions() {
    for domain in [Domain::Real, Domain::Complex] {
        assert!(verify_small_case(2, domain, &Config::default()).unwrap().passed);
    }
}

#[test]
fn greedy_probe_is_deterministic() {
    let cfg = Config::default();
    let a = probe_greedy_distinct(4, 5, Domain::Real, GreedyOptions::default(), &cfg).unwrap();
    let b = probe_greedy_distinct(4, 5, Domain::Real, GreedyOptions::default(), &cfg).unwrap();
    assert_eq!(a, b);
    assert!(a.is_clean());
}
