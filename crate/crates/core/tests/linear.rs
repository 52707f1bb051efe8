use canon_core::linear::{minor_scan, pattern_rows, probe_additive, rational_bound_check, verify_additive_small, ScanMode};
use canon_core::system::{universe, Unit};
use canon_core::{CanonError, CanonicalSystem, Universe};
use num_bigint::BigInt;
use proptest::prelude::*;

fn det(m: &[Vec<i64>]) -> i64 {
    if m.is_empty() {
        return 1;
    }
    (0..m.len())
        .map(|c| {
            let minor: Vec<Vec<i64>> = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &v)| v).collect())
                .collect();
            (if c % 2 == 0 { 1 } else { -1 }) * m[0][c] * det(&minor)
        })
        .sum()
}

/// Largest maximal minor over every choice of `n - 1` pattern rows.
fn brute_max_minor(n: usize) -> (usize, i64) {
    let rows = pattern_rows(n);
    let mut count = 0;
    let mut best = 0;
    let mut idx = vec![0usize; n - 1];
    loop {
        count += 1;
        let m: Vec<Vec<i64>> = idx.iter().map(|&i| rows[i].clone()).collect();
        for c in 0..n {
            let minor: Vec<Vec<i64>> = m
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &v)| v).collect())
                .collect();
            best = best.max(det(&minor).abs());
        }
        let mut k = 0;
        while k < idx.len() && idx[k] + 1 == rows.len() {
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            return (count, best);
        }
        idx[k] += 1;
    }
}

#[test]
fn minor_scan_matches_brute_force() {
    for n in 2..=4 {
        let r = minor_scan(n, ScanMode::Exhaustive).unwrap();
        let (count, best) = brute_max_minor(n);
        assert_eq!(r.matrices, count as u64, "n = {n}");
        assert_eq!(r.max_abs_minor, best.to_string(), "n = {n}");
        assert_eq!(r.bound, (1i64 << (n - 1)).to_string());
        assert!(r.is_clean());
    }
    assert_eq!(minor_scan(3, ScanMode::Exhaustive).unwrap().matrices, 144);
}

#[test]
fn random_minor_scan_is_reproducible() {
    let mode = ScanMode::Random { iterations: 2000, seed: 4 };
    assert_eq!(minor_scan(6, mode).unwrap(), minor_scan(6, mode).unwrap());
}

#[test]
fn additive_unique_solutions_are_bounded() {
    for n in 1..=3 {
        let r = verify_additive_small(n).unwrap();
        assert!(r.is_clean());
        assert_eq!(r.max_abs, (1i64 << (n - 1)).to_string());
    }
}

#[test]
fn additive_probe_is_deterministic() {
    let a = probe_additive(4, 200, 17).unwrap();
    assert_eq!(a, probe_additive(4, 200, 17).unwrap());
    assert!(a.violations.is_empty() && a.contradictions.is_empty());
    assert_ne!(a, probe_additive(4, 200, 18).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn refined_point_solves_and_is_bounded(picks in prop::collection::vec(any::<prop::sample::Index>(), 1..6)) {
        let n = 4;
        let w = universe(n, Universe::W);
        let eqs = std::iter::once(Unit(1)).chain(picks.iter().map(|i| *i.get(&w)));
        let sys = CanonicalSystem::from_equations(n, eqs).unwrap();
        match rational_bound_check(&sys) {
            Ok(c) => {
                for eq in sys.equations() {
                    prop_assert!(eq.holds_rational(&c.point));
                }
                let bound = BigInt::from(5).pow(n as u32 - 1);
                let ok = c.point.iter().all(|x| {
                    let sq = x * x;
                    sq.numer() <= &(&bound * sq.denom())
                });
                prop_assert_eq!(c.ok, ok);
                prop_assert!(c.ok);
            }
            Err(CanonError::Inconsistent(_)) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
