use canon_core::algebra::matrix::bareiss_det;
use canon_core::algebra::numtheory::{crt, factorize, is_prime, is_squarefree, pell_min};
use canon_core::algebra::solve::{real_points, solution_set};
use canon_core::scalar::int;
use canon_core::system::{Add, Mul, Unit};
use canon_core::{CanonicalSystem, Config, Matrix, QuadExt, SolutionKind};
use num_bigint::BigInt;
use proptest::prelude::*;

fn laplace(m: &[Vec<i64>]) -> i64 {
    if m.len() == 1 {
        return m[0][0];
    }
    (0..m.len())
        .map(|c| {
            let minor: Vec<Vec<i64>> = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &v)| v).collect())
                .collect();
            let s = if c % 2 == 0 { 1 } else { -1 };
            s * m[0][c] * laplace(&minor)
        })
        .sum()
}

fn trial_division_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn points(sys: &CanonicalSystem) -> Vec<Vec<QuadExt>> {
    let s = solution_set(sys, &Config::default()).unwrap();
    assert_eq!(s.kind, SolutionKind::ZeroDimensional);
    let mut v: Vec<Vec<QuadExt>> = s.points.iter().map(|p| p.exact_values().unwrap()).collect();
    v.sort();
    v
}

fn q(v: &[i64]) -> Vec<QuadExt> {
    v.iter().map(|&x| QuadExt::from_int(x)).collect()
}

proptest! {
    #[test]
    fn bareiss_matches_cofactor_expansion(n in 1usize..5, seed in prop::collection::vec(-9i64..=9, 16)) {
        let rows: Vec<Vec<i64>> = (0..n).map(|i| seed[i * n..(i + 1) * n].to_vec()).collect();
        let m = Matrix::from_rows(rows.clone()).unwrap();
        prop_assert_eq!(bareiss_det(&m).unwrap(), laplace(&rows));
    }

    #[test]
    fn crt_solves_every_congruence(r1 in 0i64..50, m1 in 1i64..50, r2 in 0i64..50, m2 in 1i64..50) {
        let pairs = [(BigInt::from(r1), BigInt::from(m1)), (BigInt::from(r2), BigInt::from(m2))];
        let brute = (0..m1 * m2).find(|x| (x - r1).rem_euclid(m1) == 0 && (x - r2).rem_euclid(m2) == 0);
        match crt(&pairs) {
            Ok(x) => prop_assert_eq!(Some(x), brute.map(BigInt::from)),
            Err(_) => prop_assert!(brute.is_none()),
        }
    }

    #[test]
    fn factorization_multiplies_back(n in 2u64..1_000_000) {
        let f = factorize(&BigInt::from(n)).unwrap();
        let prod: BigInt = f.iter().map(|(p, e)| p.pow(*e)).product();
        prop_assert_eq!(prod, BigInt::from(n));
        for (p, _) in &f {
            prop_assert!(trial_division_prime(u64::try_from(p).unwrap()));
        }
    }

    #[test]
    fn primality_matches_trial_division(n in 0u64..200_000) {
        prop_assert_eq!(is_prime(&BigInt::from(n)), trial_division_prime(n));
    }
}

#[test]
fn pell_minimal_solutions_match_search() {
    for d in 2i64..60 {
        let r = (d as f64).sqrt() as i64;
        if r * r == d {
            continue;
        }
        let (z, y) = pell_min(&BigInt::from(d)).unwrap();
        // Small d only: the smallest y is found by direct search.
        let y0 = (1i64..200_000)
            .find(|&y| {
                let t = 1 + d * y * y;
                let s = (t as f64).sqrt() as i64;
                (s - 1..=s + 1).any(|s| s * s == t)
            })
            .unwrap();
        assert_eq!(y, BigInt::from(y0), "d = {d}");
        assert_eq!(&z * &z - BigInt::from(d) * &y * &y, BigInt::from(1));
    }
}

#[test]
fn stated_factorizations() {
    let one = BigInt::from(1);
    let n: BigInt = -(&one << 32u32) - (&one << 16u32) - &one;
    let f: Vec<(BigInt, u32)> = [3, 7, 13, 97, 241, 673].iter().map(|&p| (BigInt::from(p), 1)).collect();
    assert_eq!(factorize(&n).unwrap(), f);
    assert!(is_squarefree(&n));
    assert!(is_prime(&BigInt::from(2 + 273 * 273)));
    let g = factorize(&BigInt::from(4 * 13i64.pow(4) - 1)).unwrap();
    assert_eq!(g, vec![(BigInt::from(3), 1), (BigInt::from(113), 1), (BigInt::from(337), 1)]);
}

#[test]
fn solves_small_systems_exactly() {
    let s = CanonicalSystem::from_equations(3, [Unit(1), Add(1, 1, 2), Mul(2, 2, 3)]).unwrap();
    assert_eq!(points(&s), vec![q(&[1, 2, 4])]);

    let s = CanonicalSystem::from_equations(2, [Mul(1, 1, 2), Add(1, 1, 2)]).unwrap();
    assert_eq!(points(&s), vec![q(&[0, 0]), q(&[2, 4])]);

    let s = CanonicalSystem::from_equations(2, [Unit(1), Add(1, 1, 1)]).unwrap();
    assert_eq!(solution_set(&s, &Config::default()).unwrap().kind, SolutionKind::Inconsistent);
}

#[test]
fn real_filter_drops_imaginary_roots() {
    // x1 = 1, x2 + x2 = ... build x^2 = -1 via x2 * x2 = x3, x3 + x1 = x4, x4 = 0 (x4 + x4 = x4).
    let s = CanonicalSystem::from_equations(4, [Unit(1), Mul(2, 2, 3), Add(3, 1, 4), Add(4, 4, 4)]).unwrap();
    let all = solution_set(&s, &Config::default()).unwrap();
    assert_eq!(all.points.len(), 2);
    let vals = all.points[0].exact_values().unwrap();
    assert_eq!(vals[2], QuadExt::rational(int(-1)));
    assert!(real_points(&all).unwrap().is_empty());
}
