use std::collections::BTreeMap;

use canon_core::algebra::solve::solution_set;
use canon_core::gallery::{
    divisor_witness, pell_lower_bound, pell_witness, prime_denominator_system, run_item, GalleryItem,
};
use canon_core::scalar::rat;
use canon_core::{CanonError, Config, QuadExt};
use num_bigint::BigInt;
use num_integer::Integer;
use proptest::prelude::*;

proptest! {
    #[test]
    fn divisor_witness_divides(x in -100_000i64..100_000) {
        prop_assume!(x != 0);
        let (a, b) = divisor_witness(&BigInt::from(x)).unwrap();
        let prod: BigInt = (&b * 2 - 1) * (&b * 3 - 1);
        prop_assert_eq!(a * x, prod);
    }
}

#[test]
fn divisor_witness_exists_by_search() {
    // Independent search for some b with x | (2b - 1)(3b - 1) agrees that one exists.
    for x in 1i64..=300 {
        let found = (0..x).any(|b| ((2 * b - 1) * (3 * b - 1)).mod_floor(&x) == 0);
        assert!(found, "x = {x}");
        assert!(divisor_witness(&BigInt::from(x)).is_ok());
    }
}

#[test]
fn pell_witness_is_minimal() {
    for (x, y, z) in [(2u32, 3i64, 17i64), (3, 21, 244), (4, 245, 4801)] {
        assert_eq!(pell_witness(x, 10).unwrap(), (BigInt::from(y), BigInt::from(z)));
        let d = i64::from(x).pow(3) * (i64::from(x) + 2);
        let first = (1i64..)
            .find(|&y| {
                let t = 1 + d * y * y;
                let s = (t as f64).sqrt() as i64;
                (s - 1..=s + 1).any(|s| s * s == t)
            })
            .unwrap();
        assert_eq!(first, y);
        assert!(BigInt::from(y) >= pell_lower_bound(x));
    }
    assert!(matches!(pell_witness(20, 10), Err(CanonError::InvalidArgument(_))));
}

#[test]
fn prime_denominator_solution() {
    // x1 = 1, x2 = 2, x4 = x3^2, x5 = 2 + x3^2, x5 x6 = 1.
    let sys = prime_denominator_system();
    let k = 273;
    let point: Vec<QuadExt> = [rat(1, 1), rat(2, 1), rat(k, 1), rat(k * k, 1), rat(2 + k * k, 1), rat(1, 2 + k * k)]
        .into_iter()
        .map(QuadExt::rational)
        .collect();
    assert!(sys.is_solved_by(&point).unwrap());
    let s = solution_set(&sys, &Config::default()).unwrap();
    assert_eq!(s.kind, canon_core::SolutionKind::PositiveDimensional);
}

#[test]
fn every_item_passes() {
    let cfg = Config::default();
    for item in GalleryItem::ALL {
        let r = run_item(item, &BTreeMap::new(), &cfg).unwrap();
        assert!(r.passed(), "{}: {:?}", item, r.failures());
    }
}

#[test]
fn item_parameters() {
    let cfg = Config::default();
    let mut p = BTreeMap::new();
    p.insert("k".to_string(), "273".to_string());
    assert!(run_item(GalleryItem::PrimeDenominator, &p, &cfg).unwrap().passed());
    p.insert("bogus".to_string(), "1".to_string());
    assert!(run_item(GalleryItem::PrimeDenominator, &p, &cfg).is_err());
    assert_eq!("thm2".parse::<GalleryItem>().unwrap(), GalleryItem::PrimeDenominator);
    assert!("thm9".parse::<GalleryItem>().is_err());
}
