use canon_core::neighbourhoods::{
    cardinality_bound, compute_ktilde, expected_ktilde, induced_system, is_arithmetic_map, is_fixed, omega,
    Fixedness, MapField, Neighbourhood,
};
use canon_core::scalar::{format_rational, int, parse_rational, rat};
use canon_core::system::universe;
use canon_core::{Config, Universe};
use num_bigint::BigInt;
use num_rational::BigRational;

fn set(v: &[(i64, i64)]) -> Vec<BigRational> {
    v.iter().map(|&(p, q)| rat(p, q)).collect()
}

#[test]
fn small_sets_match() {
    let cfg = Config::default();
    assert_eq!(compute_ktilde(1, MapField::Rational, &cfg).unwrap().values, set(&[(0, 1), (1, 1)]));
    assert_eq!(
        compute_ktilde(2, MapField::Rational, &cfg).unwrap().values,
        set(&[(0, 1), (1, 2), (1, 1), (2, 1)])
    );
    for n in 1..=2 {
        assert_eq!(
            compute_ktilde(n, MapField::Complex, &cfg).unwrap().values,
            expected_ktilde(n).unwrap()
        );
    }
}

#[test]
fn every_value_has_a_fixed_witness() {
    let cfg = Config::default();
    let k = compute_ktilde(2, MapField::Rational, &cfg).unwrap();
    for (value, witness) in &k.witnesses {
        let elems: Vec<BigRational> = witness.iter().map(|s| parse_rational(s).unwrap()).collect();
        assert_eq!(format_rational(&elems[0]), *value);
        let a = Neighbourhood::new(elems[0].clone(), elems[1..].iter().cloned());
        assert!(a.len() <= 2);
        assert!(is_fixed(&a, &cfg).unwrap().is_fixed(), "{value}");
    }
}

#[test]
fn fixedness_verdicts() {
    let cfg = Config::default();
    let two = Neighbourhood::new(int(2), [int(1)]);
    assert!(is_fixed(&two, &cfg).unwrap().is_fixed());

    let three = Neighbourhood::new(int(3), []);
    match is_fixed(&three, &cfg).unwrap().verdict {
        Fixedness::Moved { image } => {
            assert_ne!(image[0], int(3));
            assert!(is_arithmetic_map(&three, &image));
        }
        v => panic!("{v:?}"),
    }
}

#[test]
fn arithmetic_maps_preserve_induced_equations() {
    let a = Neighbourhood::new(int(2), [int(1), int(4)]);
    let sys = induced_system(&a);
    // Identity and the zero map always qualify.
    assert!(is_arithmetic_map(&a, a.elements()));
    assert!(!is_arithmetic_map(&a, &[int(0), int(0), int(0)]));
    assert!(is_arithmetic_map(&a, &[int(2), int(1), int(4)]));
    // The induced system is exactly the set of equations holding on the tuple.
    for eq in universe(3, Universe::E) {
        assert_eq!(sys.contains(&eq), eq.holds_rational(a.elements()));
    }
}

#[test]
fn omega_values() {
    let cfg = Config::default();
    assert_eq!(omega(&int(2), 3, &cfg).unwrap().value, Some(2));
    assert_eq!(omega(&rat(1, 4), 3, &cfg).unwrap().value, Some(3));
    assert_eq!(omega(&int(5), 3, &cfg).unwrap().value, None);
    assert!(omega(&int(2), 4, &cfg).is_err());
}

#[test]
fn cardinality_bound_formula() {
    assert_eq!(cardinality_bound(3), BigInt::from(4).pow(12) + 2);
    assert_eq!(cardinality_bound(1), BigInt::from(2).pow(2) + 2);
}
