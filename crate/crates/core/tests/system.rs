use canon_core::scalar::rat;
use canon_core::system::{parse_system, satisfied_subset_rational, serialize_system, universe, Add, Mul, Unit};
use canon_core::{CanonError, CanonicalEquation, CanonicalSystem, QuadExt, Universe};
use num_rational::BigRational;
use proptest::prelude::*;

fn equation(n: usize) -> impl Strategy<Value = CanonicalEquation> {
    (0..3u8, 1..=n, 1..=n, 1..=n).prop_map(|(t, i, j, k)| match t {
        0 => Unit(i),
        1 => CanonicalEquation::add(i, j, k),
        _ => CanonicalEquation::mul(i, j, k),
    })
}

fn quad(d: i64) -> impl Strategy<Value = QuadExt> {
    (-20i64..20, 1i64..6, -20i64..20, 1i64..6).prop_map(move |(a, b, c, e)| QuadExt::new(rat(a, b), rat(c, e), d))
}

proptest! {
    #[test]
    fn text_format_round_trips(eqs in prop::collection::vec(equation(6), 0..20)) {
        let sys = CanonicalSystem::from_equations(6, eqs).unwrap();
        let back = parse_system(&serialize_system(&sys)).unwrap();
        prop_assert_eq!(back, sys);
    }

    #[test]
    fn satisfied_subset_is_satisfied(v in prop::collection::vec((-3i64..=3, 1i64..=2), 1..4)) {
        let a: Vec<BigRational> = v.iter().map(|&(p, q)| rat(p, q)).collect();
        let sys = satisfied_subset_rational(&a, Universe::E);
        let quad: Vec<QuadExt> = a.iter().cloned().map(QuadExt::rational).collect();
        prop_assert!(sys.is_solved_by(&quad).unwrap());
        for eq in universe(a.len(), Universe::E) {
            prop_assert_eq!(sys.contains(&eq), eq.holds_rational(&a));
        }
    }

    #[test]
    fn quadratic_field_arithmetic(d in prop::sample::select(vec![-3i64, -1, 2, 5]), x in quad(0), y in quad(0), z in quad(0)) {
        let lift = |v: &QuadExt| QuadExt::new(v.a().clone(), v.b().clone(), d);
        let (x, y, z) = (lift(&x), lift(&y), lift(&z));
        prop_assert_eq!(x.mul(&y.add(&z).unwrap()).unwrap(), x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap());
        prop_assert_eq!(x.mul(&y).unwrap(), y.mul(&x).unwrap());
        if !x.is_zero() {
            prop_assert_eq!(x.mul(&x.inv().unwrap()).unwrap(), QuadExt::one());
        }
        prop_assert_eq!(x.mul(&x.conj()).unwrap(), QuadExt::rational(x.norm()));
    }
}

#[test]
fn universe_sizes() {
    for n in 1..6 {
        // n units, and n * n(n+1)/2 each of additions and products.
        assert_eq!(universe(n, Universe::E).len(), n + n * n * (n + 1));
        assert_eq!(universe(n, Universe::W).len(), n + n * n * (n + 1) / 2);
    }
}

#[test]
fn equations_are_normalized() {
    assert_eq!(CanonicalEquation::add(3, 1, 2), Add(1, 3, 2));
    assert_eq!(CanonicalEquation::mul(2, 1, 1), Mul(1, 2, 1));
}

#[test]
fn parse_errors_carry_line_numbers() {
    match parse_system("vars 2\nx1 = 1\nx1 + x9 = x2\n") {
        Err(CanonError::IndexOutOfRange { line, index, .. }) => assert_eq!((line, index), (3, 9)),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_system("vars 2\nx1 ++ x2\n"), Err(CanonError::Parse { line: 2, .. })));
    assert!(matches!(parse_system(""), Err(CanonError::Parse { .. })));
}

#[test]
fn incompatible_radicands_are_rejected() {
    assert!(matches!(
        QuadExt::sqrt(2).add(&QuadExt::sqrt(3)),
        Err(CanonError::IncompatibleExtension(..))
    ));
}
