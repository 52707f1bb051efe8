use canon_core::compiler::{
    compile, compile_with, count_new_vars, parse_poly_system, profile, random_poly_system, verify_compilation,
    CompileOptions, Polynomial, PolySystem, VarMeaning,
};
use canon_core::scalar::int;
use canon_core::{CanonError, QuadExt};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Shifts every polynomial so that `a` is a common root.
fn with_root(sys: &PolySystem, a: &[BigRational]) -> PolySystem {
    let polys = sys
        .polys
        .iter()
        .map(|p| {
            let v = p.eval(a).to_integer();
            p.add(&Polynomial::constant(sys.n, -v))
        })
        .collect();
    PolySystem::new(sys.n, polys).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn root_lifts_to_canonical_solution(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=2, a in prop::collection::vec(-2i64..=2, 3)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<BigRational> = a[..n].iter().map(|&x| int(x)).collect();
        let sys = with_root(&random_poly_system(n, m, 2, 3, &mut rng), &a);
        prop_assume!(profile(&sys).is_ok());
        let r = compile(&sys).unwrap();
        let VarMeaning::Explicit(meaning) = &r.var_meaning else { panic!("explicit meaning expected") };
        let values: Vec<QuadExt> = meaning.iter().map(|p| QuadExt::rational(p.eval(&a))).collect();
        prop_assert!(r.canonical.is_solved_by(&values).unwrap());
        for (j, f) in sys.polys.iter().enumerate() {
            prop_assert_eq!(values[r.q[j] - 1].clone(), QuadExt::rational(f.eval(&a)));
        }
    }

    #[test]
    fn variable_count_matches_closed_form(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_poly_system(n, m, 2, 3, &mut rng);
        let r = compile(&sys).unwrap();
        let prof = profile(&sys).unwrap();
        let c = count_new_vars(&prof.max_coeff, prof.m, n, &prof.degrees).unwrap();
        prop_assert_eq!(BigInt::from(r.counts.total_vars), &c.p + n);
        let d = compile_with(&sys, CompileOptions { dedup: true, full_h: false }).unwrap();
        prop_assert!(d.counts.dedup_vars <= r.counts.total_vars);
        prop_assert!(verify_compilation(&sys, &d, 10, seed).unwrap().passed);
    }
}

#[test]
fn compiles_parsed_system_and_verifies() {
    let sys = parse_poly_system("3*x1^2*x2 - 5*x2 + 7\nx1*x2 - 2", None).unwrap();
    assert_eq!(sys.n, 2);
    let r = compile(&sys).unwrap();
    assert!(verify_compilation(&sys, &r, 50, 3).unwrap().passed);
    assert!(r.to_annotated_text().lines().any(|l| l.starts_with("vars ")));
}

#[test]
fn rejects_bad_input() {
    assert!(matches!(parse_poly_system("3*x1^ + 2", None), Err(CanonError::Parse { line: 1, .. })));
    assert!(matches!(parse_poly_system("x1 + 1\nx2 +* 3", None), Err(CanonError::Parse { line: 2, .. })));
    let unused = parse_poly_system("x1 - 1", Some(2)).unwrap();
    assert!(matches!(compile(&unused), Err(CanonError::DegreeZero(2))));
}
