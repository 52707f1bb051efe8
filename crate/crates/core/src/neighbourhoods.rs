//! Arithmetic maps and arithmetic neighbourhoods over the rationals.
//!
//! A map `f: A -> K` is arithmetic when it keeps 1, and every sum and product
//! of elements of `A` that lands in `A`. Such maps are exactly the solutions
//! of the satisfied subset of `A` listed as a tuple, so fixedness of a target
//! is a question about that system's solution set.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::groebner::{buchberger, radical_contains};
use crate::algebra::poly::MonomialOrder;
use crate::algebra::solve::solve_from_basis;
use crate::config::Config;
use crate::error::{CanonError, Result};
use crate::nonlinear::{subset_points, Domain};
use crate::scalar::{format_rational, rat};
use crate::system::{satisfied_subset, satisfied_subset_rational, CanonicalSystem, Universe};
use crate::value::QuadExt;
use crate::QPoly;

const ORDER: MonomialOrder = MonomialOrder::GrevLex;

/// A finite set of rationals containing a target, listed target first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Neighbourhood {
    #[serde(with = "crate::scalar::rational_vec_string")]
    elements: Vec<BigRational>,
}

impl Neighbourhood {
    /// Duplicates are dropped; `target` is added if missing.
    pub fn new(target: BigRational, others: impl IntoIterator<Item = BigRational>) -> Self {
        let mut elements = vec![target];
        for x in others {
            if !elements.contains(&x) {
                elements.push(x);
            }
        }
        Neighbourhood { elements }
    }

    pub fn target(&self) -> &BigRational {
        &self.elements[0]
    }

    pub fn elements(&self) -> &[BigRational] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Every unit, sum and product relation among the elements, with `x1` the
/// target and `x_i` the `i`-th listed element.
pub fn induced_system(a: &Neighbourhood) -> CanonicalSystem {
    satisfied_subset_rational(a.elements(), Universe::E)
}

/// Whether `image[i]` as the image of `a.elements()[i]` is an arithmetic map.
pub fn is_arithmetic_map(a: &Neighbourhood, image: &[BigRational]) -> bool {
    let el = a.elements();
    if image.len() != el.len() {
        return false;
    }
    let pos = |v: &BigRational| el.iter().position(|x| x == v);
    for i in 0..el.len() {
        if el[i].is_one() && !image[i].is_one() {
            return false;
        }
        for j in 0..el.len() {
            if let Some(k) = pos(&(&el[i] + &el[j])) {
                if image[k] != &image[i] + &image[j] {
                    return false;
                }
            }
            if let Some(k) = pos(&(&el[i] * &el[j])) {
                if image[k] != &image[i] * &image[j] {
                    return false;
                }
            }
        }
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Fixedness {
    /// Every arithmetic map into the rationals fixes the target.
    Fixed { evidence: String },
    /// An arithmetic map moving the target.
    Moved {
        #[serde(with = "crate::scalar::rational_vec_string")]
        image: Vec<BigRational>,
    },
    Unknown { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixednessCertificate {
    pub neighbourhood: Neighbourhood,
    pub system: CanonicalSystem,
    #[serde(flatten)]
    pub verdict: Fixedness,
}

impl FixednessCertificate {
    pub fn is_fixed(&self) -> bool {
        matches!(self.verdict, Fixedness::Fixed { .. })
    }
}

/// Largest numerator and denominator tried when searching for a moving map.
pub const SEARCH_HEIGHT: i64 = 1000;
const SEARCH_TRIALS: usize = 2000;

fn small_rationals() -> Vec<BigRational> {
    let mut v = vec![BigRational::zero()];
    for (p, q) in [(1, 1), (2, 1), (1, 2), (3, 1), (1, 3), (2, 3), (3, 2)] {
        v.push(rat(p, q));
        v.push(rat(-p, q));
    }
    v
}

/// Decides whether every arithmetic map `A -> Q` fixes the target.
///
/// Zero-dimensional systems are decided by listing their rational
/// solutions. Otherwise the target is fixed when `x1 - r` vanishes on the
/// whole variety; failing that, rational values (numerators and denominators
/// up to [`SEARCH_HEIGHT`]) are given to a maximal independent set of
/// variables in search of a moving map, and the answer is unknown if none
/// turns up.
pub fn is_fixed(a: &Neighbourhood, cfg: &Config) -> Result<FixednessCertificate> {
    let system = induced_system(a);
    let n = a.len();
    let r = a.target().clone();
    let polys = system.to_polys(ORDER);
    let done = |verdict| {
        Ok(FixednessCertificate {
            neighbourhood: a.clone(),
            system: system.clone(),
            verdict,
        })
    };
    let gb = match buchberger(&polys, n, ORDER, cfg.gb_budget) {
        Ok(g) => g,
        Err(CanonError::BudgetExceeded(m)) => return done(Fixedness::Unknown { reason: m }),
        Err(e) => return Err(e),
    };
    let moved = |points: &[crate::SolutionPoint]| {
        points
            .iter()
            .filter_map(|p| p.rational_values())
            .find(|v| v[0] != r && is_arithmetic_map(a, v))
    };
    let Some(free) = gb.independent_set() else {
        return Err(CanonError::Inconsistent("induced system has no solution".into()));
    };
    if free.is_empty() {
        let s = solve_from_basis(&gb, &polys, cfg)?;
        if let Some(image) = moved(&s.points) {
            return done(Fixedness::Moved { image });
        }
        let rational = s.points.iter().filter(|p| p.rational_values().is_some()).count();
        return done(Fixedness::Fixed {
            evidence: format!(
                "all {rational} rational solutions of the {} complex ones have x1 = {}",
                s.points.len(),
                format_rational(&r)
            ),
        });
    }
    let x1 = &QPoly::var(n, 0, ORDER) - &QPoly::constant(n, r.clone(), ORDER);
    if radical_contains(&polys, &x1, cfg.gb_budget)? {
        return done(Fixedness::Fixed {
            evidence: format!("x1 - {} vanishes on the variety", format_rational(&r)),
        });
    }
    // Small values first, then random ones of bounded height.
    let small = small_rationals();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for t in 0..SEARCH_TRIALS {
        let values: Vec<BigRational> = free
            .iter()
            .enumerate()
            .map(|(k, _)| {
                if t < small.len().pow(free.len().min(3) as u32) {
                    small[(t / small.len().pow(k as u32)) % small.len()].clone()
                } else {
                    rat(rng.gen_range(-SEARCH_HEIGHT..=SEARCH_HEIGHT), rng.gen_range(1..=SEARCH_HEIGHT))
                }
            })
            .collect();
        let fixed: Vec<QPoly> = free
            .iter()
            .zip(&values)
            .map(|(&v, c)| &QPoly::var(n, v, ORDER) - &QPoly::constant(n, c.clone(), ORDER))
            .collect();
        let specialized = gb.extend(&fixed, cfg.gb_budget)?;
        if specialized.is_one() || specialized.dimension() != 0 {
            continue;
        }
        let mut all = polys.clone();
        all.extend(fixed);
        let s = solve_from_basis(&specialized, &all, cfg)?;
        if let Some(image) = moved(&s.points) {
            return done(Fixedness::Moved { image });
        }
    }
    done(Fixedness::Unknown {
        reason: format!("no moving map among {SEARCH_TRIALS} specializations"),
    })
}

/// Which solutions count as maps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MapField {
    Rational,
    Complex,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KTilde {
    pub n: usize,
    pub field: MapField,
    #[serde(with = "crate::scalar::rational_vec_string")]
    pub values: Vec<BigRational>,
    /// A neighbourhood of at most `n` elements for each value.
    pub witnesses: BTreeMap<String, Vec<String>>,
    pub candidates: usize,
}

/// Elements admitting an arithmetic neighbourhood of at most `n` elements,
/// for `n <= 3`.
///
/// Candidates are the solutions of zero-dimensional subsets of at most `n`
/// equations of `E_n`; such a tuple `v` is a neighbourhood of `v1` when every
/// solution of its satisfied subset (rational ones for [`MapField::Rational`])
/// has `x1 = v1`. Solutions outside one quadratic extension have no
/// coordinate equal to 1, so the zero map is arithmetic on them and they can
/// only contribute 0.
pub fn compute_ktilde(n: usize, field: MapField, cfg: &Config) -> Result<KTilde> {
    let domain = match field {
        MapField::Rational => Domain::Real,
        MapField::Complex => Domain::Complex,
    };
    let pts = subset_points(n, domain, cfg)?;
    if pts.budget_exceeded > 0 || !pts.unresolved.is_empty() {
        return Err(CanonError::BudgetExceeded("solution catalog is incomplete".into()));
    }
    let mut values = BTreeSet::new();
    let mut witnesses = BTreeMap::new();
    let mut candidates = 0;
    if pts.dominated > 0 {
        values.insert(BigRational::zero());
        witnesses.insert("0".into(), vec!["0".into()]);
    }
    let mut seen = BTreeSet::new();
    for v in &pts.points {
        let Some(r) = v[0].as_rational().cloned() else {
            continue;
        };
        if field == MapField::Rational && v.iter().any(|x| !x.is_rational()) {
            continue;
        }
        let sys = satisfied_subset(v, Universe::E)?;
        if !seen.insert(sys.clone()) {
            continue;
        }
        candidates += 1;
        let s = crate::algebra::solve::solution_set(&sys, cfg)?;
        if s.kind != crate::SolutionKind::ZeroDimensional {
            continue;
        }
        let target = QuadExt::rational(r.clone());
        let forced = s.points.iter().all(|p| match (field, p.exact_values()) {
            (MapField::Rational, Some(w)) => !w.iter().all(QuadExt::is_rational) || w[0] == target,
            (MapField::Rational, None) => true,
            (MapField::Complex, Some(w)) => w[0] == target,
            (MapField::Complex, None) => p.coords[0].exact.as_ref() == Some(&target),
        });
        if forced && values.insert(r.clone()) {
            let set: BTreeSet<&QuadExt> = v.iter().collect();
            let mut shown = vec![format_rational(&r)];
            shown.extend(set.into_iter().filter(|x| **x != target).map(ToString::to_string));
            witnesses.insert(format_rational(&r), shown);
        }
    }
    Ok(KTilde {
        n,
        field,
        values: values.into_iter().collect(),
        witnesses,
        candidates,
    })
}

/// The values listed for `n = 1, 2, 3`.
pub fn expected_ktilde(n: usize) -> Option<Vec<BigRational>> {
    let v: Vec<(i64, i64)> = match n {
        1 => vec![(0, 1), (1, 1)],
        2 => vec![(0, 1), (1, 1), (2, 1), (1, 2)],
        3 => vec![
            (0, 1),
            (1, 1),
            (2, 1),
            (1, 2),
            (-1, 1),
            (3, 1),
            (4, 1),
            (-1, 2),
            (1, 4),
            (3, 2),
            (-2, 1),
            (1, 3),
            (2, 3),
        ],
        _ => return None,
    };
    let mut out: Vec<BigRational> = v.into_iter().map(|(p, q)| rat(p, q)).collect();
    out.sort();
    Some(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Omega {
    #[serde(with = "crate::scalar::rational_string")]
    pub r: BigRational,
    pub max_n: usize,
    /// Smallest neighbourhood size, if at most `max_n`.
    pub value: Option<usize>,
    pub witness: Option<Vec<String>>,
}

/// Smallest size of a rational arithmetic neighbourhood of `r`, searched
/// exhaustively up to `max_n <= 3`.
pub fn omega(r: &BigRational, max_n: usize, cfg: &Config) -> Result<Omega> {
    if !(1..=3).contains(&max_n) {
        return Err(CanonError::InvalidArgument("omega is searched exhaustively for max_n <= 3".into()));
    }
    for n in 1..=max_n {
        let k = compute_ktilde(n, MapField::Rational, cfg)?;
        if k.values.contains(r) {
            return Ok(Omega {
                r: r.clone(),
                max_n,
                value: Some(n),
                witness: k.witnesses.get(&format_rational(r)).cloned(),
            });
        }
    }
    Ok(Omega {
        r: r.clone(),
        max_n,
        value: None,
        witness: None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CardinalityCheck {
    pub n: usize,
    /// `(n+1)^(n^2+n) + 2`.
    #[serde(with = "crate::scalar::as_string")]
    pub bound: BigInt,
    pub computed: Option<usize>,
    pub passed: bool,
}

pub fn cardinality_bound(n: usize) -> BigInt {
    BigInt::from(n + 1).pow((n * n + n) as u32) + 2
}

/// Compares the size of the computed set with `(n+1)^(n^2+n) + 2`; the set is
/// only computed for `n = 3`.
pub fn cardinality_check(n: usize, cfg: &Config) -> Result<CardinalityCheck> {
    if n < 3 {
        return Err(CanonError::InvalidArgument("the cardinality bound is stated for n >= 3".into()));
    }
    let bound = cardinality_bound(n);
    let computed = if n == 3 {
        Some(compute_ktilde(3, MapField::Rational, cfg)?.values.len())
    } else {
        None
    };
    let passed = computed.is_none_or(|c| BigInt::from(c) <= bound) && bound.is_positive();
    Ok(CardinalityCheck {
        n,
        bound,
        computed,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;
    use crate::system::{Add, Mul, Unit};

    fn nb(target: BigRational, others: &[BigRational]) -> Neighbourhood {
        Neighbourhood::new(target, others.iter().cloned())
    }

    #[test]
    fn induced_two_one() {
        let s = induced_system(&nb(int(2), &[int(1)]));
        for e in [Unit(2), Mul(2, 2, 2), Mul(1, 2, 1), Add(2, 2, 1)] {
            assert!(s.contains(&e), "{e}");
        }
        assert_eq!(s.len(), 4);
        let z = induced_system(&nb(int(0), &[]));
        assert_eq!(z.equations().copied().collect::<Vec<_>>(), vec![Add(1, 1, 1), Mul(1, 1, 1)]);
        let h = induced_system(&nb(rat(1, 2), &[int(1)]));
        assert!(h.contains(&Add(1, 1, 2)) && h.contains(&Unit(2)));
    }

    #[test]
    fn fixedness_examples() {
        let cfg = Config::default();
        assert!(is_fixed(&nb(int(2), &[int(1)]), &cfg).unwrap().is_fixed());
        assert!(is_fixed(&nb(int(0), &[int(1)]), &cfg).unwrap().is_fixed());
        let c = is_fixed(&nb(int(5), &[]), &cfg).unwrap();
        match &c.verdict {
            Fixedness::Moved { image } => {
                assert_ne!(image[0], int(5));
                assert!(is_arithmetic_map(&c.neighbourhood, image));
            }
            v => panic!("{v:?}"),
        }
        // {3, 1, 2}: 1 + 2 = 3 pins 3 once 2 = 1 + 1 is present.
        assert!(is_fixed(&nb(int(3), &[int(1), int(2)]), &cfg).unwrap().is_fixed());
    }

    #[test]
    fn arithmetic_map_check() {
        let a = nb(int(2), &[int(1)]);
        assert!(is_arithmetic_map(&a, &[int(2), int(1)]));
        assert!(!is_arithmetic_map(&a, &[int(3), int(1)]));
        assert!(!is_arithmetic_map(&a, &[int(2), int(0)]));
    }

    #[test]
    fn bound_values() {
        assert_eq!(cardinality_bound(3), BigInt::from(16_777_218));
        assert_eq!(cardinality_bound(4), BigInt::from(5).pow(20u32) + 2);
    }

    #[test]
    fn small_sets() {
        let cfg = Config::default();
        for n in 1..=2 {
            assert_eq!(compute_ktilde(n, MapField::Rational, &cfg).unwrap().values, expected_ktilde(n).unwrap());
        }
    }
}
