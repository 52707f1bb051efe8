//! Buchberger's algorithm with the product and chain criteria.

use std::collections::HashSet;

use num_rational::BigRational;

use crate::algebra::poly::{Monomial, MonomialOrder, QPoly};
use crate::config::Config;
use crate::error::{CanonError, Result};
use crate::system::CanonicalSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum DimensionClass {
    /// The ideal is the whole ring: no complex solutions.
    Empty,
    Zero,
    Positive,
}

/// Gröbner basis of an ideal in a fixed variable count and order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroebnerBasis {
    pub generators: Vec<QPoly>,
    pub order: MonomialOrder,
    pub reduced: bool,
    nvars: usize,
}

/// Fully reduces `f` modulo `g` (remainder of multivariate division).
pub fn normal_form(f: &QPoly, g: &[QPoly]) -> QPoly {
    let mut p = f.clone();
    let mut rem: Vec<(Monomial, BigRational)> = Vec::new();
    while let Some((m, c)) = p.leading().cloned() {
        match g.iter().find(|gi| gi.lm().divides(&m)) {
            Some(gi) => {
                let q = m.div(&gi.lm());
                let coef = &c / gi.lc();
                p = p.sub_mul_term(&q, &coef, gi);
            }
            None => {
                p.pop_leading();
                rem.push((m, c));
            }
        }
    }
    QPoly::from_sorted_terms(f.nvars(), f.order(), rem)
}

fn s_polynomial(a: &QPoly, b: &QPoly) -> QPoly {
    let l = a.lm().lcm(&b.lm());
    let ta = l.div(&a.lm());
    let tb = l.div(&b.lm());
    let left = a.mul_term(&ta, &(BigRational::from_integer(1.into()) / a.lc()));
    left.sub_mul_term(&tb, &(BigRational::from_integer(1.into()) / b.lc()), b)
}

struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
}

struct State {
    order: MonomialOrder,
    basis: Vec<QPoly>,
    pending: Vec<Pair>,
    pending_set: HashSet<(usize, usize)>,
    reductions: u64,
    budget: u64,
}

impl State {
    fn add(&mut self, h: QPoly) {
        let h = h.monic();
        let t = self.basis.len();
        let lm_h = h.lm();
        self.basis.push(h);
        for i in 0..t {
            let lm_i = self.basis[i].lm();
            // Product criterion: coprime leading monomials reduce to zero.
            if lm_i.is_coprime(&lm_h) {
                continue;
            }
            self.pending.push(Pair {
                i,
                j: t,
                lcm: lm_i.lcm(&lm_h),
            });
            self.pending_set.insert((i, t));
        }
    }

    fn chain_skip(&self, p: &Pair) -> bool {
        let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
        (0..self.basis.len()).any(|k| {
            k != p.i
                && k != p.j
                && self.basis[k].lm().divides(&p.lcm)
                && !self.pending_set.contains(&key(p.i, k))
                && !self.pending_set.contains(&key(p.j, k))
        })
    }

    fn select(&mut self) -> Option<Pair> {
        let order = self.order;
        let idx = (0..self.pending.len()).min_by(|&a, &b| {
            let (pa, pb) = (&self.pending[a], &self.pending[b]);
            pa.lcm
                .cmp_by(&pb.lcm, order)
                .then((pa.j, pa.i).cmp(&(pb.j, pb.i)))
        })?;
        let p = self.pending.swap_remove(idx);
        self.pending_set.remove(&(p.i, p.j));
        Some(p)
    }

    fn run(&mut self) -> Result<()> {
        while let Some(p) = self.select() {
            if self.chain_skip(&p) {
                continue;
            }
            self.reductions += 1;
            if self.reductions > self.budget {
                return Err(CanonError::BudgetExceeded(format!(
                    "Gröbner basis exceeded {} S-polynomial reductions",
                    self.budget
                )));
            }
            let s = s_polynomial(&self.basis[p.i], &self.basis[p.j]);
            let h = normal_form(&s, &self.basis);
            if !h.is_zero() {
                let constant = h.is_constant();
                self.add(h);
                if constant {
                    return Ok(());
                }
            }
        }
        Ok(())
    }
}

fn finish(nvars: usize, order: MonomialOrder, basis: Vec<QPoly>) -> GroebnerBasis {
    if let Some(c) = basis.iter().find(|g| g.is_constant()) {
        return GroebnerBasis {
            generators: vec![c.monic()],
            order,
            reduced: true,
            nvars,
        };
    }
    // Minimal basis: drop generators whose leading monomial is a multiple of
    // another one (keeping the earliest among equal leading monomials).
    let mut keep: Vec<QPoly> = Vec::new();
    for (i, g) in basis.iter().enumerate() {
        let redundant = basis.iter().enumerate().any(|(j, h)| {
            j != i && h.lm().divides(&g.lm()) && (h.lm() != g.lm() || j < i)
        });
        if !redundant {
            keep.push(g.clone());
        }
    }
    let mut reduced = Vec::with_capacity(keep.len());
    for i in 0..keep.len() {
        let others: Vec<QPoly> = keep
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, g)| g.clone())
            .collect();
        let lead = keep[i].leading().cloned().unwrap();
        let mut tail = keep[i].clone();
        tail.pop_leading();
        let tail = normal_form(&tail, &others);
        let head = QPoly::from_sorted_terms(nvars, order, vec![lead]);
        reduced.push((&head + &tail).monic());
    }
    reduced.sort_by(|a, b| b.lm().cmp_by(&a.lm(), order));
    GroebnerBasis {
        generators: reduced,
        order,
        reduced: true,
        nvars,
    }
}

/// Reduced Gröbner basis of the ideal generated by `gens`.
///
/// `budget` caps the number of S-polynomial reductions; exceeding it is an
/// error and no partial basis is returned.
pub fn buchberger(gens: &[QPoly], nvars: usize, order: MonomialOrder, budget: u64) -> Result<GroebnerBasis> {
    let empty = GroebnerBasis {
        generators: Vec::new(),
        order,
        reduced: true,
        nvars,
    };
    empty.extend(gens, budget)
}

impl GroebnerBasis {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Basis of the ideal generated by `self` and `extra`, reusing the fact
    /// that `self` is already a Gröbner basis.
    pub fn extend(&self, extra: &[QPoly], budget: u64) -> Result<GroebnerBasis> {
        let mut st = State {
            order: self.order,
            basis: self.generators.clone(),
            pending: Vec::new(),
            pending_set: HashSet::new(),
            reductions: 0,
            budget,
        };
        if self.is_one() {
            return Ok(self.clone());
        }
        for f in extra {
            let f = f.with_order(self.order);
            let h = normal_form(&f, &st.basis);
            if !h.is_zero() {
                let constant = h.is_constant();
                st.add(h);
                if constant {
                    return Ok(finish(self.nvars, self.order, st.basis));
                }
            }
        }
        st.run()?;
        Ok(finish(self.nvars, self.order, st.basis))
    }

    pub fn is_one(&self) -> bool {
        self.generators.len() == 1 && self.generators[0].is_constant()
    }

    pub fn normal_form(&self, f: &QPoly) -> QPoly {
        normal_form(&f.with_order(self.order), &self.generators)
    }

    pub fn contains(&self, f: &QPoly) -> bool {
        self.normal_form(f).is_zero()
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.generators.iter().map(|g| g.lm()).collect()
    }

    pub fn dimension_class(&self) -> DimensionClass {
        if self.is_one() {
            return DimensionClass::Empty;
        }
        let lms = self.leading_monomials();
        let all_pure = (0..self.nvars)
            .all(|v| lms.iter().any(|m| m.pure_power_var() == Some(v)));
        if all_pure {
            DimensionClass::Zero
        } else {
            DimensionClass::Positive
        }
    }

    /// Krull dimension of the quotient ring; `-1` for the unit ideal.
    pub fn dimension(&self) -> i32 {
        match self.independent_set() {
            None => -1,
            Some(s) => s.len() as i32,
        }
    }

    /// A largest set of variables containing no leading monomial's support;
    /// `None` for the unit ideal.
    pub fn independent_set(&self) -> Option<Vec<usize>> {
        if self.is_one() {
            return None;
        }
        let n = self.nvars;
        let supports: Vec<u32> = self
            .leading_monomials()
            .iter()
            .map(|m| (0..n).filter(|&i| m.exp(i) > 0).fold(0u32, |acc, i| acc | 1 << i))
            .collect();
        let mut best = 0u32;
        for set in 0u32..(1u32 << n) {
            if set.count_ones() > best.count_ones() && supports.iter().all(|&s| s & !set != 0) {
                best = set;
            }
        }
        Some((0..n).filter(|&i| best & (1 << i) != 0).collect())
    }

    /// Monomials outside the leading-term ideal, in increasing order, when
    /// there are at most `limit` of them.
    pub fn standard_monomials(&self, limit: usize) -> Option<Vec<Monomial>> {
        if self.is_one() {
            return Some(Vec::new());
        }
        if self.dimension_class() != DimensionClass::Zero {
            return None;
        }
        let lms = self.leading_monomials();
        let standard = |m: &Monomial| !lms.iter().any(|l| l.divides(m));
        let mut seen: HashSet<Monomial> = HashSet::new();
        let mut queue = vec![Monomial::one()];
        seen.insert(Monomial::one());
        let mut out = Vec::new();
        while let Some(m) = queue.pop() {
            out.push(m);
            if out.len() > limit {
                return None;
            }
            for v in 0..self.nvars {
                let next = m.mul(&Monomial::var(v));
                if standard(&next) && seen.insert(next) {
                    queue.push(next);
                }
            }
        }
        out.sort_by(|a, b| a.cmp_by(b, self.order));
        Some(out)
    }
}

/// Gröbner basis (graded reverse lexicographic) of a canonical system.
pub fn system_basis(sys: &CanonicalSystem, cfg: &Config) -> Result<GroebnerBasis> {
    let polys = sys.to_polys(MonomialOrder::GrevLex);
    buchberger(&polys, sys.arity(), MonomialOrder::GrevLex, cfg.gb_budget)
}

/// Consistency over ℂ (weak Nullstellensatz): the basis is not `{1}`.
pub fn is_consistent_c(sys: &CanonicalSystem, cfg: &Config) -> Result<bool> {
    Ok(!system_basis(sys, cfg)?.is_one())
}

/// Whether `f` vanishes on every point of the variety (radical membership,
/// via the Rabinowitsch trick with one extra variable).
pub fn radical_contains(gens: &[QPoly], f: &QPoly, budget: u64) -> Result<bool> {
    let n = f.nvars();
    if n + 1 > crate::algebra::poly::MAX_VARS {
        return Err(CanonError::InvalidArgument("too many variables".into()));
    }
    let order = MonomialOrder::GrevLex;
    let lift = |p: &QPoly| {
        QPoly::from_terms(n + 1, order, p.terms().to_vec())
    };
    let mut lifted: Vec<QPoly> = gens.iter().map(lift).collect();
    let t = QPoly::var(n + 1, n, order);
    let one = QPoly::constant(n + 1, BigRational::from_integer(1.into()), order);
    lifted.push(&(&t * &lift(f)) - &one);
    let gb = buchberger(&lifted, n + 1, order, budget)?;
    Ok(gb.is_one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;
    use crate::system::{Add, Mul, Unit};

    const B: u64 = 1_000_000;

    fn vars(n: usize, order: MonomialOrder) -> Vec<QPoly> {
        (0..n).map(|i| QPoly::var(n, i, order)).collect()
    }

    fn c(n: usize, v: i64, order: MonomialOrder) -> QPoly {
        QPoly::constant(n, int(v), order)
    }

    #[test]
    fn inconsistent_pair() {
        let o = MonomialOrder::GrevLex;
        let x = &vars(1, o)[0];
        let gb = buchberger(&[x - &c(1, 1, o), x - &c(1, 2, o)], 1, o, B).unwrap();
        assert!(gb.is_one());
        assert_eq!(gb.dimension_class(), DimensionClass::Empty);
        assert_eq!(gb.dimension(), -1);
    }

    #[test]
    fn four_solutions() {
        let o = MonomialOrder::Lex;
        let v = vars(2, o);
        let (x, y) = (&v[0], &v[1]);
        let gb = buchberger(&[&(x * x) - y, &(y * y) - x], 2, o, B).unwrap();
        assert_eq!(gb.dimension_class(), DimensionClass::Zero);
        assert_eq!(gb.standard_monomials(100).unwrap().len(), 4);
        // The eliminant is y^4 - y.
        let elim = &(&(y * y) * &(y * y)) - y;
        assert!(gb.generators.contains(&elim));
    }

    #[test]
    fn positive_dimensional() {
        let o = MonomialOrder::GrevLex;
        let v = vars(2, o);
        let gb = buchberger(&[&(&v[0] + &v[1]) - &c(2, 1, o)], 2, o, B).unwrap();
        assert_eq!(gb.dimension_class(), DimensionClass::Positive);
        assert_eq!(gb.dimension(), 1);
        assert!(gb.standard_monomials(100).is_none());
        let v = vars(2, o);
        let gb = buchberger(&[&(&v[0] * &v[0]) - &c(2, 2, o), &v[1] - &v[0]], 2, o, B).unwrap();
        assert_eq!(gb.dimension_class(), DimensionClass::Zero);
    }

    #[test]
    fn consistency_of_canonical_systems() {
        let cfg = Config::default();
        let s = CanonicalSystem::from_equations(1, [Unit(1), Add(1, 1, 1)]).unwrap();
        assert!(!is_consistent_c(&s, &cfg).unwrap());
        let s = CanonicalSystem::from_equations(2, [Unit(1), Add(1, 1, 2)]).unwrap();
        assert!(is_consistent_c(&s, &cfg).unwrap());
        let s = CanonicalSystem::from_equations(1, [Mul(1, 1, 1)]).unwrap();
        assert!(is_consistent_c(&s, &cfg).unwrap());
    }

    #[test]
    fn budget_is_enforced() {
        let o = MonomialOrder::GrevLex;
        let v = vars(3, o);
        let gens = vec![
            &(&v[0] * &v[1]) - &v[2],
            &(&v[1] * &v[2]) - &v[0],
            &(&v[2] * &v[0]) - &v[1],
        ];
        let e = buchberger(&gens, 3, o, 1).unwrap_err();
        assert!(e.to_string().contains("budget exceeded"));
    }

    #[test]
    fn radical_membership() {
        let o = MonomialOrder::GrevLex;
        let x = &vars(1, o)[0];
        let sq = x * x;
        assert!(radical_contains(&[sq.clone()], x, B).unwrap());
        assert!(!radical_contains(&[sq], &(x - &c(1, 1, o)), B).unwrap());
    }

    #[test]
    fn incremental_matches_batch() {
        let o = MonomialOrder::GrevLex;
        let v = vars(3, o);
        let a = vec![&(&v[0] * &v[0]) - &v[1], &(&v[1] * &v[1]) - &v[2]];
        let extra = &(&v[0] + &v[2]) - &c(3, 2, o);
        let base = buchberger(&a, 3, o, B).unwrap();
        let inc = base.extend(&[extra.clone()], B).unwrap();
        let mut all = a.clone();
        all.push(extra);
        let batch = buchberger(&all, 3, o, B).unwrap();
        assert_eq!(inc.generators, batch.generators);
    }
}
