//! Sparse multivariate polynomials.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalar::{format_rational, Ring};

/// Largest variable count supported by [`Monomial`].
pub const MAX_VARS: usize = 16;

/// Exponent vector; variables past the polynomial's arity stay zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Monomial {
    e: [u16; MAX_VARS],
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { e: [0; MAX_VARS] }
    }

    pub fn var(i: usize) -> Self {
        let mut m = Monomial::one();
        m.e[i] = 1;
        m
    }

    pub fn from_exponents(exps: &[u16]) -> Self {
        assert!(exps.len() <= MAX_VARS, "too many variables");
        let mut m = Monomial::one();
        m.e[..exps.len()].copy_from_slice(exps);
        m
    }

    pub fn exp(&self, i: usize) -> u16 {
        self.e[i]
    }

    pub fn exponents(&self, n: usize) -> &[u16] {
        &self.e[..n]
    }

    pub fn degree(&self) -> u32 {
        self.e.iter().map(|&x| x as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.e.iter().all(|&x| x == 0)
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.e.iter().zip(&other.e).all(|(a, b)| a <= b)
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        let mut m = *self;
        for (a, b) in m.e.iter_mut().zip(&other.e) {
            *a = (*a).max(*b);
        }
        m
    }

    /// `self / other`; caller guarantees divisibility.
    pub fn div(&self, other: &Monomial) -> Monomial {
        let mut m = *self;
        for (a, b) in m.e.iter_mut().zip(&other.e) {
            *a -= *b;
        }
        m
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut m = *self;
        for (a, b) in m.e.iter_mut().zip(&other.e) {
            *a += *b;
        }
        m
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.e.iter().zip(&other.e).all(|(a, b)| *a == 0 || *b == 0)
    }

    /// Index of the only variable occurring, if the monomial is a pure power.
    pub fn pure_power_var(&self) -> Option<usize> {
        let mut found = None;
        for (i, &x) in self.e.iter().enumerate() {
            if x > 0 {
                if found.is_some() {
                    return None;
                }
                found = Some(i);
            }
        }
        found
    }

    pub fn cmp_by(&self, other: &Monomial, order: MonomialOrder) -> Ordering {
        match order {
            MonomialOrder::Lex => self.e.cmp(&other.e),
            MonomialOrder::GrevLex => self.degree().cmp(&other.degree()).then_with(|| {
                for i in (0..MAX_VARS).rev() {
                    if self.e[i] != other.e[i] {
                        return other.e[i].cmp(&self.e[i]);
                    }
                }
                Ordering::Equal
            }),
        }
    }
}

/// Term order; variable `x1` is the largest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MonomialOrder {
    Lex,
    GrevLex,
}

/// Polynomial with terms sorted decreasingly in its order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly<C> {
    nvars: usize,
    order: MonomialOrder,
    terms: Vec<(Monomial, C)>,
}

pub type QPoly = MultiPoly<BigRational>;

impl<C: Ring> MultiPoly<C> {
    pub fn zero(nvars: usize, order: MonomialOrder) -> Self {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} variables supported");
        MultiPoly {
            nvars,
            order,
            terms: Vec::new(),
        }
    }

    pub fn constant(nvars: usize, c: C, order: MonomialOrder) -> Self {
        Self::from_terms(nvars, order, vec![(Monomial::one(), c)])
    }

    /// The variable with 0-based index `i`.
    pub fn var(nvars: usize, i: usize, order: MonomialOrder) -> Self {
        assert!(i < nvars);
        Self::from_terms(nvars, order, vec![(Monomial::var(i), C::one())])
    }

    /// Sorts, merges equal monomials and drops zeros.
    pub fn from_terms(nvars: usize, order: MonomialOrder, mut terms: Vec<(Monomial, C)>) -> Self {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} variables supported");
        terms.sort_by(|a, b| b.0.cmp_by(&a.0, order));
        let mut out: Vec<(Monomial, C)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => *lc = lc.clone() + c,
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        MultiPoly {
            nvars,
            order,
            terms: out,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn terms(&self) -> &[(Monomial, C)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.is_one())
    }

    /// Removes and returns the leading term.
    pub fn pop_leading(&mut self) -> Option<(Monomial, C)> {
        if self.terms.is_empty() {
            None
        } else {
            Some(self.terms.remove(0))
        }
    }

    /// Builds from terms already sorted decreasingly with no zeros or repeats.
    pub(crate) fn from_sorted_terms(
        nvars: usize,
        order: MonomialOrder,
        terms: Vec<(Monomial, C)>,
    ) -> Self {
        MultiPoly {
            nvars,
            order,
            terms,
        }
    }

    pub fn leading(&self) -> Option<&(Monomial, C)> {
        self.terms.first()
    }

    pub fn lm(&self) -> Monomial {
        self.terms[0].0
    }

    pub fn lc(&self) -> &C {
        &self.terms[0].1
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms
            .iter()
            .find(|(t, _)| t == m)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(C::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u16 {
        self.terms.iter().map(|(m, _)| m.exp(var)).max().unwrap_or(0)
    }

    pub fn vars_used(&self) -> Vec<usize> {
        (0..self.nvars).filter(|&i| self.degree_in(i) > 0).collect()
    }

    pub fn with_order(&self, order: MonomialOrder) -> Self {
        Self::from_terms(self.nvars, order, self.terms.clone())
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars, self.order);
        }
        MultiPoly {
            nvars: self.nvars,
            order: self.order,
            terms: self
                .terms
                .iter()
                .map(|(m, x)| (*m, x.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn mul_term(&self, mono: &Monomial, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars, self.order);
        }
        MultiPoly {
            nvars: self.nvars,
            order: self.order,
            terms: self
                .terms
                .iter()
                .map(|(m, x)| (m.mul(mono), x.clone() * c.clone()))
                .collect(),
        }
    }

    /// `self - c * mono * g` in a single merge pass.
    pub fn sub_mul_term(&self, mono: &Monomial, c: &C, g: &Self) -> Self {
        let order = self.order;
        let mut out = Vec::with_capacity(self.terms.len() + g.terms.len());
        let mut a = self.terms.iter().peekable();
        let mut b = g.terms.iter().map(|(m, x)| (m.mul(mono), x)).peekable();
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => break,
                (Some(_), None) => out.push(a.next().unwrap().clone()),
                (None, Some(_)) => {
                    let (m, x) = b.next().unwrap();
                    out.push((m, -(x.clone() * c.clone())));
                }
                (Some((ma, _)), Some((mb, _))) => match ma.cmp_by(mb, order) {
                    Ordering::Greater => out.push(a.next().unwrap().clone()),
                    Ordering::Less => {
                        let (m, x) = b.next().unwrap();
                        out.push((m, -(x.clone() * c.clone())));
                    }
                    Ordering::Equal => {
                        let (m, xa) = a.next().unwrap();
                        let (_, xb) = b.next().unwrap();
                        let v = xa.clone() - xb.clone() * c.clone();
                        if !v.is_zero() {
                            out.push((*m, v));
                        }
                    }
                },
            }
        }
        MultiPoly {
            nvars: self.nvars,
            order,
            terms: out,
        }
    }

    fn merge(&self, other: &Self, negate: bool) -> Self {
        debug_assert_eq!(self.order, other.order);
        let c = if negate { -C::one() } else { C::one() };
        self.sub_mul_term(&Monomial::one(), &-c, other)
    }

    pub fn eval(&self, point: &[C]) -> C {
        self.terms.iter().fold(C::zero(), |acc, (m, c)| {
            let mut t = c.clone();
            for (i, x) in point.iter().enumerate().take(self.nvars) {
                for _ in 0..m.exp(i) {
                    t = t * x.clone();
                }
            }
            acc + t
        })
    }

    /// Substitutes `value` for variable `var`, keeping the variable count.
    pub fn substitute(&self, var: usize, value: &C) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut c = c.clone();
                for _ in 0..m.exp(var) {
                    c = c * value.clone();
                }
                let mut m = *m;
                m.e[var] = 0;
                (m, c)
            })
            .collect();
        Self::from_terms(self.nvars, self.order, terms)
    }

    /// Coefficients `c_0..c_d` when the polynomial only involves `var`.
    pub fn univariate_coeffs(&self, var: usize) -> Option<Vec<C>> {
        let d = self.degree_in(var) as usize;
        let mut out = vec![C::zero(); d + 1];
        for (m, c) in &self.terms {
            if m.degree() != m.exp(var) as u32 {
                return None;
            }
            out[m.exp(var) as usize] = c.clone();
        }
        Some(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::constant(self.nvars, C::one(), self.order);
        for _ in 0..e {
            r = &r * self;
        }
        r
    }
}

impl QPoly {
    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = BigRational::one() / self.lc();
        self.scale(&inv)
    }

    /// Human-readable form with variable names `x1, x2, ...` or custom names.
    pub fn to_string_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            let neg = c < &BigRational::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            if idx == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.is_one() {
                factors.push(format_rational(&abs));
            }
            for i in 0..self.nvars {
                match m.exp(i) {
                    0 => {}
                    1 => factors.push(names[i].clone()),
                    e => factors.push(format!("{}^{e}", names[i])),
                }
            }
            s.push_str(&factors.join("*"));
        }
        s
    }
}

pub fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_with(&default_names(self.nvars)))
    }
}

impl<C: fmt::Debug> fmt::Debug for MultiPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(
                self.terms
                    .iter()
                    .map(|(m, c)| (c, &m.e[..self.nvars])),
            )
            .finish()
    }
}

impl<C: Ring> Add for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn add(self, o: &MultiPoly<C>) -> MultiPoly<C> {
        self.merge(o, false)
    }
}

impl<C: Ring> Sub for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn sub(self, o: &MultiPoly<C>) -> MultiPoly<C> {
        self.merge(o, true)
    }
}

impl<C: Ring> Mul for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn mul(self, o: &MultiPoly<C>) -> MultiPoly<C> {
        let mut terms = Vec::with_capacity(self.terms.len() * o.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                terms.push((ma.mul(mb), ca.clone() * cb.clone()));
            }
        }
        MultiPoly::from_terms(self.nvars, self.order, terms)
    }
}

impl<C: Ring> Neg for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn neg(self) -> MultiPoly<C> {
        self.scale(&-C::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl<C: Ring> $tr for MultiPoly<C> {
            type Output = MultiPoly<C>;
            fn $f(self, o: MultiPoly<C>) -> MultiPoly<C> {
                (&self).$f(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn x(i: usize) -> QPoly {
        QPoly::var(3, i, MonomialOrder::GrevLex)
    }

    #[test]
    fn arithmetic_and_display() {
        let p = &(&x(0) * &x(0)) * &x(1);
        let p = &p.scale(&int(3)) - &x(2).scale(&int(5));
        let p = &p + &QPoly::constant(3, int(7), MonomialOrder::GrevLex);
        assert_eq!(p.to_string(), "3*x1^2*x2 - 5*x3 + 7");
        let z = &p - &p;
        assert!(z.is_zero());
        assert_eq!(p.eval(&[int(1), int(2), int(3)]), int(-2));
    }

    #[test]
    fn orders() {
        let a = Monomial::from_exponents(&[1, 0, 1]);
        let b = Monomial::from_exponents(&[0, 2, 0]);
        // lex: x1 x3 > x2^2; grevlex: same degree, last variable x3 exponent
        // decides: a has more x3 so a is smaller.
        assert_eq!(a.cmp_by(&b, MonomialOrder::Lex), Ordering::Greater);
        assert_eq!(a.cmp_by(&b, MonomialOrder::GrevLex), Ordering::Less);
        let c = Monomial::from_exponents(&[0, 0, 3]);
        assert_eq!(c.cmp_by(&a, MonomialOrder::GrevLex), Ordering::Greater);
    }

    #[test]
    fn sub_mul_term_matches_naive() {
        let p = &(&x(0) * &x(1)) + &x(2);
        let g = &x(1) - &QPoly::constant(3, int(1), MonomialOrder::GrevLex);
        let m = Monomial::var(0);
        let fast = p.sub_mul_term(&m, &int(2), &g);
        let slow = &p - &g.mul_term(&m, &int(2));
        assert_eq!(fast, slow);
    }

    #[test]
    fn substitution_and_univariate() {
        let p = &(&x(0) * &x(0)) - &x(1);
        let q = p.substitute(1, &int(4));
        assert_eq!(q.univariate_coeffs(0).unwrap(), vec![int(-4), int(0), int(1)]);
        assert!(p.univariate_coeffs(0).is_none());
    }
}
