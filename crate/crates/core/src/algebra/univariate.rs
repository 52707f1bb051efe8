//! Dense univariate polynomials over ℚ and Sturm-sequence root isolation.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::algebra::poly::QPoly;
use crate::scalar::format_rational;

/// Coefficients in increasing degree; no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct UPoly {
    c: Vec<BigRational>,
}

impl UPoly {
    pub fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        UPoly { c }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        UPoly::new(c.iter().map(|&v| BigRational::from_integer(v.into())).collect())
    }

    pub fn zero() -> Self {
        UPoly { c: Vec::new() }
    }

    pub fn one() -> Self {
        UPoly::new(vec![BigRational::one()])
    }

    /// `x - r`.
    pub fn linear(r: &BigRational) -> Self {
        UPoly::new(vec![-r.clone(), BigRational::one()])
    }

    /// `None` when the polynomial involves variables other than `var`.
    pub fn from_multi(p: &QPoly, var: usize) -> Option<Self> {
        p.univariate_coeffs(var).map(UPoly::new)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree; `0` for constants and for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn lc(&self) -> BigRational {
        self.c.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.c
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, a| acc * x + a)
    }

    pub fn derivative(&self) -> Self {
        UPoly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| a * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let lc = self.lc();
        UPoly::new(self.c.iter().map(|a| a / &lc).collect())
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        UPoly::new(self.c.iter().map(|a| a * s).collect())
    }

    pub fn add(&self, o: &UPoly) -> Self {
        let n = self.c.len().max(o.c.len());
        UPoly::new(
            (0..n)
                .map(|i| {
                    let a = self.c.get(i).cloned().unwrap_or_else(BigRational::zero);
                    let b = o.c.get(i).cloned().unwrap_or_else(BigRational::zero);
                    a + b
                })
                .collect(),
        )
    }

    pub fn sub(&self, o: &UPoly) -> Self {
        self.add(&o.scale(&-BigRational::one()))
    }

    pub fn mul(&self, o: &UPoly) -> Self {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UPoly::new(out)
    }

    /// Quotient and remainder; `d` must be non-zero.
    pub fn divrem(&self, d: &UPoly) -> (UPoly, UPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut r = self.c.clone();
        let dd = d.degree();
        let lc = d.lc();
        if r.len() < d.c.len() {
            return (UPoly::zero(), self.clone());
        }
        let mut q = vec![BigRational::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let coef = &r[k + dd] / &lc;
            if !coef.is_zero() {
                for (j, b) in d.c.iter().enumerate() {
                    r[k + j] -= &coef * b;
                }
            }
            q[k] = coef;
        }
        r.truncate(dd);
        (UPoly::new(q), UPoly::new(r))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, o: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// Product of the distinct irreducible factors (monic).
    pub fn squarefree_part(&self) -> UPoly {
        if self.degree() == 0 {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.divrem(&g).0.monic()
    }

    /// Integer coefficients with content 1 and positive leading coefficient.
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        if self.is_zero() {
            return Vec::new();
        }
        let l = self
            .c
            .iter()
            .fold(BigInt::one(), |acc, a| acc.lcm(a.denom()));
        let ints: Vec<BigInt> = self
            .c
            .iter()
            .map(|a| (a * BigRational::from_integer(l.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, a| acc.gcd(a));
        let sign = if ints.last().unwrap().is_negative() { -1 } else { 1 };
        ints.iter().map(|a| a / &g * sign).collect()
    }

    /// Strict upper bound on the modulus of every complex root (Cauchy).
    pub fn root_bound(&self) -> BigRational {
        let lc = self.lc().abs();
        let m = self.c[..self.degree()]
            .iter()
            .map(|a| a.abs() / &lc)
            .max()
            .unwrap_or_else(BigRational::zero);
        m + BigRational::one()
    }

    pub fn sturm_sequence(&self) -> Vec<UPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let r = seq[n - 2].divrem(&seq[n - 1]).1;
            if r.is_zero() {
                break;
            }
            seq.push(r.scale(&-BigRational::one()));
        }
        seq
    }
}

fn sign_changes(seq: &[UPoly], x: &BigRational) -> usize {
    let mut last = 0i8;
    let mut changes = 0;
    for p in seq {
        let v = p.eval(x);
        let s = if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        };
        if s != 0 {
            if last != 0 && s != last {
                changes += 1;
            }
            last = s;
        }
    }
    changes
}

/// Isolating interval for one real root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RealRoot {
    Exact(BigRational),
    /// Exactly one root in the open interval `(lo, hi)`; `hi` is never a root,
    /// `lo` may be the exact root of the neighbouring entry.
    Interval { lo: BigRational, hi: BigRational },
}

impl RealRoot {
    pub fn lo(&self) -> &BigRational {
        match self {
            RealRoot::Exact(r) => r,
            RealRoot::Interval { lo, .. } => lo,
        }
    }

    pub fn hi(&self) -> &BigRational {
        match self {
            RealRoot::Exact(r) => r,
            RealRoot::Interval { hi, .. } => hi,
        }
    }

    pub fn width(&self) -> BigRational {
        self.hi() - self.lo()
    }
}

/// Number of distinct real roots of `p` in `(a, b]`.
pub fn count_real_roots(p: &UPoly, a: &BigRational, b: &BigRational) -> usize {
    let q = p.squarefree_part();
    let seq = q.sturm_sequence();
    sign_changes(&seq, a) - sign_changes(&seq, b)
}

/// Disjoint isolating intervals, one per distinct real root, in increasing order.
pub fn sturm_isolate(p: &UPoly) -> Vec<RealRoot> {
    if p.degree() == 0 {
        return Vec::new();
    }
    let q = p.squarefree_part();
    let seq = q.sturm_sequence();
    let b = q.root_bound();
    let mut out = Vec::new();
    let mut stack = vec![(-b.clone(), b, None::<usize>)];
    while let Some((lo, hi, known)) = stack.pop() {
        let count = known.unwrap_or_else(|| sign_changes(&seq, &lo) - sign_changes(&seq, &hi));
        match count {
            0 => {}
            1 => {
                if q.eval(&hi).is_zero() {
                    out.push(RealRoot::Exact(hi));
                } else {
                    out.push(RealRoot::Interval { lo, hi });
                }
            }
            _ => {
                let mid = (&lo + &hi) / BigRational::from_integer(2.into());
                let left = sign_changes(&seq, &lo) - sign_changes(&seq, &mid);
                stack.push((mid.clone(), hi, Some(count - left)));
                stack.push((lo, mid, Some(left)));
            }
        }
    }
    out.sort_by(|a, b| a.lo().cmp(b.lo()));
    out
}

/// Bisects an isolating interval until its width is at most `width`.
pub fn refine_real_root(p: &UPoly, root: &RealRoot, width: &BigRational) -> RealRoot {
    let RealRoot::Interval { lo, hi } = root else {
        return root.clone();
    };
    let q = p.squarefree_part();
    let two = BigRational::from_integer(2.into());
    let (mut lo, mut hi) = (lo.clone(), hi.clone());
    let s_hi = q.eval(&hi).is_positive();
    while &(&hi - &lo) > width {
        let mid = (&lo + &hi) / &two;
        let v = q.eval(&mid);
        if v.is_zero() {
            return RealRoot::Exact(mid);
        }
        if v.is_positive() == s_hi {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    RealRoot::Interval { lo, hi }
}

/// Distinct rational roots (rational root theorem on the primitive form).
pub fn rational_roots(p: &UPoly) -> Vec<BigRational> {
    let mut out = Vec::new();
    let q = p.squarefree_part();
    for r in sturm_isolate(&q) {
        match r {
            RealRoot::Exact(x) => out.push(x),
            RealRoot::Interval { .. } => {
                // A rational root a/b needs b | lc, so an interval narrower than
                // 1/lc^2 contains at most one candidate.
                let ints = q.primitive_integer();
                let lc = BigRational::from_integer(ints.last().unwrap().clone());
                let w = BigRational::one() / (&lc * &lc * BigRational::from_integer(4.into()));
                if let RealRoot::Interval { lo, hi } = refine_real_root(&q, &r, &w) {
                    let cand = ((&lo + &hi) / BigRational::from_integer(2.into()) * &lc).round() / &lc;
                    if q.eval(&cand).is_zero() {
                        out.push(cand);
                    }
                } else if let RealRoot::Exact(x) = refine_real_root(&q, &r, &w) {
                    out.push(x);
                }
            }
        }
    }
    out
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .c
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, a)| !a.is_zero())
            .map(|(i, a)| match i {
                0 => format_rational(a),
                1 => format!("{}*t", format_rational(a)),
                _ => format!("{}*t^{i}", format_rational(a)),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn isolate_examples() {
        let r = sturm_isolate(&UPoly::from_ints(&[-2, 0, 1]));
        assert_eq!(r.len(), 2);
        assert!(r[0].hi() <= &int(0) && r[1].lo() >= &int(0));
        assert!(sturm_isolate(&UPoly::from_ints(&[1, 0, 1])).is_empty());
        let r = sturm_isolate(&UPoly::from_ints(&[0, -1, 0, 1]));
        assert_eq!(r.len(), 3);
        for (root, target) in r.iter().zip([-1, 0, 1]) {
            assert!(root.lo() <= &int(target) && &int(target) <= root.hi());
        }
        for w in r.windows(2) {
            assert!(w[0].hi() <= w[1].lo());
        }
    }

    #[test]
    fn repeated_roots_are_counted_once() {
        // (x-1)^2 (x+2)
        let p = UPoly::from_ints(&[-1, 1]).mul(&UPoly::from_ints(&[-1, 1])).mul(&UPoly::from_ints(&[2, 1]));
        assert_eq!(sturm_isolate(&p).len(), 2);
        assert_eq!(count_real_roots(&p, &int(-10), &int(10)), 2);
        let mut roots = rational_roots(&p);
        roots.sort();
        assert_eq!(roots, vec![int(-2), int(1)]);
    }

    #[test]
    fn refinement_and_rational_roots() {
        let p = UPoly::from_ints(&[-2, 0, 1]);
        let r = sturm_isolate(&p);
        let fine = refine_real_root(&p, &r[1], &rat(1, 1 << 20));
        assert!(fine.width() <= rat(1, 1 << 20));
        let s = fine.lo();
        assert!(s * s < int(2));
        // 6x^2 - x - 1 = (3x+1)(2x-1)
        let mut roots = rational_roots(&UPoly::from_ints(&[-1, -1, 6]));
        roots.sort();
        assert_eq!(roots, vec![rat(-1, 3), rat(1, 2)]);
        assert!(rational_roots(&UPoly::from_ints(&[-2, 0, 1])).is_empty());
    }

    #[test]
    fn gcd_and_division() {
        let a = UPoly::from_ints(&[-1, 0, 1]);
        let b = UPoly::from_ints(&[1, 1]);
        assert_eq!(a.gcd(&b), b);
        let (q, r) = a.divrem(&b);
        assert_eq!(q, UPoly::from_ints(&[-1, 1]));
        assert!(r.is_zero());
        assert_eq!(UPoly::from_ints(&[2, 4, 6]).primitive_integer(), vec![1.into(), 2.into(), 3.into()]);
    }
}
