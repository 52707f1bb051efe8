//! Exact values `a + b·sqrt(d)` over the rationals.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::algebra::numtheory::square_free_decompose;
use crate::error::{CanonError, Result};
use crate::scalar::{format_rational, parse_rational, rational_to_f64};

/// Element `a + b·sqrt(d)` of a single quadratic extension of ℚ.
///
/// Canonical form: when `b = 0` the radicand is stored as `0`, otherwise `d`
/// is square-free and different from `0` and `1`. Equal values therefore have
/// equal representations.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadExt {
    a: BigRational,
    b: BigRational,
    d: i64,
}

fn sign_of(r: &BigRational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

/// Sign of `x + y·sqrt(d)` for `d > 0` (not necessarily square-free).
fn sign_with_root(x: &BigRational, y: &BigRational, d: &BigInt) -> i32 {
    let sx = sign_of(x);
    let sy = sign_of(y);
    if sy == 0 || d.is_zero() {
        return sx;
    }
    if sx == 0 || sx == sy {
        return sy;
    }
    // Opposite signs: compare x^2 with y^2 d.
    let lhs = x * x;
    let rhs = y * y * BigRational::from_integer(d.clone());
    match lhs.cmp(&rhs) {
        Ordering::Greater => sx,
        Ordering::Less => sy,
        Ordering::Equal => 0,
    }
}

/// Sign of `p·sqrt(d1) - q·sqrt(d2)` for `d1, d2 >= 0`.
fn sign_root_diff(p: &BigRational, d1: i64, q: &BigRational, d2: i64) -> i32 {
    let sp = if d1 == 0 { 0 } else { sign_of(p) };
    let sq = if d2 == 0 { 0 } else { -sign_of(q) };
    if sq == 0 {
        return sp;
    }
    if sp == 0 || sp == sq {
        return sq;
    }
    let lhs = p * p * BigRational::from_integer(BigInt::from(d1));
    let rhs = q * q * BigRational::from_integer(BigInt::from(d2));
    match lhs.cmp(&rhs) {
        Ordering::Greater => sp,
        Ordering::Less => sq,
        Ordering::Equal => 0,
    }
}

impl QuadExt {
    /// `a + b·sqrt(d)`; square factors of `d` are pulled into `b`.
    pub fn new(a: BigRational, b: BigRational, d: i64) -> Self {
        if b.is_zero() || d == 0 {
            return QuadExt::rational(a);
        }
        let (k, core) = square_free_decompose(d);
        let b = b * BigRational::from_integer(BigInt::from(k));
        if core == 1 {
            return QuadExt::rational(a + b);
        }
        QuadExt { a, b, d: core }
    }

    pub fn rational(a: BigRational) -> Self {
        QuadExt {
            a,
            b: BigRational::zero(),
            d: 0,
        }
    }

    pub fn from_int(n: i64) -> Self {
        QuadExt::rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        QuadExt::from_int(0)
    }

    pub fn one() -> Self {
        QuadExt::from_int(1)
    }

    /// `sqrt(d)`; negative `d` gives an imaginary value.
    pub fn sqrt(d: i64) -> Self {
        QuadExt::new(BigRational::zero(), BigRational::one(), d)
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    /// Radicand, `0` for rational values.
    pub fn radicand(&self) -> i64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.d == 0
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.is_rational() {
            Some(&self.a)
        } else {
            None
        }
    }

    pub fn is_zero(&self) -> bool {
        self.is_rational() && self.a.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.d >= 0
    }

    fn common_radicand(&self, other: &QuadExt) -> Result<i64> {
        match (self.d, other.d) {
            (0, d) | (d, 0) => Ok(d),
            (d1, d2) if d1 == d2 => Ok(d1),
            (d1, d2) => Err(CanonError::IncompatibleExtension(d1, d2)),
        }
    }

    pub fn add(&self, other: &QuadExt) -> Result<QuadExt> {
        let d = self.common_radicand(other)?;
        Ok(QuadExt::new(&self.a + &other.a, &self.b + &other.b, d))
    }

    pub fn sub(&self, other: &QuadExt) -> Result<QuadExt> {
        let d = self.common_radicand(other)?;
        Ok(QuadExt::new(&self.a - &other.a, &self.b - &other.b, d))
    }

    pub fn mul(&self, other: &QuadExt) -> Result<QuadExt> {
        let d = self.common_radicand(other)?;
        let dr = BigRational::from_integer(BigInt::from(d));
        let a = &self.a * &other.a + &self.b * &other.b * dr;
        let b = &self.a * &other.b + &self.b * &other.a;
        Ok(QuadExt::new(a, b, d))
    }

    pub fn neg(&self) -> QuadExt {
        QuadExt {
            a: -&self.a,
            b: -&self.b,
            d: self.d,
        }
    }

    pub fn conj(&self) -> QuadExt {
        QuadExt {
            a: self.a.clone(),
            b: -&self.b,
            d: self.d,
        }
    }

    /// Field norm `a^2 - d b^2` (the squared modulus when `d < 0`).
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(BigInt::from(self.d))
    }

    pub fn inv(&self) -> Result<QuadExt> {
        let n = self.norm();
        if n.is_zero() {
            return Err(CanonError::InvalidArgument("division by zero".into()));
        }
        Ok(QuadExt::new(&self.a / &n, -&self.b / &n, self.d))
    }

    pub fn div(&self, other: &QuadExt) -> Result<QuadExt> {
        self.mul(&other.inv()?)
    }

    pub fn scale(&self, r: &BigRational) -> QuadExt {
        QuadExt::new(&self.a * r, &self.b * r, self.d)
    }

    pub fn pow(&self, e: u32) -> Result<QuadExt> {
        let mut r = QuadExt::one();
        for _ in 0..e {
            r = r.mul(self)?;
        }
        Ok(r)
    }

    /// Compares `|self|^2` with `bound_sq` exactly.
    pub fn cmp_modulus_sq(&self, bound_sq: &BigRational) -> Ordering {
        if self.d < 0 {
            return self.norm().cmp(bound_sq);
        }
        // (a + b sqrt d)^2 = a^2 + d b^2 + 2ab sqrt d
        let dr = BigRational::from_integer(BigInt::from(self.d));
        let x = &self.a * &self.a + &self.b * &self.b * dr - bound_sq;
        let y = BigRational::from_integer(BigInt::from(2)) * &self.a * &self.b;
        sign_with_root(&x, &y, &BigInt::from(self.d)).cmp(&0)
    }

    /// `|self| <= bound` for a non-negative rational bound.
    pub fn modulus_le(&self, bound: &BigRational) -> bool {
        self.cmp_modulus_sq(&(bound * bound)) != Ordering::Greater
    }

    /// Sign of a real value.
    pub fn real_sign(&self) -> Option<i32> {
        if self.d < 0 {
            return None;
        }
        Some(sign_with_root(&self.a, &self.b, &BigInt::from(self.d)))
    }

    /// Exact comparison of real parts.
    pub fn cmp_re(&self, other: &QuadExt) -> Ordering {
        let (b1, d1) = if self.d > 0 {
            (self.b.clone(), self.d)
        } else {
            (BigRational::zero(), 0)
        };
        let (b2, d2) = if other.d > 0 {
            (other.b.clone(), other.d)
        } else {
            (BigRational::zero(), 0)
        };
        let da = &self.a - &other.a;
        if d1 == d2 || d1 == 0 || d2 == 0 {
            let d = d1.max(d2);
            let db = if d1 == 0 { -b2 } else if d2 == 0 { b1 } else { b1 - b2 };
            return sign_with_root(&da, &db, &BigInt::from(d)).cmp(&0);
        }
        // da + u with u = b1 sqrt d1 - b2 sqrt d2.
        let su = sign_root_diff(&b1, d1, &b2, d2);
        let sa = sign_of(&da);
        if su == 0 || sa == 0 || su == sa {
            return (if sa != 0 { sa } else { su }).cmp(&0);
        }
        // Compare u^2 = b1^2 d1 + b2^2 d2 - 2 b1 b2 sqrt(d1 d2) against da^2.
        let c = &b1 * &b1 * BigRational::from_integer(BigInt::from(d1))
            + &b2 * &b2 * BigRational::from_integer(BigInt::from(d2))
            - &da * &da;
        let y = -BigRational::from_integer(BigInt::from(2)) * &b1 * &b2;
        let s = sign_with_root(&c, &y, &(BigInt::from(d1) * BigInt::from(d2)));
        // s > 0: |u| > |da| so u's sign wins.
        match s.cmp(&0) {
            Ordering::Greater => su.cmp(&0),
            Ordering::Less => sa.cmp(&0),
            Ordering::Equal => Ordering::Equal,
        }
    }

    /// Exact comparison of imaginary parts.
    pub fn cmp_im(&self, other: &QuadExt) -> Ordering {
        let d1 = if self.d < 0 { -self.d } else { 0 };
        let d2 = if other.d < 0 { -other.d } else { 0 };
        sign_root_diff(&self.b, d1, &other.b, d2).cmp(&0)
    }

    /// Floating approximation `(re, im)` for display and heuristics only.
    pub fn to_f64(&self) -> (f64, f64) {
        let a = rational_to_f64(&self.a);
        let b = rational_to_f64(&self.b);
        if self.d >= 0 {
            (a + b * (self.d as f64).sqrt(), 0.0)
        } else {
            (a, b * (-(self.d as f64)).sqrt())
        }
    }

    /// Parses the [`fmt::Display`] output (`a`, `b*sqrt(d)`, `a + b*sqrt(d)`).
    pub fn parse(s: &str) -> Option<QuadExt> {
        let s = s.trim();
        let Some(pos) = s.find("sqrt(") else {
            return parse_rational(s).map(QuadExt::rational);
        };
        let close = s[pos..].find(')')? + pos;
        let d: i64 = s[pos + 5..close].trim().parse().ok()?;
        let head = s[..pos].trim_end();
        let head = head.strip_suffix('*').unwrap_or(head).trim_end();
        // head is "[a (+|-)] [b]"
        let (a_part, b_part) = match head.rfind([' ']) {
            Some(i) if head[..i].trim_end().ends_with(['+', '-']) => {
                let op_idx = head[..i].trim_end().len() - 1;
                let sign = &head[op_idx..op_idx + 1];
                (head[..op_idx].trim(), format!("{sign}{}", head[i..].trim()))
            }
            _ => {
                if let Some(stripped) = head.strip_suffix(['+', '-']) {
                    let sign = &head[head.len() - 1..];
                    (stripped.trim(), format!("{sign}1"))
                } else {
                    ("", head.to_string())
                }
            }
        };
        let a = if a_part.is_empty() {
            BigRational::zero()
        } else {
            parse_rational(a_part)?
        };
        let b = match b_part.as_str() {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            other => parse_rational(other)?,
        };
        Some(QuadExt::new(a, b, d))
    }
}

impl From<BigRational> for QuadExt {
    fn from(r: BigRational) -> Self {
        QuadExt::rational(r)
    }
}

impl From<i64> for QuadExt {
    fn from(n: i64) -> Self {
        QuadExt::from_int(n)
    }
}

impl Ord for QuadExt {
    /// Orders by real part, then imaginary part.
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        self.cmp_re(other).then_with(|| self.cmp_im(other))
    }
}

impl PartialOrd for QuadExt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", format_rational(&self.a));
        }
        let babs = self.b.abs();
        let coeff = if babs.is_one() {
            String::new()
        } else {
            format!("{}*", format_rational(&babs))
        };
        let root = format!("{coeff}sqrt({})", self.d);
        if self.a.is_zero() {
            if self.b.is_negative() {
                write!(f, "-{root}")
            } else {
                write!(f, "{root}")
            }
        } else {
            let op = if self.b.is_negative() { '-' } else { '+' };
            write!(f, "{} {op} {root}", format_rational(&self.a))
        }
    }
}

impl Serialize for QuadExt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn q(a: (i64, i64), b: (i64, i64), d: i64) -> QuadExt {
        QuadExt::new(rat(a.0, a.1), rat(b.0, b.1), d)
    }

    #[test]
    fn golden_ratio_pair() {
        let u = q((-1, 2), (1, 2), 5);
        let v = q((1, 2), (1, 2), 5);
        assert_eq!(u.mul(&v).unwrap(), QuadExt::one());
        assert_eq!(u.add(&v).unwrap(), QuadExt::sqrt(5));
    }

    #[test]
    fn square_factors_are_pulled_out() {
        assert_eq!(QuadExt::sqrt(8), q((0, 1), (2, 1), 2));
        assert_eq!(QuadExt::sqrt(9), QuadExt::from_int(3));
        assert_eq!(QuadExt::sqrt(-4), q((0, 1), (2, 1), -1));
    }

    #[test]
    fn incompatible_radicands() {
        let e = QuadExt::sqrt(2).add(&QuadExt::sqrt(3)).unwrap_err();
        assert!(e.to_string().contains("incompatible extension"));
        assert!(QuadExt::sqrt(2).add(&QuadExt::from_int(1)).is_ok());
    }

    #[test]
    fn inverse_and_division() {
        let x = q((1, 1), (1, 1), -3);
        let y = x.inv().unwrap();
        assert_eq!(x.mul(&y).unwrap(), QuadExt::one());
        assert!(QuadExt::zero().inv().is_err());
    }

    #[test]
    fn modulus_comparisons() {
        // |(1+sqrt5)/2| = 1.618..
        let phi = q((1, 2), (1, 2), 5);
        assert!(phi.modulus_le(&rat(2, 1)));
        assert!(!phi.modulus_le(&rat(3, 2)));
        let neg = q((-1, 2), (-1, 2), 5);
        assert!(neg.modulus_le(&rat(2, 1)));
        assert!(!neg.modulus_le(&rat(8, 5)));
        // |(-1 + sqrt(-3))/2| = 1
        let w = q((-1, 2), (1, 2), -3);
        assert_eq!(w.cmp_modulus_sq(&rat(1, 1)), Ordering::Equal);
        assert!(QuadExt::from_int(-4).modulus_le(&rat(4, 1)));
        assert!(!QuadExt::from_int(-5).modulus_le(&rat(4, 1)));
    }

    #[test]
    fn ordering_is_exact() {
        let mut v = vec![
            QuadExt::sqrt(2),
            QuadExt::from_int(1),
            q((3, 2), (0, 1), 0),
            QuadExt::sqrt(3).neg(),
            q((-1, 2), (1, 2), -3),
            q((-1, 2), (-1, 2), -3),
        ];
        v.sort();
        let names: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        assert_eq!(
            names,
            vec![
                "-sqrt(3)",
                "-1/2 - 1/2*sqrt(-3)",
                "-1/2 + 1/2*sqrt(-3)",
                "1",
                "sqrt(2)",
                "3/2"
            ]
        );
        // sqrt2 + sqrt3 vs pi-ish rational: different radicands.
        let a = QuadExt::sqrt(2);
        let b = q((1, 1), (-1, 1), 3); // 1 - sqrt3 = -0.73
        assert_eq!(a.cmp_re(&b), Ordering::Greater);
        let c = q((3, 1), (-1, 1), 3); // 1.268 vs 1.414
        assert_eq!(c.cmp_re(&a), Ordering::Less);
    }

    #[test]
    fn display_parse_round_trip() {
        for x in [
            q((-1, 2), (1, 2), -3),
            q((0, 1), (-2, 1), 2),
            q((0, 1), (1, 1), 5),
            q((7, 3), (-1, 1), 6),
            QuadExt::from_int(-3),
            q((1, 4), (0, 1), 0),
        ] {
            let s = x.to_string();
            assert_eq!(QuadExt::parse(&s), Some(x), "{s}");
        }
    }
}
