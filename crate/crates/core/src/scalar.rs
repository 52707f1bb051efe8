//! Scalar abstractions shared by the matrix, polynomial and retraction code.
//!
//! Exact code paths run over [`Rational`](crate::Rational) or machine integers;
//! the only floating consumer is the retraction module.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// Commutative ring element usable in fraction-free elimination.
///
/// Division is only ever invoked where the quotient is exact (Bareiss steps,
/// or genuine field division), so `i64`, `BigInt` and `BigRational` all work.
pub trait Ring: Clone + Debug + PartialEq + Num + Neg<Output = Self> {}

impl<T: Clone + Debug + PartialEq + Num + Neg<Output = T>> Ring for T {}

/// Ring element with an ordered absolute value, used for norm comparisons.
pub trait OrderedRing: Ring + PartialOrd + Signed {}

impl<T: Ring + PartialOrd + Signed> OrderedRing for T {}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

/// Parses `p`, `-p`, `p/q`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(BigRational::new(n, d))
    } else {
        let n: BigInt = s.parse().ok()?;
        Some(BigRational::from_integer(n))
    }
}

pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact dyadic rational of a finite float.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Huge numerator/denominator pairs: fall back to shifted division.
        let nb = r.numer().bits() as i64;
        let db = r.denom().bits() as i64;
        let shift = nb - db;
        let scaled = if shift > 0 {
            r / BigRational::from_integer(BigInt::one() << (shift as usize))
        } else {
            r * BigRational::from_integer(BigInt::one() << ((-shift) as usize))
        };
        scaled.to_f64().unwrap_or(0.0) * 2f64.powi(shift as i32)
    })
}

/// Rounds `r` to the nearest multiple of `2^-bits`.
pub fn round_dyadic(r: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << bits as usize;
    let scaled = r * BigRational::from_integer(scale.clone());
    let rounded = (scaled + BigRational::new(BigInt::one(), BigInt::from(2))).floor();
    BigRational::new(rounded.to_integer(), scale)
}

/// Smallest integer `k >= 0` with `r <= 2^k`, for `r > 0`.
pub fn log2_ceil(r: &BigRational) -> i64 {
    if r <= &BigRational::zero() {
        return i64::MIN;
    }
    let mut k = r.numer().bits() as i64 - r.denom().bits() as i64 - 1;
    loop {
        let p = pow2(k);
        if r <= &p {
            return k;
        }
        k += 1;
    }
}

pub fn pow2(k: i64) -> BigRational {
    if k >= 0 {
        BigRational::from_integer(BigInt::one() << k as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-k) as usize)
    }
}

/// Integer square root (floor) of a non-negative integer.
pub fn isqrt(n: &BigInt) -> BigInt {
    n.sqrt()
}

pub fn is_perfect_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &(&r * &r) == n
}

/// Upper bound (rational) on `sqrt(r)` for `r >= 0`, accurate to about `2^-bits`.
pub fn sqrt_upper(r: &BigRational, bits: u32) -> BigRational {
    sqrt_bracket(r, bits).1
}

pub fn sqrt_lower(r: &BigRational, bits: u32) -> BigRational {
    sqrt_bracket(r, bits).0
}

fn sqrt_bracket(r: &BigRational, bits: u32) -> (BigRational, BigRational) {
    if r.is_zero() {
        return (BigRational::zero(), BigRational::zero());
    }
    let scale = BigInt::one() << (2 * bits as usize);
    // floor(r * 4^bits) then isqrt, bracketing sqrt(r) * 2^bits.
    let scaled = (r * BigRational::from_integer(scale)).floor().to_integer();
    let lo = scaled.sqrt();
    let hi = &lo + BigInt::one();
    let den = BigInt::one() << bits as usize;
    (
        BigRational::new(lo, den.clone()),
        BigRational::new(hi, den),
    )
}

pub fn is_one(r: &BigRational) -> bool {
    r.is_one()
}

/// Serde helpers that write numbers as decimal strings.
pub mod as_string {
    use serde::Serializer;
    use std::fmt::Display;

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }
}

/// Serializes a rational as `p` or `p/q`.
pub mod rational_string {
    use num_rational::BigRational;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_rational(v))
    }
}

pub mod rational_vec_string {
    use num_rational::BigRational;
    use serde::ser::{SerializeSeq, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&super::format_rational(x))?;
        }
        seq.end()
    }
}
