//! Closed-form bounds on solution sizes.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};
use serde::Serialize;

use crate::config::Config;
use crate::error::{CanonError, Result};
use crate::value::QuadExt;

/// `2^(2^k)` with the exponent checked against the configured cap.
pub fn tower(k: u32, cap: u64) -> Result<BigInt> {
    if k >= 64 || (1u64 << k) > cap {
        let exponent = if k < 128 {
            (1u128 << k).to_string()
        } else {
            format!("2^{k}")
        };
        return Err(CanonError::BoundOverflow { exponent, cap });
    }
    Ok(BigInt::one() << (1usize << k))
}

fn require_positive(n: usize) -> Result<()> {
    if n == 0 {
        return Err(CanonError::InvalidArgument("n must be at least 1".into()));
    }
    Ok(())
}

/// `1` for `n = 1`, otherwise `2^(2^(n-2))`.
pub fn tower_bound(n: usize) -> Result<BigRational> {
    tower_bound_with(n, &Config::default())
}

pub fn tower_bound_with(n: usize, cfg: &Config) -> Result<BigRational> {
    require_positive(n)?;
    if n == 1 {
        return Ok(BigRational::one());
    }
    Ok(BigRational::from_integer(tower(n as u32 - 2, cfg.exponent_cap)?))
}

/// `2^(n-1)`.
pub fn additive_bound(n: usize) -> Result<BigRational> {
    require_positive(n)?;
    Ok(BigRational::from_integer(BigInt::one() << (n - 1)))
}

/// `2^(2^(n-1))`.
pub fn chain_bound(n: usize) -> Result<BigRational> {
    chain_bound_with(n, &Config::default())
}

pub fn chain_bound_with(n: usize, cfg: &Config) -> Result<BigRational> {
    require_positive(n)?;
    Ok(BigRational::from_integer(tower(n as u32 - 1, cfg.exponent_cap)?))
}

/// The irrational bound `sqrt(5)^(n-1)`, kept as its exact square `5^(n-1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SqrtFivePower {
    pub exponent: u32,
    #[serde(with = "crate::scalar::as_string")]
    pub square: BigInt,
}

impl SqrtFivePower {
    /// `|v| <= sqrt(5)^(n-1)`, decided on squares.
    pub fn admits(&self, v: &QuadExt) -> bool {
        v.cmp_modulus_sq(&BigRational::from_integer(self.square.clone())) != Ordering::Greater
    }

    pub fn admits_rational(&self, v: &BigRational) -> bool {
        v * v <= BigRational::from_integer(self.square.clone())
    }

    pub fn to_f64(&self) -> f64 {
        5f64.sqrt().powi(self.exponent as i32)
    }
}

/// `sqrt(5)^(n-1)`.
pub fn sqrt5_bound(n: usize) -> Result<SqrtFivePower> {
    require_positive(n)?;
    let e = (n - 1) as u32;
    Ok(SqrtFivePower {
        exponent: e,
        square: BigInt::from(5).pow(e),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn tower_values() {
        assert_eq!(tower_bound(1).unwrap(), int(1));
        assert_eq!(tower_bound(2).unwrap(), int(2));
        assert_eq!(tower_bound(3).unwrap(), int(4));
        assert_eq!(tower_bound(6).unwrap(), int(65536));
        for n in 2..10 {
            let b = tower_bound(n).unwrap();
            assert_eq!(tower_bound(n + 1).unwrap(), &b * &b);
        }
    }

    #[test]
    fn overflow_is_reported() {
        let e = tower_bound(40).unwrap_err();
        assert!(e.to_string().contains("bound overflow"));
        let cfg = Config {
            exponent_cap: 8,
            ..Config::default()
        };
        assert!(tower_bound_with(5, &cfg).is_ok());
        assert!(tower_bound_with(6, &cfg).is_err());
        assert!(tower_bound(0).is_err());
    }

    #[test]
    fn other_bounds() {
        assert_eq!(additive_bound(5).unwrap(), int(16));
        assert_eq!(chain_bound(4).unwrap(), int(256));
        let b = sqrt5_bound(2).unwrap();
        assert!(b.admits(&QuadExt::from_int(2)));
        assert!(!b.admits(&QuadExt::from_int(3)));
        assert!(b.admits(&QuadExt::sqrt(5)));
        let b5 = sqrt5_bound(5).unwrap();
        assert_eq!(b5.square, BigInt::from(625));
        assert!(b5.admits_rational(&int(25)));
        assert!(!b5.admits_rational(&int(26)));
    }
}
