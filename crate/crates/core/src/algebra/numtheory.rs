//! Primality, factorization, square-freeness, CRT and Pell equations.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{CanonError, Result};

/// Outcome of a primality test. `ProbablePrime` is only produced above
/// `2^64`, where the Miller–Rabin witness set is no longer deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Primality {
    Composite,
    Prime,
    ProbablePrime,
}

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &SMALL_PRIMES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn miller_rabin_big(n: &BigInt, witnesses: impl Iterator<Item = BigInt>) -> bool {
    let one = BigInt::one();
    let n1 = n - &one;
    let mut d = n1.clone();
    let mut s = 0u32;
    while d.is_even() {
        d >>= 1;
        s += 1;
    }
    'witness: for a in witnesses {
        let mut x = a.modpow(&d, n);
        if x == one || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn primality(n: &BigInt) -> Primality {
    let n = n.abs();
    if let Some(small) = n.to_u64() {
        return if is_prime_u64(small) {
            Primality::Prime
        } else {
            Primality::Composite
        };
    }
    for &p in &SMALL_PRIMES {
        if (&n % p).is_zero() {
            return Primality::Composite;
        }
    }
    // 64 pseudo-random bases: error probability below 4^-64 = 2^-128.
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let bases = (0..64).map(|_| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        BigInt::from(2u64 + state % 1_000_000_007)
    });
    if miller_rabin_big(&n, bases) {
        Primality::ProbablePrime
    } else {
        Primality::Composite
    }
}

pub fn is_prime(n: &BigInt) -> bool {
    primality(n) != Primality::Composite
}

fn pollard_rho(n: &BigInt) -> BigInt {
    // Brent-free variant is fast enough for the desk-scale inputs used here.
    let one = BigInt::one();
    let mut c = BigInt::one();
    loop {
        let f = |x: &BigInt| (x * x + &c) % n;
        let mut x = BigInt::from(2);
        let mut y = x.clone();
        let mut d = one.clone();
        while d == one {
            x = f(&x);
            y = f(&f(&y));
            d = (&x - &y).abs().gcd(n);
        }
        if &d != n {
            return d;
        }
        c += 1;
    }
}

fn factor_into(n: BigInt, out: &mut Vec<BigInt>) {
    if n.is_one() {
        return;
    }
    if is_prime(&n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(&n);
    let q = &n / &d;
    factor_into(d, out);
    factor_into(q, out);
}

/// Prime factorization of `|n|` as sorted `(prime, exponent)` pairs.
pub fn factorize(n: &BigInt) -> Result<Vec<(BigInt, u32)>> {
    let mut m = n.abs();
    if m < BigInt::from(2) {
        return Err(CanonError::InvalidArgument(format!(
            "factorize needs |n| >= 2, got {n}"
        )));
    }
    let mut primes = Vec::new();
    for p in 2u32..1000 {
        let bp = BigInt::from(p);
        while (&m % &bp).is_zero() {
            primes.push(bp.clone());
            m /= &bp;
        }
    }
    factor_into(m, &mut primes);
    primes.sort();
    let mut out: Vec<(BigInt, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    Ok(out)
}

/// True when no prime square divides `n`; `0` is not square-free, `±1` is.
pub fn is_squarefree(n: &BigInt) -> bool {
    if n.is_zero() {
        return false;
    }
    if n.abs().is_one() {
        return true;
    }
    factorize(n)
        .map(|f| f.iter().all(|(_, e)| *e == 1))
        .unwrap_or(false)
}

/// Writes `d = k^2 * core` with `core` square-free (sign kept on `core`).
pub fn square_free_decompose(d: i64) -> (i64, i64) {
    if d == 0 {
        return (0, 0);
    }
    let sign = d.signum();
    let mut m = d.unsigned_abs();
    let mut k: u64 = 1;
    let mut core: u64 = 1;
    let mut p: u64 = 2;
    while p * p <= m {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        k *= p.pow(e / 2);
        if e % 2 == 1 {
            core *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    core *= m;
    (k as i64, sign * core as i64)
}

/// Smallest non-negative `x` with `x ≡ r_i (mod m_i)` for every pair.
///
/// Non-coprime moduli are accepted when the residues agree on the overlap.
pub fn crt(pairs: &[(BigInt, BigInt)]) -> Result<BigInt> {
    let mut x = BigInt::zero();
    let mut m = BigInt::one();
    for (r, mi) in pairs {
        let mi = mi.abs();
        if mi.is_zero() {
            return Err(CanonError::InvalidArgument("modulus 0".into()));
        }
        let r = r.mod_floor(&mi);
        let g = m.extended_gcd(&mi);
        let diff = &r - &x;
        if !(&diff % &g.gcd).is_zero() {
            return Err(CanonError::CrtInconsistent);
        }
        let lcm = &m / &g.gcd * &mi;
        let step = (&diff / &g.gcd * &g.x).mod_floor(&(&mi / &g.gcd));
        x = (&x + &m * step).mod_floor(&lcm);
        m = lcm;
    }
    Ok(x)
}

/// Fundamental solution `(z, y)` of `z^2 - D y^2 = 1`, via the continued
/// fraction of `sqrt(D)`.
pub fn pell_min(d: &BigInt) -> Result<(BigInt, BigInt)> {
    if d.sign() != Sign::Plus || d < &BigInt::from(2) {
        return Err(CanonError::InvalidArgument(format!("Pell needs D >= 2, got {d}")));
    }
    let a0 = d.sqrt();
    if &(&a0 * &a0) == d {
        return Err(CanonError::PerfectSquare(d.to_string()));
    }
    let one = BigInt::one();
    let (mut m, mut q, mut a) = (BigInt::zero(), one.clone(), a0.clone());
    // Convergents h/k.
    let (mut h_prev, mut h) = (one.clone(), a0.clone());
    let (mut k_prev, mut k) = (BigInt::zero(), one.clone());
    loop {
        if &h * &h - d * &k * &k == one {
            return Ok((h, k));
        }
        m = &q * &a - &m;
        q = (d - &m * &m) / &q;
        a = (&a0 + &m) / &q;
        let h_next = &a * &h + &h_prev;
        let k_next = &a * &k + &k_prev;
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn primes_from_the_gallery() {
        assert!(is_prime(&b(74531)));
        assert!(!is_prime(&b(75078)));
        assert!(!is_prime(&b(1)));
        assert_eq!(primality(&b(2)), Primality::Prime);
        let m61 = (BigInt::one() << 61) - 1;
        assert!(is_prime(&m61));
        let m127 = (BigInt::one() << 127) - 1;
        assert_eq!(primality(&m127), Primality::ProbablePrime);
        assert_eq!(primality(&(&m127 * b(3))), Primality::Composite);
    }

    #[test]
    fn primality_matches_sieve() {
        let n = 20_000usize;
        let mut sieve = vec![true; n];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..n {
            if sieve[i] {
                let mut j = i * i;
                while j < n {
                    sieve[j] = false;
                    j += i;
                }
            }
        }
        for (i, &p) in sieve.iter().enumerate() {
            assert_eq!(is_prime_u64(i as u64), p, "{i}");
        }
    }

    #[test]
    fn factorizations() {
        let n = b(-(1i64 << 32) - (1 << 16) - 1);
        let f: Vec<i64> = factorize(&n)
            .unwrap()
            .iter()
            .map(|(p, _)| p.to_i64().unwrap())
            .collect();
        assert_eq!(f, vec![3, 7, 13, 97, 241, 673]);
        assert!(is_squarefree(&n));
        let f: Vec<(BigInt, u32)> = factorize(&b(114243)).unwrap();
        assert_eq!(f, vec![(b(3), 1), (b(113), 1), (b(337), 1)]);
        assert!(!is_squarefree(&b(12)));
        assert!(factorize(&b(1)).is_err());
        let big = BigInt::from(1_000_000_007u64) * BigInt::from(998_244_353u64);
        assert_eq!(factorize(&big).unwrap().len(), 2);
    }

    #[test]
    fn square_free_parts() {
        assert_eq!(square_free_decompose(12), (2, 3));
        assert_eq!(square_free_decompose(-4), (2, -1));
        assert_eq!(square_free_decompose(-3), (1, -3));
        assert_eq!(square_free_decompose(49), (7, 1));
    }

    #[test]
    fn crt_examples() {
        assert_eq!(crt(&[(b(2), b(3)), (b(1), b(4))]).unwrap(), b(5));
        assert_eq!(crt(&[(b(17), b(5))]).unwrap(), b(2));
        assert_eq!(crt(&[(b(0), b(1)), (b(3), b(7))]).unwrap(), b(3));
        assert_eq!(crt(&[(b(1), b(4)), (b(3), b(6))]).unwrap(), b(9));
        assert!(crt(&[(b(1), b(4)), (b(2), b(6))]).is_err());
    }

    #[test]
    fn pell_examples() {
        assert_eq!(pell_min(&b(32)).unwrap(), (b(17), b(3)));
        assert_eq!(pell_min(&b(2)).unwrap(), (b(3), b(2)));
        assert_eq!(pell_min(&b(135)).unwrap(), (b(244), b(21)));
        assert!(pell_min(&b(49)).is_err());
    }

    #[test]
    fn pell_minimal_against_brute_force() {
        for d in 2i64..=200 {
            let r = (d as f64).sqrt() as i64;
            if r * r == d || (r + 1) * (r + 1) == d {
                continue;
            }
            let (z, y) = pell_min(&b(d)).unwrap();
            assert_eq!(&z * &z - b(d) * &y * &y, BigInt::one());
            if let Some(yy) = y.to_i64() {
                if yy < 100_000 {
                    for y0 in 1..yy {
                        let v = 1 + d * y0 * y0;
                        let s = (v as f64).sqrt() as i64;
                        assert!(
                            !(s - 1..=s + 1).any(|t| t * t == v),
                            "D={d} smaller y={y0}"
                        );
                    }
                }
            }
        }
    }
}
