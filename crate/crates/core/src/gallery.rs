//! Explicit counterexample tuples and the number-theoretic facts behind them.
//!
//! Every check is exact except the field sketch, whose real solution is
//! certified by a rational sign change.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::groebner::buchberger;
use crate::algebra::numtheory::{crt, factorize, is_prime, is_squarefree, pell_min};
use crate::algebra::poly::MonomialOrder;
use crate::config::Config;
use crate::error::{CanonError, Result};
use crate::scalar::{format_rational, int, is_perfect_square, pow2};
use crate::system::{Add, CanonicalEquation, CanonicalSystem, Mul, Unit};
use crate::value::QuadExt;
use crate::QPoly;

/// The ring a counterexample lives in.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "ring", rename_all = "snake_case")]
pub enum RingTag {
    Integers,
    /// `Z[1/p]`, `p` prime.
    Localized {
        #[serde(with = "crate::scalar::as_string")]
        p: BigInt,
    },
    /// `Z[sqrt(q)]`, `q` square-free.
    QuadraticIntegers { q: i64 },
    /// A subfield of the reals generated by two real numbers.
    RealFieldSketch,
}

impl RingTag {
    pub fn validate(&self) -> Result<()> {
        match self {
            RingTag::Localized { p } if !is_prime(p) => {
                Err(CanonError::InvalidArgument(format!("{p} is not prime")))
            }
            RingTag::QuadraticIntegers { q } if *q == 1 || !is_squarefree(&BigInt::from(*q)) => {
                Err(CanonError::InvalidArgument(format!("{q} is not square-free")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for RingTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingTag::Integers => write!(f, "Z"),
            RingTag::Localized { p } => write!(f, "Z[1/{p}]"),
            RingTag::QuadraticIntegers { q } => write!(f, "Z[sqrt({q})]"),
            RingTag::RealFieldSketch => write!(f, "Q(alpha, beta)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GalleryCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GalleryReport {
    pub item: GalleryItem,
    pub ring: Option<RingTag>,
    pub params: BTreeMap<String, String>,
    pub checks: Vec<GalleryCheck>,
}

impl GalleryReport {
    fn new(item: GalleryItem, ring: Option<RingTag>) -> Self {
        GalleryReport {
            item,
            ring,
            params: BTreeMap::new(),
            checks: Vec::new(),
        }
    }

    fn param(mut self, k: &str, v: impl ToString) -> Self {
        self.params.insert(k.into(), v.to_string());
        self
    }

    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(GalleryCheck {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&GalleryCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Gallery entries; [`GalleryItem::name`] gives the command-line name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum GalleryItem {
    PrimeDenominator,
    LargePrime,
    ImaginaryQuadratic,
    RealQuadratic,
    DivisorWitness,
    PellWitness,
    IntegerPell,
    RealField,
}

impl GalleryItem {
    pub const ALL: [GalleryItem; 8] = [
        GalleryItem::PrimeDenominator,
        GalleryItem::LargePrime,
        GalleryItem::ImaginaryQuadratic,
        GalleryItem::RealQuadratic,
        GalleryItem::DivisorWitness,
        GalleryItem::PellWitness,
        GalleryItem::IntegerPell,
        GalleryItem::RealField,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GalleryItem::PrimeDenominator => "thm2",
            GalleryItem::LargePrime => "thm3",
            GalleryItem::ImaginaryQuadratic => "thm4",
            GalleryItem::RealQuadratic => "thm5",
            GalleryItem::DivisorWitness => "lemma1",
            GalleryItem::PellWitness => "lemma2",
            GalleryItem::IntegerPell => "z21",
            GalleryItem::RealField => "sevenvar",
        }
    }
}

impl Serialize for GalleryItem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl fmt::Display for GalleryItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GalleryItem {
    type Err = CanonError;
    fn from_str(s: &str) -> Result<Self> {
        GalleryItem::ALL
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| CanonError::InvalidArgument(format!("unknown gallery item {s:?}")))
    }
}

fn bi(n: i64) -> BigInt {
    BigInt::from(n)
}

fn q(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

fn system(arity: usize, eqs: &[CanonicalEquation]) -> CanonicalSystem {
    CanonicalSystem::from_equations(arity, eqs.iter().copied()).expect("indices within arity")
}

fn solves_rational(sys: &CanonicalSystem, x: &[BigRational]) -> bool {
    sys.equations().all(|e| e.holds_rational(x))
}

fn show(x: &[BigRational]) -> String {
    let v: Vec<String> = x.iter().map(format_rational).collect();
    format!("({})", v.join(", "))
}

/// Integers `(a, b)` with `a x = (2b - 1)(3b - 1)`.
///
/// Writes `x = (2y - 1) 2^m`, takes `b = y mod (2y - 1)` and
/// `b = (2^(2m+1) + 1)/3 mod 2^m` by the Chinese remainder theorem, and
/// divides.
pub fn divisor_witness(x: &BigInt) -> Result<(BigInt, BigInt)> {
    if x.is_zero() {
        return Err(CanonError::InvalidArgument("x must be non-zero".into()));
    }
    let m = x.trailing_zeros().unwrap_or(0);
    let two_m = BigInt::one() << m;
    let odd = x / &two_m;
    let y = (&odd + 1) / 2;
    let r = ((BigInt::one() << (2 * m + 1)) + 1) / 3;
    let b = crt(&[(y, odd), (r, two_m)])?;
    let prod: BigInt = (&b * 2 - 1) * (&b * 3 - 1);
    let (a, rem) = prod.div_rem(x);
    if !rem.is_zero() || &a * x != prod {
        return Err(CanonError::Accounting(format!("construction failed for x = {x}")));
    }
    Ok((a, b))
}

/// Smallest `y >= 1` with `1 + x^3 (2 + x) y^2` a square, and that square's root.
pub fn pell_witness(x: u32, cap: u32) -> Result<(BigInt, BigInt)> {
    if x < 2 {
        return Err(CanonError::InvalidArgument("x must be at least 2".into()));
    }
    if x > cap {
        return Err(CanonError::InvalidArgument(format!(
            "x = {x} exceeds cap {cap}: fundamental Pell solutions grow too fast beyond it"
        )));
    }
    let xb = BigInt::from(x);
    let d = xb.pow(3) * (&xb + 2);
    let (z, y) = pell_min(&d)?;
    if &z * &z != &d * &y * &y + 1 {
        return Err(CanonError::Accounting(format!("Pell solution for D = {d} does not check")));
    }
    Ok((y, z))
}

/// `x + x^(x-2)`, the lower bound on `y`.
pub fn pell_lower_bound(x: u32) -> BigInt {
    let xb = BigInt::from(x);
    &xb + xb.pow(x - 2)
}

fn tower_int(k: u32) -> BigInt {
    BigInt::one() << (1usize << k)
}

pub fn prime_denominator_system() -> CanonicalSystem {
    system(6, &[Unit(1), Add(1, 1, 2), Mul(3, 3, 4), Add(2, 4, 5), Mul(5, 6, 1)])
}

pub fn prime_denominator_verify(k: &BigInt) -> GalleryReport {
    let p = bi(2) + k * k;
    let mut r = GalleryReport::new(GalleryItem::PrimeDenominator, Some(RingTag::Localized { p: p.clone() }))
        .param("k", k);
    r.check("k >= 273", k >= &bi(273), format!("k = {k}"));
    r.check("2 + k^2 prime", is_prime(&p), format!("2 + k^2 = {p}"));
    let tuple = vec![int(1), int(2), q(k), q(&(k * k)), q(&p), BigRational::new(bi(1), p.clone())];
    let sys = prime_denominator_system();
    r.check("equation count", sys.len() == 5, format!("{} equations", sys.len()));
    r.check("tuple solves system", solves_rational(&sys, &tuple), show(&tuple));
    let bound = tower_int(4);
    r.check("2 + k^2 > 2^(2^4)", p > bound, format!("{p} > {bound}"));
    r
}

pub fn large_prime_system() -> CanonicalSystem {
    system(
        10,
        &[
            Unit(1),
            Mul(2, 3, 1),
            Add(3, 4, 2),
            Mul(4, 5, 6),
            Add(7, 7, 8),
            Add(1, 9, 8),
            Add(7, 9, 10),
            Mul(9, 10, 6),
        ],
    )
}

/// The tuple `(1, p, 1/p, p - 1/p, p u, (p^2 - 1) u, s, 2s, 2s - 1, 3s - 1)`.
///
/// With `desk_mode` the size condition `p > 2^256` is reported as not
/// required instead of checked.
pub fn large_prime_verify(p: &BigInt, desk_mode: bool, cfg: &Config) -> Result<GalleryReport> {
    let ring = RingTag::Localized { p: p.clone() };
    ring.validate()?;
    let mut r = GalleryReport::new(GalleryItem::LargePrime, Some(ring))
        .param("p", p)
        .param("desk_mode", desk_mode);
    let n = p * p - 1;
    let (u, s) = divisor_witness(&n)?;
    r.check("(p^2 - 1) u = (2s - 1)(3s - 1)", &n * &u == (&s * 2 - 1) * (&s * 3 - 1), format!("u = {u}, s = {s}"));
    let pq = q(p);
    let inv = pq.recip();
    let tuple = vec![
        int(1),
        pq.clone(),
        inv.clone(),
        &pq - &inv,
        q(&(p * &u)),
        q(&(&n * &u)),
        q(&s),
        q(&(&s * 2)),
        q(&(&s * 2 - 1)),
        q(&(&s * 3 - 1)),
    ];
    let sys = large_prime_system();
    r.check("equation count", sys.len() == 8, format!("{} equations", sys.len()));
    r.check("tuple solves system", solves_rational(&sys, &tuple), show(&tuple));
    // (x2 - x3) x5 - (2 x7 - 1)(3 x7 - 1) lies in the ideal of the system.
    let order = MonomialOrder::GrevLex;
    let x = |i: usize| QPoly::var(10, i - 1, order);
    let c = |v: i64| QPoly::constant(10, int(v), order);
    let lhs = &(&x(2) - &x(3)) * &x(5);
    let rhs = &(&(&c(2) * &x(7)) - &c(1)) * &(&(&c(3) * &x(7)) - &c(1));
    let gb = buchberger(&sys.to_polys(order), 10, order, cfg.gb_budget)?;
    r.check(
        "system implies (x2 - x3) x5 = (2 x7 - 1)(3 x7 - 1)",
        gb.contains(&(&lhs - &rhs)),
        "ideal membership",
    );
    let bound = tower_int(8);
    if desk_mode {
        r.check("p > 2^(2^8)", true, format!("not required in desk mode (p = {p})"));
    } else {
        r.check("p > 2^(2^8)", p > &bound, format!("p has {} bits", p.bits()));
    }
    Ok(r)
}

/// `-2^32 - 2^16 - 1`.
pub const IMAGINARY_RADICAND: i64 = -(1 << 32) - (1 << 16) - 1;

pub fn imaginary_quadratic_system() -> CanonicalSystem {
    system(6, &[Unit(1), Add(2, 3, 1), Mul(2, 3, 4), Mul(5, 5, 6), Add(1, 6, 4)])
}

pub fn imaginary_quadratic_verify() -> Result<GalleryReport> {
    let d = IMAGINARY_RADICAND;
    let db = bi(d);
    let mut r = GalleryReport::new(GalleryItem::ImaginaryQuadratic, Some(RingTag::QuadraticIntegers { q: d }));
    let f = factorize(&db)?;
    let primes: Vec<BigInt> = f.iter().map(|(p, _)| p.clone()).collect();
    let expected: Vec<BigInt> = [3, 7, 13, 97, 241, 673].into_iter().map(bi).collect();
    r.check(
        "factorization -3*7*13*97*241*673",
        primes == expected && f.iter().all(|(_, e)| *e == 1) && db.is_negative(),
        format!("{d} = -{}", primes.iter().map(ToString::to_string).collect::<Vec<_>>().join("*")),
    );
    r.check("radicand square-free", is_squarefree(&db), d.to_string());
    let t16 = 1i64 << 16;
    let tuple = vec![
        QuadExt::one(),
        QuadExt::from_int(t16 + 1),
        QuadExt::from_int(-t16),
        QuadExt::from_int(-(1 << 32) - t16),
        QuadExt::sqrt(d),
        QuadExt::from_int(d),
    ];
    let sys = imaginary_quadratic_system();
    r.check("equation count", sys.len() == 5, format!("{} equations", sys.len()));
    let shown: Vec<String> = tuple.iter().map(ToString::to_string).collect();
    r.check("tuple solves system", sys.is_solved_by(&tuple)?, format!("({})", shown.join(", ")));
    // x2 + x3 = 1 and x5^2 = x2 x3 - 1; over Z the right side is negative.
    let mut hits = 0u64;
    for x2 in -t16..=t16 {
        let x6 = x2 * (1 - x2) - 1;
        if x6 >= 0 && is_perfect_square(&bi(x6)) {
            hits += 1;
        }
    }
    r.check(
        "no integer solution with |x2| <= 2^16",
        hits == 0,
        format!("{} values of x2 scanned, {hits} solutions", 2 * t16 + 1),
    );
    // |x + y sqrt(d)|^2 = x^2 + |d| y^2 > 2^32 whenever y != 0.
    let bound_sq = tower_int(5);
    r.check(
        "elements with |z| <= 2^(2^4) are integers",
        db.abs() > bound_sq,
        format!("|d| = {} > 2^32", db.abs()),
    );
    Ok(r)
}

pub fn real_quadratic_system() -> CanonicalSystem {
    system(5, &[Unit(1), Mul(2, 3, 1), Add(2, 3, 4), Mul(5, 5, 4)])
}

/// Units `(a + b sqrt(q))(c + d sqrt(q)) = 1` with `b` or `d` non-zero have a
/// factor whose two coordinates share a sign; scanned over `2 <= q <= max_q`
/// square-free and coordinates in `[-box_size, box_size]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnitSignScan {
    pub max_q: i64,
    pub box_size: i64,
    pub radicands: usize,
    pub units: u64,
    pub violations: Vec<[i64; 5]>,
}

pub fn unit_sign_scan(max_q: i64, box_size: i64) -> UnitSignScan {
    let qs: Vec<i64> = (2..=max_q).filter(|&q| is_squarefree(&bi(q))).collect();
    let per_q: Vec<(u64, Vec<[i64; 5]>)> = qs
        .par_iter()
        .map(|&q| {
            let mut units = 0;
            let mut bad = Vec::new();
            let r = -box_size..=box_size;
            for a in r.clone() {
                for b in r.clone() {
                    for c in r.clone() {
                        for d in r.clone() {
                            if (b == 0 && d == 0) || a * d + b * c != 0 || a * c + b * d * q != 1 {
                                continue;
                            }
                            units += 1;
                            let ok = (a >= 1 && b >= 1)
                                || (a <= -1 && b <= -1)
                                || (c >= 1 && d >= 1)
                                || (c <= -1 && d <= -1);
                            if !ok {
                                bad.push([q, a, b, c, d]);
                            }
                        }
                    }
                }
            }
            (units, bad)
        })
        .collect();
    UnitSignScan {
        max_q,
        box_size,
        radicands: qs.len(),
        units: per_q.iter().map(|x| x.0).sum(),
        violations: per_q.into_iter().flat_map(|x| x.1).collect(),
    }
}

pub fn real_quadratic_verify(p: i64) -> Result<GalleryReport> {
    let d = p
        .checked_pow(4)
        .and_then(|x| x.checked_mul(4))
        .map(|x| x - 1)
        .ok_or_else(|| CanonError::InvalidArgument(format!("4p^4 - 1 overflows for p = {p}")))?;
    let db = bi(d);
    let mut r = GalleryReport::new(GalleryItem::RealQuadratic, Some(RingTag::QuadraticIntegers { q: d }))
        .param("p", p);
    r.check("p >= 13", p >= 13, format!("p = {p}"));
    let f = factorize(&db)?;
    let shown: Vec<String> = f.iter().map(|(q, e)| if *e == 1 { q.to_string() } else { format!("{q}^{e}") }).collect();
    r.check("4p^4 - 1 square-free", f.iter().all(|(_, e)| *e == 1), format!("{d} = {}", shown.join("*")));
    let two_p2 = QuadExt::from_int(2 * p * p);
    let root = QuadExt::sqrt(d);
    let x2 = two_p2.add(&root)?;
    let x3 = two_p2.sub(&root)?;
    r.check("x2 x3 = 1", x2.mul(&x3)? == QuadExt::one(), format!("({x2})({x3})"));
    let tuple = vec![QuadExt::one(), x2, x3, QuadExt::from_int(4 * p * p), QuadExt::from_int(2 * p)];
    let sys = real_quadratic_system();
    r.check("equation count", sys.len() == 4, format!("{} equations", sys.len()));
    let shown: Vec<String> = tuple.iter().map(ToString::to_string).collect();
    r.check("tuple solves system", sys.is_solved_by(&tuple)?, format!("({})", shown.join(", ")));
    // Integer units are 1 and -1, so x4 = x5^2 would be 2 or -2.
    let no_integer = [2i64, -2].iter().all(|&s| {
        let a_sq = s >= 0 && is_perfect_square(&bi(s));
        let db_sq = s % d == 0 && s / d >= 0 && is_perfect_square(&bi(s / d));
        !a_sq && !db_sq
    });
    r.check(
        "no solution with x2, x3 integers",
        no_integer && d > 2,
        "x5^2 = +-2 has no solution a + b sqrt(4p^4 - 1)",
    );
    // 1 + sqrt(d) > 256 iff d > 255^2.
    r.check("1 + sqrt(4p^4 - 1) > 2^(2^3)", d > 255 * 255, format!("{d} > 65025"));
    let scan = unit_sign_scan(50, 20);
    r.check(
        "unit sign condition, q <= 50, box 20",
        scan.violations.is_empty(),
        format!("{} radicands, {} units, {} violations", scan.radicands, scan.units, scan.violations.len()),
    );
    Ok(r)
}

pub fn divisor_witness_range(max_abs: i64) -> Result<GalleryReport> {
    let mut r = GalleryReport::new(GalleryItem::DivisorWitness, Some(RingTag::Integers)).param("max", max_abs);
    let mut failures = Vec::new();
    for x in (-max_abs..=max_abs).filter(|&x| x != 0) {
        let xb = bi(x);
        match divisor_witness(&xb) {
            Ok((a, b)) if &a * &xb == (&b * 2 - 1) * (&b * 3 - 1) => {}
            _ => failures.push(x),
        }
    }
    r.check(
        "a x = (2b - 1)(3b - 1)",
        failures.is_empty(),
        format!("1 <= |x| <= {max_abs}, failures {failures:?}"),
    );
    for x in [1, 5, -6] {
        let (a, b) = divisor_witness(&bi(x))?;
        r.check(&format!("x = {x}"), true, format!("a = {a}, b = {b}"));
    }
    Ok(r)
}

pub fn pell_witness_range(xs: &[u32], cap: u32) -> Result<GalleryReport> {
    let mut r = GalleryReport::new(GalleryItem::PellWitness, Some(RingTag::Integers));
    r.params.insert("x".into(), format!("{xs:?}"));
    for &x in xs {
        let (y, z) = pell_witness(x, cap)?;
        let d = bi(x as i64).pow(3) * bi(x as i64 + 2);
        r.check(
            &format!("x = {x}: 1 + D y^2 square"),
            &z * &z == &d * &y * &y + 1,
            format!("D = {d}, y = {y}, {z}^2 = 1 + D y^2"),
        );
        let lb = pell_lower_bound(x);
        r.check(&format!("x = {x}: y >= x + x^(x-2)"), y >= lb, format!("{y} >= {lb}"));
    }
    Ok(r)
}

/// The integer counterexample with base `2^(2^levels)`: 17 + `levels`
/// variables; `levels = 4` gives the 21-variable system.
///
/// Variables: `x1 = 1`, `x2 = 2`, `levels` squarings ending at the base `b`,
/// then `b^2, b^3, 2 + b, D = b^3 (2 + b)`, then `(t, t^2, D t^2, 1 + D t^2, s)`
/// with `s^2 = 1 + D t^2`, then six variables encoding
/// `v t^2 = (2u - 1)(3u - 1)`.
pub fn integer_pell_system_with(levels: usize) -> CanonicalSystem {
    let mut eqs = vec![Unit(1), Add(1, 1, 2)];
    for i in 2..2 + levels {
        eqs.push(Mul(i, i, i + 1));
    }
    let b = 2 + levels;
    let (sq, cube, s, d) = (b + 1, b + 2, b + 3, b + 4);
    eqs.extend([Mul(b, b, sq), Mul(b, sq, cube), Add(2, b, s), Mul(cube, s, d)]);
    let (t, t2, dt2, one_dt2, root) = (d + 1, d + 2, d + 3, d + 4, d + 5);
    eqs.extend([Mul(t, t, t2), Mul(d, t2, dt2), Add(1, dt2, one_dt2), Mul(root, root, one_dt2)]);
    let (u, two_u, two_u1, three_u1, prod, v) = (root + 1, root + 2, root + 3, root + 4, root + 5, root + 6);
    eqs.extend([
        Add(u, u, two_u),
        Add(1, two_u1, two_u),
        Add(u, two_u1, three_u1),
        Mul(two_u1, three_u1, prod),
        Mul(t2, v, prod),
    ]);
    system(v, &eqs)
}

pub fn integer_pell_system() -> CanonicalSystem {
    integer_pell_system_with(4)
}

/// Substitutes every equation that defines a new variable in terms of
/// earlier ones. Returns the defined values and the remaining equations as
/// polynomials in the free variables.
fn eliminate(sys: &CanonicalSystem, free: &[usize]) -> (BTreeMap<usize, QPoly>, Vec<QPoly>) {
    let order = MonomialOrder::Lex;
    let nv = free.len();
    let mut val: BTreeMap<usize, QPoly> = free
        .iter()
        .enumerate()
        .map(|(k, &i)| (i, QPoly::var(nv, k, order)))
        .collect();
    let mut residual = Vec::new();
    let mut eqs: Vec<CanonicalEquation> = sys.equations().copied().collect();
    // Definitions may come in any order; repeat until nothing changes.
    loop {
        let before = eqs.len();
        eqs.retain(|e| {
            let def = |i: usize| val.get(&i).cloned();
            let (new, p) = match *e {
                Unit(i) => match def(i) {
                    None => (Some(i), QPoly::constant(nv, int(1), order)),
                    Some(p) => {
                        residual.push(&p - &QPoly::constant(nv, int(1), order));
                        return false;
                    }
                },
                Add(i, j, k) => match (def(i), def(j), def(k)) {
                    (Some(a), Some(b), None) => (Some(k), &a + &b),
                    (Some(a), None, Some(c)) => (Some(j), &c - &a),
                    (None, Some(b), Some(c)) => (Some(i), &c - &b),
                    (Some(a), Some(b), Some(c)) => {
                        residual.push(&(&a + &b) - &c);
                        return false;
                    }
                    _ => return true,
                },
                Mul(i, j, k) => match (def(i), def(j), def(k)) {
                    (Some(a), Some(b), None) => (Some(k), &a * &b),
                    (Some(a), Some(b), Some(c)) => {
                        residual.push(&(&a * &b) - &c);
                        return false;
                    }
                    _ => return true,
                },
            };
            if let Some(i) = new {
                val.insert(i, p);
            }
            false
        });
        if eqs.len() == before {
            break;
        }
    }
    for e in eqs {
        residual.push(e.to_poly(nv, order));
    }
    (val, residual)
}

fn same_up_to_sign(a: &QPoly, b: &QPoly) -> bool {
    a == b || (a + b).is_zero()
}

/// Exact integer solution of the scaled system built from Pell and
/// Chinese-remainder data.
pub fn integer_pell_scaled_solution(levels: usize) -> Result<Vec<BigRational>> {
    let sys = integer_pell_system_with(levels);
    let b = tower_int(levels as u32);
    let d: BigInt = b.pow(3) * (&b + 2);
    let (s, t) = pell_min(&d)?;
    let (v, u) = divisor_witness(&(&t * &t))?;
    let free = [levels + 7, levels + 11, levels + 12, levels + 17];
    let (val, _) = eliminate(&sys, &free);
    let point = [q(&t), q(&s), q(&u), q(&v)];
    let mut x = vec![BigRational::zero(); sys.arity()];
    for (i, p) in val {
        x[i - 1] = p.eval(&point);
    }
    Ok(x)
}

pub fn integer_pell_verify() -> Result<GalleryReport> {
    let mut r = GalleryReport::new(GalleryItem::IntegerPell, Some(RingTag::Integers));
    let sys = integer_pell_system();
    r.check(
        "system shape",
        sys.arity() == 21 && sys.len() == 19,
        format!("{} variables, {} equations", sys.arity(), sys.len()),
    );
    let free = [11, 15, 16, 21];
    let (val, residual) = eliminate(&sys, &free);
    let order = MonomialOrder::Lex;
    let var = |k: usize| QPoly::var(4, k, order);
    let c = |v: BigInt| QPoly::constant(4, q(&v), order);
    let base = tower_int(4);
    let d: BigInt = base.pow(3) * (&base + 2);
    let x10 = val.get(&10).cloned();
    r.check(
        "x10 = 2^48 (2 + 2^16)",
        x10.as_ref() == Some(&c((BigInt::one() << 48) * (bi(2) + (BigInt::one() << 16)))),
        format!("x10 = {d}"),
    );
    let t = var(0);
    let pell = &(&var(1) * &var(1)) - &(&c(bi(1)) + &(&c(d.clone()) * &(&t * &t)));
    let u = var(2);
    let crt_eq = &(&var(3) * &(&t * &t)) - &(&(&(&c(bi(2)) * &u) - &c(bi(1))) * &(&(&c(bi(3)) * &u) - &c(bi(1))));
    r.check(
        "first part equals x15^2 = 1 + (2^16)^3 (2 + 2^16) x11^2",
        residual.iter().any(|p| same_up_to_sign(p, &pell)),
        "coefficient-level comparison after elimination",
    );
    r.check(
        "second part equals x21 x11^2 = (2 x16 - 1)(3 x16 - 1)",
        residual.iter().any(|p| same_up_to_sign(p, &crt_eq)),
        "coefficient-level comparison after elimination",
    );
    r.check(
        "no other residual equations",
        residual.len() == 2 && val.len() == 21,
        format!("{} residuals, {} variables determined", residual.len(), val.len()),
    );
    // (2^16)^(2^16 - 2) = 2^(2^20 - 32) and 2^20 - 32 > 2^19.
    let e = 16u64 * ((1 << 16) - 2);
    r.check(
        "2^(2^20 - 32) > 2^(2^19)",
        e == (1 << 20) - 32 && e > 1 << 19,
        format!("{e} > {}", 1u64 << 19),
    );
    // Base 2^2.
    let scaled = integer_pell_system_with(1);
    let x = integer_pell_scaled_solution(1)?;
    let d4 = bi(4).pow(3) * bi(6);
    r.check(
        "base 2^2: D = 384",
        d4 == bi(384) && x[6] == q(&d4),
        format!("D = {}", format_rational(&x[6])),
    );
    r.check("base 2^2: solution checks", solves_rational(&scaled, &x), show(&x));
    r.check(
        "base 2^2: x11 analog >= 4 + 4^2",
        x[7] >= q(&pell_lower_bound(4)),
        format!("{} >= 20", format_rational(&x[7])),
    );
    Ok(r)
}

pub fn real_field_system() -> CanonicalSystem {
    system(7, &[Unit(1), Mul(2, 2, 3), Add(3, 4, 5), Add(5, 6, 1), Mul(3, 4, 7), Mul(6, 7, 1)])
}

/// `alpha^2 beta (1 - alpha^2 - beta) - 1`.
fn real_field_residual(alpha_sq: &BigRational, beta: &BigRational) -> BigRational {
    alpha_sq * beta * (BigRational::one() - alpha_sq - beta) - BigRational::one()
}

/// Bisects a sign change of `f` on `[lo, hi]` for `bits` steps.
fn bisect(f: impl Fn(&BigRational) -> BigRational, mut lo: BigRational, mut hi: BigRational, bits: u32) -> Option<(BigRational, BigRational)> {
    let slo = f(&lo).signum();
    if slo.is_zero() {
        return Some((lo.clone(), lo));
    }
    if f(&hi).signum() != -slo.clone() {
        return None;
    }
    let two = int(2);
    for _ in 0..bits {
        let mid = (&lo + &hi) / &two;
        let s = f(&mid).signum();
        if s.is_zero() {
            return Some((mid.clone(), mid));
        }
        if s == slo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo, hi))
}

/// Rationals `x + y + z = 1`, `xyz = 1` with `|num|, den <= h` for `x, y`.
pub fn rational_sum_product_scan(h: i64) -> (u64, Vec<(i64, i64, i64, i64)>) {
    let mut fr = Vec::new();
    for den in 1..=h {
        for num in -h..=h {
            if num.gcd(&den) == 1 {
                fr.push((num as i128, den as i128));
            }
        }
    }
    let hits: Vec<(i64, i64, i64, i64)> = fr
        .par_iter()
        .flat_map_iter(|&(a, b)| {
            fr.iter().filter_map(move |&(c, d)| {
                // z = (bd - ad - bc)/(bd); a c (bd - ad - bc) = (bd)^2.
                let zn = b * d - a * d - b * c;
                (a * c * zn == (b * d) * (b * d)).then_some((a as i64, b as i64, c as i64, d as i64))
            })
        })
        .collect();
    ((fr.len() * fr.len()) as u64, hits)
}

/// Real solutions with `alpha = 2^33`, certified by a sign change of
/// `alpha^2 beta (1 - alpha^2 - beta) - 1` on a rational interval of width at
/// most `2^-precision` times the bracket. Transcendence of `alpha` is not
/// checked.
pub fn real_field_check(precision: u32) -> GalleryReport {
    let mut r = GalleryReport::new(GalleryItem::RealField, Some(RingTag::RealFieldSketch))
        .param("precision", precision);
    let sys = real_field_system();
    r.check("equation count", sys.len() == 6, format!("{} equations", sys.len()));
    let alpha = pow2(33);
    let bound = q(&(tower_int(5) + 1));
    r.check("alpha > 2^32 + 1", alpha > bound, "alpha = 2^33");
    let a2 = &alpha * &alpha;
    let a4inv = (&a2 * &a2).recip();
    let f = |b: &BigRational| real_field_residual(&a2, b);
    let one = BigRational::one();
    let brackets = [
        ("small", -(&a4inv * int(2)), BigRational::zero()),
        ("large", &one - &a2, &one - &a2 + &a4inv * int(2)),
    ];
    for (name, lo, hi) in brackets {
        match bisect(f, lo, hi, precision) {
            Some((lo, hi)) => {
                // The remaining coordinates are polynomial in alpha and beta,
                // so only x6 x7 = 1 needs the interval.
                let x6 = |b: &BigRational| &one - &a2 - b;
                let x7 = |b: &BigRational| &a2 * b;
                let (p_lo, p_hi) = (&x6(&lo) * &x7(&lo), &x6(&hi) * &x7(&hi));
                let (mn, mx) = if p_lo <= p_hi { (p_lo, p_hi) } else { (p_hi, p_lo) };
                let ok = mn <= one && one <= mx;
                let width = (&hi - &lo).to_f64().unwrap_or(f64::NAN);
                let centre = ((&lo + &hi) / int(2)).to_f64().unwrap_or(f64::NAN);
                r.check(
                    &format!("{name} branch certified"),
                    ok,
                    format!("beta ~ {centre:e}, interval width {width:e}, x6 x7 brackets 1"),
                );
            }
            None => r.check(&format!("{name} branch certified"), false, "no sign change on bracket"),
        }
    }
    let (pairs, hits) = rational_sum_product_scan(50);
    r.check(
        "x + y + z = xyz = 1 has no small rational solution",
        hits.is_empty(),
        format!("{pairs} pairs (x, y) with height <= 50, {} solutions", hits.len()),
    );
    r
}

/// Typed parameters for [`run_item`]; unknown keys are rejected.
pub fn run_item(item: GalleryItem, params: &BTreeMap<String, String>, cfg: &Config) -> Result<GalleryReport> {
    let allowed: &[&str] = match item {
        GalleryItem::PrimeDenominator => &["k"],
        GalleryItem::LargePrime => &["p", "desk_mode"],
        GalleryItem::ImaginaryQuadratic | GalleryItem::IntegerPell => &[],
        GalleryItem::RealQuadratic => &["p"],
        GalleryItem::DivisorWitness => &["max"],
        GalleryItem::PellWitness => &["x", "cap"],
        GalleryItem::RealField => &["precision"],
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(CanonError::InvalidArgument(format!("{item} takes no parameter {k:?}")));
    }
    fn get<T: FromStr>(params: &BTreeMap<String, String>, k: &str, default: T) -> Result<T> {
        match params.get(k) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CanonError::InvalidArgument(format!("bad value {v:?} for {k}"))),
        }
    }
    match item {
        GalleryItem::PrimeDenominator => Ok(prime_denominator_verify(&get(params, "k", bi(273))?)),
        GalleryItem::LargePrime => large_prime_verify(&get(params, "p", bi(5))?, get(params, "desk_mode", true)?, cfg),
        GalleryItem::ImaginaryQuadratic => imaginary_quadratic_verify(),
        GalleryItem::RealQuadratic => real_quadratic_verify(get(params, "p", 13)?),
        GalleryItem::DivisorWitness => divisor_witness_range(get(params, "max", 1000)?),
        GalleryItem::PellWitness => {
            let cap = get(params, "cap", 6)?;
            let xs = match params.get("x") {
                None => vec![2, 3, 4],
                Some(v) => v
                    .split(',')
                    .map(|s| s.trim().parse::<u32>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| CanonError::InvalidArgument(format!("bad x list {v:?}")))?,
            };
            pell_witness_range(&xs, cap)
        }
        GalleryItem::IntegerPell => integer_pell_verify(),
        GalleryItem::RealField => Ok(real_field_check(get(params, "precision", 64)?)),
    }
}

/// Every item with default parameters.
pub fn run_all(cfg: &Config) -> Result<Vec<GalleryReport>> {
    GalleryItem::ALL
        .par_iter()
        .map(|&i| run_item(i, &BTreeMap::new(), cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divisor_witness_small() {
        for x in [1i64, 5, -6, 12, -1, 1024] {
            let (a, b) = divisor_witness(&bi(x)).unwrap();
            assert_eq!(a * x, (&b * 2 - 1) * (&b * 3 - 1));
        }
        assert!(divisor_witness(&bi(0)).is_err());
    }

    #[test]
    fn pell_witness_matches_search() {
        for x in 2u32..=3 {
            let d = (x as i64).pow(3) * (x as i64 + 2);
            let y_min = (1i64..100)
                .find(|y| is_perfect_square(&bi(1 + d * y * y)))
                .unwrap();
            assert_eq!(pell_witness(x, 6).unwrap().0, bi(y_min));
        }
        assert_eq!(pell_witness(2, 6).unwrap(), (bi(3), bi(17)));
        assert_eq!(pell_witness(3, 6).unwrap(), (bi(21), bi(244)));
        assert!(pell_witness(7, 6).is_err());
    }

    #[test]
    fn prime_denominator_parity() {
        assert!(prime_denominator_verify(&bi(273)).passed());
        let r = prime_denominator_verify(&bi(274));
        let failed: Vec<&str> = r.failures().iter().map(|c| c.name.as_str()).collect();
        assert_eq!(failed, ["2 + k^2 prime"]);
    }

    #[test]
    fn radicand_value() {
        assert_eq!(IMAGINARY_RADICAND, -4_295_032_833);
        assert_eq!(3 * 7 * 13 * 97 * 241 * 673, 4_295_032_833i64);
    }

    #[test]
    fn integer_pell_shape() {
        let s = integer_pell_system();
        assert_eq!((s.arity(), s.len()), (21, 19));
        assert!(s.contains(&Mul(6, 7, 8)) && s.contains(&Mul(12, 21, 20)) && s.contains(&Add(1, 18, 17)));
        assert_eq!(integer_pell_system_with(1).arity(), 18);
    }

    #[test]
    fn items_parse() {
        for i in GalleryItem::ALL {
            assert_eq!(i.name().parse::<GalleryItem>().unwrap(), i);
        }
        assert!("thm9".parse::<GalleryItem>().is_err());
    }
}
