//! Certified complex roots of univariate rational polynomials.
//!
//! Approximations come from a floating Aberth iteration, are polished by
//! Weierstrass (Durand–Kerner) steps in exact dyadic arithmetic, and are then
//! certified with inclusion disks `D(z_i, d·|W_i|)`: when these disks are
//! pairwise disjoint each one holds exactly one root.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::algebra::univariate::UPoly;
use crate::error::{CanonError, Result};
use crate::scalar::{
    format_rational, log2_ceil, pow2, rational_from_f64, rational_to_f64, round_dyadic, sqrt_upper,
};
use crate::value::QuadExt;

/// Exact complex number with rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussRat {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn zero() -> Self {
        GaussRat::real(BigRational::zero())
    }

    pub fn add(&self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re + &o.re, &self.im + &o.im)
    }

    pub fn sub(&self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re - &o.re, &self.im - &o.im)
    }

    pub fn mul(&self, o: &GaussRat) -> GaussRat {
        GaussRat::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }

    pub fn scale(&self, r: &BigRational) -> GaussRat {
        GaussRat::new(&self.re * r, &self.im * r)
    }

    pub fn norm_sq(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn conj(&self) -> GaussRat {
        GaussRat::new(self.re.clone(), -&self.im)
    }

    /// `None` for division by zero.
    pub fn div(&self, o: &GaussRat) -> Option<GaussRat> {
        let n = o.norm_sq();
        if n.is_zero() {
            return None;
        }
        let t = self.mul(&o.conj());
        Some(GaussRat::new(&t.re / &n, &t.im / &n))
    }

    pub fn round(&self, bits: u32) -> GaussRat {
        GaussRat::new(round_dyadic(&self.re, bits), round_dyadic(&self.im, bits))
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    pub fn from_c64(z: Complex64) -> Self {
        GaussRat::new(rational_from_f64(z.re), rational_from_f64(z.im))
    }

    /// Upper bound on `|self|`.
    pub fn abs_upper(&self) -> BigRational {
        self.re.abs() + self.im.abs()
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let z = self.to_c64();
        if self.im.is_zero() {
            write!(f, "{:.12e}", z.re)
        } else {
            write!(f, "{:.12e}{:+.12e}i", z.re, z.im)
        }
    }
}

/// Evaluates a polynomial at a Gaussian rational (Horner).
pub fn eval_gauss(p: &UPoly, z: &GaussRat) -> GaussRat {
    p.coeffs()
        .iter()
        .rev()
        .fold(GaussRat::zero(), |acc, a| {
            let m = acc.mul(z);
            GaussRat::new(m.re + a, m.im)
        })
}

/// A root of a square-free polynomial located to a certified disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedRoot {
    /// The disk `|z - center|^2 <= radius_sq` contains exactly this root.
    pub center: GaussRat,
    pub radius_sq: BigRational,
    pub real: bool,
    /// Exact value when the root is rational or quadratic over ℚ.
    pub exact: Option<QuadExt>,
}

impl CertifiedRoot {
    pub fn radius_upper(&self) -> BigRational {
        sqrt_upper(&self.radius_sq, 64)
    }

    pub fn approx(&self) -> Complex64 {
        match &self.exact {
            Some(v) => {
                let (re, im) = v.to_f64();
                Complex64::new(re, im)
            }
            None => self.center.to_c64(),
        }
    }

    /// Whether the disk certainly lies inside `|z| <= bound`, certainly
    /// outside it, or neither.
    pub fn cmp_modulus(&self, bound: &BigRational) -> Option<Ordering> {
        if let Some(v) = &self.exact {
            return Some(v.cmp_modulus_sq(&(bound * bound)));
        }
        let r = self.radius_upper();
        let c = self.center.norm_sq();
        // |z| <= |c| + r <= bound  <=  c <= (bound - r)^2 with bound >= r.
        let inner = bound - &r;
        if !inner.is_negative() && c <= &inner * &inner {
            return Some(Ordering::Less);
        }
        let outer = bound + &r;
        if c > &outer * &outer {
            return Some(Ordering::Greater);
        }
        None
    }
}

impl Serialize for CertifiedRoot {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match &self.exact {
            Some(v) => s.serialize_str(&v.to_string()),
            None => s.serialize_str(&format!(
                "{} ± {}",
                self.center,
                format_rational(&round_up(&self.radius_upper(), 64))
            )),
        }
    }
}

fn round_up(r: &BigRational, bits: u32) -> BigRational {
    let scale = BigRational::from_integer(BigInt::one() << bits as usize);
    (r * &scale).ceil() / scale
}

fn f64_coeffs(p: &UPoly) -> Option<Vec<f64>> {
    let v: Vec<f64> = p.coeffs().iter().map(rational_to_f64).collect();
    v.iter().all(|x| x.is_finite()).then_some(v)
}

fn horner_c(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Floating Aberth iteration; returns `deg` approximations.
fn aberth(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let lc = c[n];
    // Fujiwara bound.
    let mut bound: f64 = 0.0;
    for k in 1..=n {
        let v = (c[n - k] / lc).abs().powf(1.0 / k as f64);
        bound = bound.max(if k == n { v / 2f64.powf(1.0 / n as f64) } else { v });
    }
    let radius = (2.0 * bound).max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    for _ in 0..800 {
        let mut max_step: f64 = 0.0;
        for k in 0..n {
            let (p, dp) = horner_c(c, z[k]);
            if p == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != k {
                    s += Complex64::new(1.0, 0.0) / (z[k] - z[j]);
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if w.re.is_finite() && w.im.is_finite() {
                z[k] -= w;
                max_step = max_step.max(w.norm() / (1.0 + z[k].norm()));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    z
}

struct Disks {
    centers: Vec<GaussRat>,
    radius_sq: Vec<BigRational>,
}

fn inclusion_disks(q: &UPoly, z: &[GaussRat]) -> Option<Disks> {
    let n = z.len();
    let lc = q.lc();
    let d2 = BigRational::from_integer(BigInt::from((n * n) as u64));
    let mut radius_sq = Vec::with_capacity(n);
    for i in 0..n {
        let mut den = &lc * &lc;
        for j in 0..n {
            if j != i {
                den *= z[i].sub(&z[j]).norm_sq();
            }
        }
        if den.is_zero() {
            return None;
        }
        let val = eval_gauss(q, &z[i]).norm_sq();
        radius_sq.push(&d2 * val / den);
    }
    Some(Disks {
        centers: z.to_vec(),
        radius_sq,
    })
}

/// `|a - b|^2 > 2 (ra^2 + rb^2)`, which implies the disks are disjoint.
fn surely_disjoint(a: &GaussRat, ra2: &BigRational, b: &GaussRat, rb2: &BigRational) -> bool {
    a.sub(b).norm_sq() > BigRational::from_integer(2.into()) * (ra2 + rb2)
}

fn weierstrass_step(q: &UPoly, z: &[GaussRat], bits: u32) -> Vec<GaussRat> {
    let lc = q.lc();
    let n = z.len();
    (0..n)
        .map(|i| {
            let mut den = GaussRat::real(lc.clone());
            for j in 0..n {
                if j != i {
                    den = den.mul(&z[i].sub(&z[j]));
                }
            }
            match eval_gauss(q, &z[i]).div(&den) {
                Some(w) => z[i].sub(&w).round(bits),
                None => z[i].add(&GaussRat::real(pow2(-(bits as i64) + 2))).round(bits),
            }
        })
        .collect()
}

/// Certified disks for every distinct complex root of `p`, each of radius at
/// most `2^-bits`, with realness decided and exact values recognized where
/// the root has degree at most two over ℚ.
pub fn certify_roots(p: &UPoly, bits: u32, max_rounds: u32) -> Result<Vec<CertifiedRoot>> {
    let q = p.squarefree_part();
    let n = q.degree();
    if q.is_zero() || n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        let r = -&q.coeffs()[0] / &q.coeffs()[1];
        return Ok(vec![exact_root(QuadExt::rational(r))]);
    }
    let ints = q.primitive_integer();
    let lc_int = ints.last().unwrap().clone();
    // Enough bits to recognize rationals/quadratics with this leading coefficient.
    let bound = q.root_bound();
    let mag_bits = log2_ceil(&bound).max(0) as u32;
    let want = bits.max(2 * lc_int.bits() as u32 + mag_bits + 8);
    let target = pow2(-2 * want as i64);

    let Some(cf) = f64_coeffs(&q) else {
        return Err(CanonError::RefinementExhausted);
    };
    let mut z: Vec<GaussRat> = aberth(&cf).into_iter().map(GaussRat::from_c64).collect();
    let mut prec = (want + mag_bits + 32).max(64);
    for _round in 0..max_rounds.max(1) {
        for _ in 0..8 {
            z = weierstrass_step(&q, &z, prec);
            let Some(disks) = inclusion_disks(&q, &z) else {
                continue;
            };
            if let Some(roots) = try_certify(&disks, &target) {
                return Ok(recognize(&q, &ints, roots));
            }
        }
        prec *= 2;
    }
    Err(CanonError::RefinementExhausted)
}

fn try_certify(d: &Disks, target: &BigRational) -> Option<Vec<CertifiedRoot>> {
    let n = d.centers.len();
    if d.radius_sq.iter().any(|r| r > target) {
        return None;
    }
    for i in 0..n {
        for j in i + 1..n {
            if !surely_disjoint(&d.centers[i], &d.radius_sq[i], &d.centers[j], &d.radius_sq[j]) {
                return None;
            }
        }
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let c = &d.centers[i];
        let r2 = &d.radius_sq[i];
        let conj = c.conj();
        let mirror_free = (0..n)
            .filter(|&j| j != i)
            .all(|j| surely_disjoint(&conj, r2, &d.centers[j], &d.radius_sq[j]));
        let off_axis = &c.im * &c.im > *r2;
        let real = match (mirror_free, off_axis) {
            (true, false) => true,
            (false, true) => false,
            (true, true) => false,
            (false, false) => return None,
        };
        let center = if real { GaussRat::real(c.re.clone()) } else { c.clone() };
        out.push(CertifiedRoot {
            center,
            radius_sq: r2.clone(),
            real,
            exact: None,
        });
    }
    Some(out)
}

fn exact_root(v: QuadExt) -> CertifiedRoot {
    let (re, im) = exact_center(&v);
    CertifiedRoot {
        center: GaussRat::new(re, im),
        radius_sq: BigRational::zero(),
        real: v.is_real(),
        exact: Some(v),
    }
}

/// A dyadic approximation of an exact value, for display only.
fn exact_center(v: &QuadExt) -> (BigRational, BigRational) {
    if v.is_rational() {
        return (v.a().clone(), BigRational::zero());
    }
    let root = sqrt_upper(&BigRational::from_integer(v.radicand().abs().into()), 80);
    let part = v.b() * root;
    if v.radicand() > 0 {
        (v.a() + part, BigRational::zero())
    } else {
        (v.a().clone(), part)
    }
}

/// Whether exact `v` lies in the closed disk `|z - c|^2 <= r2`.
pub fn quad_in_disk(v: &QuadExt, c: &GaussRat, r2: &BigRational) -> bool {
    let d = v.radicand();
    let two = BigRational::from_integer(2.into());
    let (x, y, rad) = if d >= 0 {
        // (a - cr + b sqrt d)^2 + ci^2 = (a-cr)^2 + b^2 d + ci^2 + 2(a-cr) b sqrt d
        let u = v.a() - &c.re;
        let x = &u * &u + v.b() * v.b() * BigRational::from_integer(d.into()) + &c.im * &c.im - r2;
        (x, &two * &u * v.b(), d)
    } else {
        // (a-cr)^2 + (b sqrt|d| - ci)^2
        let u = v.a() - &c.re;
        let x = &u * &u
            + v.b() * v.b() * BigRational::from_integer((-d).into())
            + &c.im * &c.im
            - r2;
        (x, -&two * v.b() * &c.im, -d)
    };
    let val = QuadExt::new(x, y, rad.max(0));
    // QuadExt::new may fold perfect squares; evaluate the sign exactly.
    match val.real_sign() {
        Some(s) => s <= 0,
        None => false,
    }
}

fn recognize(q: &UPoly, ints: &[BigInt], mut roots: Vec<CertifiedRoot>) -> Vec<CertifiedRoot> {
    let lc = BigRational::from_integer(ints.last().unwrap().clone());
    let n = roots.len();
    // Rational roots.
    for r in roots.iter_mut() {
        if !r.real {
            continue;
        }
        let cand = (&r.center.re * &lc).round() / &lc;
        if q.eval(&cand).is_zero() && (&cand - &r.center.re) * (&cand - &r.center.re) <= r.radius_sq {
            r.exact = Some(QuadExt::rational(cand));
        }
    }
    // Quadratic factors: pairs of real roots, or complex conjugate pairs.
    for i in 0..n {
        for j in i + 1..n {
            if roots[i].exact.is_some() || roots[j].exact.is_some() {
                continue;
            }
            if roots[i].real != roots[j].real {
                continue;
            }
            if !roots[i].real {
                let conj = roots[i].center.conj();
                if surely_disjoint(&conj, &roots[i].radius_sq, &roots[j].center, &roots[j].radius_sq) {
                    continue;
                }
            }
            let s = roots[i].center.add(&roots[j].center);
            let p = roots[i].center.mul(&roots[j].center);
            let s = (&s.re * &lc).round() / &lc;
            let p = (&p.re * &lc).round() / &lc;
            let h = UPoly::new(vec![p.clone(), -s.clone(), BigRational::one()]);
            if !q.divrem(&h).1.is_zero() {
                continue;
            }
            let disc = &s * &s - BigRational::from_integer(4.into()) * &p;
            let (num, den) = (disc.numer().clone(), disc.denom().clone());
            let Ok(rad) = i64::try_from(num * &den) else {
                continue;
            };
            let half = BigRational::new(BigInt::one(), BigInt::from(2));
            let scale = &half / BigRational::from_integer(den);
            let a = &s * &half;
            let plus = QuadExt::new(a.clone(), scale.clone(), rad);
            let minus = QuadExt::new(a, -scale, rad);
            for (k, other) in [(i, j), (j, i)] {
                if quad_in_disk(&plus, &roots[k].center, &roots[k].radius_sq)
                    && quad_in_disk(&minus, &roots[other].center, &roots[other].radius_sq)
                {
                    roots[k].exact = Some(plus.clone());
                    roots[other].exact = Some(minus.clone());
                    break;
                }
            }
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn roots_of(c: &[i64]) -> Vec<CertifiedRoot> {
        certify_roots(&UPoly::from_ints(c), 40, 12).unwrap()
    }

    #[test]
    fn rational_and_quadratic_roots_are_exact() {
        let r = roots_of(&[-2, 0, 1]);
        assert_eq!(r.len(), 2);
        let mut ex: Vec<QuadExt> = r.iter().map(|x| x.exact.clone().unwrap()).collect();
        ex.sort();
        assert_eq!(ex, vec![QuadExt::sqrt(2).neg(), QuadExt::sqrt(2)]);
        assert!(r.iter().all(|x| x.real));

        let r = roots_of(&[1, 0, 1]);
        assert!(r.iter().all(|x| !x.real));
        let mut ex: Vec<QuadExt> = r.iter().map(|x| x.exact.clone().unwrap()).collect();
        ex.sort();
        assert_eq!(ex, vec![QuadExt::sqrt(-1).neg(), QuadExt::sqrt(-1)]);

        // (x - 1/3)(x^2 + x + 1)
        let p = UPoly::new(vec![rat(-1, 3), rat(2, 3), rat(2, 3), int(1)]);
        let r = certify_roots(&p, 40, 12).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.iter().all(|x| x.exact.is_some()));
        assert_eq!(r.iter().filter(|x| x.real).count(), 1);
    }

    #[test]
    fn cubic_roots_stay_certified_boxes() {
        let r = roots_of(&[-2, 0, 0, 1]);
        assert_eq!(r.len(), 3);
        assert_eq!(r.iter().filter(|x| x.real).count(), 1);
        for x in &r {
            assert!(x.exact.is_none());
            assert!(x.radius_sq <= pow2(-80));
        }
        let real = r.iter().find(|x| x.real).unwrap();
        let c = real.center.re.clone();
        assert!((rational_to_f64(&c) - 2f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn large_roots() {
        // t (t - 65536) (t - 2)
        let p = UPoly::from_ints(&[0, 131072, -65538, 1]);
        let r = certify_roots(&p, 40, 12).unwrap();
        let mut ex: Vec<QuadExt> = r.iter().map(|x| x.exact.clone().unwrap()).collect();
        ex.sort();
        assert_eq!(ex, vec![QuadExt::from_int(0), QuadExt::from_int(2), QuadExt::from_int(65536)]);
    }

    #[test]
    fn modulus_comparison_on_boxes() {
        let r = roots_of(&[-5, 0, 0, 1]);
        let real = r.iter().find(|x| x.real).unwrap();
        assert_eq!(real.cmp_modulus(&int(2)), Some(Ordering::Less));
        assert_eq!(real.cmp_modulus(&int(1)), Some(Ordering::Greater));
    }

    #[test]
    fn disk_membership() {
        let c = GaussRat::new(rat(-1, 2), rat(866, 1000));
        let w = QuadExt::new(rat(-1, 2), rat(1, 2), -3);
        assert!(quad_in_disk(&w, &c, &rat(1, 10000)));
        assert!(!quad_in_disk(&w.conj(), &c, &rat(1, 10000)));
        assert!(quad_in_disk(&QuadExt::sqrt(2), &GaussRat::real(rat(1414, 1000)), &rat(1, 10000)));
    }
}
