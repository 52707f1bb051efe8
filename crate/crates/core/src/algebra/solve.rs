//! Complete enumeration of the solutions of zero-dimensional systems.
//!
//! The quotient algebra of the (radical) ideal is built from a graded
//! Gröbner basis; a separating linear form `t` gives every coordinate as a
//! polynomial in `t`, and the roots of the minimal polynomial of `t` are
//! certified one by one.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::groebner::{buchberger, DimensionClass, GroebnerBasis};
use crate::algebra::poly::{Monomial, MonomialOrder, QPoly};
use crate::algebra::roots::{certify_roots, eval_gauss, CertifiedRoot, GaussRat};
use crate::algebra::univariate::UPoly;
use crate::config::Config;
use crate::error::{CanonError, Result};
use crate::scalar::{pow2, sqrt_upper};
use crate::system::CanonicalSystem;
use crate::value::QuadExt;

/// Largest quotient-algebra dimension the solver accepts.
pub const MAX_SOLUTIONS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SolutionKind {
    Inconsistent,
    ZeroDimensional,
    PositiveDimensional,
}

/// One solution; each coordinate is exact or a certified disk.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolutionPoint {
    pub coords: Vec<CertifiedRoot>,
    pub real: bool,
}

impl SolutionPoint {
    pub fn from_exact(values: Vec<QuadExt>) -> Self {
        let real = values.iter().all(QuadExt::is_real);
        let coords = values
            .into_iter()
            .map(|v| CertifiedRoot {
                center: GaussRat::zero(),
                radius_sq: BigRational::zero(),
                real: v.is_real(),
                exact: Some(v),
            })
            .collect();
        SolutionPoint { coords, real }
    }

    pub fn exact_values(&self) -> Option<Vec<QuadExt>> {
        self.coords.iter().map(|c| c.exact.clone()).collect()
    }

    pub fn rational_values(&self) -> Option<Vec<BigRational>> {
        self.coords
            .iter()
            .map(|c| c.exact.as_ref().and_then(|v| v.as_rational().cloned()))
            .collect()
    }

    /// `Less`/`Equal` when every coordinate has modulus at most `bound`,
    /// `Greater` when some coordinate exceeds it, `None` if undecided.
    pub fn cmp_max_modulus(&self, bound: &BigRational) -> Option<Ordering> {
        let mut worst = Ordering::Less;
        for c in &self.coords {
            match c.cmp_modulus(bound)? {
                Ordering::Greater => return Some(Ordering::Greater),
                Ordering::Equal => worst = Ordering::Equal,
                Ordering::Less => {}
            }
        }
        Some(worst)
    }

    pub fn approx(&self) -> Vec<num_complex::Complex64> {
        self.coords.iter().map(CertifiedRoot::approx).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolutionSet {
    pub kind: SolutionKind,
    pub nvars: usize,
    pub points: Vec<SolutionPoint>,
}

impl SolutionSet {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Evaluates a polynomial at an exact point.
pub fn eval_quad(p: &QPoly, point: &[QuadExt]) -> Result<QuadExt> {
    let mut acc = QuadExt::zero();
    for (m, c) in p.terms() {
        let mut t = QuadExt::rational(c.clone());
        for (i, x) in point.iter().enumerate().take(p.nvars()) {
            for _ in 0..m.exp(i) {
                t = t.mul(x)?;
            }
        }
        acc = acc.add(&t)?;
    }
    Ok(acc)
}

/// Quotient algebra `Q[x]/I` of a zero-dimensional ideal.
struct Quotient {
    gb: GroebnerBasis,
    basis: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
    /// `mult[k][b]` = coordinates of `x_k * basis[b]`.
    mult: Vec<Vec<Vec<BigRational>>>,
}

impl Quotient {
    fn new(gb: GroebnerBasis) -> Result<Self> {
        let basis = gb
            .standard_monomials(MAX_SOLUTIONS)
            .ok_or(CanonError::NotZeroDimensional)?;
        let index: HashMap<Monomial, usize> =
            basis.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let n = gb.nvars();
        let mut q = Quotient {
            gb,
            basis,
            index,
            mult: Vec::new(),
        };
        let mut mult = Vec::with_capacity(n);
        for k in 0..n {
            let cols: Vec<Vec<BigRational>> = q
                .basis
                .iter()
                .map(|b| {
                    let m = b.mul(&Monomial::var(k));
                    let p = QPoly::from_terms(n, q.gb.order, vec![(m, BigRational::one())]);
                    q.nf_vec(&p)
                })
                .collect();
            mult.push(cols);
        }
        q.mult = mult;
        Ok(q)
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn nf_vec(&self, p: &QPoly) -> Vec<BigRational> {
        let r = self.gb.normal_form(p);
        let mut v = vec![BigRational::zero(); self.dim()];
        for (m, c) in r.terms() {
            v[self.index[m]] = c.clone();
        }
        v
    }

    /// `(sum_k c_k x_k) * v`.
    fn mul_linear(&self, coeffs: &[BigRational], v: &[BigRational]) -> Vec<BigRational> {
        let d = self.dim();
        let mut out = vec![BigRational::zero(); d];
        for (k, ck) in coeffs.iter().enumerate() {
            if ck.is_zero() {
                continue;
            }
            for (b, vb) in v.iter().enumerate() {
                if vb.is_zero() {
                    continue;
                }
                let f = ck * vb;
                for (o, x) in out.iter_mut().zip(&self.mult[k][b]) {
                    if !x.is_zero() {
                        *o += &f * x;
                    }
                }
            }
        }
        out
    }

    fn one_vec(&self) -> Vec<BigRational> {
        let n = self.gb.nvars();
        self.nf_vec(&QPoly::constant(n, BigRational::one(), self.gb.order))
    }

    /// Minimal polynomial of the linear form with the Krylov elimination data.
    fn krylov(&self, coeffs: &[BigRational]) -> Krylov {
        let mut k = Krylov::default();
        let mut v = self.one_vec();
        loop {
            if let Some(dep) = k.push(v.clone()) {
                k.minpoly = UPoly::new(dep);
                return k;
            }
            v = self.mul_linear(coeffs, &v);
        }
    }
}

/// Incremental elimination over the vectors `1, t, t^2, ...`.
#[derive(Default)]
struct Krylov {
    rows: Vec<(Vec<BigRational>, usize, Vec<BigRational>)>,
    minpoly: UPoly,
}

impl Krylov {
    fn reduce(&self, v: Vec<BigRational>, k: usize) -> (Vec<BigRational>, Vec<BigRational>) {
        let mut r = v;
        let mut comb = vec![BigRational::zero(); k + 1];
        comb[k] = BigRational::one();
        for (row, piv, c) in &self.rows {
            if r[*piv].is_zero() {
                continue;
            }
            let f = &r[*piv] / &row[*piv];
            for (a, b) in r.iter_mut().zip(row) {
                if !b.is_zero() {
                    *a -= &f * b;
                }
            }
            for (a, b) in comb.iter_mut().zip(c) {
                *a -= &f * b;
            }
        }
        (r, comb)
    }

    /// Adds the next power; returns the dependency when it is reached.
    fn push(&mut self, v: Vec<BigRational>) -> Option<Vec<BigRational>> {
        let k = self.rows.len();
        let (r, comb) = self.reduce(v, k);
        match r.iter().position(|x| !x.is_zero()) {
            Some(p) => {
                self.rows.push((r, p, comb));
                None
            }
            None => Some(comb),
        }
    }

    /// Coefficients `g` with `target = sum g_i t^i` (target in the span).
    fn express(&self, target: &[BigRational]) -> Vec<BigRational> {
        let mut r = target.to_vec();
        let mut g = vec![BigRational::zero(); self.rows.len()];
        for (row, piv, c) in &self.rows {
            if r[*piv].is_zero() {
                continue;
            }
            let f = &r[*piv] / &row[*piv];
            for (a, b) in r.iter_mut().zip(row) {
                if !b.is_zero() {
                    *a -= &f * b;
                }
            }
            for (a, b) in g.iter_mut().zip(c) {
                *a += &f * b;
            }
        }
        debug_assert!(r.iter().all(|x| x.is_zero()));
        g
    }
}

/// Solution set of a canonical system (any dimension).
pub fn solution_set(sys: &CanonicalSystem, cfg: &Config) -> Result<SolutionSet> {
    let polys = sys.to_polys(MonomialOrder::GrevLex);
    solution_set_polys(&polys, sys.arity(), cfg)
}

/// Complete enumeration; errors when the system is not zero-dimensional.
pub fn enumerate_solutions(sys: &CanonicalSystem, cfg: &Config) -> Result<SolutionSet> {
    let s = solution_set(sys, cfg)?;
    if s.kind == SolutionKind::PositiveDimensional {
        return Err(CanonError::NotZeroDimensional);
    }
    Ok(s)
}

pub fn enumerate_polys(polys: &[QPoly], nvars: usize, cfg: &Config) -> Result<SolutionSet> {
    let s = solution_set_polys(polys, nvars, cfg)?;
    if s.kind == SolutionKind::PositiveDimensional {
        return Err(CanonError::NotZeroDimensional);
    }
    Ok(s)
}

pub fn solution_set_polys(polys: &[QPoly], nvars: usize, cfg: &Config) -> Result<SolutionSet> {
    let polys: Vec<QPoly> = polys.iter().map(|p| p.with_order(MonomialOrder::GrevLex)).collect();
    let gb = buchberger(&polys, nvars, MonomialOrder::GrevLex, cfg.gb_budget)?;
    solve_from_basis(&gb, &polys, cfg)
}

/// Solutions of the ideal with Gröbner basis `gb`; `original` generators are
/// used to re-verify every exact point.
pub fn solve_from_basis(gb: &GroebnerBasis, original: &[QPoly], cfg: &Config) -> Result<SolutionSet> {
    let nvars = gb.nvars();
    match gb.dimension_class() {
        DimensionClass::Empty => {
            return Ok(SolutionSet {
                kind: SolutionKind::Inconsistent,
                nvars,
                points: Vec::new(),
            })
        }
        DimensionClass::Positive => {
            return Ok(SolutionSet {
                kind: SolutionKind::PositiveDimensional,
                nvars,
                points: Vec::new(),
            })
        }
        DimensionClass::Zero => {}
    }
    let mut quotient = Quotient::new(gb.clone())?;
    let unit = |i: usize| -> Vec<BigRational> {
        (0..nvars)
            .map(|k| if k == i { BigRational::one() } else { BigRational::zero() })
            .collect()
    };
    // Radical: adjoin the square-free parts of every coordinate's eliminant.
    let mut var_polys: Vec<UPoly> = (0..nvars).map(|i| quotient.krylov(&unit(i)).minpoly).collect();
    let mut extra = Vec::new();
    for (i, q) in var_polys.iter_mut().enumerate() {
        let sf = q.squarefree_part();
        if sf.degree() < q.degree() {
            let terms = sf
                .coeffs()
                .iter()
                .enumerate()
                .map(|(e, c)| {
                    let mut exps = vec![0u16; nvars];
                    exps[i] = e as u16;
                    (Monomial::from_exponents(&exps), c.clone())
                })
                .collect();
            extra.push(QPoly::from_terms(nvars, gb.order, terms));
        }
        *q = sf;
    }
    if !extra.is_empty() {
        let rad = quotient.gb.extend(&extra, cfg.gb_budget)?;
        quotient = Quotient::new(rad)?;
    }
    let d = quotient.dim();

    // Separating linear form: the last variable, then random combinations
    // with widening coefficient ranges.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_f0_72);
    let mut attempts: Vec<Vec<BigRational>> = vec![unit(nvars - 1)];
    for range in [97i64, 1 << 16, 1 << 40] {
        attempts.push(
            (0..nvars)
                .map(|k| {
                    if k == nvars - 1 {
                        BigRational::one()
                    } else {
                        BigRational::from_integer(rng.gen_range(-range..=range).into())
                    }
                })
                .collect(),
        );
    }
    let mut chosen = None;
    for coeffs in attempts {
        let k = quotient.krylov(&coeffs);
        if k.minpoly.degree() == d {
            chosen = Some(k);
            break;
        }
    }
    let krylov = chosen.ok_or(CanonError::DegenerateTriangular)?;
    let g: Vec<UPoly> = (0..nvars)
        .map(|i| {
            let target = quotient.nf_vec(&QPoly::var(nvars, i, gb.order));
            UPoly::new(krylov.express(&target))
        })
        .collect();

    let bits = cfg.box_precision_bits;
    let rounds = cfg.max_refine_rounds;
    let var_roots: Vec<Vec<CertifiedRoot>> = var_polys
        .iter()
        .map(|q| certify_roots(q, bits, rounds))
        .collect::<Result<_>>()?;

    let mut t_bits = bits;
    for _ in 0..rounds.max(1) {
        let t_roots = certify_roots(&krylov.minpoly, t_bits, rounds)?;
        if t_roots.len() != d {
            return Err(CanonError::Accounting(format!(
                "separating polynomial has {} roots, expected {d}",
                t_roots.len()
            )));
        }
        if let Some(points) = assemble(&t_roots, &g, &var_roots, t_bits)? {
            let points = finalize(points, original)?;
            return Ok(SolutionSet {
                kind: SolutionKind::ZeroDimensional,
                nvars,
                points,
            });
        }
        t_bits *= 2;
    }
    Err(CanonError::RefinementExhausted)
}

/// Matches every `g_i(t_j)` to the unique coordinate root it can equal.
fn assemble(
    t_roots: &[CertifiedRoot],
    g: &[UPoly],
    var_roots: &[Vec<CertifiedRoot>],
    t_bits: u32,
) -> Result<Option<Vec<SolutionPoint>>> {
    let two = BigRational::from_integer(2.into());
    let mut points = Vec::with_capacity(t_roots.len());
    for t in t_roots {
        let mut coords = Vec::with_capacity(g.len());
        for (gi, roots) in g.iter().zip(var_roots) {
            if let Some(tv) = &t.exact {
                let v = eval_upoly_quad(gi, tv)?;
                coords.push(CertifiedRoot {
                    center: GaussRat::zero(),
                    radius_sq: BigRational::zero(),
                    real: v.is_real(),
                    exact: Some(v),
                });
                continue;
            }
            let center = eval_gauss(gi, &t.center).round(t_bits + 16);
            let r = t.radius_upper();
            let a = t.center.abs_upper() + &r;
            // |g(z) - g(c)| <= r * sum k |g_k| a^(k-1)
            let mut slope = BigRational::zero();
            let mut apow = BigRational::one();
            for (k, ck) in gi.coeffs().iter().enumerate().skip(1) {
                slope += BigRational::from_integer(k.into()) * num_traits::Signed::abs(ck) * &apow;
                apow *= &a;
            }
            let radius = &r * &slope + pow2(-(t_bits as i64) - 14);
            let radius_sq = &radius * &radius;
            let candidates: Vec<&CertifiedRoot> = roots
                .iter()
                .filter(|root| {
                    center.sub(&root.center).norm_sq()
                        <= &two * (&radius_sq + &root.radius_sq)
                })
                .collect();
            if candidates.len() != 1 {
                return Ok(None);
            }
            coords.push(candidates[0].clone());
        }
        points.push(SolutionPoint {
            coords,
            real: t.real,
        });
    }
    Ok(Some(points))
}

fn eval_upoly_quad(p: &UPoly, x: &QuadExt) -> Result<QuadExt> {
    let mut acc = QuadExt::zero();
    for c in p.coeffs().iter().rev() {
        acc = acc.mul(x)?.add(&QuadExt::rational(c.clone()))?;
    }
    Ok(acc)
}

/// Drops exactness across incompatible radicands and re-verifies exact points.
fn finalize(mut points: Vec<SolutionPoint>, original: &[QPoly]) -> Result<Vec<SolutionPoint>> {
    for p in points.iter_mut() {
        let radicands: std::collections::BTreeSet<i64> = p
            .coords
            .iter()
            .filter_map(|c| c.exact.as_ref())
            .map(QuadExt::radicand)
            .filter(|&d| d != 0)
            .collect();
        if radicands.len() > 1 {
            for c in p.coords.iter_mut() {
                if c.exact.as_ref().is_some_and(|v| !v.is_rational()) {
                    ensure_center(c);
                    c.exact = None;
                }
            }
        }
        if let Some(vals) = p.exact_values() {
            for f in original {
                if !eval_quad(f, &vals)?.is_zero() {
                    return Err(CanonError::Accounting(format!(
                        "exact point fails verification: {}",
                        vals.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
                    )));
                }
            }
        }
    }
    sort_points(&mut points);
    Ok(points)
}

/// Gives exact coordinates a dyadic center of radius `2^-64` before they
/// are downgraded to disks.
fn ensure_center(c: &mut CertifiedRoot) {
    let Some(v) = &c.exact else { return };
    let bits = 96;
    let root = sqrt_upper(&BigRational::from_integer(v.radicand().abs().into()), bits);
    let part = v.b() * &root;
    c.center = if v.radicand() > 0 {
        GaussRat::real(v.a() + part)
    } else {
        GaussRat::new(v.a().clone(), part)
    };
    let err = num_traits::Signed::abs(v.b()) * pow2(-(bits as i64));
    c.radius_sq = &err * &err;
}

/// Deterministic order: exact points first by value, then by approximation.
pub fn sort_points(points: &mut [SolutionPoint]) {
    points.sort_by(|a, b| match (a.exact_values(), b.exact_values()) {
        (Some(x), Some(y)) => x.cmp(&y),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => {
            let (x, y) = (a.approx(), b.approx());
            for (p, q) in x.iter().zip(&y) {
                let o = p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im));
                if o != Ordering::Equal {
                    return o;
                }
            }
            Ordering::Equal
        }
    });
}

/// Points with every coordinate real.
pub fn real_points(s: &SolutionSet) -> Result<SolutionSet> {
    if s.kind == SolutionKind::PositiveDimensional {
        return Err(CanonError::NotZeroDimensional);
    }
    Ok(SolutionSet {
        kind: s.kind,
        nvars: s.nvars,
        points: s.points.iter().filter(|p| p.real).cloned().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;
    use crate::system::{Add, Mul, Unit};

    fn cfg() -> Config {
        Config::default()
    }

    fn exact(s: &SolutionSet) -> Vec<Vec<QuadExt>> {
        s.points.iter().map(|p| p.exact_values().unwrap()).collect()
    }

    fn ints(v: &[i64]) -> Vec<QuadExt> {
        v.iter().map(|&x| QuadExt::from_int(x)).collect()
    }

    #[test]
    fn unique_chain() {
        let s = CanonicalSystem::from_equations(3, [Unit(1), Add(1, 1, 2), Mul(2, 2, 3)]).unwrap();
        let sol = enumerate_solutions(&s, &cfg()).unwrap();
        assert_eq!(exact(&sol), vec![ints(&[1, 2, 4])]);
    }

    #[test]
    fn two_points() {
        let s = CanonicalSystem::from_equations(2, [Mul(1, 1, 2), Add(1, 1, 2)]).unwrap();
        let sol = enumerate_solutions(&s, &cfg()).unwrap();
        assert_eq!(exact(&sol), vec![ints(&[0, 0]), ints(&[2, 4])]);
    }

    #[test]
    fn doubling_chain_two_solutions() {
        // x1 + x1 = x2, x_i * x_i = x_{i+1}
        let s = CanonicalSystem::from_equations(
            4,
            [Add(1, 1, 2), Mul(1, 1, 2), Mul(2, 2, 3), Mul(3, 3, 4)],
        )
        .unwrap();
        let sol = enumerate_solutions(&s, &cfg()).unwrap();
        assert_eq!(exact(&sol), vec![ints(&[0, 0, 0, 0]), ints(&[2, 4, 16, 256])]);
    }

    #[test]
    fn real_filtering() {
        let o = MonomialOrder::GrevLex;
        let x = QPoly::var(1, 0, o);
        let one = QPoly::constant(1, int(1), o);
        let sol = enumerate_polys(&[&(&x * &x) + &one], 1, &cfg()).unwrap();
        assert_eq!(sol.points.len(), 2);
        assert!(real_points(&sol).unwrap().is_empty());
        let two = QPoly::constant(1, int(2), o);
        let sol = enumerate_polys(&[&(&x * &x) - &two], 1, &cfg()).unwrap();
        let r = real_points(&sol).unwrap();
        assert_eq!(exact(&r), vec![vec![QuadExt::sqrt(2).neg()], vec![QuadExt::sqrt(2)]]);
    }

    #[test]
    fn non_radical_input() {
        // x^2 = 0, y = x  has the single point (0, 0)
        let o = MonomialOrder::GrevLex;
        let x = QPoly::var(2, 0, o);
        let y = QPoly::var(2, 1, o);
        let sol = enumerate_polys(&[&x * &x, &y - &x], 2, &cfg()).unwrap();
        assert_eq!(exact(&sol), vec![ints(&[0, 0])]);
    }

    #[test]
    fn mixed_radicands_become_boxes() {
        // x^2 = 2, y^2 = 3: four points, each with incompatible radicands.
        let o = MonomialOrder::GrevLex;
        let x = QPoly::var(2, 0, o);
        let y = QPoly::var(2, 1, o);
        let sol = enumerate_polys(
            &[&(&x * &x) - &QPoly::constant(2, int(2), o), &(&y * &y) - &QPoly::constant(2, int(3), o)],
            2,
            &cfg(),
        )
        .unwrap();
        assert_eq!(sol.points.len(), 4);
        assert!(sol.points.iter().all(|p| p.real && p.exact_values().is_none()));
        for p in &sol.points {
            assert_eq!(p.cmp_max_modulus(&int(2)), Some(Ordering::Less));
        }
    }

    #[test]
    fn cubic_coordinates() {
        // x^3 = 2, y = x^2 : three points, one real; y = x^2 not quadratic.
        let o = MonomialOrder::GrevLex;
        let x = QPoly::var(2, 0, o);
        let y = QPoly::var(2, 1, o);
        let sol = enumerate_polys(
            &[&(&(&x * &x) * &x) - &QPoly::constant(2, int(2), o), &y - &(&x * &x)],
            2,
            &cfg(),
        )
        .unwrap();
        assert_eq!(sol.points.len(), 3);
        assert_eq!(real_points(&sol).unwrap().points.len(), 1);
        for p in &sol.points {
            for c in &p.coords {
                assert!(c.radius_sq <= pow2(-80));
            }
        }
    }

    #[test]
    fn positive_dimension_is_rejected() {
        let s = CanonicalSystem::from_equations(2, [Add(1, 1, 2)]).unwrap();
        assert!(matches!(enumerate_solutions(&s, &cfg()), Err(CanonError::NotZeroDimensional)));
        let s = CanonicalSystem::from_equations(1, [Unit(1), Add(1, 1, 1)]).unwrap();
        assert_eq!(enumerate_solutions(&s, &cfg()).unwrap().kind, SolutionKind::Inconsistent);
    }
}
