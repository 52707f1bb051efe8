//! Reduction of integer polynomial systems to canonical systems.
//!
//! [`compile`] follows the four-step construction (constants, monomials,
//! scaled monomials, partial sums); [`compile_coarse`] assigns a variable to
//! every polynomial with bounded coefficients and degrees.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::error::{CanonError, Result};
use crate::system::{Add, CanonicalEquation, CanonicalSystem, Mul, Unit, VarIndex};

/// Integer polynomial in a fixed number of variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigInt) -> Self {
        Self::monomial(nvars, vec![0; nvars], c)
    }

    /// `x_i` for a 0-based index.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(nvars, e, BigInt::one())
    }

    pub fn monomial(nvars: usize, exps: Vec<u32>, c: BigInt) -> Self {
        let mut p = Polynomial::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, BigInt> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> BigInt {
        self.terms
            .get(&vec![0; self.nvars])
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn coeff(&self, exps: &[u32]) -> BigInt {
        self.terms.get(exps).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    pub fn add(&self, o: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            let v = out.terms.remove(e).unwrap_or_else(BigInt::zero) + c;
            if !v.is_zero() {
                out.terms.insert(e.clone(), v);
            }
        }
        out
    }

    pub fn mul(&self, o: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let v = out.terms.remove(&e).unwrap_or_else(BigInt::zero) + ca * cb;
                if !v.is_zero() {
                    out.terms.insert(e, v);
                }
            }
        }
        out
    }

    pub fn eval(&self, x: &[BigRational]) -> BigRational {
        self.terms.iter().fold(BigRational::zero(), |acc, (e, c)| {
            let mut t = BigRational::from_integer(c.clone());
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= Pow::pow(xi, k);
                }
            }
            acc + t
        })
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest total degree first, then lexicographically.
        let mut terms: Vec<(&Vec<u32>, &BigInt)> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then(b.0.cmp(a.0))
        });
        for (idx, (e, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let mut factors: Vec<String> = Vec::new();
            let is_const = e.iter().all(|&k| k == 0);
            if !abs.is_one() || is_const {
                factors.push(abs.to_string());
            }
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => factors.push(format!("x{}", i + 1)),
                    _ => factors.push(format!("x{}^{k}", i + 1)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// A finite system `f_1 = ... = f_m = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolySystem {
    pub n: usize,
    pub polys: Vec<Polynomial>,
}

impl PolySystem {
    pub fn new(n: usize, polys: Vec<Polynomial>) -> Result<Self> {
        if polys.is_empty() {
            return Err(CanonError::InvalidArgument("system needs at least one polynomial".into()));
        }
        if polys.iter().any(|p| p.nvars != n) {
            return Err(CanonError::InvalidArgument("variable count mismatch".into()));
        }
        Ok(PolySystem { n, polys })
    }

    pub fn to_text(&self) -> String {
        self.polys.iter().map(|p| format!("{p}\n")).collect()
    }
}

fn parse_term(tok: &str, line: usize) -> Result<(Vec<(usize, u32)>, BigInt)> {
    let bad = |m: String| CanonError::Parse { line, message: m };
    let mut coeff = BigInt::one();
    let mut vars = Vec::new();
    for factor in tok.split('*') {
        let factor = factor.trim();
        if factor.is_empty() {
            return Err(bad(format!("empty factor in {tok:?}")));
        }
        if let Some(rest) = factor.strip_prefix('x') {
            let (idx, exp) = match rest.split_once('^') {
                Some((i, e)) => (i, e.trim().parse::<u32>().map_err(|_| bad(format!("bad exponent in {factor:?}")))?),
                None => (rest, 1),
            };
            let idx: usize = idx.trim().parse().map_err(|_| bad(format!("bad variable {factor:?}")))?;
            if idx == 0 {
                return Err(CanonError::IndexOutOfRange { line, index: 0, arity: 0 });
            }
            vars.push((idx, exp));
        } else {
            let c: BigInt = factor.parse().map_err(|_| bad(format!("bad coefficient {factor:?}")))?;
            coeff *= c;
        }
    }
    Ok((vars, coeff))
}

/// Parses one polynomial per line (`3*x1^2*x2 - 5*x3 + 7`); `#` starts a
/// comment line. The variable count is the largest index used unless given.
pub fn parse_poly_system(text: &str, nvars: Option<usize>) -> Result<PolySystem> {
    let mut raw: Vec<Vec<(Vec<(usize, u32)>, BigInt)>> = Vec::new();
    let mut max_idx = 0;
    for (no, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let t = t.strip_suffix("= 0").or_else(|| t.strip_suffix("=0")).unwrap_or(t);
        // Split on +/- while keeping the sign with the following term.
        let mut terms = Vec::new();
        let mut cur = String::new();
        let mut sign = 1i32;
        for ch in t.chars() {
            match ch {
                '+' | '-' => {
                    if !cur.trim().is_empty() {
                        terms.push((sign, cur.clone()));
                        cur.clear();
                        sign = 1;
                    }
                    if ch == '-' {
                        sign = -sign;
                    }
                }
                c if c.is_whitespace() => {}
                c => cur.push(c),
            }
        }
        if cur.trim().is_empty() {
            return Err(CanonError::Parse { line: no + 1, message: "dangling operator or empty line".into() });
        }
        terms.push((sign, cur));
        let mut poly = Vec::new();
        for (s, tok) in terms {
            let (vars, c) = parse_term(&tok, no + 1)?;
            for (i, _) in &vars {
                max_idx = max_idx.max(*i);
                if let Some(n) = nvars {
                    if *i > n {
                        return Err(CanonError::IndexOutOfRange { line: no + 1, index: *i, arity: n });
                    }
                }
            }
            poly.push((vars, c * s));
        }
        raw.push(poly);
    }
    let n = nvars.unwrap_or(max_idx).max(1);
    let polys = raw
        .into_iter()
        .map(|terms| {
            terms.into_iter().fold(Polynomial::zero(n), |acc, (vars, c)| {
                let mut e = vec![0u32; n];
                for (i, k) in vars {
                    e[i - 1] += k;
                }
                acc.add(&Polynomial::monomial(n, e, c))
            })
        })
        .collect();
    PolySystem::new(n, polys)
}

/// Coefficient bound `M`, equation count `m` and degree profile `d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Profile {
    #[serde(with = "crate::scalar::as_string")]
    pub max_coeff: BigInt,
    pub m: usize,
    pub degrees: Vec<u32>,
}

pub fn profile(sys: &PolySystem) -> Result<Profile> {
    let degrees: Vec<u32> = (0..sys.n)
        .map(|i| sys.polys.iter().map(|p| p.degree_in(i)).max().unwrap_or(0))
        .collect();
    if let Some(i) = degrees.iter().position(|&d| d == 0) {
        return Err(CanonError::DegreeZero(i + 1));
    }
    let max_coeff = sys
        .polys
        .iter()
        .map(Polynomial::max_abs_coeff)
        .max()
        .unwrap_or_else(BigInt::zero);
    Ok(Profile {
        max_coeff,
        m: sys.polys.len(),
        degrees,
    })
}

fn box_size(d: &[u32]) -> Result<u64> {
    d.iter().try_fold(1u64, |acc, &di| {
        acc.checked_mul(di as u64 + 1)
            .ok_or_else(|| CanonError::InvalidArgument("degree box too large".into()))
    })
}

/// `(2M+1)^((d_1+1)...(d_n+1))`.
pub fn count_t(m_coeff: &BigInt, d: &[u32], cfg: &Config) -> Result<BigInt> {
    let e = box_size(d)?;
    let base: BigInt = m_coeff * 2 + 1;
    let bits = e as u128 * base.bits() as u128;
    if bits > cfg.exponent_cap as u128 {
        return Err(CanonError::BoundOverflow {
            exponent: e.to_string(),
            cap: cfg.exponent_cap,
        });
    }
    Ok(Pow::pow(&base, e))
}

/// Per-step variable tallies of the refined construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NewVarCount {
    #[serde(with = "crate::scalar::as_string")]
    pub p: BigInt,
    /// Steps 1–4: constants, monomials, scaled monomials, partial sums.
    #[serde(serialize_with = "ser_bigints")]
    pub steps: [BigInt; 4],
}

fn ser_bigints<S: serde::Serializer>(v: &[BigInt; 4], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(4))?;
    for x in v {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

/// `p = 2(M-m) - n + (2m+1)(d_1+1)...(d_n+1)` with the four step counts,
/// which must sum to `p`.
pub fn count_new_vars(m_coeff: &BigInt, m: usize, n: usize, d: &[u32]) -> Result<NewVarCount> {
    let pi = BigInt::from(box_size(d)?);
    let mb = BigInt::from(m);
    let nb = BigInt::from(n);
    let p: BigInt = (m_coeff - &mb) * 2 - &nb + (&mb * 2 + 1) * &pi;
    let steps = [
        m_coeff * 2 + 1,
        &pi - 1 - &nb,
        &mb * (&pi - 1),
        &mb * (&pi - 1),
    ];
    let total: BigInt = steps.iter().sum();
    if total != p {
        return Err(CanonError::Accounting(format!("step counts sum to {total}, formula gives {p}")));
    }
    Ok(NewVarCount { p, steps })
}

/// What a canonical variable denotes as a polynomial in `x_1..x_n`.
#[derive(Clone, Debug)]
pub enum VarMeaning {
    Explicit(Vec<Polynomial>),
    /// Coarse construction: variable ids decode to coefficient vectors.
    Dense(DenseIndex),
}

/// Mixed-radix indexing of all polynomials with coefficients in `[-M, M]`
/// and degree box `d`.
#[derive(Clone, Debug)]
pub struct DenseIndex {
    n: usize,
    m: i64,
    box_monomials: Vec<Vec<u32>>,
    original_ids: Vec<u64>,
    total: u64,
}

impl DenseIndex {
    fn new(n: usize, m: i64, d: &[u32], total: u64) -> Self {
        let mut box_monomials = vec![Vec::new()];
        for &di in d {
            box_monomials = box_monomials
                .into_iter()
                .flat_map(|e: Vec<u32>| {
                    (0..=di).map(move |k| {
                        let mut e = e.clone();
                        e.push(k);
                        e
                    })
                })
                .collect();
        }
        let mut idx = DenseIndex {
            n,
            m,
            box_monomials,
            original_ids: Vec::new(),
            total,
        };
        let mut ids: Vec<u64> = (0..n).map(|i| idx.id_of(&Polynomial::var(n, i))).collect();
        ids.sort_unstable();
        idx.original_ids = ids;
        idx
    }

    fn digit_base(&self) -> u64 {
        2 * self.m as u64 + 1
    }

    fn id_of(&self, p: &Polynomial) -> u64 {
        let b = self.digit_base();
        self.box_monomials.iter().rev().fold(0u64, |acc, e| {
            let c = p.coeff(e).to_i64().unwrap_or(0);
            acc * b + (c + self.m) as u64
        })
    }

    fn decode(&self, mut id: u64) -> Polynomial {
        let b = self.digit_base();
        let mut p = Polynomial::zero(self.n);
        for e in &self.box_monomials {
            let c = (id % b) as i64 - self.m;
            id /= b;
            if c != 0 {
                p.terms.insert(e.clone(), BigInt::from(c));
            }
        }
        p
    }

    /// Canonical variable index of polynomial id.
    fn var_of_id(&self, id: u64) -> VarIndex {
        if self.original_ids.contains(&id) {
            // Original x_i keeps index i.
            let p = self.decode(id);
            let e = p.terms.keys().next().unwrap();
            return e.iter().position(|&k| k == 1).unwrap() + 1;
        }
        let below = self.original_ids.iter().filter(|&&o| o < id).count() as u64;
        (id - below) as usize + self.n + 1
    }

    fn id_of_var(&self, v: VarIndex) -> u64 {
        if v <= self.n {
            return self.id_of(&Polynomial::var(self.n, v - 1));
        }
        // Invert var_of_id: the k-th non-original id.
        let mut id = (v - self.n - 1) as u64;
        for &o in &self.original_ids {
            if o <= id {
                id += 1;
            }
        }
        id
    }

    pub fn var_of(&self, p: &Polynomial) -> VarIndex {
        self.var_of_id(self.id_of(p))
    }
}

impl VarMeaning {
    pub fn len(&self) -> usize {
        match self {
            VarMeaning::Explicit(v) => v.len(),
            VarMeaning::Dense(d) => d.total as usize,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Polynomial denoted by variable `v` (1-based).
    pub fn get(&self, v: VarIndex) -> Polynomial {
        match self {
            VarMeaning::Explicit(list) => list[v - 1].clone(),
            VarMeaning::Dense(d) => d.decode(d.id_of_var(v)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompileCounts {
    /// New variables by the closed-form count.
    #[serde(with = "crate::scalar::as_string")]
    pub p: BigInt,
    /// Variables actually emitted.
    pub total_vars: usize,
    /// Variables after merging those that denote the same polynomial.
    pub dedup_vars: usize,
    #[serde(serialize_with = "ser_bigints")]
    pub steps: [BigInt; 4],
}

#[derive(Clone, Debug)]
pub struct CompilationResult {
    pub canonical: CanonicalSystem,
    pub var_meaning: VarMeaning,
    /// `q[j]` is the variable holding `f_{j+1}`.
    pub q: Vec<VarIndex>,
    pub counts: CompileCounts,
}

impl CompilationResult {
    /// The canonical text format, preceded by comments naming each variable.
    pub fn to_annotated_text(&self) -> String {
        let mut out = String::new();
        if let VarMeaning::Explicit(list) = &self.var_meaning {
            for (i, p) in list.iter().enumerate() {
                out.push_str(&format!("# x{} := {}\n", i + 1, p));
            }
        }
        for (j, q) in self.q.iter().enumerate() {
            out.push_str(&format!("# f{} is x{}\n", j + 1, q));
        }
        out.push_str(&self.canonical.to_text());
        out
    }
}

/// Options for [`compile_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CompileOptions {
    /// Merge variables that denote the same polynomial.
    pub dedup: bool,
    /// Also emit every identity among the variables (tiny inputs only).
    pub full_h: bool,
}

/// Largest variable count for which `full_h` enumerates all identities.
pub const FULL_H_CAP: usize = 64;

struct Builder {
    meaning: Vec<Polynomial>,
    equations: Vec<CanonicalEquation>,
    dedup: bool,
    seen: HashMap<Polynomial, VarIndex>,
}

impl Builder {
    fn new_var(&mut self, p: Polynomial) -> (VarIndex, bool) {
        if self.dedup {
            if let Some(&v) = self.seen.get(&p) {
                return (v, false);
            }
        }
        self.meaning.push(p.clone());
        let v = self.meaning.len();
        self.seen.entry(p).or_insert(v);
        (v, true)
    }

    fn define(&mut self, p: Polynomial, eq: impl FnOnce(VarIndex) -> CanonicalEquation) -> VarIndex {
        let (v, fresh) = self.new_var(p);
        if fresh || self.dedup {
            self.equations.push(eq(v));
        }
        v
    }
}

fn lex_box(d: &[u32]) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = vec![Vec::new()];
    for &di in d {
        out = out
            .into_iter()
            .flat_map(|e| {
                (0..=di).map(move |k| {
                    let mut e = e.clone();
                    e.push(k);
                    e
                })
            })
            .collect();
    }
    out.sort();
    out.retain(|e| e.iter().any(|&k| k > 0));
    out
}

/// The refined construction, one variable per item of Steps 1–4.
pub fn compile(sys: &PolySystem) -> Result<CompilationResult> {
    compile_with(sys, CompileOptions::default())
}

pub fn compile_with(sys: &PolySystem, opts: CompileOptions) -> Result<CompilationResult> {
    let prof = profile(sys)?;
    let n = sys.n;
    let count = count_new_vars(&prof.max_coeff, prof.m, n, &prof.degrees)?;
    let m_coeff = prof
        .max_coeff
        .to_i64()
        .ok_or_else(|| CanonError::InvalidArgument("coefficient bound too large".into()))?;
    let mut b = Builder {
        meaning: (0..n).map(|i| Polynomial::var(n, i)).collect(),
        equations: Vec::new(),
        dedup: opts.dedup,
        seen: HashMap::new(),
    };
    for i in 0..n {
        b.seen.insert(Polynomial::var(n, i), i + 1);
    }
    let cpoly = |c: i64| Polynomial::constant(n, BigInt::from(c));

    // Step 1: constants -M..M, defined through 0 and 1.
    let mut cvar: BTreeMap<i64, VarIndex> = BTreeMap::new();
    let mut pending: Vec<(i64, VarIndex)> = Vec::new();
    for c in -m_coeff..=m_coeff {
        let (v, fresh) = b.new_var(cpoly(c));
        cvar.insert(c, v);
        if fresh || b.dedup {
            pending.push((c, v));
        }
    }
    for (c, v) in pending {
        let eq = match c {
            0 => Add(v, v, v),
            1 => Unit(v),
            c if c > 1 => CanonicalEquation::add(cvar[&(c - 1)], cvar[&1], v),
            c => CanonicalEquation::add(v, cvar[&-c], cvar[&0]),
        };
        b.equations.push(eq);
    }

    // Step 2: monomials of degree >= 2, each the ⪯-largest proper divisor
    // times one original variable.
    let lbox = lex_box(&prof.degrees);
    let mut mono: HashMap<Vec<u32>, VarIndex> = HashMap::new();
    for i in 0..n {
        let mut e = vec![0u32; n];
        e[i] = 1;
        mono.insert(e, i + 1);
    }
    for e in &lbox {
        if e.iter().sum::<u32>() < 2 {
            continue;
        }
        let (k, pred) = (0..n)
            .filter(|&k| e[k] > 0)
            .map(|k| {
                let mut p = e.clone();
                p[k] -= 1;
                (k, p)
            })
            .max_by(|a, b| a.1.cmp(&b.1))
            .unwrap();
        let pv = mono[&pred];
        let v = b.define(Polynomial::monomial(n, e.clone(), BigInt::one()), |v| {
            CanonicalEquation::mul(pv, k + 1, v)
        });
        mono.insert(e.clone(), v);
    }

    // Step 3: scaled monomials a_j(s) x^s (zero coefficients included).
    let mut scaled: Vec<Vec<VarIndex>> = Vec::new();
    for f in &sys.polys {
        let mut row = Vec::new();
        for e in &lbox {
            let a = f.coeff(e);
            let av = cvar[&a.to_i64().unwrap()];
            let mv = mono[e];
            let v = b.define(Polynomial::monomial(n, e.clone(), a), |v| {
                CanonicalEquation::mul(av, mv, v)
            });
            row.push(v);
        }
        scaled.push(row);
    }

    // Step 4: partial sums walking ⪯.
    let mut q = Vec::new();
    for (j, f) in sys.polys.iter().enumerate() {
        let a0 = f.constant_term();
        let mut acc_var = cvar[&a0.to_i64().unwrap()];
        let mut acc = Polynomial::constant(n, a0);
        for (idx, e) in lbox.iter().enumerate() {
            acc = acc.add(&Polynomial::monomial(n, e.clone(), f.coeff(e)));
            let sv = scaled[j][idx];
            let prev = acc_var;
            acc_var = b.define(acc.clone(), |v| CanonicalEquation::add(prev, sv, v));
        }
        if acc != *f {
            return Err(CanonError::Accounting(format!("partial sums of f{} do not reach it", j + 1)));
        }
        q.push(acc_var);
    }
    for &qv in &q {
        b.equations.push(Add(qv, qv, qv));
    }

    let total = b.meaning.len();
    let expected = BigInt::from(n) + &count.p;
    if !opts.dedup && BigInt::from(total) != expected {
        return Err(CanonError::Accounting(format!(
            "emitted {total} variables, formula gives n + p = {expected}"
        )));
    }
    let dedup_vars = {
        let mut uniq: Vec<&Polynomial> = b.meaning.iter().collect();
        uniq.sort();
        uniq.dedup();
        uniq.len()
    };
    let mut canonical = CanonicalSystem::from_equations(total, b.equations)?;
    if opts.full_h {
        for e in all_identities(&b.meaning)? {
            canonical.insert(e)?;
        }
    }
    Ok(CompilationResult {
        canonical,
        var_meaning: VarMeaning::Explicit(b.meaning),
        q,
        counts: CompileCounts {
            p: count.p,
            total_vars: total,
            dedup_vars,
            steps: count.steps,
        },
    })
}

/// Every canonical equation that is a polynomial identity among `meaning`.
pub fn all_identities(meaning: &[Polynomial]) -> Result<Vec<CanonicalEquation>> {
    let k = meaning.len();
    if k > FULL_H_CAP {
        return Err(CanonError::InvalidArgument(format!(
            "full identity family needs at most {FULL_H_CAP} variables, got {k}"
        )));
    }
    let n = meaning.first().map_or(0, Polynomial::nvars);
    let one = Polynomial::constant(n, BigInt::one());
    let index: HashMap<&Polynomial, Vec<VarIndex>> = meaning.iter().enumerate().fold(
        HashMap::new(),
        |mut acc, (i, p)| {
            acc.entry(p).or_default().push(i + 1);
            acc
        },
    );
    let mut out = Vec::new();
    for (i, p) in meaning.iter().enumerate() {
        if *p == one {
            out.push(Unit(i + 1));
        }
    }
    for i in 0..k {
        for j in i..k {
            let s = meaning[i].add(&meaning[j]);
            if let Some(ks) = index.get(&s) {
                out.extend(ks.iter().map(|&t| Add(i + 1, j + 1, t)));
            }
            let pr = meaning[i].mul(&meaning[j]);
            if let Some(ks) = index.get(&pr) {
                out.extend(ks.iter().map(|&t| Mul(i + 1, j + 1, t)));
            }
        }
    }
    Ok(out)
}

/// The coarse construction: one variable per polynomial with coefficients
/// in `[-M, M]` and degree at most `d_i` in `x_i`.
pub fn compile_coarse(sys: &PolySystem, cfg: &Config) -> Result<CompilationResult> {
    let prof = profile(sys)?;
    let n = sys.n;
    let card = count_t(&prof.max_coeff, &prof.degrees, cfg).map_err(|_| CanonError::CoarseTooLarge {
        count: "beyond the exponent cap".into(),
        cap: cfg.coarse_cap,
    })?;
    if card > BigInt::from(cfg.coarse_cap) {
        return Err(CanonError::CoarseTooLarge {
            count: card.to_string(),
            cap: cfg.coarse_cap,
        });
    }
    let total = card.to_u64().unwrap();
    let m = prof.max_coeff.to_i64().unwrap();
    let idx = DenseIndex::new(n, m, &prof.degrees, total);
    let zero_var = idx.var_of(&Polynomial::zero(n));
    let one_var = idx.var_of(&Polynomial::constant(n, BigInt::one()));

    let equations: Vec<CanonicalEquation> = (0..total)
        .into_par_iter()
        .filter_map(|id| {
            let p = idx.decode(id);
            let v = idx.var_of_id(id);
            if v <= n {
                return None;
            }
            let terms: Vec<(&Vec<u32>, &BigInt)> = p.terms.iter().collect();
            let eq = match terms.len() {
                0 => Add(zero_var, zero_var, zero_var),
                1 => {
                    let (e, c) = terms[0];
                    let is_const = e.iter().all(|&k| k == 0);
                    if is_const {
                        let c = c.to_i64().unwrap();
                        if c == 1 {
                            Unit(v)
                        } else if c > 1 {
                            let prev = idx.var_of(&Polynomial::constant(n, BigInt::from(c - 1)));
                            CanonicalEquation::add(prev, one_var, v)
                        } else {
                            let pos = idx.var_of(&Polynomial::constant(n, BigInt::from(-c)));
                            CanonicalEquation::add(v, pos, zero_var)
                        }
                    } else if c.is_one() {
                        // Monomial: largest proper divisor times a variable.
                        let (k, pred) = (0..n)
                            .filter(|&k| e[k] > 0)
                            .map(|k| {
                                let mut q = e.clone();
                                q[k] -= 1;
                                (k, q)
                            })
                            .max_by(|a, b| a.1.cmp(&b.1))
                            .unwrap();
                        let pv = idx.var_of(&Polynomial::monomial(n, pred, BigInt::one()));
                        CanonicalEquation::mul(pv, k + 1, v)
                    } else {
                        let cv = idx.var_of(&Polynomial::constant(n, c.clone()));
                        let mv = idx.var_of(&Polynomial::monomial(n, e.clone(), BigInt::one()));
                        CanonicalEquation::mul(cv, mv, v)
                    }
                }
                _ => {
                    // Split off the lexicographically last term.
                    let (e, c) = terms[terms.len() - 1];
                    let last = Polynomial::monomial(n, e.clone(), c.clone());
                    let mut rest = p.clone();
                    rest.terms.remove(e);
                    CanonicalEquation::add(idx.var_of(&rest), idx.var_of(&last), v)
                }
            };
            Some(eq)
        })
        .collect();
    let q: Vec<VarIndex> = sys.polys.iter().map(|f| idx.var_of(f)).collect();
    let mut canonical = CanonicalSystem::from_equations(total as usize, equations)?;
    for &qv in &q {
        canonical.insert(Add(qv, qv, qv))?;
    }
    let count = count_new_vars(&prof.max_coeff, prof.m, n, &prof.degrees)?;
    Ok(CompilationResult {
        canonical,
        var_meaning: VarMeaning::Dense(idx),
        q,
        counts: CompileCounts {
            p: count.p,
            total_vars: total as usize,
            dedup_vars: total as usize,
            steps: count.steps,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub trials: usize,
    pub seed: u64,
    pub identities_ok: bool,
    pub structural_ok: bool,
    pub trials_ok: bool,
    pub passed: bool,
    /// First failure with its witnessing assignment.
    pub failure: Option<String>,
}

fn is_q_equation(e: &CanonicalEquation, q: &[VarIndex]) -> bool {
    matches!(*e, Add(i, j, k) if i == j && j == k && q.contains(&i))
}

/// Forward propagation from `x_1..x_n`: every variable must be forced by a
/// chain of defining equations.
pub fn structural_check(result: &CompilationResult, n: usize) -> std::result::Result<(), VarIndex> {
    let total = result.canonical.arity();
    let mut known = vec![false; total + 1];
    for k in known.iter_mut().take(n + 1).skip(1) {
        *k = true;
    }
    let eqs: Vec<&CanonicalEquation> = result
        .canonical
        .equations()
        .filter(|e| match e {
            // A q variable merged with the zero constant keeps `z + z = z` as its definition.
            Add(i, _, _) if is_q_equation(e, &result.q) => *i <= n || result.var_meaning.get(*i).is_zero(),
            _ => true,
        })
        .collect();
    loop {
        let mut changed = false;
        for e in &eqs {
            let newly = match **e {
                Unit(i) => Some(i),
                Add(i, j, k) if i == j && j == k => Some(i),
                Add(i, j, k) => match (known[i], known[j], known[k]) {
                    (true, true, false) => Some(k),
                    (true, false, true) => Some(j),
                    (false, true, true) => Some(i),
                    _ => None,
                },
                Mul(i, j, k) => (known[i] && known[j]).then_some(k),
            };
            if let Some(v) = newly {
                if !known[v] {
                    known[v] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    match (1..=total).find(|&v| !known[v]) {
        Some(v) => Err(v),
        None => Ok(()),
    }
}

/// Symbolic check that each equation is an identity under `var_meaning`.
fn identity_check(result: &CompilationResult) -> std::result::Result<(), CanonicalEquation> {
    let eqs: Vec<CanonicalEquation> = result
        .canonical
        .equations()
        .filter(|e| !is_q_equation(e, &result.q))
        .copied()
        .collect();
    let n = result.var_meaning.get(1).nvars();
    let one = Polynomial::constant(n, BigInt::one());
    let bad = eqs.par_iter().find_any(|e| {
        let g = |v: VarIndex| result.var_meaning.get(v);
        let ok = match **e {
            Unit(i) => g(i) == one,
            Add(i, j, k) => g(i).add(&g(j)) == g(k),
            Mul(i, j, k) => g(i).mul(&g(j)) == g(k),
        };
        !ok
    });
    match bad {
        Some(e) => Err(*e),
        None => Ok(()),
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let num: i64 = rng.gen_range(-100..=100);
    let den: i64 = rng.gen_range(1..=100);
    BigRational::new(num.into(), den.into())
}

/// Checks equivalence of `sys` and its compilation: symbolic identities,
/// structural determination, and `trials` random rational points (trial `t`
/// draws from seed `seed ^ t`).
pub fn verify_compilation(
    sys: &PolySystem,
    result: &CompilationResult,
    trials: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if trials == 0 {
        return Err(CanonError::InvalidArgument("trials must be at least 1".into()));
    }
    let n = sys.n;
    let mut failure = None;
    let identities_ok = match identity_check(result) {
        Ok(()) => true,
        Err(e) => {
            failure = Some(format!("equation {e} is not a polynomial identity"));
            false
        }
    };
    let structural_ok = match structural_check(result, n) {
        Ok(()) => true,
        Err(v) => {
            failure.get_or_insert(format!("x{v} is not determined by x1..x{n} through the equations"));
            false
        }
    };
    let total = result.canonical.arity();
    let meanings: Vec<Polynomial> = (1..=total).map(|v| result.var_meaning.get(v)).collect();
    let eqs: Vec<CanonicalEquation> = result.canonical.equations().copied().collect();
    let outcome: Vec<Option<String>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ t as u64);
            let x: Vec<BigRational> = (0..n).map(|_| random_rational(&mut rng)).collect();
            let values: Vec<BigRational> = meanings.iter().map(|p| p.eval(&x)).collect();
            let show = || {
                x.iter()
                    .map(crate::scalar::format_rational)
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            for e in &eqs {
                if !is_q_equation(e, &result.q) && !e.holds_rational(&values) {
                    return Some(format!("trial {t}: {e} fails at x = ({})", show()));
                }
            }
            let canonical_ok = eqs.iter().all(|e| e.holds_rational(&values));
            let roots = sys.polys.iter().all(|f| f.eval(&x).is_zero());
            (canonical_ok != roots).then(|| {
                format!(
                    "trial {t}: canonical system {} but polynomials {} at x = ({})",
                    if canonical_ok { "holds" } else { "fails" },
                    if roots { "vanish" } else { "do not vanish" },
                    show()
                )
            })
        })
        .collect();
    let first = outcome.into_iter().flatten().next();
    let trials_ok = first.is_none();
    if let Some(f) = first {
        failure.get_or_insert(f);
    }
    Ok(VerificationReport {
        trials,
        seed,
        identities_ok,
        structural_ok,
        trials_ok,
        passed: identities_ok && structural_ok && trials_ok,
        failure,
    })
}

/// Random system with `n` variables, `m` polynomials, degrees at most
/// `max_deg` and coefficients in `[-max_coeff, max_coeff]`; every variable
/// occurs.
pub fn random_poly_system(
    n: usize,
    m: usize,
    max_deg: u32,
    max_coeff: i64,
    rng: &mut impl Rng,
) -> PolySystem {
    loop {
        let polys: Vec<Polynomial> = (0..m)
            .map(|_| {
                let terms = rng.gen_range(1..=4);
                (0..terms).fold(Polynomial::zero(n), |acc, _| {
                    let e: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=max_deg)).collect();
                    let c = rng.gen_range(-max_coeff..=max_coeff);
                    acc.add(&Polynomial::monomial(n, e, BigInt::from(c)))
                })
            })
            .collect();
        let sys = PolySystem { n, polys };
        if profile(&sys).is_ok() {
            return sys;
        }
    }
}

/// Gcd of the coefficients (content) of a polynomial.
pub fn content(p: &Polynomial) -> BigInt {
    p.terms.values().fold(BigInt::zero(), |acc, c| acc.gcd(c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(text: &str) -> PolySystem {
        parse_poly_system(text, None).unwrap()
    }

    #[test]
    fn parsing_and_display() {
        let s = sys("3*x1^2*x2 - 5*x3 + 7");
        assert_eq!(s.n, 3);
        assert_eq!(s.polys[0].to_string(), "3*x1^2*x2 - 5*x3 + 7");
        let s = sys("# comment\n-x1 + x2*x1\nx2 - 1 = 0");
        assert_eq!(s.polys.len(), 2);
        assert_eq!(s.polys[0].to_string(), "x1*x2 - x1");
        assert!(parse_poly_system("x1 + ", None).is_err());
        assert!(parse_poly_system("x3 + 1", Some(2)).is_err());
    }

    #[test]
    fn profiles() {
        let p = profile(&sys("x1^2 - 2")).unwrap();
        assert_eq!((p.max_coeff, p.m, p.degrees), (BigInt::from(2), 1, vec![2]));
        let p = profile(&sys("x1 + x2 - 1\nx1*x2 - 1")).unwrap();
        assert_eq!((p.max_coeff, p.m, p.degrees), (BigInt::from(1), 2, vec![1, 1]));
        let p = profile(&sys("3*x1^2 + x2 - 5")).unwrap();
        assert_eq!((p.max_coeff, p.degrees), (BigInt::from(5), vec![2, 1]));
        let e = profile(&parse_poly_system("x1 - 1", Some(2)).unwrap()).unwrap_err();
        assert!(e.to_string().contains("variable degree zero"));
    }

    #[test]
    fn counts() {
        let cfg = Config::default();
        assert_eq!(count_t(&BigInt::from(1), &[1], &cfg).unwrap(), BigInt::from(9));
        assert_eq!(count_t(&BigInt::from(2), &[2], &cfg).unwrap(), BigInt::from(125));
        assert_eq!(count_t(&BigInt::from(1), &[1, 1], &cfg).unwrap(), BigInt::from(81));
        let c = count_new_vars(&BigInt::from(2), 1, 1, &[2]).unwrap();
        assert_eq!(c.p, BigInt::from(10));
        assert_eq!(c.steps, [5, 1, 2, 2].map(BigInt::from));
        let c = count_new_vars(&BigInt::from(1), 1, 2, &[1, 1]).unwrap();
        assert_eq!(c.p, BigInt::from(10));
    }

    #[test]
    fn compile_square_root_of_two() {
        let s = sys("x1^2 - 2");
        let r = compile(&s).unwrap();
        assert_eq!(r.canonical.arity(), 11);
        assert_eq!(r.counts.total_vars, 11);
        let k = (1..=11)
            .find(|&v| r.var_meaning.get(v) == Polynomial::monomial(1, vec![2], BigInt::one()))
            .unwrap();
        assert!(r.canonical.contains(&Mul(1, 1, k)));
        let q = r.q[0];
        assert!(r.canonical.contains(&Add(q, q, q)));
        // At x1 = 3 the monomial is 9 and the final sum 7.
        let x = [BigRational::from_integer(3.into())];
        assert_eq!(r.var_meaning.get(k).eval(&x), BigRational::from_integer(9.into()));
        assert_eq!(r.var_meaning.get(q).eval(&x), BigRational::from_integer(7.into()));
        let rep = verify_compilation(&s, &r, 100, 1).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn compile_two_equations() {
        let s = sys("x1 + x2 - 1\nx1*x2 - 1");
        let r = compile(&s).unwrap();
        assert_eq!(r.counts.total_vars, 2 + 16);
        let qs = r
            .canonical
            .equations()
            .filter(|e| matches!(e, Add(i, j, k) if i == j && j == k && r.q.contains(i)))
            .count();
        assert_eq!(qs, 2);
        assert!((1..=18).any(|v| r.var_meaning.get(v) == Polynomial::monomial(2, vec![1, 1], BigInt::one())));
        assert!(verify_compilation(&s, &r, 50, 3).unwrap().passed);
    }

    #[test]
    fn rational_root_satisfies_compilation() {
        // x1 = 1/2 solves 2 x1 - 1.
        let s = sys("2*x1 - 1");
        let r = compile(&s).unwrap();
        let x = [BigRational::new(1.into(), 2.into())];
        let values: Vec<BigRational> = (1..=r.canonical.arity()).map(|v| r.var_meaning.get(v).eval(&x)).collect();
        assert!(r.canonical.equations().all(|e| e.holds_rational(&values)));
        let x = [BigRational::new(1.into(), 3.into())];
        let values: Vec<BigRational> = (1..=r.canonical.arity()).map(|v| r.var_meaning.get(v).eval(&x)).collect();
        assert!(!r.canonical.equations().all(|e| e.holds_rational(&values)));
    }

    #[test]
    fn tampering_is_detected() {
        let s = sys("x1^2 - 2");
        let mut r = compile(&s).unwrap();
        let victim = *r.canonical.equations().find(|e| e.is_mul()).unwrap();
        r.canonical.remove(&victim);
        let rep = verify_compilation(&s, &r, 10, 1).unwrap();
        assert!(!rep.structural_ok);
        assert!(!rep.passed);
    }

    #[test]
    fn dedup_and_full_h() {
        let s = sys("x1^2 - 2");
        let r = compile_with(&s, CompileOptions { dedup: true, full_h: false }).unwrap();
        assert!(r.counts.total_vars < 11);
        assert_eq!(r.counts.p, BigInt::from(10));
        assert!(verify_compilation(&s, &r, 30, 2).unwrap().passed);
        let r = compile_with(&s, CompileOptions { dedup: false, full_h: true }).unwrap();
        assert!(verify_compilation(&s, &r, 30, 2).unwrap().passed);
    }

    #[test]
    fn coarse_construction() {
        let cfg = Config::default();
        let s = sys("x1^2 - 2");
        let r = compile_coarse(&s, &cfg).unwrap();
        assert_eq!(r.canonical.arity(), 125);
        assert!(verify_compilation(&s, &r, 20, 5).unwrap().passed);
        let r = compile_coarse(&sys("x1 - 1"), &cfg).unwrap();
        assert_eq!(r.canonical.arity(), 9);
        assert!(verify_compilation(&sys("x1 - 1"), &r, 20, 5).unwrap().passed);
        let e = compile_coarse(&sys("3*x1^3*x2^3 + x1 + x2"), &cfg).unwrap_err();
        assert!(e.to_string().contains("coarse construction too large"));
    }

    #[test]
    fn random_systems_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let s = random_poly_system(2, 2, 2, 3, &mut rng);
            let r = compile(&s).unwrap();
            let prof = profile(&s).unwrap();
            let c = count_new_vars(&prof.max_coeff, prof.m, s.n, &prof.degrees).unwrap();
            assert_eq!(BigInt::from(r.counts.total_vars), c.p + s.n);
            assert!(verify_compilation(&s, &r, 20, 9).unwrap().passed);
        }
    }
}
