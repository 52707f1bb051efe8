//! Systems drawn from the full universe `E_n`: the two-variable reduction for
//! three variables, small-n catalogs of maximal systems, witness checks and
//! the greedy randomized probes.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::groebner::{buchberger, radical_contains, GroebnerBasis};
use crate::algebra::poly::{Monomial, MonomialOrder};
use crate::algebra::solve::{solve_from_basis, solution_set, solution_set_polys, sort_points};
use crate::bounds::{chain_bound_with, tower_bound_with};
use crate::config::Config;
use crate::error::{CanonError, Result};
use crate::linear::combinations;
use crate::report::{ProbeReport, TrialLog, Violation};
use crate::scalar::{format_rational, int, rat};
use crate::system::{satisfied_subset, universe, Add, CanonicalEquation, CanonicalSystem, Mul, Unit, Universe, VarIndex};
use crate::value::QuadExt;
use crate::{QPoly, SolutionKind, SolutionPoint, SolutionSet};

const ORDER: MonomialOrder = MonomialOrder::GrevLex;

/// Field the solutions are taken from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    #[serde(rename = "R")]
    Real,
    #[serde(rename = "C")]
    Complex,
}

impl Domain {
    pub fn admits(&self, p: &SolutionPoint) -> bool {
        match self {
            Domain::Real => p.real,
            Domain::Complex => true,
        }
    }
}

impl FromStr for Domain {
    type Err = CanonError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R" | "r" | "real" => Ok(Domain::Real),
            "C" | "c" | "complex" => Ok(Domain::Complex),
            _ => Err(CanonError::InvalidArgument(format!("unknown domain {s:?} (expected R or C)"))),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Real => "R",
            Domain::Complex => "C",
        })
    }
}

fn var(n: usize, i: usize) -> QPoly {
    QPoly::var(n, i, ORDER)
}

fn constant(n: usize, c: i64) -> QPoly {
    QPoly::constant(n, int(c), ORDER)
}

/// Copies `p` into `nvars` variables, shifting every index by `offset`.
fn embed(p: &QPoly, nvars: usize, offset: usize) -> QPoly {
    let terms = p
        .terms()
        .iter()
        .map(|(m, c)| {
            let mut e = vec![0u16; nvars];
            for i in 0..p.nvars() {
                e[i + offset] = m.exp(i);
            }
            (Monomial::from_exponents(&e), c.clone())
        })
        .collect();
    QPoly::from_terms(nvars, ORDER, terms)
}

/// Sets `x1 = 1` and renumbers the remaining variables from zero.
fn fix_first(p: &QPoly) -> QPoly {
    let n = p.nvars();
    let s = p.substitute(0, &BigRational::one());
    let terms = s
        .terms()
        .iter()
        .map(|(m, c)| (Monomial::from_exponents(&m.exponents(n)[1..]), c.clone()))
        .collect();
    QPoly::from_terms(n - 1, ORDER, terms)
}

fn show_point(p: &SolutionPoint) -> Vec<String> {
    p.coords
        .iter()
        .map(|c| match &c.exact {
            Some(v) => v.to_string(),
            None => {
                let z = c.approx();
                if c.real {
                    format!("~{:.12}", z.re)
                } else {
                    format!("~{:.12}{:+.12}i", z.re, z.im)
                }
            }
        })
        .collect()
}

fn show_values(v: &[QuadExt]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

/// Largest coordinate modulus, exact when that coordinate is real and exact.
fn norm_string(p: &SolutionPoint, coords: std::ops::Range<usize>) -> String {
    let approx = p.approx();
    let Some(k) = coords.clone().max_by(|&a, &b| approx[a].norm().total_cmp(&approx[b].norm())) else {
        return "0".into();
    };
    match &p.coords[k].exact {
        Some(v) if v.is_real() => {
            if v.real_sign() == Some(-1) {
                v.neg().to_string()
            } else {
                v.to_string()
            }
        }
        _ => format!("{:.12}", approx[k].norm()),
    }
}

fn max_modulus_approx(p: &SolutionPoint, coords: std::ops::Range<usize>) -> f64 {
    p.approx()[coords].iter().map(|z| z.norm()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// The sixteen two-variable equations

/// One of the sixteen equations in `x = x2`, `y = x3` left after fixing
/// `x1 = 1` in `E_3` and discarding the equations that are contradictory,
/// trivial or force coincident values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ReducedEquation {
    /// Position in the table, from 1.
    pub index: usize,
    pub label: &'static str,
    /// The equation of `E_3` it comes from.
    pub source: CanonicalEquation,
}

const TABLE: [(&str, CanonicalEquation); 16] = [
    ("x=2", Add(1, 1, 2)),
    ("y=2", Add(1, 1, 3)),
    ("x=1/2", Add(2, 2, 1)),
    ("y=1/2", Add(3, 3, 1)),
    ("x=0", Add(2, 2, 2)),
    ("y=0", Add(3, 3, 3)),
    ("x*x=y", Mul(2, 2, 3)),
    ("x*x=1", Mul(2, 2, 1)),
    ("x+x=y", Add(2, 2, 3)),
    ("y*y=x", Mul(3, 3, 2)),
    ("y*y=1", Mul(3, 3, 1)),
    ("y+y=x", Add(3, 3, 2)),
    ("x*y=1", Mul(2, 3, 1)),
    ("x+y=1", Add(2, 3, 1)),
    ("x+1=y", Add(1, 2, 3)),
    ("y+1=x", Add(1, 3, 2)),
];

pub fn reduced_table() -> Vec<ReducedEquation> {
    TABLE
        .iter()
        .enumerate()
        .map(|(i, &(label, source))| ReducedEquation {
            index: i + 1,
            label,
            source,
        })
        .collect()
}

impl ReducedEquation {
    /// The equation as a polynomial in `x`, `y`.
    pub fn poly(&self) -> QPoly {
        fix_first(&self.source.to_poly(3, ORDER))
    }
}

/// What becomes of an equation of `E_3` once `x1 = 1` is adopted and only
/// solutions with pairwise different `1, x2, x3` are of interest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rewrite {
    /// `x1 = 1` itself.
    Assumed,
    /// Holds identically under `x1 = 1`.
    Trivial,
    /// Impossible under `x1 = 1`.
    Contradictory,
    /// Forces `x2 = 1`, `x3 = 1` or `x2 = x3`.
    Collapsing,
    /// Equivalent to a table entry, where `x_k != 1` if `unless_one` is set.
    Table { index: usize, unless_one: Option<VarIndex> },
}

fn table_index(eq: CanonicalEquation) -> usize {
    TABLE
        .iter()
        .position(|&(_, e)| e == eq)
        .map(|i| i + 1)
        .expect("remaining equations are table entries")
}

/// Table entry `x_v = 0`.
fn zero_entry(v: VarIndex) -> usize {
    if v == 2 {
        5
    } else {
        6
    }
}

pub fn rewrite(eq: CanonicalEquation) -> Result<Rewrite> {
    if eq.max_index() > 3 {
        return Err(CanonError::InvalidArgument(format!("{eq} is not an equation of E_3")));
    }
    let table = |index| Rewrite::Table { index, unless_one: None };
    Ok(match eq {
        Unit(1) => Rewrite::Assumed,
        Unit(_) => Rewrite::Collapsing,
        Add(1, 1, 1) => Rewrite::Contradictory,
        Add(1, 1, k) => table(k - 1),
        Add(1, j, k) if j == k => Rewrite::Contradictory,
        Add(i, j, 1) if i == j => table(i + 1),
        Add(i, j, k) if k == j => table(zero_entry(i)),
        Add(i, j, k) if k == i => table(zero_entry(j)),
        Mul(1, j, k) if j == k => Rewrite::Trivial,
        Mul(1, _, _) => Rewrite::Collapsing,
        Mul(i, j, k) if k == i => Rewrite::Table {
            index: zero_entry(i),
            unless_one: Some(j),
        },
        Mul(i, j, k) if k == j => Rewrite::Table {
            index: zero_entry(j),
            unless_one: Some(i),
        },
        e => table(table_index(e)),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RewriteCheck {
    pub equation: CanonicalEquation,
    pub rewrite: Rewrite,
    pub verified: bool,
}

/// Checks every rewrite of `E_3` on the solver: equal solution sets
/// (outside `x_k = 1` where required), inconsistency, triviality or
/// collapse, as claimed.
pub fn verify_rewrites(cfg: &Config) -> Result<Vec<RewriteCheck>> {
    // Variables x1, x2, x3 and an auxiliary w for inequations.
    let n = 4;
    let unit = &var(n, 0) - &constant(n, 1);
    let mut out = Vec::new();
    for eq in universe(3, Universe::E) {
        let rw = rewrite(eq)?;
        let e = embed(&eq.to_poly(3, ORDER), n, 0);
        let verified = match rw {
            Rewrite::Assumed | Rewrite::Trivial => radical_contains(&[unit.clone()], &e, cfg.gb_budget)?,
            Rewrite::Contradictory => buchberger(&[unit.clone(), e], n, ORDER, cfg.gb_budget)?.is_one(),
            Rewrite::Collapsing => {
                let one = constant(n, 1);
                let f = &(&(&var(n, 1) - &one) * &(&var(n, 2) - &one)) * &(&var(n, 1) - &var(n, 2));
                radical_contains(&[unit.clone(), e], &f, cfg.gb_budget)?
            }
            Rewrite::Table { index, unless_one } => {
                let t = embed(&reduced_table()[index - 1].poly(), n, 1);
                let mut left = vec![unit.clone(), e.clone()];
                let mut right = vec![unit.clone(), t.clone()];
                if let Some(k) = unless_one {
                    let w = &(&var(n, 3) * &(&var(n, k - 1) - &constant(n, 1))) - &constant(n, 1);
                    left.push(w.clone());
                    right.push(w);
                }
                radical_contains(&left, &t, cfg.gb_budget)? && radical_contains(&right, &e, cfg.gb_budget)?
            }
        };
        out.push(RewriteCheck {
            equation: eq,
            rewrite: rw,
            verified,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Solving against a bound

struct Screened {
    set: SolutionSet,
    /// Indices into `set.points` of points with a coordinate beyond the bound.
    exceeding: Vec<usize>,
}

/// Solves, keeps the points of `domain`, and decides for every kept point
/// whether some coordinate in `coords` has modulus above `bound`, refining
/// the root boxes until each comparison is settled.
fn screen(
    polys: &[QPoly],
    nvars: usize,
    domain: Domain,
    bound: &BigRational,
    coords: std::ops::Range<usize>,
    cfg: &Config,
) -> Result<Screened> {
    let mut c = cfg.clone();
    for _ in 0..=cfg.max_refine_rounds {
        let mut set = solution_set_polys(polys, nvars, &c)?;
        if set.kind != SolutionKind::ZeroDimensional {
            return Ok(Screened { set, exceeding: Vec::new() });
        }
        set.points.retain(|p| domain.admits(p));
        let mut exceeding = Vec::new();
        let mut settled = true;
        for (k, p) in set.points.iter().enumerate() {
            let mut over = false;
            for co in &p.coords[coords.clone()] {
                match co.cmp_modulus(bound) {
                    Some(Ordering::Greater) => over = true,
                    Some(_) => {}
                    None => settled = false,
                }
            }
            if over {
                exceeding.push(k);
            }
        }
        if settled {
            return Ok(Screened { set, exceeding });
        }
        c.box_precision_bits = c.box_precision_bits.saturating_mul(2);
    }
    Err(CanonError::RefinementExhausted)
}

// ---------------------------------------------------------------------------
// Pair scan over the table

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SubsetVerdict {
    Inconsistent,
    WithinBound { solutions: usize },
    OutOfBound { witnesses: Vec<Vec<String>> },
    PositiveDimensional,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubsetResult {
    /// Table positions, from 1.
    pub indices: Vec<usize>,
    pub equations: Vec<&'static str>,
    #[serde(flatten)]
    pub verdict: SubsetVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairScanReport {
    pub domain: Domain,
    pub bound: String,
    pub pairs: Vec<SubsetResult>,
    /// Filled only when triples were requested.
    pub triples: Vec<SubsetResult>,
    pub violations: usize,
    pub positive_dimensional: usize,
}

impl PairScanReport {
    pub fn is_clean(&self) -> bool {
        self.violations == 0 && self.positive_dimensional == 0
    }

    pub fn summary(&self) -> String {
        if self.is_clean() {
            "no out-of-bound pair solutions".into()
        } else {
            format!(
                "{} subset(s) with out-of-bound solutions, {} positive-dimensional",
                self.violations, self.positive_dimensional
            )
        }
    }
}

fn scan_subset(table: &[ReducedEquation], idx: &[usize], domain: Domain, cfg: &Config) -> Result<SubsetResult> {
    let bound = int(4);
    let polys: Vec<QPoly> = idx.iter().map(|&i| table[i].poly()).collect();
    let s = screen(&polys, 2, domain, &bound, 0..2, cfg)?;
    let verdict = match s.set.kind {
        SolutionKind::Inconsistent => SubsetVerdict::Inconsistent,
        SolutionKind::PositiveDimensional => SubsetVerdict::PositiveDimensional,
        SolutionKind::ZeroDimensional if s.exceeding.is_empty() => SubsetVerdict::WithinBound {
            solutions: s.set.points.len(),
        },
        SolutionKind::ZeroDimensional => SubsetVerdict::OutOfBound {
            witnesses: s.exceeding.iter().map(|&k| show_point(&s.set.points[k])).collect(),
        },
    };
    Ok(SubsetResult {
        indices: idx.iter().map(|i| i + 1).collect(),
        equations: idx.iter().map(|&i| table[i].label).collect(),
        verdict,
    })
}

/// Decides for every pair (and optionally every triple) of table entries
/// whether a solution over `domain` has `|x| > 4` or `|y| > 4`.
pub fn pair_scan(domain: Domain, with_triples: bool, cfg: &Config) -> Result<PairScanReport> {
    let table = reduced_table();
    let run = |k: usize| -> Result<Vec<SubsetResult>> {
        combinations(table.len(), k)
            .par_iter()
            .map(|idx| scan_subset(&table, idx, domain, cfg))
            .collect()
    };
    let pairs = run(2)?;
    let triples = if with_triples { run(3)? } else { Vec::new() };
    let mut violations = 0;
    let mut positive_dimensional = 0;
    for r in pairs.iter().chain(&triples) {
        match r.verdict {
            SubsetVerdict::OutOfBound { .. } => violations += 1,
            SubsetVerdict::PositiveDimensional => positive_dimensional += 1,
            _ => {}
        }
    }
    Ok(PairScanReport {
        domain,
        bound: "4".into(),
        pairs,
        triples,
        violations,
        positive_dimensional,
    })
}

// ---------------------------------------------------------------------------
// Catalogs of maximal consistent systems

/// A maximal consistent system together with its solutions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    /// Coordinate values of a solution inducing the system.
    pub values: Vec<QuadExt>,
    pub system: CanonicalSystem,
    /// Solutions of the system over the catalog's domain.
    pub solutions: SolutionSet,
    /// Value sets of all exact solutions, sorted.
    pub value_sets: Vec<Vec<QuadExt>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Catalog {
    pub n: usize,
    pub domain: Domain,
    pub entries: Vec<CatalogEntry>,
    pub subsets_examined: usize,
    pub zero_dimensional_subsets: usize,
    /// Distinct solutions collected from those subsets.
    pub points: usize,
    /// Non-quadratic solutions with no coordinate equal to 1 and some
    /// coordinate nonzero: their satisfied subsets have no unit equation, so
    /// they lie strictly inside the satisfied subset of the zero solution.
    pub dominated_points: usize,
    /// Non-quadratic solutions that could not be set aside that way.
    pub unresolved_points: Vec<Vec<String>>,
    pub budget_exceeded: usize,
    pub partial: bool,
}

impl Catalog {
    /// Union of all entry solutions, sorted.
    pub fn solution_list(&self) -> Vec<Vec<QuadExt>> {
        let mut all: BTreeSet<Vec<QuadExt>> = BTreeSet::new();
        for e in &self.entries {
            for p in &e.solutions.points {
                if let Some(v) = p.exact_values() {
                    all.insert(v);
                }
            }
        }
        all.into_iter().collect()
    }

    pub fn value_sets(&self) -> BTreeSet<Vec<QuadExt>> {
        self.entries.iter().map(|e| e.values.clone()).collect()
    }
}

/// No coordinate equals 1 and some coordinate is nonzero, certified.
fn dominated_by_zero(p: &SolutionPoint) -> bool {
    use crate::algebra::roots::quad_in_disk;
    let differs = |c: &crate::algebra::roots::CertifiedRoot, v: &QuadExt| match &c.exact {
        Some(x) => x != v,
        None => !quad_in_disk(v, &c.center, &c.radius_sq),
    };
    let one = QuadExt::one();
    let zero = QuadExt::zero();
    p.coords.iter().all(|c| differs(c, &one)) && p.coords.iter().any(|c| differs(c, &zero))
}

fn value_set(v: &[QuadExt]) -> Vec<QuadExt> {
    let s: BTreeSet<QuadExt> = v.iter().cloned().collect();
    s.into_iter().collect()
}

fn q(a: BigRational) -> QuadExt {
    QuadExt::rational(a)
}

/// The 23 value sets covering every maximal real-consistent subsystem of `E_3`.
pub fn w_family() -> Vec<Vec<QuadExt>> {
    let r = |n, d| q(rat(n, d));
    let s = |a: (i64, i64), b: (i64, i64), d| QuadExt::new(rat(a.0, a.1), rat(b.0, b.1), d);
    let one = || r(1, 1);
    let sets: Vec<Vec<QuadExt>> = vec![
        vec![one()],
        vec![r(0, 1)],
        vec![one(), r(0, 1)],
        vec![one(), r(2, 1)],
        vec![one(), r(1, 2)],
        vec![one(), r(2, 1), r(1, 2)],
        vec![one(), r(0, 1), r(2, 1)],
        vec![one(), r(0, 1), r(1, 2)],
        vec![one(), r(0, 1), r(-1, 1)],
        vec![one(), r(2, 1), r(-1, 1)],
        vec![one(), r(2, 1), r(3, 1)],
        vec![one(), r(2, 1), r(4, 1)],
        vec![one(), r(1, 2), r(-1, 2)],
        vec![one(), r(1, 2), r(1, 4)],
        vec![one(), r(1, 2), r(3, 2)],
        vec![one(), r(-1, 1), r(-2, 1)],
        vec![one(), r(1, 3), r(2, 3)],
        vec![one(), r(2, 1), QuadExt::sqrt(2)],
        vec![one(), r(1, 2), s((0, 1), (1, 2), 2)],
        vec![one(), QuadExt::sqrt(2), s((0, 1), (1, 2), 2)],
        vec![one(), s((-1, 2), (1, 2), 5), s((1, 2), (1, 2), 5)],
        vec![one(), s((1, 2), (1, 2), 5), s((3, 2), (1, 2), 5)],
        vec![one(), s((-1, 2), (-1, 2), 5), s((3, 2), (1, 2), 5)],
    ];
    sets.iter().map(|v| value_set(v)).collect()
}

/// The two extra value sets for complex solutions.
pub fn w_family_complex_extra() -> Vec<Vec<QuadExt>> {
    let s = |a: (i64, i64), b: (i64, i64)| QuadExt::new(rat(a.0, a.1), rat(b.0, b.1), -3);
    vec![
        value_set(&[QuadExt::one(), s((-1, 2), (1, 2)), s((1, 2), (1, 2))]),
        value_set(&[QuadExt::one(), s((1, 2), (-1, 2)), s((1, 2), (1, 2))]),
    ]
}

/// Known value-set families: `{0}, {1}` for one variable, the values of the
/// eight small solutions for two, and the `W` family for three.
pub fn reference_family(n: usize, domain: Domain) -> Option<Vec<Vec<QuadExt>>> {
    match n {
        1 => Some(vec![vec![QuadExt::zero()], vec![QuadExt::one()]]),
        2 => {
            let pts = small_solutions_two();
            let sets: BTreeSet<Vec<QuadExt>> = pts.iter().map(|p| value_set(p)).collect();
            Some(sets.into_iter().collect())
        }
        3 => {
            let mut w = w_family();
            if domain == Domain::Complex {
                w.extend(w_family_complex_extra());
            }
            Some(w)
        }
        _ => None,
    }
}

/// The eight solutions covering every consistent subsystem of `E_2`.
pub fn small_solutions_two() -> Vec<Vec<QuadExt>> {
    let r = |n, d| q(rat(n, d));
    vec![
        vec![r(0, 1), r(0, 1)],
        vec![r(0, 1), r(1, 1)],
        vec![r(1, 1), r(0, 1)],
        vec![r(1, 2), r(1, 1)],
        vec![r(1, 1), r(1, 2)],
        vec![r(1, 1), r(1, 1)],
        vec![r(1, 1), r(2, 1)],
        vec![r(2, 1), r(1, 1)],
    ]
}

/// Solutions over `domain` of every zero-dimensional subset of at most `n`
/// equations of `E_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetPoints {
    /// Exact solutions, sorted.
    pub points: BTreeSet<Vec<QuadExt>>,
    /// Non-quadratic solutions set aside as in [`Catalog::dominated_points`].
    pub dominated: usize,
    pub unresolved: Vec<Vec<String>>,
    pub subsets: usize,
    pub zero_dimensional: usize,
    pub budget_exceeded: usize,
}

pub fn subset_points(n: usize, domain: Domain, cfg: &Config) -> Result<SubsetPoints> {
    if !(1..=3).contains(&n) {
        return Err(CanonError::InvalidArgument("catalogs are built for 1 <= n <= 3".into()));
    }
    let eqs = universe(n, Universe::E);
    let subsets: Vec<Vec<usize>> = (1..=n).flat_map(|k| combinations(eqs.len(), k)).collect();
    let solved: Vec<Result<SolutionSet>> = subsets
        .par_iter()
        .map(|idx| {
            let sys = CanonicalSystem::from_equations(n, idx.iter().map(|&i| eqs[i]))?;
            solution_set(&sys, cfg)
        })
        .collect();
    let mut out = SubsetPoints {
        points: BTreeSet::new(),
        dominated: 0,
        unresolved: Vec::new(),
        subsets: subsets.len(),
        zero_dimensional: 0,
        budget_exceeded: 0,
    };
    for s in solved {
        let s = match s {
            Ok(s) => s,
            Err(CanonError::BudgetExceeded(_)) => {
                out.budget_exceeded += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        if s.kind != SolutionKind::ZeroDimensional {
            continue;
        }
        out.zero_dimensional += 1;
        for p in s.points.iter().filter(|p| domain.admits(p)) {
            match p.exact_values() {
                Some(v) => {
                    out.points.insert(v);
                }
                None if dominated_by_zero(p) => out.dominated += 1,
                None => out.unresolved.push(show_point(p)),
            }
        }
    }
    out.unresolved.sort();
    out.unresolved.dedup();
    Ok(out)
}

/// Maximal consistent subsystems of `E_n` over `domain`, for `n <= 3`.
///
/// Every subset of at most `n` equations is solved; the satisfied subsets of
/// the solutions of zero-dimensional ones are collected and the
/// inclusion-maximal ones kept. Each entry's `values` is a value set from the
/// reference family when one of its solutions has one, otherwise the largest.
pub fn catalog_maximal(n: usize, domain: Domain, cfg: &Config) -> Result<Catalog> {
    let SubsetPoints {
        points,
        dominated,
        unresolved: inexact,
        subsets,
        zero_dimensional: zero_dim,
        budget_exceeded,
    } = subset_points(n, domain, cfg)?;

    let mut by_system: BTreeMap<CanonicalSystem, Vec<Vec<QuadExt>>> = BTreeMap::new();
    for v in &points {
        by_system.entry(satisfied_subset(v, Universe::E)?).or_default().push(v.clone());
    }
    let mut systems: Vec<&CanonicalSystem> = by_system.keys().collect();
    systems.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    let mut maximal: Vec<CanonicalSystem> = Vec::new();
    for s in systems {
        if !maximal.iter().any(|m| s.is_subset(m)) {
            maximal.push(s.clone());
        }
    }
    maximal.sort();

    let reference: Option<HashSet<Vec<QuadExt>>> =
        reference_family(n, domain).map(|f| f.into_iter().collect());
    let mut entries = Vec::new();
    for system in maximal {
        let mut sols = solution_set(&system, cfg)?;
        sols.points.retain(|p| domain.admits(p));
        sort_points(&mut sols.points);
        let sets: BTreeSet<Vec<QuadExt>> = sols
            .points
            .iter()
            .filter_map(SolutionPoint::exact_values)
            .map(|v| value_set(&v))
            .collect();
        let value_sets: Vec<Vec<QuadExt>> = sets.into_iter().collect();
        let preferred = reference
            .as_ref()
            .and_then(|r| value_sets.iter().find(|s| r.contains(*s)))
            .or_else(|| value_sets.iter().max_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b))));
        let values = match preferred {
            Some(v) => v.clone(),
            None => value_set(&by_system[&system][0]),
        };
        entries.push(CatalogEntry {
            values,
            system,
            solutions: sols,
            value_sets,
        });
    }
    Ok(Catalog {
        n,
        domain,
        entries,
        subsets_examined: subsets,
        zero_dimensional_subsets: zero_dim,
        points: points.len(),
        dominated_points: dominated,
        unresolved_points: inexact,
        budget_exceeded,
        partial: budget_exceeded > 0,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyComparison {
    pub expected: usize,
    pub found: usize,
    /// Reference sets that are no entry's value set.
    pub missing: Vec<Vec<String>>,
    /// Entry value sets outside the reference family.
    pub unexpected: Vec<Vec<String>>,
    /// Tuples over a reference set whose satisfied subset is not an entry.
    pub non_maximal_tuples: Vec<Vec<String>>,
    pub equal: bool,
}

/// Compares the catalog with a family of value sets in both directions:
/// every tuple whose set of values belongs to the family must induce a
/// catalog system, and the catalog's value sets must be exactly the family.
pub fn compare_with_family(cat: &Catalog, family: &[Vec<QuadExt>]) -> Result<FamilyComparison> {
    let expected: BTreeSet<Vec<QuadExt>> = family.iter().map(|s| value_set(s)).collect();
    let found = cat.value_sets();
    let systems: HashSet<&CanonicalSystem> = cat.entries.iter().map(|e| &e.system).collect();
    let mut non_maximal = Vec::new();
    for w in &expected {
        for tuple in tuples_over(w, cat.n) {
            if value_set(&tuple) != *w {
                continue;
            }
            if !systems.contains(&satisfied_subset(&tuple, Universe::E)?) {
                non_maximal.push(show_values(&tuple));
            }
        }
    }
    let missing: Vec<Vec<String>> = expected.difference(&found).map(|v| show_values(v)).collect();
    let unexpected: Vec<Vec<String>> = found.difference(&expected).map(|v| show_values(v)).collect();
    Ok(FamilyComparison {
        expected: expected.len(),
        found: found.len(),
        equal: missing.is_empty() && unexpected.is_empty() && non_maximal.is_empty(),
        missing,
        unexpected,
        non_maximal_tuples: non_maximal,
    })
}

fn tuples_over(values: &[QuadExt], n: usize) -> Vec<Vec<QuadExt>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t| {
                values.iter().map(move |v| {
                    let mut t = t.clone();
                    t.push(v.clone());
                    t
                })
            })
            .collect();
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    pub n: usize,
    pub subsets: usize,
    pub covered: usize,
    pub inconsistent: usize,
    /// Consistent subsets solved by none of the given points.
    pub uncovered: Vec<CanonicalSystem>,
}

impl CoverageReport {
    pub fn passed(&self) -> bool {
        self.uncovered.is_empty() && self.covered + self.inconsistent == self.subsets
    }
}

/// Runs over every subset of `E_n` (`n <= 2`): each one is solved by one of
/// `points`, or has no complex solution at all.
pub fn exhaustive_coverage(n: usize, points: &[Vec<QuadExt>], cfg: &Config) -> Result<CoverageReport> {
    if !(1..=2).contains(&n) {
        return Err(CanonError::InvalidArgument("exhaustive coverage needs n <= 2".into()));
    }
    let eqs = universe(n, Universe::E);
    // holds[e][p]: equation e is satisfied by point p.
    let mut holds = vec![vec![false; points.len()]; eqs.len()];
    for (i, e) in eqs.iter().enumerate() {
        for (k, p) in points.iter().enumerate() {
            holds[i][k] = e.holds(p)?;
        }
    }
    let total = 1usize << eqs.len();
    let outcomes: Vec<Result<Option<bool>>> = (0..total)
        .into_par_iter()
        .map(|mask| {
            let covered = (0..points.len()).any(|k| (0..eqs.len()).all(|i| mask >> i & 1 == 0 || holds[i][k]));
            if covered {
                return Ok(Some(true));
            }
            let polys: Vec<QPoly> = (0..eqs.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| eqs[i].to_poly(n, ORDER))
                .collect();
            let gb = buchberger(&polys, n, ORDER, cfg.gb_budget)?;
            Ok(if gb.is_one() { Some(false) } else { None })
        })
        .collect();
    let mut rep = CoverageReport {
        n,
        subsets: total,
        covered: 0,
        inconsistent: 0,
        uncovered: Vec::new(),
    };
    for (mask, o) in outcomes.into_iter().enumerate() {
        match o? {
            Some(true) => rep.covered += 1,
            Some(false) => rep.inconsistent += 1,
            None => rep.uncovered.push(CanonicalSystem::from_equations(
                n,
                (0..eqs.len()).filter(|i| mask >> i & 1 == 1).map(|i| eqs[i]),
            )?),
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SmallCaseReport {
    pub n: usize,
    pub domain: Domain,
    pub bound: String,
    pub entries: usize,
    pub solutions_checked: usize,
    pub out_of_bound: Vec<Vec<String>>,
    /// Points whose satisfied subset was searched for a small replacement.
    pub replacement_checked: usize,
    pub replacement_failures: Vec<Vec<String>>,
    pub passed: bool,
}

/// Replacement for `x` solving its satisfied subset, with every coordinate
/// drawn from `{x_i, 0, 1, 2, 1/2}` and of modulus at most `bound`.
pub fn small_replacement(x: &[QuadExt], bound: &BigRational) -> Result<Option<Vec<QuadExt>>> {
    let sys = satisfied_subset(x, Universe::E)?;
    let choices: Vec<Vec<QuadExt>> = x
        .iter()
        .map(|xi| {
            let mut c = vec![xi.clone(), QuadExt::zero(), QuadExt::one(), QuadExt::from_int(2), q(rat(1, 2))];
            c.retain(|v| v.modulus_le(bound));
            c.sort();
            c.dedup();
            c
        })
        .collect();
    let mut idx = vec![0usize; x.len()];
    if choices.iter().any(Vec::is_empty) {
        return Ok(None);
    }
    loop {
        let cand: Vec<QuadExt> = idx.iter().zip(&choices).map(|(&i, c)| c[i].clone()).collect();
        if sys.is_solved_by(&cand)? {
            return Ok(Some(cand));
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Ok(None);
            }
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Grid used for the replacement search away from catalog points.
const REPLACEMENT_GRID: [(i64, i64); 10] = [(-3, 1), (-1, 1), (0, 1), (1, 2), (1, 1), (2, 1), (3, 1), (5, 1), (7, 1), (100, 1)];

/// Bound check of every catalog solution against `2^(2^(n-2))` (1 for
/// `n = 1`), plus the small-value replacement search on catalog points and
/// on a rational grid.
pub fn verify_small_case(n: usize, domain: Domain, cfg: &Config) -> Result<SmallCaseReport> {
    let cat = catalog_maximal(n, domain, cfg)?;
    verify_small_catalog(&cat, cfg)
}

pub fn verify_small_catalog(cat: &Catalog, cfg: &Config) -> Result<SmallCaseReport> {
    let n = cat.n;
    let bound = tower_bound_with(n, cfg)?;
    let mut out_of_bound = Vec::new();
    let mut checked = 0;
    for e in &cat.entries {
        for p in &e.solutions.points {
            checked += 1;
            match p.cmp_max_modulus(&bound) {
                Some(Ordering::Greater) => out_of_bound.push(show_point(p)),
                Some(_) => {}
                None => return Err(CanonError::RefinementExhausted),
            }
        }
    }
    let mut samples: BTreeSet<Vec<QuadExt>> = cat.solution_list().into_iter().collect();
    let grid: Vec<QuadExt> = REPLACEMENT_GRID.iter().map(|&(a, b)| q(rat(a, b))).collect();
    samples.extend(tuples_over(&grid, n));
    let mut failures = Vec::new();
    for x in &samples {
        if small_replacement(x, &bound)?.is_none() {
            failures.push(show_values(x));
        }
    }
    let passed = out_of_bound.is_empty() && failures.is_empty() && !cat.partial && cat.unresolved_points.is_empty();
    Ok(SmallCaseReport {
        n,
        domain: cat.domain,
        bound: format_rational(&bound),
        entries: cat.entries.len(),
        solutions_checked: checked,
        out_of_bound,
        replacement_checked: samples.len(),
        replacement_failures: failures,
        passed,
    })
}

// ---------------------------------------------------------------------------
// Witness systems

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessCheck {
    pub n: usize,
    pub witness: Vec<String>,
    pub equations: usize,
    pub solutions: Vec<Vec<String>>,
    pub passed: bool,
}

/// `(1, 2, 4, 16, ..., 2^(2^(n-2)))`.
pub fn doubling_witness(n: usize) -> Vec<QuadExt> {
    let mut v = vec![QuadExt::one()];
    let mut x = QuadExt::from_int(2);
    for _ in 1..n {
        v.push(x.clone());
        x = x.mul(&x).expect("rational product");
    }
    v
}

/// The satisfied subset of the doubling witness has the witness as its only
/// complex solution.
pub fn doubling_witness_check(n: usize, cfg: &Config) -> Result<WitnessCheck> {
    if !(2..=5).contains(&n) {
        return Err(CanonError::InvalidArgument("doubling witness check needs 2 <= n <= 5".into()));
    }
    let w = doubling_witness(n);
    let sys = satisfied_subset(&w, Universe::E)?;
    let sol = solution_set(&sys, cfg)?;
    let exact: Vec<Option<Vec<QuadExt>>> = sol.points.iter().map(SolutionPoint::exact_values).collect();
    let passed = sol.kind == SolutionKind::ZeroDimensional && exact == vec![Some(w.clone())];
    Ok(WitnessCheck {
        n,
        witness: show_values(&w),
        equations: sys.len(),
        solutions: sol.points.iter().map(show_point).collect(),
        passed,
    })
}

/// `x1 + x1 = x2`, `x1 * x1 = x2`, `x_i * x_i = x_(i+1)` for `2 <= i < n`.
pub fn chain_system(n: usize) -> Result<CanonicalSystem> {
    if n < 2 {
        return Err(CanonError::InvalidArgument("chain needs n >= 2".into()));
    }
    let mut eqs = vec![Add(1, 1, 2), Mul(1, 1, 2)];
    eqs.extend((2..n).map(|i| Mul(i, i, i + 1)));
    CanonicalSystem::from_equations(n, eqs)
}

/// The chain system has exactly the solutions `0` and `(2, 4, 16, ..., 2^(2^(n-1)))`.
pub fn chain_check(n: usize, cfg: &Config) -> Result<WitnessCheck> {
    let sys = chain_system(n)?;
    let sol = solution_set(&sys, cfg)?;
    let mut top = Vec::new();
    let mut x = QuadExt::from_int(2);
    for _ in 0..n {
        top.push(x.clone());
        x = x.mul(&x)?;
    }
    let expected = vec![Some(vec![QuadExt::zero(); n]), Some(top.clone())];
    let exact: Vec<Option<Vec<QuadExt>>> = sol.points.iter().map(SolutionPoint::exact_values).collect();
    Ok(WitnessCheck {
        n,
        witness: show_values(&top),
        equations: sys.len(),
        solutions: sol.points.iter().map(show_point).collect(),
        passed: sol.kind == SolutionKind::ZeroDimensional && exact == expected,
    })
}

// ---------------------------------------------------------------------------
// Greedy probe with distinct coordinates

/// Equations kept for the greedy probe: `E_n` without units, without the
/// equations forcing `0`, `1`, `2`, `1/2` or a coincidence in an obvious
/// way (keeping `x1 + x1 = x2`, `x3 + x3 = x1` and `x4 + x4 = x4`), and
/// without products involving `x1`. `x1` stands for the constant 1.
pub fn greedy_equations(n: usize) -> Vec<CanonicalEquation> {
    universe(n, Universe::E)
        .into_iter()
        .filter(|&e| match e {
            Unit(_) => false,
            Add(1, j, k) if j == k => false,
            Add(1, 1, k) if k != 2 => false,
            Add(i, j, 1) if i == j && i != 3 => false,
            Add(i, j, k) if (k == i || k == j) && (i, j) != (4, 4) => false,
            Mul(i, j, k) if k == i || k == j => false,
            Mul(1, _, _) => false,
            _ => true,
        })
        .collect()
}

fn left_side(e: &CanonicalEquation) -> (bool, VarIndex, VarIndex) {
    match *e {
        Add(i, j, _) => (false, i, j),
        Mul(i, j, _) => (true, i, j),
        Unit(i) => (false, i, 0),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyOptions {
    /// Drop equations sharing the left side of an adopted one.
    pub prune_same_left_side: bool,
    /// Random specializations tried on positive-dimensional systems.
    pub specializations: usize,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        GreedyOptions {
            prune_same_left_side: false,
            specializations: 8,
        }
    }
}

/// Whether two coordinates are certainly different.
fn certainly_distinct(a: &crate::algebra::roots::CertifiedRoot, b: &crate::algebra::roots::CertifiedRoot) -> bool {
    use crate::algebra::roots::quad_in_disk;
    match (&a.exact, &b.exact) {
        (Some(x), Some(y)) => x != y,
        (Some(x), None) => !quad_in_disk(x, &b.center, &b.radius_sq),
        (None, Some(y)) => !quad_in_disk(y, &a.center, &a.radius_sq),
        (None, None) => {
            let d = a.center.sub(&b.center).norm_sq();
            let r = a.radius_upper() + b.radius_upper();
            d > &r * &r
        }
    }
}

fn pairwise_distinct(p: &SolutionPoint) -> bool {
    let c = &p.coords;
    (0..c.len()).all(|i| (i + 1..c.len()).all(|j| certainly_distinct(&c[i], &c[j])))
}

struct Search<'a> {
    n: usize,
    domain: Domain,
    opts: GreedyOptions,
    cfg: &'a Config,
    heuristic: usize,
    log: Vec<String>,
}

impl Search<'_> {
    /// A point of the ideal's variety over the domain (with pairwise
    /// different coordinates if asked). Exact on zero-dimensional ideals;
    /// otherwise random rational values are given to a maximal independent
    /// set of variables and the specialized ideals are solved, so a miss is
    /// only heuristic.
    fn find(&mut self, gb: &GroebnerBasis, gens: &[QPoly], distinct: bool, rng: &mut ChaCha8Rng, what: &str) -> Result<Option<SolutionPoint>> {
        let domain = self.domain;
        let ok = |p: &SolutionPoint| domain.admits(p) && (!distinct || pairwise_distinct(p));
        let Some(free) = gb.independent_set() else {
            return Ok(None);
        };
        if free.is_empty() {
            let s = solve_from_basis(gb, gens, self.cfg)?;
            return Ok(s.points.into_iter().find(|p| ok(p)));
        }
        for _ in 0..self.opts.specializations {
            let fixed: Vec<QPoly> = free
                .iter()
                .map(|&v| {
                    let num: i64 = rng.gen_range(-24..=24);
                    let den: i64 = rng.gen_range(1..=6);
                    &var(self.n, v) - &QPoly::constant(self.n, rat(num, den), ORDER)
                })
                .collect();
            let specialized = gb.extend(&fixed, self.cfg.gb_budget)?;
            if specialized.is_one() || specialized.dimension() != 0 {
                continue;
            }
            let mut all = gens.to_vec();
            all.extend(fixed);
            let s = solve_from_basis(&specialized, &all, self.cfg)?;
            if let Some(p) = s.points.into_iter().find(|p| ok(p)) {
                return Ok(Some(p));
            }
        }
        self.heuristic += 1;
        self.log.push(format!("heuristic: no point found for {what}"));
        Ok(None)
    }
}

fn render(eqs: &[CanonicalEquation]) -> String {
    eqs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

/// Greedy search for a subsystem of [`greedy_equations`] all of whose
/// solutions over `domain` have pairwise different `1, x2, ..., xn`, followed
/// by a check that the adopted system has a solution within `2^(2^(n-2))`.
///
/// A random order is drawn with an equation involving `x1` first; equations
/// are adopted in order as long as the system keeps a solution with pairwise
/// different coordinates. If the final system is consistent with some
/// `x_i = 1` or `x_i = x_j` the order is redrawn.
pub fn probe_greedy_distinct(n: usize, seed: u64, domain: Domain, opts: GreedyOptions, cfg: &Config) -> Result<ProbeReport> {
    if n < 4 {
        return Err(CanonError::InvalidArgument("greedy probe needs n >= 4".into()));
    }
    let bound = tower_bound_with(n, cfg)?;
    let mut rep = ProbeReport::new("greedy-distinct", n, seed, 1, format_rational(&bound));
    rep.notes.push(format!("domain {domain}"));
    let pool = greedy_equations(n);
    let unit = &var(n, 0) - &constant(n, 1);
    let base = buchberger(&[unit.clone()], n, ORDER, cfg.gb_budget)?;
    let mut search = Search {
        n,
        domain,
        opts,
        cfg,
        heuristic: 0,
        log: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut restarts = 0;
    let outcome = loop {
        if restarts > cfg.restart_limit {
            break None;
        }
        let mut order = pool.clone();
        order.shuffle(&mut rng);
        let first = order.iter().position(|e| e.indices().contains(&1)).expect("pool has equations with x1");
        let f = order.remove(first);
        order.insert(0, f);

        let mut chosen = vec![order[0]];
        let mut gens = vec![unit.clone(), order[0].to_poly(n, ORDER)];
        let mut gb = match base.extend(&gens[1..], cfg.gb_budget) {
            Ok(g) => g,
            Err(CanonError::BudgetExceeded(_)) => {
                rep.budget_exceeded += 1;
                break None;
            }
            Err(e) => return Err(e),
        };
        let mut left = order[1..].to_vec();
        if opts.prune_same_left_side {
            left.retain(|e| left_side(e) != left_side(&order[0]));
        }
        loop {
            let mut adopted = None;
            for (k, h) in left.iter().enumerate() {
                let hp = h.to_poly(n, ORDER);
                let ext = gb.extend(std::slice::from_ref(&hp), cfg.gb_budget)?;
                if ext.is_one() {
                    continue;
                }
                let mut g = gens.clone();
                g.push(hp);
                let what = format!("{{{}, {h}}}", render(&chosen));
                if search.find(&ext, &g, true, &mut rng, &what)?.is_some() {
                    adopted = Some((k, ext, g));
                    break;
                }
            }
            let Some((k, ext, g)) = adopted else { break };
            let h = left.remove(k);
            chosen.push(h);
            gb = ext;
            gens = g;
            if opts.prune_same_left_side {
                left.retain(|e| left_side(e) != left_side(&h));
            }
        }

        // Reject systems that still admit x_i = 1 or x_i = x_j.
        let mut collapses = false;
        'check: for i in 1..n {
            let mut extra = vec![&var(n, i) - &constant(n, 1)];
            extra.extend((i + 1..n).map(|j| &var(n, i) - &var(n, j)));
            for x in extra {
                let ext = gb.extend(std::slice::from_ref(&x), cfg.gb_budget)?;
                if ext.is_one() {
                    continue;
                }
                let mut g = gens.clone();
                g.push(x.clone());
                if search.find(&ext, &g, false, &mut rng, &format!("adjoined {x}"))?.is_some() {
                    collapses = true;
                    break 'check;
                }
            }
        }
        if collapses {
            restarts += 1;
            continue;
        }
        break Some((chosen, gb, gens));
    };
    rep.notes.push(format!("restarts {restarts}"));
    let Some((chosen, gb, gens)) = outcome else {
        rep.budget_exceeded = 1;
        rep.notes.push("no qualifying system found for this seed".into());
        rep.heuristic_decisions = search.heuristic;
        rep.notes.extend(search.log);
        return Ok(rep);
    };
    rep.notes.push(format!("system {{{}}}", render(&chosen)));

    let s = screen(&gens, n, domain, &bound, 0..n, cfg)?;
    let (outcome, norm) = match s.set.kind {
        SolutionKind::ZeroDimensional => {
            let smallest = s
                .set
                .points
                .iter()
                .enumerate()
                .filter(|(k, _)| !s.exceeding.contains(k))
                .map(|(_, p)| p)
                .min_by(|a, b| max_modulus_approx(a, 0..n).total_cmp(&max_modulus_approx(b, 0..n)));
            match smallest {
                Some(p) => {
                    rep.notes.push(format!("smallest solution ({})", show_point(p).join(", ")));
                    rep.max_norm_approx = max_modulus_approx(p, 0..n);
                    rep.max_norm = norm_string(p, 0..n);
                    ("verified", Some(rep.max_norm.clone()))
                }
                None if s.set.points.is_empty() => {
                    rep.heuristic_decisions += 1;
                    ("no solution over the domain", None)
                }
                None => {
                    rep.violations.push(Violation {
                        trial: 0,
                        kind: "no solution within 2^(2^(n-2))".into(),
                        value: show_point(&s.set.points[0]).join(", "),
                        bound: rep.bound.clone(),
                        witness: render(&chosen),
                    });
                    ("violation", None)
                }
            }
        }
        _ => {
            // Positive-dimensional: look for a bounded point by specialization.
            let mut found = None;
            for _ in 0..search.opts.specializations {
                if let Some(p) = search.find(&gb, &gens, false, &mut rng, "final system")? {
                    if p.cmp_max_modulus(&bound) != Some(Ordering::Greater) && p.cmp_max_modulus(&bound).is_some() {
                        found = Some(p);
                        break;
                    }
                }
            }
            search.heuristic += 1;
            match found {
                Some(p) => {
                    rep.max_norm_approx = max_modulus_approx(&p, 0..n);
                    rep.max_norm = norm_string(&p, 0..n);
                    rep.notes.push(format!("bounded solution ({})", show_point(&p).join(", ")));
                    ("verified on a specialization", Some(rep.max_norm.clone()))
                }
                None => ("undecided (positive-dimensional)", None),
            }
        }
    };
    rep.heuristic_decisions += search.heuristic;
    rep.notes.extend(search.log);
    rep.log.push(TrialLog {
        trial: 0,
        seed,
        outcome: outcome.into(),
        norm,
    });
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Greedy ideal growth

/// Message raised when a maximal proper ideal of the pool is positive-dimensional.
pub const POSITIVE_DIMENSION_FLAG: &str = "Conjecture 21b is false";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdealVariant {
    /// `x1` is the constant 1 and `x_i - 1` polynomials are in the pool.
    WithUnits,
    /// Plain sums and products only.
    WithoutUnits,
}

impl FromStr for IdealVariant {
    type Err = CanonError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "with-units" => Ok(IdealVariant::WithUnits),
            "without-units" => Ok(IdealVariant::WithoutUnits),
            _ => Err(CanonError::InvalidArgument(format!(
                "unknown variant {s:?} (expected with-units or without-units)"
            ))),
        }
    }
}

impl fmt::Display for IdealVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IdealVariant::WithUnits => "with-units",
            IdealVariant::WithoutUnits => "without-units",
        })
    }
}

/// Pool of generators for [`probe_ideal_growth`], deduplicated after `x1`
/// is replaced by 1 in the with-units variant.
pub fn ideal_pool(n: usize, variant: IdealVariant) -> Vec<(CanonicalEquation, QPoly)> {
    let mut seen: HashMap<String, ()> = HashMap::new();
    let mut out = Vec::new();
    for e in universe(n, Universe::E) {
        let keep = match (variant, e) {
            (IdealVariant::WithUnits, Unit(i)) => i != 1,
            (IdealVariant::WithoutUnits, Unit(_)) => false,
            _ => true,
        };
        if !keep {
            continue;
        }
        let p = e.to_poly(n, ORDER);
        let key = match variant {
            IdealVariant::WithUnits => fix_first(&p).to_string(),
            IdealVariant::WithoutUnits => p.to_string(),
        };
        if seen.insert(key, ()).is_none() {
            out.push((e, p));
        }
    }
    out
}

enum Growth {
    Positive(Vec<CanonicalEquation>, i32),
    Solved {
        system: Vec<CanonicalEquation>,
        max: f64,
        exceeding: Option<Vec<String>>,
        solutions: usize,
    },
}

fn grow_ideal(
    n: usize,
    variant: IdealVariant,
    pool: &[(CanonicalEquation, QPoly)],
    bound: &BigRational,
    rng: &mut ChaCha8Rng,
    cfg: &Config,
) -> Result<Growth> {
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.shuffle(rng);
    let mut gens = Vec::new();
    if variant == IdealVariant::WithUnits {
        gens.push(&var(n, 0) - &constant(n, 1));
    }
    let mut gb = buchberger(&gens, n, ORDER, cfg.gb_budget)?;
    let mut system = Vec::new();
    for k in order {
        if gb.dimension() == 0 {
            break;
        }
        let (e, p) = &pool[k];
        let ext = gb.extend(std::slice::from_ref(p), cfg.gb_budget)?;
        if !ext.is_one() {
            gb = ext;
            gens.push(p.clone());
            system.push(*e);
        }
    }
    let d = gb.dimension();
    if d > 0 {
        return Ok(Growth::Positive(system, d));
    }
    let first = if variant == IdealVariant::WithUnits { 1 } else { 0 };
    let s = screen(&gens, n, Domain::Complex, bound, first..n, cfg)?;
    let max = s
        .set
        .points
        .iter()
        .map(|p| max_modulus_approx(p, first..n))
        .fold(0.0, f64::max);
    Ok(Growth::Solved {
        system,
        max,
        exceeding: s.exceeding.first().map(|&k| show_point(&s.set.points[k])),
        solutions: s.set.points.len(),
    })
}

/// Shuffles the pool and adopts generators while the ideal stays proper,
/// stopping at dimension zero. A positive final dimension raises
/// [`POSITIVE_DIMENSION_FLAG`]; otherwise all complex solutions are compared
/// with `2^(2^(n-2))` (with units) or `2^(2^(n-1))` (without).
pub fn probe_ideal_growth(n: usize, iterations: usize, seed: u64, variant: IdealVariant, cfg: &Config) -> Result<ProbeReport> {
    if n < 2 {
        return Err(CanonError::InvalidArgument("probe needs n >= 2".into()));
    }
    let bound = match variant {
        IdealVariant::WithUnits => tower_bound_with(n, cfg)?,
        IdealVariant::WithoutUnits => chain_bound_with(n, cfg)?,
    };
    let pool = ideal_pool(n, variant);
    let outcomes: Vec<Result<Growth>> = (0..iterations)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ t as u64);
            grow_ideal(n, variant, &pool, &bound, &mut rng, cfg)
        })
        .collect();
    let mut rep = ProbeReport::new(&format!("ideal-growth-{variant}"), n, seed, iterations, format_rational(&bound));
    let mut best = 0.0f64;
    for (t, o) in outcomes.into_iter().enumerate() {
        let trial_seed = seed ^ t as u64;
        match o {
            Err(CanonError::BudgetExceeded(_)) | Err(CanonError::RefinementExhausted) => {
                rep.budget_exceeded += 1;
                rep.log.push(TrialLog {
                    trial: t,
                    seed: trial_seed,
                    outcome: "budget exceeded".into(),
                    norm: None,
                });
            }
            Err(e) => return Err(e),
            Ok(Growth::Positive(system, d)) => {
                if !rep.flags.iter().any(|f| f == POSITIVE_DIMENSION_FLAG) {
                    rep.flags.push(POSITIVE_DIMENSION_FLAG.into());
                }
                rep.violations.push(Violation {
                    trial: t,
                    kind: "positive-dimensional maximal system".into(),
                    value: format!("dimension {d}"),
                    bound: "0".into(),
                    witness: render(&system),
                });
                rep.log.push(TrialLog {
                    trial: t,
                    seed: trial_seed,
                    outcome: format!("dimension {d}"),
                    norm: None,
                });
            }
            Ok(Growth::Solved {
                system,
                max,
                exceeding,
                solutions,
            }) => {
                if let Some(w) = exceeding {
                    rep.violations.push(Violation {
                        trial: t,
                        kind: "solution beyond bound".into(),
                        value: w.join(", "),
                        bound: rep.bound.clone(),
                        witness: render(&system),
                    });
                }
                best = best.max(max);
                rep.log.push(TrialLog {
                    trial: t,
                    seed: trial_seed,
                    outcome: format!("{solutions} solutions"),
                    norm: Some(format!("{max:.6}")),
                });
            }
        }
    }
    rep.max_norm_approx = best;
    rep.max_norm = if best.fract() == 0.0 && best < 1e15 {
        format!("{best}")
    } else {
        format!("{best:.12}")
    };
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn table_shape() {
        let t = reduced_table();
        assert_eq!(t.len(), 16);
        assert_eq!(t[0].label, "x=2");
        assert_eq!(t[12].label, "x*y=1");
        let x = var(2, 0);
        let y = var(2, 1);
        assert_eq!(t[12].poly(), &(&x * &y) - &constant(2, 1));
        assert_eq!(t[14].poly(), &(&x + &constant(2, 1)) - &y);
        assert_eq!(t[2].poly(), &(&x + &x) - &constant(2, 1));
    }

    #[test]
    fn every_rewrite_holds() {
        let checks = verify_rewrites(&cfg()).unwrap();
        assert_eq!(checks.len(), 39);
        for c in &checks {
            assert!(c.verified, "{c:?}");
        }
        let hit: BTreeSet<usize> = checks
            .iter()
            .filter_map(|c| match c.rewrite {
                Rewrite::Table { index, .. } => Some(index),
                _ => None,
            })
            .collect();
        assert_eq!(hit, (1..=16).collect());
    }

    #[test]
    fn golden_pair() {
        let t = reduced_table();
        let r = scan_subset(&t, &[6, 13], Domain::Complex, &cfg()).unwrap();
        assert_eq!(r.verdict, SubsetVerdict::WithinBound { solutions: 2 });
        let r = scan_subset(&t, &[0, 2], Domain::Complex, &cfg()).unwrap();
        assert_eq!(r.verdict, SubsetVerdict::Inconsistent);
    }

    #[test]
    fn catalog_one_variable() {
        let c = catalog_maximal(1, Domain::Complex, &cfg()).unwrap();
        let sols = c.solution_list();
        assert_eq!(sols, vec![vec![QuadExt::zero()], vec![QuadExt::one()]]);
    }

    #[test]
    fn pool_sizes() {
        assert!(!greedy_equations(4).is_empty());
        assert!(greedy_equations(4).contains(&Add(4, 4, 4)));
        assert!(greedy_equations(4).contains(&Add(3, 3, 1)));
        assert!(!greedy_equations(4).contains(&Add(2, 2, 1)));
        // Sums x_i + x_j = x_i coincide with x_j + x_j = x_j as polynomials.
        assert_eq!(ideal_pool(5, IdealVariant::WithoutUnits).len(), 130);
        // Independent count: distinct value vectors at random points with x1 = 1.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<Vec<BigRational>> = (0..6)
            .map(|_| {
                let mut v = vec![int(1)];
                v.extend((1..5).map(|_| rat(rng.gen_range(-50..50), rng.gen_range(1..9))));
                v
            })
            .collect();
        let mut keys = BTreeSet::new();
        for e in universe(5, Universe::E) {
            if e == Unit(1) {
                continue;
            }
            let p = e.to_poly(5, ORDER);
            keys.insert(pts.iter().map(|x| p.eval(x)).collect::<Vec<_>>());
        }
        assert_eq!(ideal_pool(5, IdealVariant::WithUnits).len(), keys.len());
    }

    #[test]
    fn distinctness_filter() {
        // x2 = 2, x4 = 2: coordinates coincide.
        let p = SolutionPoint::from_exact(vec![QuadExt::one(), QuadExt::from_int(2), QuadExt::from_int(4), QuadExt::from_int(2)]);
        assert!(!pairwise_distinct(&p));
        let p = SolutionPoint::from_exact(doubling_witness(4));
        assert!(pairwise_distinct(&p));
    }
}
