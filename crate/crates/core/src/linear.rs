//! The additive fragment: systems built from `x_i = 1` and `x_i + x_j = x_k`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::matrix::{bareiss_det, cramer_solve, det_i64, solve_affine, Matrix};
use crate::bounds::{additive_bound, sqrt5_bound};
use crate::error::{CanonError, Result};
use crate::report::{ProbeReport, TrialLog, Violation};
use crate::scalar::{format_rational, isqrt, rational_to_f64};
use crate::system::{satisfied_subset_rational, universe, Add, CanonicalEquation, CanonicalSystem, Mul, Unit, Universe};

/// Solution set of an additive system over ℚ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AffineDescription {
    Inconsistent,
    Point(Vec<BigRational>),
    Subspace {
        particular: Vec<BigRational>,
        basis: Vec<Vec<BigRational>>,
    },
}

impl AffineDescription {
    pub fn dimension(&self) -> Option<usize> {
        match self {
            AffineDescription::Inconsistent => None,
            AffineDescription::Point(_) => Some(0),
            AffineDescription::Subspace { basis, .. } => Some(basis.len()),
        }
    }

    pub fn contains(&self, x: &[BigRational], sys: &CanonicalSystem) -> bool {
        !matches!(self, AffineDescription::Inconsistent) && sys.equations().all(|e| e.holds_rational(x))
    }
}

/// Coefficients and right side of `eq` as a linear equation in `x_1..x_n`.
pub fn equation_row(eq: &CanonicalEquation, n: usize) -> Result<(Vec<i64>, i64)> {
    let mut row = vec![0i64; n];
    match *eq {
        Unit(i) => {
            row[i - 1] = 1;
            Ok((row, 1))
        }
        Add(i, j, k) => {
            row[i - 1] += 1;
            row[j - 1] += 1;
            row[k - 1] -= 1;
            Ok((row, 0))
        }
        Mul(..) => Err(CanonError::MulPresent),
    }
}

fn linear_system(sys: &CanonicalSystem) -> Result<(Vec<Vec<i64>>, Vec<i64>)> {
    let n = sys.arity();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for e in sys.equations() {
        let (r, b) = equation_row(e, n)?;
        rows.push(r);
        rhs.push(b);
    }
    Ok((rows, rhs))
}

fn to_rat_matrix(rows: &[Vec<i64>], n: usize) -> Matrix<BigRational> {
    let mut m = Matrix::zeros(rows.len(), n);
    for (r, row) in rows.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            m[(r, c)] = BigRational::from_integer(v.into());
        }
    }
    m
}

fn solve_rows(rows: &[Vec<i64>], rhs: &[i64], n: usize) -> AffineDescription {
    if rows.is_empty() {
        let basis = (0..n)
            .map(|i| {
                let mut v = vec![BigRational::zero(); n];
                v[i] = BigRational::one();
                v
            })
            .collect::<Vec<_>>();
        return if n == 0 {
            AffineDescription::Point(Vec::new())
        } else {
            AffineDescription::Subspace {
                particular: vec![BigRational::zero(); n],
                basis,
            }
        };
    }
    let a = to_rat_matrix(rows, n);
    let b: Vec<BigRational> = rhs.iter().map(|&v| BigRational::from_integer(v.into())).collect();
    match solve_affine(&a, &b) {
        None => AffineDescription::Inconsistent,
        Some((p, basis)) if basis.is_empty() => AffineDescription::Point(p),
        Some((particular, basis)) => AffineDescription::Subspace { particular, basis },
    }
}

/// Exact affine solution set over ℚ.
pub fn solve_w(sys: &CanonicalSystem) -> Result<AffineDescription> {
    let (rows, rhs) = linear_system(sys)?;
    Ok(solve_rows(&rows, &rhs, sys.arity()))
}

/// A point reached by adjoining `x_m + x_m = x_m` constraints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Refinement {
    #[serde(with = "crate::scalar::rational_vec_string")]
    pub point: Vec<BigRational>,
    /// 1-based indices `m`, in the order they were adjoined.
    pub steps: Vec<usize>,
}

/// Shrinks the solution set one coordinate hyperplane at a time (smallest
/// strictly shrinking index first) until a single point remains. Systems
/// without a unit equation go straight to the zero vector.
pub fn refine_to_point(sys: &CanonicalSystem) -> Result<Refinement> {
    let n = sys.arity();
    let (mut rows, mut rhs) = linear_system(sys)?;
    if !sys.equations().any(|e| matches!(e, Unit(_))) {
        return Ok(Refinement {
            point: vec![BigRational::zero(); n],
            steps: Vec::new(),
        });
    }
    let mut steps = Vec::new();
    loop {
        match solve_rows(&rows, &rhs, n) {
            AffineDescription::Inconsistent => {
                return Err(CanonError::Inconsistent("additive system has no solution".into()))
            }
            AffineDescription::Point(point) => return Ok(Refinement { point, steps }),
            AffineDescription::Subspace { basis, .. } => {
                // x_m is non-constant on the subspace iff some basis vector moves it.
                let m = (0..n)
                    .find(|&m| basis.iter().any(|v| !v[m].is_zero()))
                    .ok_or_else(|| CanonError::Accounting("subspace without a free coordinate".into()))?;
                let mut r = vec![0i64; n];
                r[m] = 1;
                rows.push(r);
                rhs.push(0);
                steps.push(m + 1);
                if steps.len() > n {
                    return Err(CanonError::Accounting("refinement did not terminate".into()));
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundCheck {
    #[serde(with = "crate::scalar::rational_vec_string")]
    pub point: Vec<BigRational>,
    pub ok: bool,
}

/// Refined point and whether every `|x_j|^2 <= 5^(n-1)`.
pub fn rational_bound_check(sys: &CanonicalSystem) -> Result<BoundCheck> {
    let r = refine_to_point(sys)?;
    if !sys.equations().all(|e| e.holds_rational(&r.point)) {
        return Err(CanonError::Accounting("refined point does not solve the system".into()));
    }
    let bound = sqrt5_bound(sys.arity().max(1))?;
    let ok = r.point.iter().all(|x| bound.admits_rational(x));
    Ok(BoundCheck { point: r.point, ok })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegerStatus {
    Found,
    NotIntegerConsistent,
    NotFoundInBox,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntegerCheck {
    pub status: IntegerStatus,
    pub point: Option<Vec<String>>,
    /// Largest maximal minor of the augmented matrix, when computed.
    pub delta: Option<String>,
    /// Side of the searched box, `floor(sqrt(5)^(n-1))`.
    pub box_bound: String,
    pub ok: bool,
}

/// `A U = H` with `U` unimodular and `H` in column echelon form; returns
/// `(H, U, pivots)` where `pivots[t] = (row, col)`, `col == t`.
fn column_hnf(a: &[Vec<BigInt>], n: usize) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>, Vec<(usize, usize)>) {
    let mut h: Vec<Vec<BigInt>> = a.to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut col = 0;
    for row in 0..h.len() {
        if col == n {
            break;
        }
        for c in col + 1..n {
            if h[row][c].is_zero() {
                continue;
            }
            let p = h[row][col].clone();
            let q = h[row][c].clone();
            let eg = p.extended_gcd(&q);
            let (g, x, y) = (eg.gcd, eg.x, eg.y);
            let (pg, qg) = (&p / &g, &q / &g);
            for mat in [&mut h, &mut u] {
                for r in mat.iter_mut() {
                    let a0 = r[col].clone();
                    let a1 = r[c].clone();
                    r[col] = &x * &a0 + &y * &a1;
                    r[c] = &pg * &a1 - &qg * &a0;
                }
            }
        }
        if !h[row][col].is_zero() {
            if h[row][col].is_negative() {
                for mat in [&mut h, &mut u] {
                    for r in mat.iter_mut() {
                        r[col] = -r[col].clone();
                    }
                }
            }
            pivots.push((row, col));
            col += 1;
        }
    }
    (h, u, pivots)
}

/// Unimodular row reduction of `vs` to echelon form with positive pivots.
fn row_echelon(mut vs: Vec<Vec<BigInt>>, n: usize) -> Vec<(usize, Vec<BigInt>)> {
    let mut out = Vec::new();
    for c in 0..n {
        loop {
            let nz: Vec<usize> = (0..vs.len()).filter(|&i| !vs[i][c].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            let piv = *nz.iter().min_by_key(|&&i| vs[i][c].abs()).unwrap();
            for &i in &nz {
                if i != piv {
                    let f = vs[i][c].div_floor(&vs[piv][c]);
                    let pr = vs[piv].clone();
                    for (x, p) in vs[i].iter_mut().zip(&pr) {
                        *x -= &f * p;
                    }
                }
            }
        }
        if let Some(i) = (0..vs.len()).find(|&i| !vs[i][c].is_zero()) {
            let mut v = vs.remove(i);
            if v[c].is_negative() {
                v.iter_mut().for_each(|x| *x = -x.clone());
            }
            out.push((c, v));
        }
    }
    out
}

/// Integer solutions as `x0 + span_Z(kernel)`, or `None` if there are none.
pub fn integer_solution_lattice(
    rows: &[Vec<i64>],
    rhs: &[i64],
    n: usize,
) -> Option<(Vec<BigInt>, Vec<Vec<BigInt>>)> {
    let a: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
    let (h, u, pivots) = column_hnf(&a, n);
    let mut y = vec![BigInt::zero(); n];
    let mut next = 0;
    for (row, hr) in h.iter().enumerate() {
        let s: BigInt = BigInt::from(rhs[row]) - (0..next).map(|c| &hr[c] * &y[c]).sum::<BigInt>();
        if next < pivots.len() && pivots[next].0 == row {
            let (q, r) = s.div_rem(&hr[next]);
            if !r.is_zero() {
                return None;
            }
            y[next] = q;
            next += 1;
        } else if !s.is_zero() {
            return None;
        }
    }
    let x0: Vec<BigInt> = (0..n).map(|i| (0..n).map(|c| &u[i][c] * &y[c]).sum()).collect();
    let kernel: Vec<Vec<BigInt>> = (pivots.len()..n).map(|c| (0..n).map(|i| u[i][c].clone()).collect()).collect();
    Some((x0, kernel))
}

const INTEGER_SEARCH_NODES: u64 = 10_000_000;

/// First lattice point with all `|x_i| <= bound`, depth first over the
/// echelon kernel basis.
fn box_search(x0: &[BigInt], kernel: Vec<Vec<BigInt>>, bound: &BigInt) -> Result<Option<Vec<BigInt>>> {
    let n = x0.len();
    let ech = row_echelon(kernel, n);
    let mut nodes = 0u64;
    fn within(x: &[BigInt], lo: usize, hi: usize, b: &BigInt) -> bool {
        x[lo..hi].iter().all(|v| v.abs() <= *b)
    }
    fn rec(
        level: usize,
        x: Vec<BigInt>,
        checked: usize,
        ech: &[(usize, Vec<BigInt>)],
        b: &BigInt,
        nodes: &mut u64,
    ) -> Result<Option<Vec<BigInt>>> {
        *nodes += 1;
        if *nodes > INTEGER_SEARCH_NODES {
            return Err(CanonError::BudgetExceeded("integer box search".into()));
        }
        let n = x.len();
        if level == ech.len() {
            return Ok(within(&x, checked, n, b).then_some(x));
        }
        let (p, v) = &ech[level];
        if !within(&x, checked, *p, b) {
            return Ok(None);
        }
        let h = &v[*p];
        let c = &x[*p];
        let lo = (-b - c).div_ceil(h);
        let hi = (b - c).div_floor(h);
        if lo > hi {
            return Ok(None);
        }
        // Centre-out, so the pivot coordinate starts near zero.
        let centre = (-c).div_floor(h).clamp(lo.clone(), hi.clone());
        let mut order = vec![centre.clone()];
        let mut step = BigInt::one();
        loop {
            let (down, up) = (&centre - &step, &centre + &step);
            let (d_ok, u_ok) = (down >= lo, up <= hi);
            if !d_ok && !u_ok {
                break;
            }
            if u_ok {
                order.push(up);
            }
            if d_ok {
                order.push(down);
            }
            step += 1;
        }
        for t in order {
            let nx: Vec<BigInt> = x.iter().zip(v).map(|(xi, vi)| xi + &t * vi).collect();
            if let Some(found) = rec(level + 1, nx, p + 1, ech, b, nodes)? {
                return Ok(Some(found));
            }
        }
        Ok(None)
    }
    rec(0, x0.to_vec(), 0, &ech, bound, &mut nodes)
}

pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] != i + n - k) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

const DELTA_MINOR_CAP: usize = 200_000;

/// Max `|m x m minor|` of `(A | b)` restricted to a maximal independent row set.
fn augmented_delta(rows: &[Vec<i64>], rhs: &[i64], n: usize) -> Option<BigInt> {
    let mut basis: Vec<Vec<i64>> = Vec::new();
    let mut basis_rhs = Vec::new();
    for (r, b) in rows.iter().zip(rhs) {
        let mut trial = basis.clone();
        trial.push(r.clone());
        if crate::algebra::matrix::rank(&to_rat_matrix(&trial, n)) == trial.len() {
            basis = trial;
            basis_rhs.push(*b);
        }
    }
    let m = basis.len();
    if m == 0 {
        return Some(BigInt::zero());
    }
    let aug: Vec<Vec<i64>> = basis
        .iter()
        .zip(&basis_rhs)
        .map(|(r, b)| r.iter().copied().chain(std::iter::once(*b)).collect())
        .collect();
    let combos = combinations(n + 1, m);
    if combos.len() > DELTA_MINOR_CAP {
        return None;
    }
    combos
        .par_iter()
        .map(|cols| {
            let mut mm = Matrix::zeros(m, m);
            for r in 0..m {
                for (c, &col) in cols.iter().enumerate() {
                    mm[(r, c)] = BigInt::from(aug[r][col]);
                }
            }
            bareiss_det(&mm).map(|d| d.abs()).unwrap_or_default()
        })
        .max()
}

/// Integer point with `|x_j| <= sqrt(5)^(n-1)`, found by parametrizing the
/// integer solution lattice and searching the box.
pub fn integer_bound_check(sys: &CanonicalSystem) -> Result<IntegerCheck> {
    let n = sys.arity();
    let (rows, rhs) = linear_system(sys)?;
    if solve_rows(&rows, &rhs, n) == AffineDescription::Inconsistent {
        return Err(CanonError::Inconsistent("additive system has no rational solution".into()));
    }
    let bound = isqrt(&sqrt5_bound(n.max(1))?.square);
    let delta = augmented_delta(&rows, &rhs, n).map(|d| d.to_string());
    let Some((x0, kernel)) = integer_solution_lattice(&rows, &rhs, n) else {
        return Ok(IntegerCheck {
            status: IntegerStatus::NotIntegerConsistent,
            point: None,
            delta,
            box_bound: bound.to_string(),
            ok: true,
        });
    };
    let found = box_search(&x0, kernel, &bound)?;
    if let Some(p) = &found {
        let q: Vec<BigRational> = p.iter().map(|v| BigRational::from_integer(v.clone())).collect();
        if !sys.equations().all(|e| e.holds_rational(&q)) {
            return Err(CanonError::Accounting("integer point does not solve the system".into()));
        }
    }
    Ok(IntegerCheck {
        status: if found.is_some() { IntegerStatus::Found } else { IntegerStatus::NotFoundInBox },
        ok: found.is_some(),
        point: found.map(|p| p.iter().map(ToString::to_string).collect()),
        delta,
        box_bound: bound.to_string(),
    })
}

const PROBE_DRAW_CAP: usize = 1_000_000;

/// Incremental rank tracker over ℚ.
struct RowSpace {
    rows: Vec<(usize, Vec<BigRational>)>,
}

impl RowSpace {
    fn reduce(&self, v: &[BigRational]) -> Vec<BigRational> {
        let mut v = v.to_vec();
        for (p, r) in &self.rows {
            if !v[*p].is_zero() {
                let f = v[*p].clone() / &r[*p];
                for (x, y) in v.iter_mut().zip(r) {
                    *x -= &f * y;
                }
            }
        }
        v
    }

    /// Adds `v` if independent; returns whether the rank grew.
    fn push(&mut self, v: &[BigRational]) -> bool {
        let r = self.reduce(v);
        match r.iter().position(|x| !x.is_zero()) {
            Some(p) => {
                self.rows.push((p, r));
                true
            }
            None => false,
        }
    }
}

fn infinity_norm(x: &[BigRational]) -> BigRational {
    x.iter().map(|v| v.abs()).max().unwrap_or_else(BigRational::zero)
}

fn show_rows(rows: &[Vec<i64>]) -> String {
    rows.iter()
        .map(|r| format!("[{}]", r.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")))
        .collect::<Vec<_>>()
        .join(" ")
}

/// One random full-rank completion of the row `x_1 = 1`; returns the rows
/// and the unique solution.
fn rank_completion_trial(n: usize, rng: &mut ChaCha8Rng) -> Result<(Vec<Vec<i64>>, Vec<BigRational>)> {
    let mut space = RowSpace { rows: Vec::new() };
    let mut e1 = vec![0i64; n];
    e1[0] = 1;
    let as_q = |r: &[i64]| r.iter().map(|&v| BigRational::from_integer(v.into())).collect::<Vec<_>>();
    space.push(&as_q(&e1));
    let mut rows = vec![e1];
    let mut draws = 0;
    while rows.len() < n {
        draws += 1;
        if draws > PROBE_DRAW_CAP {
            return Err(CanonError::BudgetExceeded("rank completion draws".into()));
        }
        let (i, j, k) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
        let mut r = vec![0i64; n];
        r[i] += 1;
        r[j] += 1;
        r[k] -= 1;
        if space.push(&as_q(&r)) {
            rows.push(r);
        }
    }
    let a = to_rat_matrix(&rows, n);
    let mut b = vec![BigRational::zero(); n];
    b[0] = BigRational::one();
    let x = cramer_solve(&a, &b)?;
    Ok((rows, x))
}

/// Random full-rank systems `{x_1 = 1, e_i + e_j - e_k, ...}`: records the
/// largest ∞-norm of their solutions, flags values above `2^(n-1)` and
/// treats values above `sqrt(5)^(n-1)` as contradictions.
pub fn probe_additive(n: usize, iterations: usize, seed: u64) -> Result<ProbeReport> {
    if n < 2 {
        return Err(CanonError::InvalidArgument("probe needs n >= 2".into()));
    }
    if iterations == 0 {
        return Err(CanonError::InvalidArgument("iterations must be at least 1".into()));
    }
    let bound = additive_bound(n)?;
    let hard = sqrt5_bound(n)?;
    let outcomes: Vec<Result<(Vec<Vec<i64>>, Vec<BigRational>)>> = (0..iterations)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ t as u64);
            rank_completion_trial(n, &mut rng)
        })
        .collect();
    let mut rep = ProbeReport::new("additive-rank", n, seed, iterations, format_rational(&bound));
    rep.notes.push("each system starts from the row x1 = 1 with right side 1".into());
    let mut best = BigRational::zero();
    for (t, out) in outcomes.into_iter().enumerate() {
        let trial_seed = seed ^ t as u64;
        let (rows, x) = match out {
            Ok(v) => v,
            Err(CanonError::BudgetExceeded(_)) => {
                rep.budget_exceeded += 1;
                rep.log.push(TrialLog { trial: t, seed: trial_seed, outcome: "budget exceeded".into(), norm: None });
                continue;
            }
            Err(e) => return Err(e),
        };
        let norm = infinity_norm(&x);
        let witness = || show_rows(&rows);
        if norm > bound {
            rep.violations.push(Violation {
                trial: t,
                kind: "2^(n-1) bound exceeded".into(),
                value: format_rational(&norm),
                bound: format_rational(&bound),
                witness: witness(),
            });
        }
        if !hard.admits_rational(&norm) {
            rep.contradictions.push(Violation {
                trial: t,
                kind: "sqrt(5)^(n-1) bound exceeded".into(),
                value: format_rational(&norm),
                bound: format!("sqrt({})", hard.square),
                witness: witness(),
            });
        }
        rep.log.push(TrialLog {
            trial: t,
            seed: trial_seed,
            outcome: "solved".into(),
            norm: Some(format_rational(&norm)),
        });
        if norm > best {
            best = norm;
        }
    }
    rep.max_norm = format_rational(&best);
    rep.max_norm_approx = rational_to_f64(&best);
    Ok(rep)
}

/// The six admissible nonzero patterns of a row.
pub const ROW_PATTERNS: [&[i64]; 6] = [&[1], &[-1, 2], &[2, -1], &[-1, 1, 1], &[1, -1, 1], &[1, 1, -1]];

/// Every length-`n` row whose nonzero entries, read left to right, form one
/// of [`ROW_PATTERNS`].
pub fn pattern_rows(n: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for pat in ROW_PATTERNS {
        for cols in combinations(n, pat.len()) {
            let mut r = vec![0i64; n];
            for (c, &v) in cols.iter().zip(pat.iter()) {
                r[*c] = v;
            }
            out.push(r);
        }
    }
    out
}

/// Whether a row, after deleting zeros, is one of the six patterns.
pub fn is_pattern_row(r: &[i64]) -> bool {
    let nz: Vec<i64> = r.iter().copied().filter(|&v| v != 0).collect();
    ROW_PATTERNS.iter().any(|p| *p == nz.as_slice())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    Exhaustive,
    Random { iterations: usize, seed: u64 },
}

/// Largest `n` for exhaustive pattern-matrix scans.
pub const MINOR_SCAN_EXHAUSTIVE_MAX: usize = 5;
const VIOLATION_SAMPLES: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinorScanReport {
    pub n: usize,
    pub mode: ScanMode,
    pub row_count: usize,
    pub matrices: u64,
    pub minors: u64,
    pub max_abs_minor: String,
    pub bound: String,
    pub argmax: Vec<Vec<i64>>,
    pub violation_count: u64,
    pub violations: Vec<Vec<Vec<i64>>>,
}

impl MinorScanReport {
    pub fn is_clean(&self) -> bool {
        self.violation_count == 0
    }
}

#[derive(Clone, Default)]
struct ScanAcc {
    max: i64,
    argmax: Option<u64>,
    violations: u64,
    samples: Vec<u64>,
}

impl ScanAcc {
    fn merge(mut self, o: ScanAcc) -> ScanAcc {
        if o.max > self.max || (o.max == self.max && o.argmax < self.argmax && o.argmax.is_some()) {
            self.max = o.max;
            self.argmax = o.argmax;
        }
        self.violations += o.violations;
        self.samples.extend(o.samples);
        self.samples.sort_unstable();
        self.samples.truncate(VIOLATION_SAMPLES);
        self
    }
}

fn decode_index(mut idx: u64, base: u64, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut() {
        *slot = (idx % base) as usize;
        idx /= base;
    }
    out
}

fn scan_fixed<const R: usize>(rows: &[Vec<i64>], bound: i64) -> ScanAcc {
    let c = R + 1;
    let base = rows.len() as u64;
    let total = base.pow(R as u32);
    (0..total)
        .into_par_iter()
        .fold(ScanAcc::default, |mut acc, idx| {
            let mut pick = [0usize; R];
            let mut rest = idx;
            for slot in pick.iter_mut() {
                *slot = (rest % base) as usize;
                rest /= base;
            }
            let mut worst = 0i64;
            for del in 0..c {
                let mut m = [[0i64; R]; R];
                for (r, &p) in pick.iter().enumerate() {
                    let mut k = 0;
                    for (col, &v) in rows[p].iter().enumerate() {
                        if col != del {
                            m[r][k] = v;
                            k += 1;
                        }
                    }
                }
                worst = worst.max(det_i64(m).abs());
            }
            if worst > acc.max || acc.argmax.is_none() {
                acc.max = acc.max.max(worst);
                if worst >= acc.max {
                    acc.argmax = Some(idx);
                }
            }
            if worst > bound {
                acc.violations += 1;
                if acc.samples.len() < VIOLATION_SAMPLES {
                    acc.samples.push(idx);
                }
            }
            acc
        })
        .reduce(ScanAcc::default, ScanAcc::merge)
}

/// Column-deleted minors of `(n-1) x n` pattern matrices against `2^(n-1)`.
pub fn minor_scan(n: usize, mode: ScanMode) -> Result<MinorScanReport> {
    if n < 2 {
        return Err(CanonError::InvalidArgument("pattern matrices need n >= 2".into()));
    }
    let rows = pattern_rows(n);
    let bound = additive_bound(n)?.to_integer();
    let r = n - 1;
    let mk_matrix = |pick: &[usize]| pick.iter().map(|&p| rows[p].clone()).collect::<Vec<_>>();
    match mode {
        ScanMode::Exhaustive => {
            if n > MINOR_SCAN_EXHAUSTIVE_MAX {
                return Err(CanonError::InvalidArgument(format!(
                    "exhaustive scan is limited to n <= {MINOR_SCAN_EXHAUSTIVE_MAX}; use random mode"
                )));
            }
            let b = bound.to_i64().unwrap();
            let acc = match r {
                1 => scan_fixed::<1>(&rows, b),
                2 => scan_fixed::<2>(&rows, b),
                3 => scan_fixed::<3>(&rows, b),
                _ => scan_fixed::<4>(&rows, b),
            };
            let base = rows.len() as u64;
            let matrices = base.pow(r as u32);
            Ok(MinorScanReport {
                n,
                mode,
                row_count: rows.len(),
                matrices,
                minors: matrices * n as u64,
                max_abs_minor: acc.max.to_string(),
                bound: bound.to_string(),
                argmax: acc.argmax.map(|i| mk_matrix(&decode_index(i, base, r))).unwrap_or_default(),
                violation_count: acc.violations,
                violations: acc.samples.iter().map(|&i| mk_matrix(&decode_index(i, base, r))).collect(),
            })
        }
        ScanMode::Random { iterations, seed } => {
            if iterations == 0 {
                return Err(CanonError::InvalidArgument("iterations must be at least 1".into()));
            }
            let results: Vec<(Vec<usize>, BigInt)> = (0..iterations)
                .into_par_iter()
                .map(|t| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ t as u64);
                    let pick: Vec<usize> = (0..r).map(|_| rng.gen_range(0..rows.len())).collect();
                    let worst = (0..n)
                        .map(|del| {
                            let m = Matrix::from_rows(
                                pick.iter()
                                    .map(|&p| {
                                        rows[p]
                                            .iter()
                                            .enumerate()
                                            .filter(|(c, _)| *c != del)
                                            .map(|(_, &v)| BigInt::from(v))
                                            .collect()
                                    })
                                    .collect(),
                            )
                            .and_then(|m| bareiss_det(&m));
                            m.map(|d| d.abs()).unwrap_or_default()
                        })
                        .max()
                        .unwrap_or_default();
                    (pick, worst)
                })
                .collect();
            let mut max = BigInt::zero();
            let mut argmax = Vec::new();
            let mut violations = Vec::new();
            let mut count = 0u64;
            for (pick, w) in results {
                if w > bound {
                    count += 1;
                    if violations.len() < VIOLATION_SAMPLES {
                        violations.push(mk_matrix(&pick));
                    }
                }
                if w > max || argmax.is_empty() {
                    max = max.max(w);
                    argmax = mk_matrix(&pick);
                }
            }
            Ok(MinorScanReport {
                n,
                mode,
                row_count: rows.len(),
                matrices: iterations as u64,
                minors: iterations as u64 * n as u64,
                max_abs_minor: max.to_string(),
                bound: bound.to_string(),
                argmax,
                violation_count: count,
                violations,
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdditiveSmallReport {
    pub n: usize,
    pub subsets: usize,
    pub unique_solution_subsets: usize,
    /// Distinct solution vectors of unique-solution subsets.
    pub points: Vec<Vec<String>>,
    pub max_abs: String,
    pub bound: String,
    pub bound_violations: Vec<Vec<String>>,
    /// Vectors (unique solutions plus a fixed grid) run through the
    /// replacement search.
    pub replacement_checked: usize,
    pub replacement_failures: Vec<Vec<String>>,
}

impl AdditiveSmallReport {
    pub fn is_clean(&self) -> bool {
        self.bound_violations.is_empty() && self.replacement_failures.is_empty()
    }
}

fn unique_solution<const N: usize>(rows: &[(Vec<i64>, i64)]) -> Option<Vec<BigRational>> {
    let mut a = [[0i64; N]; N];
    for (r, (row, _)) in rows.iter().enumerate() {
        a[r].copy_from_slice(row);
    }
    let d = det_i64(a);
    if d == 0 {
        return None;
    }
    Some(
        (0..N)
            .map(|j| {
                let mut aj = a;
                for (r, (_, b)) in rows.iter().enumerate() {
                    aj[r][j] = *b;
                }
                BigRational::new(det_i64(aj).into(), d.into())
            })
            .collect(),
    )
}

/// A vector solving `satisfied_subset(x, W_n)` with every coordinate drawn
/// from `{x_i, 0, 1, 2, 1/2}` and bounded by `2^(n-1)` in modulus.
pub fn small_value_replacement(x: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = x.len();
    let bound = additive_bound(n.max(1)).ok()?;
    let sys = satisfied_subset_rational(x, Universe::W);
    let eqs: Vec<CanonicalEquation> = sys.equations().copied().collect();
    let consts = [0, 1, 2].map(|v| BigRational::from_integer(v.into()));
    let cands: Vec<Vec<BigRational>> = x
        .iter()
        .map(|xi| {
            let mut c: Vec<BigRational> = consts.to_vec();
            c.push(BigRational::new(1.into(), 2.into()));
            if xi.abs() <= bound && !c.contains(xi) {
                c.insert(0, xi.clone());
            }
            c
        })
        .collect();
    fn rec(
        i: usize,
        cur: &mut Vec<BigRational>,
        cands: &[Vec<BigRational>],
        eqs: &[CanonicalEquation],
    ) -> bool {
        if i == cands.len() {
            return true;
        }
        for c in &cands[i] {
            cur.push(c.clone());
            let ok = eqs
                .iter()
                .filter(|e| e.max_index() == i + 1)
                .all(|e| e.holds_rational(cur));
            if ok && rec(i + 1, cur, cands, eqs) {
                return true;
            }
            cur.pop();
        }
        false
    }
    let mut cur = Vec::with_capacity(n);
    rec(0, &mut cur, &cands, &eqs).then_some(cur)
}

fn replacement_grid(n: usize) -> Vec<Vec<BigRational>> {
    let vals: Vec<BigRational> = [(-3, 1), (-1, 1), (0, 1), (1, 2), (1, 1), (2, 1), (3, 1), (5, 1), (7, 1), (100, 1)]
        .iter()
        .map(|&(a, b)| BigRational::new(a.into(), b.into()))
        .collect();
    let mut out: Vec<Vec<BigRational>> = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                vals.iter().map(move |x| {
                    let mut v = v.clone();
                    v.push(x.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// Every unique-solution `n`-subset of `W_n` (n <= 4) has its solution
/// within `2^(n-1)`, and the small-value replacement exists for each such
/// solution and for a fixed grid of larger vectors.
pub fn verify_additive_small(n: usize) -> Result<AdditiveSmallReport> {
    if !(1..=4).contains(&n) {
        return Err(CanonError::InvalidArgument("n must be between 1 and 4".into()));
    }
    let w = universe(n, Universe::W);
    let rows: Vec<(Vec<i64>, i64)> = w.iter().map(|e| equation_row(e, n)).collect::<Result<_>>()?;
    let subsets = combinations(w.len(), n);
    let solved: Vec<Vec<BigRational>> = subsets
        .par_iter()
        .filter_map(|s| {
            let pick: Vec<(Vec<i64>, i64)> = s.iter().map(|&i| rows[i].clone()).collect();
            match n {
                1 => unique_solution::<1>(&pick),
                2 => unique_solution::<2>(&pick),
                3 => unique_solution::<3>(&pick),
                _ => unique_solution::<4>(&pick),
            }
        })
        .collect();
    let unique_count = solved.len();
    let points: BTreeSet<Vec<BigRational>> = solved.into_iter().collect();
    let bound = additive_bound(n)?;
    let max_abs = points.iter().map(|p| infinity_norm(p)).max().unwrap_or_else(BigRational::zero);
    let show = |p: &Vec<BigRational>| p.iter().map(format_rational).collect::<Vec<_>>();
    let bound_violations: Vec<Vec<String>> = points.iter().filter(|p| infinity_norm(p) > bound).map(show).collect();
    let mut probes: Vec<Vec<BigRational>> = points.iter().cloned().collect();
    probes.extend(replacement_grid(n));
    let replacement_failures: Vec<Vec<String>> = probes
        .par_iter()
        .filter(|x| small_value_replacement(x).is_none())
        .map(show)
        .collect();
    Ok(AdditiveSmallReport {
        n,
        subsets: subsets.len(),
        unique_solution_subsets: unique_count,
        points: points.iter().map(show).collect(),
        max_abs: format_rational(&max_abs),
        bound: format_rational(&bound),
        bound_violations,
        replacement_checked: probes.len(),
        replacement_failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use proptest::prelude::*;

    fn sys(n: usize, eqs: &[CanonicalEquation]) -> CanonicalSystem {
        CanonicalSystem::from_equations(n, eqs.iter().copied()).unwrap()
    }

    #[test]
    fn affine_descriptions() {
        assert_eq!(
            solve_w(&sys(2, &[Unit(1), Add(1, 1, 2)])).unwrap(),
            AffineDescription::Point(vec![int(1), int(2)])
        );
        let d = solve_w(&sys(2, &[Add(1, 1, 1)])).unwrap();
        match d {
            AffineDescription::Subspace { particular, basis } => {
                assert_eq!(particular[0], int(0));
                assert_eq!(basis, vec![vec![int(0), int(1)]]);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            solve_w(&sys(2, &[Unit(1), Add(1, 2, 1)])).unwrap(),
            AffineDescription::Point(vec![int(1), int(0)])
        );
        assert_eq!(solve_w(&sys(1, &[Unit(1), Add(1, 1, 1)])).unwrap(), AffineDescription::Inconsistent);
        assert!(matches!(solve_w(&sys(2, &[Mul(1, 1, 2)])), Err(CanonError::MulPresent)));
    }

    #[test]
    fn refinement() {
        assert_eq!(refine_to_point(&sys(2, &[Add(1, 1, 1)])).unwrap().point, vec![int(0), int(0)]);
        assert_eq!(refine_to_point(&sys(3, &[])).unwrap().point, vec![int(0); 3]);
        let r = refine_to_point(&sys(2, &[Unit(1)])).unwrap();
        assert_eq!(r.point, vec![int(1), int(0)]);
        assert_eq!(r.steps, vec![2]);
    }

    #[test]
    fn rational_bound_examples() {
        let c = rational_bound_check(&sys(3, &[Unit(1), Add(1, 1, 2), Add(2, 2, 3)])).unwrap();
        assert_eq!(c.point, vec![int(1), int(2), int(4)]);
        assert!(c.ok);
        let c = rational_bound_check(&sys(2, &[Unit(1), Add(2, 2, 1)])).unwrap();
        assert_eq!(c.point, vec![int(1), rat(1, 2)]);
        assert!(c.ok);
    }

    #[test]
    fn integer_bound_examples() {
        let c = integer_bound_check(&sys(2, &[Unit(1), Add(1, 1, 2)])).unwrap();
        assert_eq!(c.point, Some(vec!["1".into(), "2".into()]));
        let c = integer_bound_check(&sys(2, &[Add(2, 2, 1), Unit(1)])).unwrap();
        assert_eq!(c.status, IntegerStatus::NotIntegerConsistent);
        let c = integer_bound_check(&sys(3, &[Unit(1), Add(2, 3, 1)])).unwrap();
        assert!(c.ok);
        let p: Vec<i64> = c.point.unwrap().iter().map(|s| s.parse().unwrap()).collect();
        assert_eq!(p[0], 1);
        assert_eq!(p[1] + p[2], 1);
        assert!(p.iter().all(|v| v.abs() <= 2));
    }

    #[test]
    fn lattice_matches_brute_force() {
        // x1 + x1 = x2, x2 + x3 = x1: integer solutions (t, 2t, -t).
        let s = sys(3, &[Add(1, 1, 2), Add(2, 3, 1)]);
        let (rows, rhs) = linear_system(&s).unwrap();
        let (x0, k) = integer_solution_lattice(&rows, &rhs, 3).unwrap();
        assert_eq!(k.len(), 1);
        let v: Vec<i64> = k[0].iter().map(|x| x.to_i64().unwrap()).collect();
        assert!(v == vec![1, 2, -1] || v == vec![-1, -2, 1]);
        assert!(x0.iter().all(Zero::is_zero));
    }

    #[test]
    fn probe_is_deterministic_and_bounded() {
        let a = probe_additive(4, 50, 42).unwrap();
        let b = probe_additive(4, 50, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.is_clean());
        assert!(probe_additive(4, 0, 1).is_err());
    }

    #[test]
    fn probe_n2_reachable_norms() {
        // Completions of x1 = 1 by one row e_i + e_j - e_k with nonzero second coordinate.
        let mut norms = BTreeSet::new();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let mut r = vec![0i64; 2];
                    r[i] += 1;
                    r[j] += 1;
                    r[k] -= 1;
                    if r[1] == 0 {
                        continue;
                    }
                    let x2 = BigRational::new((-r[0]).into(), r[1].into());
                    norms.insert(infinity_norm(&[int(1), x2]));
                }
            }
        }
        let max = norms.iter().max().unwrap().clone();
        assert_eq!(max, int(2));
        let rep = probe_additive(2, 200, 7).unwrap();
        assert!(norms.contains(&crate::scalar::parse_rational(&rep.max_norm).unwrap()));
    }

    #[test]
    fn pattern_rows_counts() {
        assert_eq!(pattern_rows(2).len(), 4);
        assert_eq!(pattern_rows(3).len(), 12);
        assert_eq!(pattern_rows(5).len(), 55);
        assert!(pattern_rows(4).iter().all(|r| is_pattern_row(r)));
        assert!(!is_pattern_row(&[1, 1, 0]));
    }

    #[test]
    fn minor_scan_small() {
        let r = minor_scan(2, ScanMode::Exhaustive).unwrap();
        assert_eq!(r.max_abs_minor, "2");
        assert_eq!(r.matrices, 4);
        assert!(r.is_clean());
        let r = minor_scan(3, ScanMode::Exhaustive).unwrap();
        assert_eq!(r.matrices, 144);
        assert!(r.max_abs_minor.parse::<i64>().unwrap() <= 4);
        let r = minor_scan(6, ScanMode::Random { iterations: 200, seed: 3 }).unwrap();
        assert!(r.is_clean());
        assert!(minor_scan(6, ScanMode::Exhaustive).is_err());
    }

    #[test]
    fn additive_small() {
        let r = verify_additive_small(2).unwrap();
        assert!(r.is_clean());
        let allowed: BTreeSet<Vec<String>> = [
            ["0", "0"], ["1", "0"], ["0", "1"], ["1", "1"], ["1", "2"], ["2", "1"], ["1", "1/2"], ["1/2", "1"],
        ]
        .iter()
        .map(|p| p.iter().map(|s| s.to_string()).collect())
        .collect();
        assert!(r.points.iter().all(|p| allowed.contains(p)), "{:?}", r.points);
        let r = verify_additive_small(3).unwrap();
        assert!(r.is_clean());
        assert_eq!(r.subsets, 1330);
    }

    #[test]
    fn replacement_handles_large_values() {
        // 100 = 100 + 0 style relations collapse onto small values.
        let x = vec![int(1), int(100), int(101)];
        let r = small_value_replacement(&x).unwrap();
        let s = satisfied_subset_rational(&x, Universe::W);
        assert!(s.equations().all(|e| e.holds_rational(&r)));
        assert!(r.iter().all(|v| v.abs() <= int(4)));
    }

    proptest! {
        #[test]
        fn rows_after_unit_substitution_are_short(i in 1usize..6, j in 1usize..6, k in 1usize..6) {
            let (mut row, mut b) = equation_row(&CanonicalEquation::add(i, j, k), 5).unwrap();
            // Move x1 = 1 to the right side.
            b -= row[0];
            row[0] = 0;
            let contradictory = row.iter().all(|&v| v == 0) && b != 0;
            prop_assert!(contradictory || row.iter().map(|v| v * v).sum::<i64>() <= 5);
            // Replacing any column by the right side keeps the row short.
            for c in 1..5 {
                let mut r = row.clone();
                r[c] = b;
                prop_assert!(contradictory || r.iter().map(|v| v * v).sum::<i64>() <= 5);
            }
        }

        #[test]
        fn refined_point_solves(eqs in proptest::collection::vec((0u8..2, 1usize..5, 1usize..5, 1usize..5), 0..6)) {
            let list: Vec<CanonicalEquation> = eqs.iter().map(|&(t, i, j, k)| if t == 0 { Unit(i) } else { CanonicalEquation::add(i, j, k) }).collect();
            let s = sys(4, &list);
            if solve_w(&s).unwrap() != AffineDescription::Inconsistent {
                let r = refine_to_point(&s).unwrap();
                prop_assert!(s.equations().all(|e| e.holds_rational(&r.point)));
                prop_assert!(r.steps.len() <= 3);
                prop_assert!(rational_bound_check(&s).unwrap().ok);
                prop_assert!(integer_bound_check(&s).unwrap().ok);
            }
        }

        #[test]
        fn minors_flip_sign_under_row_swap(a in 0usize..28, b in 0usize..28, c in 0usize..28, del in 0usize..4) {
            let rows = pattern_rows(4);
            let minor = |p: [usize; 3]| {
                let mut m = [[0i64; 3]; 3];
                for (r, &pi) in p.iter().enumerate() {
                    let mut kk = 0;
                    for (col, &v) in rows[pi].iter().enumerate() {
                        if col != del { m[r][kk] = v; kk += 1; }
                    }
                }
                det_i64(m)
            };
            prop_assert_eq!(minor([a, b, c]), -minor([b, a, c]));
        }
    }
}
