//! Continuous retractions of `R` onto `[0, 1]` and of `R^2` onto `[-2, 2]^2`
//! that respect `x = 1`, `x + y = z` and `x y = z` wherever those hold.
//!
//! `f2` is given exactly on the closed set `T` (the box plus eight curves)
//! and by the weighted average `g` off it.

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CanonError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Point2<F> {
    pub x: F,
    pub y: F,
}

pub type Point = Point2<f64>;

impl<F: Float> Point2<F> {
    /// Fails on NaN or infinite coordinates.
    pub fn new(x: F, y: F) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(CanonError::InvalidArgument("point coordinates must be finite".into()));
        }
        Ok(Point2 { x, y })
    }

    fn raw(x: F, y: F) -> Self {
        Point2 { x, y }
    }

    pub fn sup_norm(&self) -> F {
        self.x.abs().max(self.y.abs())
    }

    pub fn dist(&self, other: &Self) -> F {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

fn c<F: Float>(v: f64) -> F {
    F::from(v).expect("constant representable")
}

/// `0` below 0, `x` on `[0, 1]`, `1` above 1.
pub fn f1<F: Float>(x: F) -> F {
    x.max(F::zero()).min(F::one())
}

/// Clamp to `[-2, 2]`.
pub fn sigma<F: Float>(x: F) -> F {
    let two = c::<F>(2.0);
    x.max(-two).min(two)
}

/// `y = x^2`, decided exactly: the fused `x*x - y` rounds to zero only when it is zero.
fn is_square_of<F: Float>(y: F, x: F) -> bool {
    x.mul_add(x, -y) == F::zero()
}

fn in_box<F: Float>(p: &Point2<F>) -> bool {
    p.sup_norm() <= c(2.0)
}

/// The eight curves of `T` besides the box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Curve {
    YOne,
    XOne,
    YZero,
    XZero,
    YTwiceX,
    XTwiceY,
    YSquareX,
    XSquareY,
}

impl Curve {
    pub const ALL: [Curve; 8] = [
        Curve::YOne,
        Curve::XOne,
        Curve::YZero,
        Curve::XZero,
        Curve::YTwiceX,
        Curve::XTwiceY,
        Curve::YSquareX,
        Curve::XSquareY,
    ];

    pub fn contains<F: Float>(self, p: &Point2<F>) -> bool {
        let (x, y) = (p.x, p.y);
        let two = c::<F>(2.0);
        match self {
            Curve::YOne => y == F::one(),
            Curve::XOne => x == F::one(),
            Curve::YZero => y == F::zero(),
            Curve::XZero => x == F::zero(),
            Curve::YTwiceX => y == two * x,
            Curve::XTwiceY => x == two * y,
            Curve::YSquareX => is_square_of(y, x),
            Curve::XSquareY => is_square_of(x, y),
        }
    }

    /// `|distance-like term|` used by the weights of `g`.
    fn gap<F: Float>(self, p: &Point2<F>) -> F {
        let (x, y) = (p.x, p.y);
        let two = c::<F>(2.0);
        match self {
            Curve::YOne => (y - F::one()).abs(),
            Curve::XOne => (x - F::one()).abs(),
            Curve::YZero => y.abs(),
            Curve::XZero => x.abs(),
            Curve::YTwiceX => (y - two * x).abs(),
            Curve::XTwiceY => (x - two * y).abs(),
            Curve::YSquareX => x.mul_add(-x, y).abs(),
            Curve::XSquareY => y.mul_add(-y, x).abs(),
        }
    }

    /// The point of the curve `g` averages in for `p`.
    fn foot<F: Float>(self, p: &Point2<F>) -> Point2<F> {
        let (x, y) = (p.x, p.y);
        let two = c::<F>(2.0);
        match self {
            Curve::YOne => Point2::raw(x, F::one()),
            Curve::XOne => Point2::raw(F::one(), y),
            Curve::YZero => Point2::raw(x, F::zero()),
            Curve::XZero => Point2::raw(F::zero(), y),
            Curve::YTwiceX => Point2::raw(x, two * x),
            Curve::XTwiceY => Point2::raw(two * y, y),
            Curve::YSquareX => Point2::raw(x, x * x),
            Curve::XSquareY => Point2::raw(y * y, y),
        }
    }

    /// `f2` at a point of the curve, trusting that the point lies on it.
    pub fn f2_at<F: Float>(self, p: &Point2<F>) -> Point2<F> {
        if in_box(p) {
            *p
        } else {
            self.value(p)
        }
    }

    /// `f2` at the point of the curve with parameter `t`.
    pub fn f2_param<F: Float>(self, t: F) -> Point2<F> {
        self.f2_at(&self.foot(&Point2::raw(t, t)))
    }

    /// `f2` on the part of the curve outside the box, by its parameter.
    fn value<F: Float>(self, p: &Point2<F>) -> Point2<F> {
        let (x, y) = (p.x, p.y);
        let (zero, one, two, four) = (F::zero(), F::one(), c::<F>(2.0), c::<F>(4.0));
        let sqrt2 = two.sqrt();
        // Lines and parabolas share one parametrization `t -> (t, phi(t))`.
        let along = |t: F, square: bool| -> (F, F) {
            if square {
                if t < -sqrt2 {
                    (-sqrt2, two)
                } else if t <= sqrt2 {
                    (t, t * t)
                } else if t <= two {
                    let s = four - t * t;
                    (s.max(zero).sqrt(), s)
                } else {
                    (zero, zero)
                }
            } else if t < -one {
                (-one, -two)
            } else if t <= one {
                (t, two * t)
            } else if t <= two {
                (two - t, four - two * t)
            } else {
                (zero, zero)
            }
        };
        match self {
            Curve::YOne => Point2::raw(sigma(x), one),
            Curve::XOne => Point2::raw(one, sigma(y)),
            Curve::YZero => Point2::raw(sigma(x), zero),
            Curve::XZero => Point2::raw(zero, sigma(y)),
            Curve::YTwiceX => {
                let (a, b) = along(x, false);
                Point2::raw(a, b)
            }
            Curve::XTwiceY => {
                let (a, b) = along(y, false);
                Point2::raw(b, a)
            }
            Curve::YSquareX => {
                let (a, b) = along(x, true);
                Point2::raw(a, b)
            }
            Curve::XSquareY => {
                let (a, b) = along(y, true);
                Point2::raw(b, a)
            }
        }
    }
}

/// Membership in `T`, exact for floating-point inputs.
pub fn in_t<F: Float>(p: &Point2<F>) -> bool {
    in_box(p) || Curve::ALL.iter().any(|cv| cv.contains(p))
}

/// Every value the definition of `f2` assigns to `p`: the identity when `p`
/// is in the box, and one value per curve through `p` otherwise.
pub fn branch_values<F: Float>(p: &Point2<F>) -> Vec<(Option<Curve>, Point2<F>)> {
    let mut out = Vec::new();
    if in_box(p) {
        out.push((None, *p));
    }
    for cv in Curve::ALL {
        if cv.contains(p) {
            out.push((Some(cv), cv.value(p)));
        }
    }
    out
}

/// `f2` on `T`.
pub fn f2_on_t<F: Float>(p: &Point2<F>) -> Result<Point2<F>> {
    if in_box(p) {
        return Ok(*p);
    }
    match Curve::ALL.iter().find(|cv| cv.contains(p)) {
        Some(cv) => Ok(cv.value(p)),
        None => Err(CanonError::NotInT(fmt_f(p.x), fmt_f(p.y))),
    }
}

fn fmt_f<F: Float>(v: F) -> String {
    format!("{}", v.to_f64().unwrap_or(f64::NAN))
}

fn box_gap<F: Float>(p: &Point2<F>) -> F {
    (p.x - sigma(p.x)).abs() + (p.y - sigma(p.y)).abs()
}

fn off_t<F: Float>(p: &Point2<F>) -> Result<()> {
    if in_t(p) {
        return Err(CanonError::InT(fmt_f(p.x), fmt_f(p.y)));
    }
    Ok(())
}

/// Sum of the reciprocal distances to the box and the eight curves.
pub fn rho<F: Float>(p: &Point2<F>) -> Result<F> {
    off_t(p)?;
    Ok(Curve::ALL
        .iter()
        .fold(box_gap(p).recip(), |acc, cv| acc + cv.gap(p).recip()))
}

/// The weighted average of `f2` at the nearby points of `T`.
pub fn g<F: Float>(p: &Point2<F>) -> Result<Point2<F>> {
    let r = rho(p)?;
    let bw = box_gap(p).recip();
    let mut sx = sigma(p.x) * bw;
    let mut sy = sigma(p.y) * bw;
    for cv in Curve::ALL {
        let w = cv.gap(p).recip();
        let v = cv.f2_at(&cv.foot(p));
        sx = sx + v.x * w;
        sy = sy + v.y * w;
    }
    Ok(Point2::raw(sx / r, sy / r))
}

/// `f2` everywhere.
pub fn f2<F: Float>(p: &Point2<F>) -> Result<Point2<F>> {
    if in_t(p) {
        f2_on_t(p)
    } else {
        g(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchCheck {
    pub point: Point,
    pub values: Vec<Point>,
    pub agree: bool,
}

/// Evaluates every branch at the points where two of them meet, including
/// the ends of each interval of the table approached from both sides.
pub fn branch_self_check(tol: f64) -> Vec<BranchCheck> {
    let s2 = 2f64.sqrt();
    let mut pts = vec![(2.0, 4.0), (4.0, 2.0), (2.0, 1.0), (1.0, 2.0), (-2.0, 1.0), (2.0, 0.0), (0.0, -2.0)];
    for &t in &[-2.0, -1.0, 1.0, 2.0, -s2, s2] {
        pts.push((t, 2.0 * t));
        pts.push((2.0 * t, t));
        pts.push((t, t * t));
        pts.push((t * t, t));
    }
    let mut out: Vec<BranchCheck> = pts
        .into_iter()
        .map(|(x, y)| {
            let p = Point2::raw(x, y);
            let values: Vec<Point> = branch_values(&p).into_iter().map(|(_, v)| v).collect();
            let agree = values.iter().all(|v| v.dist(&values[0]) <= tol);
            BranchCheck { point: p, values, agree }
        })
        .collect();
    // One-sided limits at the interval ends: the curve value just outside
    // the box must approach the identity value on the box boundary.
    for cv in Curve::ALL {
        for t in [-1.0, 1.0, 2.0, -2.0, s2, -s2] {
            for side in [-1.0, 1.0] {
                let h = 1e-9 * side;
                let p = cv.foot(&Point2::raw(t + h, t + h));
                if in_box(&p) {
                    continue;
                }
                let lim = cv.f2_param(t);
                let v = cv.value(&p);
                let agree = v.dist(&lim) <= 1e-4;
                out.push(BranchCheck { point: p, values: vec![v, lim], agree });
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RetractionReport {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub range_max_norm: f64,
    pub range_passed: bool,
    pub identity_checked: usize,
    pub identity_passed: bool,
    pub branch_points: usize,
    pub branch_passed: bool,
    pub arithmetic_checked: usize,
    pub arithmetic_max_error: f64,
    pub arithmetic_passed: bool,
    pub continuity_points: usize,
    pub continuity_offsets: Vec<f64>,
    pub continuity_final_gap: f64,
    pub continuity_non_monotone: usize,
    pub continuity_passed: bool,
    pub lipschitz_passed: bool,
    pub passed: bool,
}

/// Largest final gap the continuity probe accepts.
pub const CONTINUITY_GAP: f64 = 1e-5;
const RANGE_SLACK: f64 = 1e-12;
const OFFSETS: [f64; 3] = [1e-4, 1e-6, 1e-8];

fn scale_sample(rng: &mut ChaCha8Rng) -> f64 {
    let scale = [3.0, 10.0, 100.0, 1e4][rng.gen_range(0..4)];
    rng.gen_range(-scale..=scale)
}

/// Worst deviation of `f2` from the relation of each curve, at parameter `x`.
/// Parabola points are taken by parameter since `x * x` may round off `T`.
fn arithmetic_error(x: f64) -> f64 {
    Curve::ALL
        .iter()
        .map(|&cv| {
            let v = cv.f2_param(x);
            match cv {
                Curve::YOne => (v.y - 1.0).abs(),
                Curve::XOne => (v.x - 1.0).abs(),
                Curve::YZero => v.y.abs(),
                Curve::XZero => v.x.abs(),
                Curve::YTwiceX => (v.y - 2.0 * v.x).abs(),
                Curve::XTwiceY => (v.x - 2.0 * v.y).abs(),
                Curve::YSquareX => (v.y - v.x * v.x).abs(),
                Curve::XSquareY => (v.x - v.y * v.y).abs(),
            }
        })
        .fold(0.0, f64::max)
}

/// A point of `T` outside the open box, its `f2` value, and a direction
/// leaving `T`.
fn boundary_sample(rng: &mut ChaCha8Rng) -> Option<(Point, Point, f64, f64)> {
    let (p, target) = if rng.gen_bool(0.2) {
        let t = rng.gen_range(-2.0..=2.0);
        let side = if rng.gen_bool(0.5) { 2.0 } else { -2.0 };
        let p = if rng.gen_bool(0.5) {
            Point2::raw(side, t)
        } else {
            Point2::raw(t, side)
        };
        (p, p)
    } else {
        let cv = Curve::ALL[rng.gen_range(0..8)];
        let t = rng.gen_range(-10.0..=10.0);
        (cv.foot(&Point2::raw(t, t)), cv.f2_param(t))
    };
    if p.sup_norm() < 2.0 {
        return None;
    }
    for _ in 0..20 {
        let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let (dx, dy) = (a.cos(), a.sin());
        if OFFSETS
            .iter()
            .all(|&e| !in_t(&Point2::raw(p.x + e * dx, p.y + e * dy)))
        {
            return Some((p, target, dx, dy));
        }
    }
    None
}

/// Runs the range, identity, branch, arithmetic, continuity and Lipschitz
/// checks on `samples` seeded points; the continuity probe uses
/// `samples / 100` points of `T`.
pub fn check(samples: usize, seed: u64, tol: f64) -> Result<RetractionReport> {
    let chunks = 64usize;
    let per = samples.div_ceil(chunks);
    type Partial = (f64, usize, bool, usize, f64, bool);
    let parts: Vec<Result<Partial>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let n = per.min(samples.saturating_sub(k * per));
            let (mut max_norm, mut id_checked, mut id_ok) = (0f64, 0usize, true);
            let (mut ar_checked, mut ar_err, mut lip_ok) = (0usize, 0f64, true);
            for _ in 0..n {
                let p = Point2::raw(scale_sample(&mut rng), scale_sample(&mut rng));
                max_norm = max_norm.max(f2(&p)?.sup_norm());
                let b = Point2::raw(rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0));
                id_checked += 1;
                id_ok &= f2(&b)? == b;
                let x = scale_sample(&mut rng);
                ar_checked += 1;
                ar_err = ar_err.max(arithmetic_error(x));
                let (a, b2) = (p.x, x);
                lip_ok &= (f1(a) - f1(b2)).abs() <= (a - b2).abs() && (sigma(a) - sigma(b2)).abs() <= (a - b2).abs();
            }
            Ok((max_norm, id_checked, id_ok, ar_checked, ar_err, lip_ok))
        })
        .collect();
    let mut range_max_norm = 0f64;
    let (mut identity_checked, mut identity_passed) = (0, true);
    let (mut arithmetic_checked, mut arithmetic_max_error, mut lipschitz_passed) = (0, 0f64, true);
    for p in parts {
        let (m, ic, io, ac, ae, lo) = p?;
        range_max_norm = range_max_norm.max(m);
        identity_checked += ic;
        identity_passed &= io;
        arithmetic_checked += ac;
        arithmetic_max_error = arithmetic_max_error.max(ae);
        lipschitz_passed &= lo;
    }
    let branches = branch_self_check(1e-12);
    let branch_passed = branches.iter().all(|b| b.agree);

    let points = (samples / 100).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut probes = Vec::with_capacity(points);
    while probes.len() < points {
        if let Some(s) = boundary_sample(&mut rng) {
            probes.push(s);
        }
    }
    let gaps: Vec<Result<(f64, bool)>> = probes
        .par_iter()
        .map(|&(p, target, dx, dy)| {
            let mut last = f64::INFINITY;
            let mut monotone = true;
            for e in OFFSETS {
                let gap = g(&Point2::raw(p.x + e * dx, p.y + e * dy))?.dist(&target);
                monotone &= gap <= last + RANGE_SLACK;
                last = gap;
            }
            Ok((last, monotone))
        })
        .collect();
    let (mut continuity_final_gap, mut continuity_non_monotone) = (0f64, 0);
    for r in gaps {
        let (gap, mono) = r?;
        continuity_final_gap = continuity_final_gap.max(gap);
        continuity_non_monotone += usize::from(!mono);
    }
    let range_passed = range_max_norm <= 2.0 + RANGE_SLACK;
    let arithmetic_passed = arithmetic_max_error <= tol;
    let continuity_passed = continuity_final_gap < CONTINUITY_GAP && continuity_non_monotone == 0;
    let passed = range_passed && identity_passed && branch_passed && arithmetic_passed && continuity_passed && lipschitz_passed;
    Ok(RetractionReport {
        samples,
        seed,
        tol,
        range_max_norm,
        range_passed,
        identity_checked,
        identity_passed,
        branch_points: branches.len(),
        branch_passed,
        arithmetic_checked,
        arithmetic_max_error,
        arithmetic_passed,
        continuity_points: points,
        continuity_offsets: OFFSETS.to_vec(),
        continuity_final_gap,
        continuity_non_monotone,
        continuity_passed,
        lipschitz_passed,
        passed,
    })
}

/// `x,y,f2_x,f2_y,in_t` rows for `n` seeded points.
pub fn sample_csv(n: usize, seed: u64) -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from("x,y,f2_x,f2_y,in_t\n");
    for _ in 0..n {
        let p = Point2::raw(scale_sample(&mut rng), scale_sample(&mut rng));
        let v = f2(&p)?;
        out.push_str(&format!("{},{},{},{},{}\n", p.x, p.y, v.x, v.y, in_t(&p)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> Point {
        Point2::new(x, y).unwrap()
    }

    #[test]
    fn one_dimensional() {
        assert_eq!(f1(-5.0), 0.0);
        assert_eq!(f1(0.5), 0.5);
        assert_eq!(f1(7.0), 1.0);
        assert_eq!(sigma(-3.0), -2.0);
        assert_eq!(sigma(0.0), 0.0);
        assert_eq!(sigma(2.5), 2.0);
        assert_eq!(f1(0.5f32), 0.5f32);
    }

    #[test]
    fn table_values() {
        let v = f2_on_t(&pt(1.5, 2.25)).unwrap();
        assert!((v.x - 1.75f64.sqrt()).abs() < 1e-15 && v.y == 1.75);
        assert_eq!(f2_on_t(&pt(0.5, 0.25)).unwrap(), pt(0.5, 0.25));
        assert_eq!(f2_on_t(&pt(3.0, 6.0)).unwrap(), pt(0.0, 0.0));
        assert_eq!(f2_on_t(&pt(-7.0, 1.0)).unwrap(), pt(-2.0, 1.0));
        assert_eq!(f2_on_t(&pt(1.0, 9.0)).unwrap(), pt(1.0, 2.0));
        assert_eq!(f2_on_t(&pt(-3.0, 9.0)).unwrap(), pt(-(2f64.sqrt()), 2.0));
        assert_eq!(f2_on_t(&pt(-3.0, -6.0)).unwrap(), pt(-1.0, -2.0));
        assert!(matches!(f2_on_t(&pt(10.0, 0.5)), Err(CanonError::NotInT(..))));
        assert!(matches!(g(&pt(1.0, 5.0)), Err(CanonError::InT(..))));
        assert!(Point2::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn off_t_points() {
        for p in [pt(100.0, 100.0), pt(10.0, 0.5), pt(-3.3, 7.1)] {
            assert!(rho(&p).unwrap() > 0.0);
            assert!(f2(&p).unwrap().sup_norm() <= 2.0 + 1e-12);
        }
        let target = f2_on_t(&pt(1.5, 2.25)).unwrap();
        let near = g(&pt(1.5, 2.25 + 1e-8)).unwrap();
        assert!(near.dist(&target) < 1e-6);
    }

    #[test]
    fn branches_agree() {
        let bad: Vec<_> = branch_self_check(1e-12).into_iter().filter(|b| !b.agree).collect();
        assert!(bad.is_empty(), "{bad:?}");
    }

    #[test]
    fn small_run() {
        let r = check(20_000, 3, 1e-9).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r, check(20_000, 3, 1e-9).unwrap());
    }
}
