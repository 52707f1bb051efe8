//! The release checks: thirteen end-to-end criteria, each with its own
//! tolerance and time limit.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::compiler::{compile, count_new_vars, profile, random_poly_system, verify_compilation};
use crate::config::Config;
use crate::error::Result;
use crate::gallery;
use crate::linear::{minor_scan, probe_additive, verify_additive_small, ScanMode};
use crate::neighbourhoods::{cardinality_check, compute_ktilde, expected_ktilde, MapField};
use crate::nonlinear::{
    catalog_maximal, chain_check, compare_with_family, doubling_witness_check, exhaustive_coverage,
    pair_scan, probe_greedy_distinct, probe_ideal_growth, reference_family, small_solutions_two, Domain,
    GreedyOptions, IdealVariant,
};
use crate::retraction;

pub const CRITERIA: usize = 13;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub limit_seconds: f64,
}

impl CriterionResult {
    /// `PASS  3 title (12.3 s): detail`.
    pub fn line(&self) -> String {
        format!(
            "{} {:>2} {} ({:.1} s, limit {:.0} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds,
            self.limit_seconds,
            self.detail
        )
    }
}

pub fn title(id: usize) -> &'static str {
    match id {
        1 => "reduced pair scan over C",
        2 => "n=2 subset coverage",
        3 => "n=3 maximal value sets",
        4 => "arithmetic neighbourhood sets",
        5 => "pattern matrix minors",
        6 => "additive rank probe",
        7 => "additive unique solutions",
        8 => "counterexample gallery",
        9 => "doubling witness",
        10 => "squaring chain",
        11 => "compiler round trip",
        12 => "randomized nonlinear probes",
        13 => "retraction",
        _ => "unknown",
    }
}

fn limit(id: usize) -> Duration {
    let s = match id {
        1 => 60,
        2 | 8 | 11 => 300,
        3 => 1800,
        5 | 7 => 600,
        13 => 120,
        // No stated limit; generous ceilings keep runaway runs visible.
        _ => 1800,
    };
    Duration::from_secs(s)
}

fn run(id: usize, cfg: &Config) -> Result<(bool, String)> {
    match id {
        1 => {
            let r = pair_scan(Domain::Complex, false, cfg)?;
            Ok((
                r.pairs.len() == 120 && r.is_clean(),
                format!("{} pairs, {}", r.pairs.len(), r.summary()),
            ))
        }
        2 => {
            let r = exhaustive_coverage(2, &small_solutions_two(), cfg)?;
            Ok((
                r.passed() && r.subsets == 1 << 14,
                format!(
                    "{} subsets, {} covered, {} inconsistent, {} uncovered",
                    r.subsets,
                    r.covered,
                    r.inconsistent,
                    r.uncovered.len()
                ),
            ))
        }
        3 => {
            let mut ok = true;
            let mut parts = Vec::new();
            for d in [Domain::Real, Domain::Complex] {
                let cat = catalog_maximal(3, d, cfg)?;
                let family = reference_family(3, d).expect("reference family for n = 3");
                let cmp = compare_with_family(&cat, &family)?;
                ok &= cmp.equal && !cat.partial;
                parts.push(format!("{d}: {} of {} sets, equal {}", cmp.found, cmp.expected, cmp.equal));
            }
            Ok((ok, parts.join("; ")))
        }
        4 => {
            let mut ok = true;
            let mut parts = Vec::new();
            for n in 1..=3 {
                let k = compute_ktilde(n, MapField::Rational, cfg)?;
                let eq = Some(&k.values) == expected_ktilde(n).as_ref();
                ok &= eq;
                parts.push(format!("n={n}: {} values", k.values.len()));
            }
            let c = cardinality_check(3, cfg)?;
            ok &= c.passed;
            parts.push(format!("{} <= {}", c.computed.unwrap_or(0), c.bound));
            Ok((ok, parts.join(", ")))
        }
        5 => {
            let mut ok = true;
            let mut parts = Vec::new();
            for n in 2..=5 {
                let r = minor_scan(n, ScanMode::Exhaustive)?;
                ok &= r.is_clean();
                parts.push(format!("n={n}: max {} <= {}", r.max_abs_minor, r.bound));
            }
            Ok((ok, parts.join(", ")))
        }
        6 => {
            let a = probe_additive(5, 1000, 42)?;
            let b = probe_additive(5, 1000, 42)?;
            Ok((
                a.violations.is_empty() && a.contradictions.is_empty() && a == b,
                format!(
                    "max norm {}, {} violations, {} contradictions, rerun identical {}",
                    a.max_norm,
                    a.violations.len(),
                    a.contradictions.len(),
                    a == b
                ),
            ))
        }
        7 => {
            let mut ok = true;
            let mut parts = Vec::new();
            for n in 1..=4 {
                let r = verify_additive_small(n)?;
                ok &= r.is_clean();
                parts.push(format!("n={n}: max {} <= {}", r.max_abs, r.bound));
            }
            Ok((ok, parts.join(", ")))
        }
        8 => {
            let reports = gallery::run_all(cfg)?;
            let checks: usize = reports.iter().map(|r| r.checks.len()).sum();
            let failed: Vec<String> = reports
                .iter()
                .flat_map(|r| r.failures().into_iter().map(move |c| format!("{}: {}", r.item, c.name)))
                .collect();
            Ok((
                failed.is_empty(),
                format!("{} items, {checks} checks, failed {failed:?}", reports.len()),
            ))
        }
        9 => {
            let mut ok = true;
            for n in 2..=4 {
                ok &= doubling_witness_check(n, cfg)?.passed;
            }
            Ok((ok, "n = 2..4 unique complex solution".into()))
        }
        10 => {
            let mut ok = true;
            let mut parts = Vec::new();
            for n in 3..=5 {
                let w = chain_check(n, cfg)?;
                ok &= w.passed;
                parts.push(format!("n={n}: {} solutions", w.solutions.len()));
            }
            Ok((ok, parts.join(", ")))
        }
        11 => {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let mut failures = Vec::new();
            for i in 0..100 {
                let n = rng.gen_range(1..=3);
                let m = rng.gen_range(1..=2);
                let sys = random_poly_system(n, m, 2, 3, &mut rng);
                let r = compile(&sys)?;
                let prof = profile(&sys)?;
                let c = count_new_vars(&prof.max_coeff, prof.m, n, &prof.degrees)?;
                let counted = BigInt::from(r.counts.total_vars) == &c.p + n && r.counts.p == c.p;
                let v = verify_compilation(&sys, &r, 100, i)?;
                if !counted || !v.passed {
                    failures.push(i);
                }
            }
            Ok((failures.is_empty(), format!("100 systems x 100 trials, failures {failures:?}")))
        }
        12 => {
            let mut ok = true;
            let mut parts = Vec::new();
            let (mut budget, mut trials) = (0usize, 0usize);
            for seed in 0..20 {
                let r = probe_greedy_distinct(4, seed, Domain::Real, GreedyOptions::default(), cfg)?;
                ok &= r.is_clean();
                budget += r.budget_exceeded;
                trials += 1;
            }
            ok &= budget * 5 <= trials;
            parts.push(format!("greedy n=4, 20 seeds: {budget} budget-exceeded"));
            for v in [IdealVariant::WithUnits, IdealVariant::WithoutUnits] {
                let r = probe_ideal_growth(5, 1000, 1, v, cfg)?;
                ok &= r.is_clean() && r.budget_fraction() <= 0.2;
                parts.push(format!(
                    "{v}: max {}, {} violations, {} flags, {} budget-exceeded",
                    r.max_norm,
                    r.violations.len(),
                    r.flags.len(),
                    r.budget_exceeded
                ));
            }
            Ok((ok, parts.join("; ")))
        }
        13 => {
            let r = retraction::check(1_000_000, 3, 1e-9)?;
            Ok((
                r.passed,
                format!(
                    "max norm {:.6}, arithmetic error {:.1e}, final gap {:.1e}",
                    r.range_max_norm, r.arithmetic_max_error, r.continuity_final_gap
                ),
            ))
        }
        _ => Ok((false, format!("no criterion {id}"))),
    }
}

/// Runs one criterion; errors count as failures.
pub fn run_criterion(id: usize, cfg: &Config) -> CriterionResult {
    let start = Instant::now();
    let (passed, detail) = match run(id, cfg) {
        Ok(x) => x,
        Err(e) => (false, format!("error: {e}")),
    };
    let elapsed = start.elapsed();
    let lim = limit(id);
    let in_time = elapsed <= lim;
    CriterionResult {
        id,
        title: title(id),
        passed: passed && in_time,
        detail: if in_time { detail } else { format!("{detail}; over time limit") },
        seconds: elapsed.as_secs_f64(),
        limit_seconds: lim.as_secs_f64(),
    }
}

/// Runs the criteria in order, calling `each` after every one.
pub fn run_all(cfg: &Config, mut each: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    (1..=CRITERIA)
        .map(|id| {
            let r = run_criterion(id, cfg);
            each(&r);
            r
        })
        .collect()
}
