//! Shared report types for probes and scans.

use serde::Serialize;

/// Version of the JSON report layout.
pub const SCHEMA: u32 = 1;

/// A value that broke a bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub trial: usize,
    pub kind: String,
    pub value: String,
    pub bound: String,
    /// The system or matrix that produced it.
    pub witness: String,
}

/// One iteration of a randomized probe.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrialLog {
    pub trial: usize,
    pub seed: u64,
    pub outcome: String,
    pub norm: Option<String>,
}

/// Outcome of a seeded randomized harness.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub probe: String,
    pub n: usize,
    pub seed: u64,
    pub trials: usize,
    /// Largest coordinate modulus seen, exact where possible.
    pub max_norm: String,
    pub max_norm_approx: f64,
    pub bound: String,
    pub violations: Vec<Violation>,
    /// Values beyond a proved bound; always a defect.
    pub contradictions: Vec<Violation>,
    pub flags: Vec<String>,
    pub budget_exceeded: usize,
    pub heuristic_decisions: usize,
    pub notes: Vec<String>,
    pub log: Vec<TrialLog>,
}

impl ProbeReport {
    pub fn new(probe: &str, n: usize, seed: u64, trials: usize, bound: String) -> Self {
        ProbeReport {
            probe: probe.to_string(),
            n,
            seed,
            trials,
            max_norm: "0".into(),
            max_norm_approx: 0.0,
            bound,
            violations: Vec::new(),
            contradictions: Vec::new(),
            flags: Vec::new(),
            budget_exceeded: 0,
            heuristic_decisions: 0,
            notes: Vec::new(),
            log: Vec::new(),
        }
    }

    /// No violations, contradictions or flags.
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.contradictions.is_empty() && self.flags.is_empty()
    }

    pub fn budget_fraction(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.budget_exceeded as f64 / self.trials as f64
        }
    }
}

/// Wraps any serializable report as `{"schema": 1, "kind": ..., "report": ...}`.
pub fn envelope<T: Serialize>(kind: &str, config: &crate::Config, report: &T) -> serde_json::Value {
    serde_json::json!({
        "schema": SCHEMA,
        "kind": kind,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "report": report,
    })
}
