use serde::{Deserialize, Serialize};

/// Resource budgets and precision knobs shared by the exact solvers.
///
/// Every field can be overridden through a `CANON_*` environment variable,
/// see [`Config::from_env`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Config {
    /// Maximum number of S-polynomial reductions per Gröbner basis computation.
    pub gb_budget: u64,
    /// Certified root boxes are refined until their radius is at most `2^-bits`.
    pub box_precision_bits: u32,
    /// Maximum number of precision doublings when certifying roots.
    pub max_refine_rounds: u32,
    /// Largest allowed exponent `e` in tower bounds of the form `2^e`.
    pub exponent_cap: u64,
    /// Largest allowed variable count for the coarse compiler construction.
    pub coarse_cap: u64,
    /// Order restarts allowed in the greedy real-consistency probe.
    pub restart_limit: u32,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            gb_budget: 1_000_000,
            box_precision_bits: 40,
            max_refine_rounds: 12,
            exponent_cap: 1 << 30,
            coarse_cap: 1_000_000,
            restart_limit: 50,
        }
    }
}

impl Config {
    /// Defaults overridden by `CANON_GB_BUDGET`, `CANON_BOX_PRECISION_BITS`,
    /// `CANON_MAX_REFINE_ROUNDS`, `CANON_EXPONENT_CAP`, `CANON_COARSE_CAP` and
    /// `CANON_RESTART_LIMIT`. Unparsable values are ignored.
    pub fn from_env() -> Self {
        let mut c = Config::default();
        fn read<T: std::str::FromStr>(name: &str, slot: &mut T) {
            if let Ok(v) = std::env::var(name) {
                if let Ok(parsed) = v.trim().parse() {
                    *slot = parsed;
                }
            }
        }
        read("CANON_GB_BUDGET", &mut c.gb_budget);
        read("CANON_BOX_PRECISION_BITS", &mut c.box_precision_bits);
        read("CANON_MAX_REFINE_ROUNDS", &mut c.max_refine_rounds);
        read("CANON_EXPONENT_CAP", &mut c.exponent_cap);
        read("CANON_COARSE_CAP", &mut c.coarse_cap);
        read("CANON_RESTART_LIMIT", &mut c.restart_limit);
        c
    }
}
