use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use canon_core::acceptance;
use canon_core::algebra::solve::{real_points, solution_set};
use canon_core::compiler::{compile_coarse, compile_with, parse_poly_system, verify_compilation, CompileOptions};
use canon_core::gallery::{self, GalleryItem};
use canon_core::linear::{minor_scan, probe_additive, verify_additive_small, ScanMode};
use canon_core::neighbourhoods::{compute_ktilde, expected_ktilde, is_fixed, omega, Fixedness, MapField, Neighbourhood};
use canon_core::nonlinear::{
    catalog_maximal, compare_with_family, pair_scan, probe_greedy_distinct, probe_ideal_growth, reference_family,
    Domain, GreedyOptions, IdealVariant,
};
use canon_core::report::envelope;
use canon_core::retraction;
use canon_core::scalar::{format_rational, parse_rational};
use canon_core::system::parse_system;
use canon_core::{CanonError, Config, SolutionKind};

#[derive(Parser)]
#[command(name = "canon", version, about = "Canonical equation systems: compile, solve, scan and probe")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads for parallel scans (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// S-polynomial reductions allowed per Gröbner basis.
    #[arg(long, global = true)]
    gb_budget: Option<u64>,
    /// Root boxes are refined to radius 2^-bits.
    #[arg(long, global = true)]
    box_precision_bits: Option<u32>,
    #[arg(long, global = true)]
    max_refine_rounds: Option<u32>,
    /// Order restarts in the greedy probe.
    #[arg(long, global = true)]
    restart_limit: Option<u32>,
    /// Variable cap for the coarse compiler.
    #[arg(long, global = true)]
    coarse_cap: Option<u64>,
    #[arg(long, global = true)]
    exponent_cap: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a canonical system.
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "C")]
        domain: Domain,
    },
    /// Compile a polynomial system to a canonical one.
    Compile {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Use the closed-form construction (large).
        #[arg(long)]
        coarse: bool,
        /// Merge variables denoting the same polynomial.
        #[arg(long, conflicts_with = "coarse")]
        dedup: bool,
        /// Random evaluation trials after compiling.
        #[arg(long)]
        verify: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Additive systems.
    #[command(subcommand)]
    Linear(LinearCmd),
    /// Systems with multiplication.
    #[command(subcommand)]
    Nonlinear(NonlinearCmd),
    /// Counterexample gallery.
    #[command(subcommand)]
    Gallery(GalleryCmd),
    /// Arithmetic neighbourhoods.
    #[command(subcommand)]
    Nbhd(NbhdCmd),
    /// The plane retraction.
    #[command(subcommand)]
    Retraction(RetractionCmd),
    /// Run the acceptance suite.
    VerifyAll {
        /// Criterion ids to run (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

#[derive(Subcommand)]
enum LinearCmd {
    /// Random rank-growing additive systems.
    Probe {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Minors of 0/±1 pattern matrices.
    Conj4 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 100_000)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Unique solutions of small additive systems.
    Obs4 {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum NonlinearCmd {
    /// Pairs of reduced two-variable equations.
    Pairscan {
        #[arg(long, default_value = "C")]
        domain: Domain,
        #[arg(long)]
        triples: bool,
    },
    /// Maximal satisfied subsets and their solutions.
    Catalog {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "R")]
        domain: Domain,
        /// Also write the catalog JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Greedy systems with distinct coordinates.
    Probe1 {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "R")]
        domain: Domain,
        /// Drop equations sharing the left side of an adopted one.
        #[arg(long)]
        prune: bool,
    },
    /// Random ideal growth.
    Probe21 {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "with-units")]
        variant: IdealVariant,
    },
}

#[derive(Subcommand)]
enum GalleryCmd {
    /// Verify one item or all of them.
    Run {
        #[arg(long)]
        item: Option<GalleryItem>,
        /// Item parameter as key=value; repeatable.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, String)>,
    },
}

#[derive(Subcommand)]
enum NbhdCmd {
    /// Elements with an arithmetic neighbourhood of at most n elements.
    Ktilde {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Field::Q)]
        field: Field,
    },
    /// Smallest arithmetic neighbourhood of r.
    Omega {
        #[arg(long, value_parser = parse_rat)]
        r: num_rational::BigRational,
        #[arg(long, default_value_t = 3)]
        max_n: usize,
    },
    /// Whether every arithmetic map fixes the target.
    Fixed {
        /// Comma-separated rationals.
        #[arg(long, value_parser = parse_rat_list)]
        set: RatList,
        #[arg(long, value_parser = parse_rat)]
        target: num_rational::BigRational,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Field {
    Q,
    C,
}

#[derive(Subcommand)]
enum RetractionCmd {
    /// Sampled checks of the retraction.
    Check {
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Dump sampled points and values as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        csv_rows: usize,
    },
}

#[derive(Clone, Debug)]
struct RatList(Vec<num_rational::BigRational>);

fn parse_rat(s: &str) -> Result<num_rational::BigRational, String> {
    parse_rational(s.trim()).ok_or_else(|| format!("not a rational: {s:?}"))
}

fn parse_rat_list(s: &str) -> Result<RatList, String> {
    s.split(',').map(parse_rat).collect::<Result<_, _>>().map(RatList)
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Verdict of a command, mapped to the exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    Pass,
    Finding,
    Unknown,
}

impl Outcome {
    fn code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Finding => 1,
            Outcome::Unknown => 3,
        }
    }
}

struct Output {
    kind: &'static str,
    report: Value,
    text: String,
    outcome: Outcome,
}

fn out(kind: &'static str, report: impl serde::Serialize, text: String, outcome: Outcome) -> anyhow::Result<Output> {
    Ok(Output {
        kind,
        report: serde_json::to_value(report)?,
        text,
        outcome,
    })
}

fn config(g: &Global) -> Config {
    let mut c = Config::from_env();
    if let Some(v) = g.gb_budget {
        c.gb_budget = v;
    }
    if let Some(v) = g.box_precision_bits {
        c.box_precision_bits = v;
    }
    if let Some(v) = g.max_refine_rounds {
        c.max_refine_rounds = v;
    }
    if let Some(v) = g.restart_limit {
        c.restart_limit = v;
    }
    if let Some(v) = g.coarse_cap {
        c.coarse_cap = v;
    }
    if let Some(v) = g.exponent_cap {
        c.exponent_cap = v;
    }
    c
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path)
        .map_err(|e| CanonError::Io(format!("{}: {e}", path.display())))
        .map_err(Into::into)
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cmd: Command, cfg: &Config) -> anyhow::Result<Output> {
    match cmd {
        Command::Solve { input, domain } => {
            let sys = parse_system(&read(&input)?)?;
            let mut set = solution_set(&sys, cfg)?;
            if domain == Domain::Real && set.kind == SolutionKind::ZeroDimensional {
                set = real_points(&set)?;
            }
            let mut text = format!("{:?}: {} point(s) over {domain}", set.kind, set.points.len());
            for p in &set.points {
                let coords: Vec<String> = match p.exact_values() {
                    Some(v) => v.iter().map(ToString::to_string).collect(),
                    None => p.approx().iter().map(|a| format!("~{a:.6}")).collect(),
                };
                text.push_str(&format!("\n({})", coords.join(", ")));
            }
            out("solve", set, text, Outcome::Pass)
        }
        Command::Compile {
            input,
            out: target,
            coarse,
            dedup,
            verify,
            seed,
        } => {
            let sys = parse_poly_system(&read(&input)?, None)?;
            let res = if coarse {
                compile_coarse(&sys, cfg)?
            } else {
                compile_with(&sys, CompileOptions { dedup, full_h: false })?
            };
            write(&target, &res.to_annotated_text())?;
            let mut text = format!(
                "{} equations in {} variables written to {}",
                res.canonical.len(),
                res.canonical.arity(),
                target.display()
            );
            let mut outcome = Outcome::Pass;
            let verification = match verify {
                Some(trials) => {
                    let v = verify_compilation(&sys, &res, trials, seed)?;
                    text.push_str(&format!("; {trials} trials, passed {}", v.passed));
                    if !v.passed {
                        outcome = Outcome::Finding;
                    }
                    Some(v)
                }
                None => None,
            };
            let report = json!({
                "input": input,
                "output": target,
                "coarse": coarse,
                "counts": res.counts,
                "equations": res.canonical.len(),
                "q": res.q,
                "verification": verification,
            });
            out("compile", report, text, outcome)
        }
        Command::Linear(c) => linear(c),
        Command::Nonlinear(c) => nonlinear(c, cfg),
        Command::Gallery(GalleryCmd::Run { item, params }) => {
            let reports = match item {
                Some(item) => {
                    let params: BTreeMap<String, String> = params.into_iter().collect();
                    vec![gallery::run_item(item, &params, cfg)?]
                }
                None if params.is_empty() => gallery::run_all(cfg)?,
                None => {
                    return Err(CanonError::InvalidArgument("--param needs --item".into()).into());
                }
            };
            let mut lines = Vec::new();
            for r in &reports {
                let failed = r.failures();
                lines.push(format!(
                    "{} {}: {} checks, {} failed",
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.item,
                    r.checks.len(),
                    failed.len()
                ));
                for c in failed {
                    lines.push(format!("  {}: {}", c.name, c.detail));
                }
            }
            let outcome = if reports.iter().all(|r| r.passed()) {
                Outcome::Pass
            } else {
                Outcome::Finding
            };
            out("gallery", reports, lines.join("\n"), outcome)
        }
        Command::Nbhd(c) => nbhd(c, cfg),
        Command::Retraction(RetractionCmd::Check {
            samples,
            seed,
            tol,
            csv,
            csv_rows,
        }) => {
            let r = retraction::check(samples, seed, tol)?;
            if let Some(path) = csv {
                write(&path, &retraction::sample_csv(csv_rows, seed)?)?;
            }
            let text = format!(
                "{}: {samples} samples, max norm {:.6}, arithmetic error {:.1e}, continuity gap {:.1e}",
                if r.passed { "passed" } else { "failed" },
                r.range_max_norm,
                r.arithmetic_max_error,
                r.continuity_final_gap
            );
            let outcome = if r.passed { Outcome::Pass } else { Outcome::Finding };
            out("retraction", r, text, outcome)
        }
        Command::VerifyAll { only } => {
            let ids: Vec<usize> = if only.is_empty() {
                (1..=acceptance::CRITERIA).collect()
            } else {
                only
            };
            let results: Vec<_> = ids
                .iter()
                .map(|&id| {
                    let r = acceptance::run_criterion(id, cfg);
                    eprintln!("{}", r.line());
                    r
                })
                .collect();
            let failed = results.iter().filter(|r| !r.passed).count();
            let text = format!("{} passed, {failed} failed", results.len() - failed);
            let outcome = if failed == 0 { Outcome::Pass } else { Outcome::Finding };
            out("verify-all", results, text, outcome)
        }
    }
}

fn linear(cmd: LinearCmd) -> anyhow::Result<Output> {
    match cmd {
        LinearCmd::Probe { n, iters, seed } => {
            let r = probe_additive(n, iters, seed)?;
            let text = format!(
                "max norm {} (bound {}), {} violations, {} contradictions over {} trials",
                r.max_norm,
                r.bound,
                r.violations.len(),
                r.contradictions.len(),
                r.trials
            );
            let outcome = if r.is_clean() { Outcome::Pass } else { Outcome::Finding };
            out("linear-probe", r, text, outcome)
        }
        LinearCmd::Conj4 {
            n,
            exhaustive,
            iters,
            seed,
        } => {
            let mode = if exhaustive {
                ScanMode::Exhaustive
            } else {
                ScanMode::Random { iterations: iters, seed }
            };
            let r = minor_scan(n, mode)?;
            let text = format!(
                "{} matrices, max |minor| {} (bound {}), {} violations",
                r.matrices, r.max_abs_minor, r.bound, r.violation_count
            );
            let outcome = if r.is_clean() { Outcome::Pass } else { Outcome::Finding };
            out("linear-conj4", r, text, outcome)
        }
        LinearCmd::Obs4 { n } => {
            let r = verify_additive_small(n)?;
            let text = format!(
                "{} subsets, {} with a unique solution, max |x| {} (bound {})",
                r.subsets, r.unique_solution_subsets, r.max_abs, r.bound
            );
            let outcome = if r.is_clean() { Outcome::Pass } else { Outcome::Finding };
            out("linear-obs4", r, text, outcome)
        }
    }
}

fn probe_outcome(r: &canon_core::report::ProbeReport, budget_share: f64) -> Outcome {
    if !r.is_clean() {
        Outcome::Finding
    } else if r.budget_fraction() > budget_share {
        Outcome::Unknown
    } else {
        Outcome::Pass
    }
}

fn nonlinear(cmd: NonlinearCmd, cfg: &Config) -> anyhow::Result<Output> {
    match cmd {
        NonlinearCmd::Pairscan { domain, triples } => {
            let r = pair_scan(domain, triples, cfg)?;
            let text = format!("{} pairs over {domain}: {}", r.pairs.len(), r.summary());
            let outcome = if r.violations > 0 {
                Outcome::Finding
            } else if r.positive_dimensional > 0 {
                Outcome::Unknown
            } else {
                Outcome::Pass
            };
            out("pairscan", r, text, outcome)
        }
        NonlinearCmd::Catalog { n, domain, out: path } => {
            let cat = catalog_maximal(n, domain, cfg)?;
            let comparison = match reference_family(n, domain) {
                Some(f) => Some(compare_with_family(&cat, &f)?),
                None => None,
            };
            if let Some(p) = &path {
                write(p, &serde_json::to_string_pretty(&cat)?)?;
            }
            let mut text = format!(
                "{} maximal value sets from {} subsets over {domain}",
                cat.entries.len(),
                cat.subsets_examined
            );
            let mut outcome = if cat.partial { Outcome::Unknown } else { Outcome::Pass };
            if let Some(c) = &comparison {
                text.push_str(&format!("; reference family {} of {}, equal {}", c.found, c.expected, c.equal));
                if !c.equal && !cat.partial {
                    outcome = Outcome::Finding;
                }
            }
            let report = json!({ "catalog": cat, "comparison": comparison });
            out("catalog", report, text, outcome)
        }
        NonlinearCmd::Probe1 { n, seed, domain, prune } => {
            let opts = GreedyOptions {
                prune_same_left_side: prune,
                ..GreedyOptions::default()
            };
            let r = probe_greedy_distinct(n, seed, domain, opts, cfg)?;
            let text = format!(
                "max norm {} (bound {}), {} violations, {} flags, {} budget-exceeded",
                r.max_norm,
                r.bound,
                r.violations.len(),
                r.flags.len(),
                r.budget_exceeded
            );
            let outcome = probe_outcome(&r, 0.0);
            out("probe1", r, text, outcome)
        }
        NonlinearCmd::Probe21 {
            n,
            iters,
            seed,
            variant,
        } => {
            let r = probe_ideal_growth(n, iters, seed, variant, cfg)?;
            let text = format!(
                "{variant}: max norm {} (bound {}), {} violations, {} flags, {} of {} budget-exceeded",
                r.max_norm,
                r.bound,
                r.violations.len(),
                r.flags.len(),
                r.budget_exceeded,
                r.trials
            );
            let outcome = probe_outcome(&r, 0.2);
            out("probe21", r, text, outcome)
        }
    }
}

fn nbhd(cmd: NbhdCmd, cfg: &Config) -> anyhow::Result<Output> {
    match cmd {
        NbhdCmd::Ktilde { n, field } => {
            let field = match field {
                Field::Q => MapField::Rational,
                Field::C => MapField::Complex,
            };
            let k = compute_ktilde(n, field, cfg)?;
            let values: Vec<String> = k.values.iter().map(format_rational).collect();
            let expected = expected_ktilde(n);
            let outcome = match &expected {
                Some(e) if e != &k.values => Outcome::Finding,
                _ => Outcome::Pass,
            };
            let text = format!("{} values: {{{}}}", values.len(), values.join(", "));
            out("ktilde", k, text, outcome)
        }
        NbhdCmd::Omega { r, max_n } => {
            let o = omega(&r, max_n, cfg)?;
            let text = match o.value {
                Some(v) => format!("omega({}) = {v}", format_rational(&r)),
                None => format!("omega({}) > {max_n}", format_rational(&r)),
            };
            out("omega", o, text, Outcome::Pass)
        }
        NbhdCmd::Fixed { set, target } => {
            let a = Neighbourhood::new(target.clone(), set.0);
            let c = is_fixed(&a, cfg)?;
            let t = format_rational(&target);
            let (text, outcome) = match &c.verdict {
                Fixedness::Fixed { evidence } => (format!("every arithmetic map fixes {t}: {evidence}"), Outcome::Pass),
                Fixedness::Moved { image } => {
                    let img: Vec<String> = image.iter().map(format_rational).collect();
                    (format!("{t} is moved by the map to ({})", img.join(", ")), Outcome::Pass)
                }
                Fixedness::Unknown { reason } => (format!("undecided: {reason}"), Outcome::Unknown),
            };
            out("fixed", c, text, outcome)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<CanonError>() {
        Some(
            CanonError::Parse { .. }
            | CanonError::IndexOutOfRange { .. }
            | CanonError::InvalidArgument(_)
            | CanonError::DegreeZero(_)
            | CanonError::Io(_),
        ) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = config(&cli.global);
    if let Some(t) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("canon: {e}");
            return ExitCode::from(2);
        }
    }
    let o = match run(cli.command, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("canon: {e:#}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let body = match cli.global.format {
        Format::Json => {
            let mut env = envelope(o.kind, &cfg, &o.report);
            env["outcome"] = json!(o.outcome.code());
            serde_json::to_string_pretty(&env).expect("report serializes")
        }
        Format::Text => o.text,
    };
    match &cli.global.output {
        Some(p) => {
            if let Err(e) = write(p, &format!("{body}\n")) {
                eprintln!("canon: {e:#}");
                return ExitCode::from(3);
            }
        }
        None => println!("{body}"),
    }
    ExitCode::from(o.outcome.code())
}
