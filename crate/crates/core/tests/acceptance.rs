//! Runs every release criterion and prints one line per criterion.

use std::process::ExitCode;

use canon_core::acceptance::run_all;
use canon_core::Config;

fn main() -> ExitCode {
    let cfg = Config::from_env();
    let results = run_all(&cfg, |r| println!("{}", r.line()));
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
