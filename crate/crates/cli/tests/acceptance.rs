//! One pass/fail line per acceptance criterion; exits nonzero on any failure.

use std::process::ExitCode;

use phototherm_cli::checks::run_all;
use phototherm_cli::RunConfig;

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary bundle directory");
    let outcomes = run_all(&RunConfig::default(), dir.path());
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
