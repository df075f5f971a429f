//! Runs every acceptance criterion at its stated tolerance and prints one
//! PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_RED` are reported but do not fail the target;
//! one of them unexpectedly passing does, so the list cannot go stale.
//! `ACCEPTANCE_STRICT=1` turns every failure into a hard failure.

use std::process::ExitCode;

use jacobi_core::selfcheck::{run_criterion, SelfCheckOptions, CRITERIA};

/// The coefficient bound with the `+1` index offset on the tail sum fails
/// for a generic non-free profile; the README explains the counterexample.
const KNOWN_RED: &[u8] = &[6];

fn main() -> ExitCode {
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut hard_failures = Vec::new();
    let mut red = Vec::new();
    for (id, _, _) in CRITERIA {
        let result = run_criterion(id, SelfCheckOptions::default());
        println!("{}  [{:.2} s]", result.line(), result.elapsed.as_secs_f64());
        match (result.passed, KNOWN_RED.contains(&id)) {
            (true, false) => {}
            (false, true) if !strict => red.push(id),
            (false, _) => hard_failures.push(format!("criterion {id} failed")),
            (true, true) => hard_failures.push(format!("criterion {id} passed but is listed as known red")),
        }
    }
    let passed = CRITERIA.len() - red.len() - hard_failures.len();
    println!("acceptance: {passed}/{} passed; known red: {red:?}", CRITERIA.len());
    if hard_failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        for f in &hard_failures {
            eprintln!("{f}");
        }
        ExitCode::FAILURE
    }
}
