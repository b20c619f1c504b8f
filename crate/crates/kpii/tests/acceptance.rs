//! Criteria 1–11 at desk scale, one PASS/FAIL line each. Fails on any failure outside
//! `KNOWN_UNMET`; set KPII_ACCEPTANCE_STRICT=1 to fail on those too.

use kpii::acceptance::{run_suite, SuiteScale, KNOWN_UNMET};
use std::process::ExitCode;
use std::time::Instant;

fn main() -> ExitCode {
    // `cargo test -- <filter>` for other targets passes the filter here too; only run when
    // unfiltered or asked for by name
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return ExitCode::SUCCESS;
    }
    let strict = std::env::var("KPII_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let start = Instant::now();
    println!("acceptance suite, desk scale");
    let results = run_suite(SuiteScale::desk(), |r| {
        let note = if !r.pass && r.known_unmet() { " [known unmet]" } else { "" };
        println!("{}{note}", r.line());
    });
    let failed: Vec<u32> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    let blocking: Vec<u32> = failed.iter().copied().filter(|id| strict || !KNOWN_UNMET.contains(id)).collect();
    println!(
        "acceptance: {} passed, {} failed {:?}, known unmet {:?}, {:.0} s",
        results.len() - failed.len(),
        failed.len(),
        failed,
        KNOWN_UNMET,
        start.elapsed().as_secs_f64()
    );
    if blocking.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected failures {blocking:?}");
        ExitCode::FAILURE
    }
}
