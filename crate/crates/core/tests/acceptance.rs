use std::process::ExitCode;

use rmglab::acceptance::{run_criterion, AcceptanceReport, CheckOptions, CRITERIA, KNOWN_LITERAL_FAILURES};

fn main() -> ExitCode {
    let opts = CheckOptions::default();
    let mut criteria = Vec::new();
    for &(id, _) in CRITERIA.iter() {
        let report = run_criterion(id, &opts);
        let single = AcceptanceReport {
            passed: report.passed,
            criteria: vec![report.clone()],
        };
        print!("{}", single.table(false));
        criteria.push(report);
    }
    let report = AcceptanceReport {
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    };
    let failing = report.failing();
    println!();
    println!("failing: {failing:?}, known literal failures: {KNOWN_LITERAL_FAILURES:?}");
    if failing == KNOWN_LITERAL_FAILURES {
        println!("acceptance: outcome matches the documented set");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: outcome differs from the documented set");
        ExitCode::FAILURE
    }
}
