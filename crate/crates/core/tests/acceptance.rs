//! The acceptance suite: one PASS/FAIL line per criterion, non-zero exit on
//! any failure. Runs under `cargo test -p ppclab-core --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use ppclab::acceptance::{self, CriterionOutcome};

fn main() -> ExitCode {
    let criteria: [fn() -> CriterionOutcome; 10] = [
        acceptance::counting_oracle,
        acceptance::gap_identities,
        acceptance::three_gap,
        acceptance::gap_count_bound,
        acceptance::grid_inclusion,
        acceptance::expectation_asymptotic,
        acceptance::variance_decay,
        acceptance::mc_agreement,
        acceptance::empirical_ppc,
        acceptance::determinism,
    ];
    let start = Instant::now();
    let mut failed = 0;
    for criterion in criteria {
        let outcome = criterion();
        println!("{outcome}");
        failed += usize::from(!outcome.passed);
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
