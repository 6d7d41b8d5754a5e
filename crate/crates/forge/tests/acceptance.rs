//! One line per acceptance criterion. Criteria listed as known infeasible
//! are reported but do not fail the target.

use std::process::ExitCode;

use cocycle_forge::acceptance::{run, CRITERIA, KNOWN_INFEASIBLE};

fn main() -> ExitCode {
    let mut unexpected = Vec::new();
    for id in 1..=CRITERIA.len() {
        let o = run(id);
        let known = !o.passed && KNOWN_INFEASIBLE.contains(&id);
        println!("{}{}", o.line(), if known { " [known infeasible]" } else { "" });
        if !o.passed && !known {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: no unexpected failures");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected failures in {unexpected:?}");
        ExitCode::FAILURE
    }
}
