//! Regenerates a published table and reports its consistency checks.

use wus_core::report::{reproduce, RunConfig, Target};

fn main() -> anyhow::Result<()> {
    let report = reproduce(Target::Table3, &RunConfig::default())?;
    for check in &report.checks {
        println!(
            "{} {}: {}",
            if check.passed { "ok  " } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    println!("all checks passed: {}", report.passed());
    Ok(())
}
