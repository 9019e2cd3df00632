//! Cross-checks the analytic machinery against a truncated Fock-space
//! simulation in dimensionless units (ω = 1).
//!
//! Run with `cargo run --release --example fock_verification`.

use lattice_clock::verify::{run_selected, stock_rules, VerifyConfig};

fn main() -> lattice_clock::Result<()> {
    let config = VerifyConfig {
        amplitudes: vec![0.5],
        durations: vec![20.0],
        ..VerifyConfig::default()
    };
    config.validate()?;
    let checks = [
        "engine-vs-closed-form",
        "oracle-vs-engine",
        "superoperator-form",
    ];
    for result in run_selected(&config, &stock_rules, &checks)? {
        println!(
            "{:<22} {} max error {:.3e} (threshold {:.1e}, {} cases)",
            result.name,
            if result.passed { "PASS" } else { "FAIL" },
            result.max_error,
            result.threshold,
            result.cases
        );
    }
    Ok(())
}
