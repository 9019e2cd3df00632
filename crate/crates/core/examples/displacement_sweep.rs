//! Discrepancy and added variance against the branch half-separation, for
//! the default superposition (θ = π/4, φ = π) and for equal-phase branches.
//!
//! Run with `cargo run --example displacement_sweep`.

use lattice_clock::output::{write_table, Format};
use lattice_clock::sweep::{sweep_displacement, Grid, SweepConfig};

fn main() -> lattice_clock::Result<()> {
    let mut config = SweepConfig {
        displacement_nm: Grid::Range {
            start: 0.0,
            stop: 40.0,
            count: 9,
            spacing: Default::default(),
        },
        ..SweepConfig::default()
    };
    // d = 0 rows of the odd superposition are NaN: the branches cancel there
    let rows = sweep_displacement(&config)?;
    write_table(
        Format::Csv,
        "displacement-sweep",
        serde_json::Value::Null,
        &rows,
        None,
    )?;

    println!();
    config.relative_phase = 0.0;
    let rows = sweep_displacement(&config)?;
    write_table(
        Format::Csv,
        "displacement-sweep",
        serde_json::Value::Null,
        &rows,
        None,
    )?;
    Ok(())
}
