//! Discrepancy and its margin over the clock spread under amplitude damping
//! and diffusion, read from a TOML configuration.
//!
//! Run with `cargo run --example noise_sweep`.

use lattice_clock::output::{write_table, Format};
use lattice_clock::sweep::{sweep_noise, SweepConfig};

const CONFIG: &str = r#"
atom = "mg24"
displacement_for_noise_nm = 10.0
amplitude_rates = [0.0, 0.1, 1.0, 10.0]
diffusion_rates = { start = 0.01, stop = 100.0, count = 5, spacing = "log" }
"#;

fn main() -> lattice_clock::Result<()> {
    let config = SweepConfig::from_toml_str(CONFIG)?;
    let rows = sweep_noise(&config)?;
    write_table(
        Format::Csv,
        "noise-sweep",
        serde_json::Value::Null,
        &rows,
        None,
    )?;

    let detectable = rows.iter().filter(|r| r.margin > 0.0).count();
    println!(
        "\n{detectable} of {} grid points have a positive margin",
        rows.len()
    );
    Ok(())
}
