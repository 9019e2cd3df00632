//! Derived trap constants for the preset atoms and a custom one.
//!
//! Run with `cargo run --example lattice_params`.

use lattice_clock::sweep::params_table;
use lattice_clock::units::{AtomSpec, LatticeSpec, PhysicalConstants};

fn main() -> lattice_clock::Result<()> {
    let custom = AtomSpec::from_config_str(
        "name = \"yb171\"\nmass_amu = 170.936\nmagic_wavelength_nm = 759.35\nclock_frequency_THz = 518.295836\n",
        &PhysicalConstants::default(),
    )?;
    for atom in [AtomSpec::mg24(), AtomSpec::sr87(), custom] {
        println!("# {}", atom.name);
        for entry in params_table(&atom, &LatticeSpec::baseline(), &[5e-9, 10e-9, 20e-9])? {
            println!("{:<26} {:>24.16e} {}", entry.name, entry.value, entry.unit);
        }
        println!();
    }
    Ok(())
}
