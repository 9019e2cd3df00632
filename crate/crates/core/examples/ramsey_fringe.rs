//! Ramsey fringes of the superposition and of the mixture, and whether the
//! shift between them stands out of the frequency uncertainty.
//!
//! Run with `cargo run --example ramsey_fringe`.

use std::f64::consts::{FRAC_PI_4, PI};

use lattice_clock::clock::{detectability, fringe_probability, FringeModel};
use lattice_clock::closed_form::free_report;
use lattice_clock::units::{
    derive_lattice, displacement_to_alpha, AtomSpec, LatticeSpec, PhysicalConstants, StateKind,
    SuperposedCoherentState,
};

fn main() -> lattice_clock::Result<()> {
    let atom = AtomSpec::mg24();
    let derived = derive_lattice(
        &atom,
        &LatticeSpec::baseline(),
        &PhysicalConstants::default(),
    )?;
    let state = SuperposedCoherentState::new(
        displacement_to_alpha(10e-9, &derived),
        FRAC_PI_4,
        PI,
        StateKind::Quantum,
    );
    let report = free_report(&derived.couplings(), &state, 1.0)?;

    let clock = atom.clock_angular_frequency;
    let quantum = FringeModel::from_report(&report, StateKind::Quantum, clock)?;
    let mixture = FringeModel::from_report(&report, StateKind::Classical, clock)?;
    println!(
        "frequency shift: superposition {:.6e} rad/s, mixture {:.6e} rad/s",
        quantum.frequency_shift, mixture.frequency_shift
    );
    println!(
        "contrast: superposition {:.16}, mixture {:.16}",
        quantum.contrast, mixture.contrast
    );

    println!("\ndetuning_rad_s,p_superposition,p_mixture");
    for step in -4..=4 {
        let detuning = f64::from(step) * PI / 4.0;
        let laser = clock - detuning;
        println!(
            "{detuning:.6},{:.16},{:.16}",
            fringe_probability(laser, &quantum),
            fringe_probability(laser, &mixture)
        );
    }

    for kappa in [1e-4, 1e-3, 1.0] {
        let det = detectability(&report, clock, kappa)?;
        println!(
            "\nkappa {kappa:e}: shift {:.3e} rad/s, spread {:.3e} rad/s, detectable {}",
            det.discrepancy, det.sigma, det.detectable
        );
    }
    Ok(())
}
