//! Size of the terms oscillating at the trap frequency compared with the
//! secular discrepancy, for several superpositions of a magnesium atom.
//!
//! Run with `cargo run --example oscillating_terms`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

use lattice_clock::algebra::NoiseChannel;
use lattice_clock::closed_form::oscillating_delta1;
use lattice_clock::integral::{compute_i1, Oscillating};
use lattice_clock::units::{
    derive_lattice, displacement_to_alpha, AtomSpec, LatticeSpec, PhysicalConstants, StateKind,
    SuperposedCoherentState,
};

fn main() -> lattice_clock::Result<()> {
    let derived = derive_lattice(
        &AtomSpec::mg24(),
        &LatticeSpec::baseline(),
        &PhysicalConstants::default(),
    )?;
    let couplings = derived.couplings();
    let alpha = displacement_to_alpha(10e-9, &derived);

    println!("theta,phi,secular_delta1_s,oscillating_delta1_s,bound_s");
    for (theta, phi) in [
        (FRAC_PI_4, PI),
        (FRAC_PI_8, FRAC_PI_2),
        (FRAC_PI_8, PI / 3.0),
        (FRAC_PI_4, 0.0),
    ] {
        let state = SuperposedCoherentState::new(alpha, theta, phi, StateKind::Quantum);
        let osc = oscillating_delta1(&couplings, &state, 1.0)?;
        let secular = osc.full - osc.correction;
        println!(
            "{theta:.6},{phi:.6},{secular:.6e},{:.6e},{:.6e}",
            osc.correction, osc.bound
        );
    }

    // the engine splits each moment the same way; the single-branch split is shown here
    let single = SuperposedCoherentState::new(alpha, 0.0, 0.0, StateKind::Quantum);
    let split = compute_i1(
        NoiseChannel::Free,
        &couplings,
        &single,
        1.0,
        Oscillating::Include,
    )?;
    println!(
        "\nsingle branch I1: secular {:.6e} s, oscillating {:.6e} s",
        split.non_oscillating.re, split.oscillating.re
    );
    Ok(())
}
