//! A single coherent state behaves like a classical point particle: its first
//! moment equals the proper-time correction along the classical trajectory
//! with the coherent state's momentum spread.
//!
//! Run with `cargo run --example classical_limit`.

use lattice_clock::algebra::NoiseChannel;
use lattice_clock::clock::{classical_proper_time, ClassicalInitial};
use lattice_clock::integral::{compute_i1, Oscillating};
use lattice_clock::units::{
    derive_lattice, AtomSpec, LatticeSpec, PhysicalConstants, SuperposedCoherentState,
};
use num_complex::Complex64;

fn main() -> lattice_clock::Result<()> {
    let derived = derive_lattice(
        &AtomSpec::sr87(),
        &LatticeSpec::baseline(),
        &PhysicalConstants::default(),
    )?;
    let couplings = derived.couplings();
    println!("alpha_re,alpha_im,duration_s,operator_s,trajectory_s,point_particle_s");
    for (alpha, t) in [
        (Complex64::new(0.0, 0.0), 1.0),
        (Complex64::new(0.4, 0.0), 1.0),
        (Complex64::new(0.3, -1.2), 2.5e-6),
    ] {
        let state = SuperposedCoherentState::coherent(alpha);
        let operator = compute_i1(
            NoiseChannel::Free,
            &couplings,
            &state,
            t,
            Oscillating::Include,
        )?
        .total()
        .re;
        let initial = ClassicalInitial::coherent(alpha, &derived);
        let trajectory = classical_proper_time(&initial, &derived, t, true);
        let point = classical_proper_time(&initial, &derived, t, false);
        println!(
            "{},{},{t:e},{operator:.16e},{trajectory:.16e},{point:.16e}",
            alpha.re, alpha.im
        );
    }
    Ok(())
}
