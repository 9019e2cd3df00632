//! An ideal clock whose time operator is read directly: the discrepancy
//! between superposition and mixture against the clock-state-independent
//! spread, as amplitude damping grows.
//!
//! Run with `cargo run --example idealized_clock`.

use std::f64::consts::{FRAC_PI_4, PI};

use lattice_clock::algebra::NoiseChannel;
use lattice_clock::clock::{coherence_margin, idealized_coherence, IdealClockState};
use lattice_clock::closed_form::amplitude_report;
use lattice_clock::integral::{compute_i2_prime, compute_moments, Oscillating};
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
    let quantum = SuperposedCoherentState::new(
        displacement_to_alpha(10e-9, &derived),
        FRAC_PI_4,
        PI,
        StateKind::Quantum,
    );
    let mixture = quantum.with_kind(StateKind::Classical);
    let t = 1.0;

    println!("amplitude_rate_hz,discrepancy_s,state_independent_sigma_s,margin_s");
    for rate in [0.0, 0.1, 1.0, 10.0, 100.0] {
        let report = amplitude_report(&couplings, &quantum, t, rate)?;
        let sigma = report.delta2_combined_sq.max(0.0).sqrt();
        println!(
            "{rate:e},{:.6e},{sigma:.6e},{:.6e}",
            report.delta1_coh,
            coherence_margin(&report)
        );
    }

    // the full ideal-clock moments, including the clock-state-dependent term
    let channel = NoiseChannel::AmplitudeDamping(1.0);
    let moments = |s| -> lattice_clock::Result<(f64, num_complex::Complex64, f64)> {
        let m = compute_moments(channel, &couplings, s, t, Oscillating::Exclude)?;
        let w = compute_i2_prime(channel, &couplings, s, t, Oscillating::Exclude)?;
        Ok((m.i1.total().re, m.i2.total(), w.total().re))
    };
    let initial = IdealClockState {
        mean_time: 0.0,
        time_variance: 0.0,
        anticommutator: 0.5,
        mean_energy: 0.0,
    };
    let coh = idealized_coherence(moments(&quantum)?, moments(&mixture)?, &initial, t);
    println!(
        "\nat 1 Hz: discrepancy {:.6e} s, state-independent variance {:.6e} s^2, state-dependent variance {:.6e} s^2",
        coh.discrepancy, coh.state_independent_variance, coh.state_dependent_variance
    );
    Ok(())
}
