//! Property tests for the invariants of each module.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use proptest::prelude::*;

use lattice_clock::algebra::{
    evolve, expectation, multiply_normal_order, NoiseChannel, NormalOrderedPoly,
};
use lattice_clock::clock::{
    fringe_probability, idealized_coherence, state_independent_variance, FringeModel,
    IdealClockState,
};
use lattice_clock::closed_form::{
    amplitude_report, diffusion_report, free_report, phase_report, report,
};
use lattice_clock::fock::FockSpace;
use lattice_clock::integral::{compute_i1, compute_moments, Oscillating};
use lattice_clock::output::{write_csv, write_json, JsonDocument};
use lattice_clock::sweep::DisplacementRow;
use lattice_clock::units::{
    derive_lattice, displacement_to_alpha, AtomSpec, Couplings, LatticeSpec, PhysicalConstants,
    StateKind, SuperposedCoherentState,
};

fn close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(scale)
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn poly(max_degree: u32) -> impl Strategy<Value = NormalOrderedPoly> {
    prop::collection::vec((0..=max_degree, 0..=max_degree, complex()), 1..5).prop_map(
        move |terms| {
            NormalOrderedPoly::from_terms(terms.into_iter().filter(|(m, n, _)| m + n <= max_degree))
        },
    )
}

fn kind() -> impl Strategy<Value = StateKind> {
    prop_oneof![Just(StateKind::Quantum), Just(StateKind::Classical)]
}

/// Normalisable states with moderate amplitude.
fn state() -> impl Strategy<Value = SuperposedCoherentState> {
    (0.05..1.5f64, 0.0..FRAC_PI_2, 0.0..2.0 * PI, kind())
        .prop_map(|(a, t, p, k)| SuperposedCoherentState::new(a, t, p, k))
        .prop_filter("normalisable", |s| 1.0 + s.coherence_factor() > 1e-3)
}

fn couplings() -> impl Strategy<Value = Couplings> {
    (0.0..0.2f64, 0.0..0.05f64, 0.1..1.0f64, 0.5..2.0f64).prop_map(
        |(gravity, sag, kinetic, trap_frequency)| Couplings {
            gravity,
            sag,
            kinetic,
            trap_frequency,
        },
    )
}

fn channel() -> impl Strategy<Value = NoiseChannel> {
    prop_oneof![
        Just(NoiseChannel::Free),
        (1e-3..0.2f64).prop_map(NoiseChannel::AmplitudeDamping),
        (1e-3..0.2f64).prop_map(NoiseChannel::PhaseDamping),
        (1e-3..0.2f64).prop_map(NoiseChannel::Diffusion),
    ]
}

fn max_block_error(
    a: &lattice_clock::fock::CMatrix,
    b: &lattice_clock::fock::CMatrix,
    block: usize,
) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..block {
        for j in 0..block {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn product_matches_fock_matrices(lhs in poly(3), rhs in poly(3)) {
        let space = FockSpace::new(40).unwrap();
        let product = space.poly(&multiply_normal_order(&lhs, &rhs));
        let dense = space.poly(&lhs) * space.poly(&rhs);
        // truncation only disturbs the last few rows and columns
        prop_assert!(max_block_error(&product, &dense, 30) < 1e-9 * (1.0 + dense.norm()));
    }

    #[test]
    fn product_is_associative(a in poly(2), b in poly(2), c in poly(2)) {
        let left = multiply_normal_order(&multiply_normal_order(&a, &b), &c);
        let right = multiply_normal_order(&a, &multiply_normal_order(&b, &c));
        prop_assert!(left.relative_distance(&right) < 1e-12);
    }

    #[test]
    fn expectation_matches_density_matrix(p in poly(4), s in state()) {
        let space = FockSpace::new(40).unwrap();
        let rho = space.density_matrix(&s).unwrap();
        let dense = (rho * space.poly(&p)).trace();
        let analytic = expectation(&p, &s);
        prop_assert!((dense - analytic).norm() < 1e-9 * (1.0 + analytic.norm()), "{dense} vs {analytic}");
    }

    #[test]
    fn evolution_commutes_with_adjoint(p in poly(3), ch in channel(), t in 0.0..5.0f64) {
        let direct = evolve(&p.adjoint(), ch, 1.0).at(t);
        let conj = evolve(&p, ch, 1.0).at(t).adjoint();
        prop_assert!(direct.relative_distance(&conj) < 1e-12);
    }

    #[test]
    fn evolution_at_zero_is_identity(p in poly(4), ch in channel()) {
        prop_assert!(evolve(&p, ch, 1.3).at(0.0).relative_distance(&p) < 1e-14);
    }

    #[test]
    fn number_operator_flow(ch in channel(), t in 0.0..10.0f64) {
        let n = evolve(&NormalOrderedPoly::number(), ch, 1.0).at(t);
        let (n_coeff, constant) = match ch {
            NoiseChannel::Free | NoiseChannel::PhaseDamping(_) => (1.0, 0.0),
            NoiseChannel::AmplitudeDamping(r) => ((-r * t).exp(), 0.0),
            NoiseChannel::Diffusion(r) => (1.0, r * t),
        };
        prop_assert!((n.coeff(1, 1) - n_coeff).norm() < 1e-12);
        prop_assert!((n.coeff(0, 0) - constant).norm() < 1e-12);
    }

    #[test]
    fn amplitude_is_linear_in_displacement(d in 1e-10..1e-7f64, factor in 0.1..10.0f64) {
        let derived = derive_lattice(&AtomSpec::mg24(), &LatticeSpec::baseline(), &PhysicalConstants::default()).unwrap();
        let a = displacement_to_alpha(d, &derived);
        let b = displacement_to_alpha(factor * d, &derived);
        prop_assert!(close(b, factor * a, 1e-14, 0.0));
    }

    #[test]
    fn trap_frequency_grows_with_depth(depth in 1.0..1e3f64, factor in 1.01..10.0f64) {
        let consts = PhysicalConstants::default();
        let atom = AtomSpec::sr87();
        let shallow = derive_lattice(&atom, &LatticeSpec { trap_depth_recoil: depth, ..LatticeSpec::baseline() }, &consts).unwrap();
        let deep = derive_lattice(&atom, &LatticeSpec { trap_depth_recoil: depth * factor, ..LatticeSpec::baseline() }, &consts).unwrap();
        prop_assert!(deep.trap_frequency > shallow.trap_frequency);
        prop_assert!(close(deep.trap_frequency / shallow.trap_frequency, factor.sqrt(), 1e-13, 0.0));
        prop_assert!(deep.ground_width < shallow.ground_width);
        prop_assert!(deep.kinetic_coupling > shallow.kinetic_coupling);
        prop_assert!(deep.sag_coupling < shallow.sag_coupling);
    }

    #[test]
    fn couplings_are_dimensionless_under_unit_rescaling(scale in 0.1..10.0f64) {
        // measuring lengths in units of 1/scale metres rescales hbar, c and g but not the couplings
        let base = PhysicalConstants::default();
        let atom = AtomSpec::mg24();
        let scaled_consts = PhysicalConstants { hbar: base.hbar * scale * scale, c: base.c * scale, g: base.g * scale, amu: base.amu };
        let scaled_atom = AtomSpec { magic_wavelength: atom.magic_wavelength * scale, ..atom.clone() };
        let a = derive_lattice(&atom, &LatticeSpec::baseline(), &base).unwrap();
        let b = derive_lattice(&scaled_atom, &LatticeSpec::baseline(), &scaled_consts).unwrap();
        prop_assert!(close(a.trap_frequency, b.trap_frequency, 1e-12, 0.0));
        prop_assert!(close(a.gravity_coupling, b.gravity_coupling, 1e-12, 0.0));
        prop_assert!(close(a.sag_coupling, b.sag_coupling, 1e-12, 0.0));
        prop_assert!(close(a.kinetic_coupling, b.kinetic_coupling, 1e-12, 0.0));
        prop_assert!(close(displacement_to_alpha(1e-8, &a), displacement_to_alpha(1e-8 * scale, &b), 1e-12, 0.0));
    }

    #[test]
    fn discrepancy_vanishes_without_interference(c in couplings(), a in 0.05..1.5f64, t in 0.1..50.0f64, p in 0.0..2.0 * PI) {
        let unweighted = SuperposedCoherentState::new(a, 0.0, p, StateKind::Quantum);
        prop_assert_eq!(free_report(&c, &unweighted, t).unwrap().delta1_coh, 0.0);
        let quadrature = SuperposedCoherentState::new(a, 0.6, FRAC_PI_2, StateKind::Quantum);
        let r = free_report(&c, &quadrature, t).unwrap();
        prop_assert!(r.delta1_coh.abs() <= 1e-15 * r.i1_quantum.abs().max(1e-300));
    }

    #[test]
    fn discrepancy_is_nonzero_with_interference(c in couplings(), s in state(), t in 0.1..50.0f64) {
        let s = s.with_kind(StateKind::Quantum);
        prop_assume!(s.coherence_factor().abs() > 1e-6);
        prop_assert!(free_report(&c, &s, t).unwrap().delta1_coh != 0.0);
    }

    #[test]
    fn weak_channels_approach_free_evolution(c in couplings(), s in state(), t in 0.1..20.0f64) {
        let s = s.with_kind(StateKind::Quantum);
        let free = free_report(&c, &s, t).unwrap();
        let rate = 1e-15;
        for r in [
            amplitude_report(&c, &s, t, rate).unwrap(),
            phase_report(&c, &s, t, rate).unwrap(),
            diffusion_report(&c, &s, t, rate).unwrap(),
        ] {
            prop_assert!(close(r.delta1_coh, free.delta1_coh, 1e-9, 1e-30));
            prop_assert!(close(r.delta2_combined_sq, free.delta2_combined_sq, 1e-9, 1e-30));
        }
    }

    #[test]
    fn mixture_variance_is_positive(c in couplings(), s in state(), t in 0.1..50.0f64, ch in channel()) {
        prop_assume!(c.gravity > 1e-3 || c.kinetic > 1e-3);
        let r = report(ch, &c, &s.with_kind(StateKind::Quantum), t).unwrap();
        prop_assert!(r.delta2_classical_sq > 0.0);
        prop_assert!(r.delta2_quantum_sq >= 0.0);
    }

    #[test]
    fn engine_reproduces_closed_forms(c in couplings(), s in state(), t in 0.1..30.0f64, ch in channel()) {
        let r = report(ch, &c, &s.with_kind(StateKind::Quantum), t).unwrap();
        let q = compute_moments(ch, &c, &s.with_kind(StateKind::Quantum), t, Oscillating::Exclude).unwrap();
        let m = compute_moments(ch, &c, &s.with_kind(StateKind::Classical), t, Oscillating::Exclude).unwrap();
        let scale = 1e-12 * (c.kinetic * t).max(c.sag * t);
        prop_assert!(close(q.i1.total().re, r.i1_quantum, 1e-10, scale));
        prop_assert!(close(m.i1.total().re, r.i1_classical, 1e-10, scale));
        prop_assert!(close(q.i2.total().re, r.i2_quantum, 1e-10, scale * scale));
    }

    #[test]
    fn engine_moments_are_physical(c in couplings(), s in state(), t in 0.1..30.0f64, ch in channel()) {
        let m = compute_moments(ch, &c, &s, t, Oscillating::Include).unwrap();
        let scale = c.gravity + c.sag + c.kinetic;
        prop_assert!(m.i1.total().im.abs() <= 1e-12 * scale * t * (1.0 + s.alpha0.powi(2)));
        prop_assert!(m.variance() >= -1e-12 * (scale * t).powi(2));
    }

    #[test]
    fn secular_to_oscillating_ratio_grows_linearly(c in couplings(), a in 0.1..1.5f64, n in 1u32..20) {
        prop_assume!(c.gravity > 1e-2);
        let s = SuperposedCoherentState::new(a, 0.4, 1.1, StateKind::Quantum);
        let period = 2.0 * PI / c.trap_frequency;
        let t1 = 0.3 * period;
        let t2 = t1 + f64::from(n) * period;
        let first = compute_i1(NoiseChannel::Free, &c, &s, t1, Oscillating::Include).unwrap();
        let second = compute_i1(NoiseChannel::Free, &c, &s, t2, Oscillating::Include).unwrap();
        prop_assume!(first.oscillating.norm() > 1e-9);
        let ratio1 = first.non_oscillating.re / first.oscillating.re;
        let ratio2 = second.non_oscillating.re / second.oscillating.re;
        prop_assert!(close(ratio2 / ratio1, t2 / t1, 1e-8, 0.0), "{} vs {}", ratio2 / ratio1, t2 / t1);
    }

    #[test]
    fn fringe_is_symmetric_about_shifted_centre(i1 in -1e-6..1e-6f64, extra in 0.0..1e-12f64, offset in 0.0..3.0f64) {
        let model = FringeModel::new(i1, i1 * i1 + extra, 1e3, 1.0).unwrap();
        let centre = model.clock_frequency + model.frequency_shift;
        let above = fringe_probability(centre + offset, &model);
        let below = fringe_probability(centre - offset, &model);
        prop_assert!((above - below).abs() < 1e-12);
        prop_assert!(fringe_probability(centre, &model) <= 1.0);
    }

    #[test]
    fn contrast_difference_tracks_variance_difference(c in couplings(), s in state(), t in 0.1..10.0f64) {
        let r = free_report(&c, &s.with_kind(StateKind::Quantum), t).unwrap();
        let clock = 1e-1;
        let q = FringeModel::from_report(&r, StateKind::Quantum, clock).unwrap();
        let m = FringeModel::from_report(&r, StateKind::Classical, clock).unwrap();
        let expected = 0.5 * clock * clock * (r.delta2_classical_sq - r.delta2_quantum_sq);
        prop_assert!(close(q.contrast - m.contrast, expected, 1e-8, 1e-14));
    }

    #[test]
    fn state_independent_variance_is_the_report_sum(c in couplings(), s in state(), t in 0.1..10.0f64, ch in channel()) {
        let r = report(ch, &c, &s.with_kind(StateKind::Quantum), t).unwrap();
        prop_assert_eq!(state_independent_variance(&r), r.delta2_quantum_sq + r.delta2_classical_sq);
        prop_assert_eq!(state_independent_variance(&r), r.delta2_combined_sq);
    }

    #[test]
    fn uncorrelated_clock_has_only_state_independent_variance(
        i1q in -1.0..1.0f64, i1c in -1.0..1.0f64, extra_q in 0.0..1.0f64, extra_c in 0.0..1.0f64,
        imag in -1.0..1.0f64, i2p in -1.0..1.0f64, t in 0.0..10.0f64,
    ) {
        // a Gaussian clock state with no time-energy correlation and zero initial spread
        let initial = IdealClockState { mean_time: 0.0, time_variance: 0.0, anticommutator: 0.0, mean_energy: 3.0 };
        let q = (i1q, Complex64::new(i1q * i1q + extra_q, imag), i2p);
        let m = (i1c, Complex64::new(i1c * i1c + extra_c, imag), i2p);
        let out = idealized_coherence(q, m, &initial, t);
        prop_assert!(out.state_dependent_variance.abs() < 1e-12);
        prop_assert!(close(out.discrepancy, i1q - i1c, 1e-12, 1e-12));
        prop_assert!(close(out.variance, extra_q + extra_c, 1e-12, 1e-12));
    }

    #[test]
    fn csv_output_is_deterministic_and_json_round_trips(values in prop::collection::vec(prop::array::uniform6(-1e10..1e10f64), 1..8)) {
        let rows: Vec<DisplacementRow> = values.iter().map(|v| DisplacementRow {
            displacement: v[0], alpha: v[1], delta1_abs: v[2], delta2_combined_sq: v[3],
            relative_discrepancy: v[4], detectability_ratio: v[5],
        }).collect();
        let (mut first, mut second) = (Vec::new(), Vec::new());
        write_csv(&rows, &mut first).unwrap();
        write_csv(&rows, &mut second).unwrap();
        prop_assert_eq!(&first, &second);
        let text = String::from_utf8(first).unwrap();
        for (line, row) in text.lines().skip(1).zip(&values) {
            let parsed: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            prop_assert_eq!(parsed.as_slice(), row.as_slice());
        }
        let mut json = Vec::new();
        write_json("displacement-sweep", serde_json::json!({}), &rows, &mut json).unwrap();
        let doc: JsonDocument<DisplacementRow> = JsonDocument::parse(std::str::from_utf8(&json).unwrap()).unwrap();
        prop_assert_eq!(doc.rows, rows);
    }
}
