//! Published reference values and hand-built oracles for derived quantities.
//!
//! The oracles here avoid the library's operator algebra: expectations of the
//! cat state are written out branch by branch and time integrals use plain
//! composite Simpson quadrature.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lattice_clock::algebra::NoiseChannel;
use lattice_clock::closed_form::{
    added_variance_ratio, amplitude_report, diffusion_report, free_report, oscillating_delta1,
};
use lattice_clock::integral::{compute_i1, exact_exp_poly_integral, Oscillating};
use lattice_clock::units::{
    derive_lattice, displacement_to_alpha, AtomSpec, Couplings, LatticeDerived, LatticeSpec,
    PhysicalConstants, StateKind, SuperposedCoherentState,
};

fn lattice(atom: &AtomSpec) -> LatticeDerived {
    derive_lattice(
        atom,
        &LatticeSpec::baseline(),
        &PhysicalConstants::default(),
    )
    .unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn simpson(f: impl Fn(f64) -> f64, end: f64, intervals: usize) -> f64 {
    let h = end / intervals as f64;
    let mut sum = f(0.0) + f(end);
    for i in 1..intervals {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    sum * h / 3.0
}

/// ⟨a⟩, ⟨a²⟩ and ⟨a†a⟩ of cos θ|α⟩ + e^{iφ} sin θ|−α⟩ (or of the matching mixture).
fn cat_moments(alpha: f64, theta: f64, phi: f64, kind: StateKind) -> (Complex64, Complex64, f64) {
    let (c, s) = (theta.cos(), theta.sin());
    let overlap = (-2.0 * alpha * alpha).exp();
    let mut norm = c * c + s * s;
    // branch-diagonal parts: ⟨±α|a|±α⟩ = ±α, ⟨±α|a²|±α⟩ = α², ⟨±α|a†a|±α⟩ = α²
    let mut first = Complex64::new(alpha * (c * c - s * s), 0.0);
    let mut second = Complex64::new(alpha * alpha * norm, 0.0);
    let mut number = alpha * alpha * norm;
    if kind == StateKind::Quantum {
        // cross terms: ⟨α|A|−α⟩ e^{iφ} + ⟨−α|A|α⟩ e^{−iφ}, each weighted by cos θ sin θ
        let (up, down) = (
            Complex64::from_polar(c * s, phi),
            Complex64::from_polar(c * s, -phi),
        );
        norm += 2.0 * c * s * phi.cos() * overlap;
        first += (up * (-alpha) + down * alpha) * overlap;
        second += (up + down) * alpha * alpha * overlap;
        number += (-(alpha * alpha)) * 2.0 * c * s * phi.cos() * overlap;
    }
    (first / norm, second / norm, number / norm)
}

/// ∫₀ᵀ ⟨V(t)⟩ dt under free evolution, with a(t) = a e^{−iωt}.
fn free_first_moment(
    c: &Couplings,
    alpha: f64,
    theta: f64,
    phi: f64,
    kind: StateKind,
    duration: f64,
) -> f64 {
    let (first, second, number) = cat_moments(alpha, theta, phi, kind);
    let w = c.trap_frequency;
    let integrand = |t: f64| {
        let a_t = first * Complex64::from_polar(1.0, -w * t);
        let a2_t = second * Complex64::from_polar(1.0, -2.0 * w * t);
        c.gravity * 2.0 * a_t.re - c.sag + c.kinetic * (2.0 * a2_t.re - 2.0 * number - 1.0)
    };
    simpson(integrand, duration, 20_000)
}

#[test]
fn mg_trap_constants_from_first_principles() {
    let atom = AtomSpec::mg24();
    let d = lattice(&atom);
    let (hbar, c, g) = (1.054_571_817e-34, 299_792_458.0, 9.806_65);
    let m = atom.mass;
    let wavelength = 468e-9;
    let recoil = 2.0 * PI * PI * hbar * hbar / (m * wavelength * wavelength);
    let omega = (2.0 * 300.0 * recoil / m).sqrt() * 2.0 * PI / wavelength;
    let width = (hbar / (m * omega)).sqrt();
    assert!(rel(d.trap_frequency, omega) < 1e-14);
    assert!(rel(d.ground_width, width) < 1e-14);
    assert!(rel(d.gravity_coupling, g * width / (SQRT_2 * c * c)) < 1e-14);
    assert!(rel(d.sag_coupling, g * g / (omega * omega * c * c)) < 1e-14);
    assert!(rel(d.kinetic_coupling, hbar * omega / (4.0 * m * c * c)) < 1e-14);
    // trap frequency of a 300 E_r magnesium lattice at 468 nm: about 1.3 MHz
    assert!(
        (omega / (2.0 * PI) - 1.315e6).abs() < 1e3,
        "{}",
        omega / (2.0 * PI)
    );
}

#[test]
fn published_amplitudes_for_ten_nanometres() {
    let mg = displacement_to_alpha(10e-9, &lattice(&AtomSpec::mg24()));
    let sr = displacement_to_alpha(10e-9, &lattice(&AtomSpec::sr87()));
    assert!((mg - 0.395).abs() < 5e-4, "{mg}");
    assert!((sr - 0.227).abs() < 5e-4, "{sr}");
}

#[test]
fn published_orders_of_magnitude_for_the_discrepancy() {
    let baseline = |atom: &AtomSpec| {
        let d = lattice(atom);
        let s = SuperposedCoherentState::new(
            displacement_to_alpha(10e-9, &d),
            FRAC_PI_4,
            PI,
            StateKind::Quantum,
        );
        free_report(&d.couplings(), &s, 1.0).unwrap()
    };
    let mg = baseline(&AtomSpec::mg24()).relative_discrepancy.abs();
    let sr = baseline(&AtomSpec::sr87()).relative_discrepancy.abs();
    assert!(mg.log10().round() == -19.0, "{mg:e}");
    assert!(
        sr.log10().round() == -21.0 || sr.log10().round() == -20.0 && sr < 5e-21,
        "{sr:e}"
    );
}

#[test]
fn unit_amplitude_damping_keeps_discrepancy_near_published_level() {
    let d = lattice(&AtomSpec::mg24());
    let s = SuperposedCoherentState::new(
        displacement_to_alpha(10e-9, &d),
        FRAC_PI_4,
        PI,
        StateKind::Quantum,
    );
    let damped = amplitude_report(&d.couplings(), &s, 1.0, 1.0).unwrap();
    assert!((5e-20..2e-19).contains(&damped.delta1_coh.abs()));
}

#[test]
fn diffusion_adds_a_small_fraction_of_variance() {
    let atom = AtomSpec::mg24();
    let d = lattice(&atom);
    let s = SuperposedCoherentState::new(
        displacement_to_alpha(10e-9, &d),
        FRAC_PI_4,
        PI,
        StateKind::Quantum,
    );
    let free = free_report(&d.couplings(), &s, 1.0).unwrap();
    let diffused = diffusion_report(&d.couplings(), &s, 1.0, 1.0).unwrap();
    let ratio = added_variance_ratio(&diffused, &free, atom.clock_angular_frequency);
    assert!(ratio > 0.0 && ratio < 1e-6, "{ratio:e}");
}

#[test]
fn secular_discrepancy_matches_hand_formula() {
    // Δ₁ = 4 C_k α² C_i/(1 + C_i) · (1 − e^{−ΓT})/Γ, and T at Γ = 0
    let d = lattice(&AtomSpec::mg24());
    let couplings = d.couplings();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let alpha = rng.gen_range(0.05..1.5);
        let theta = rng.gen_range(0.0..FRAC_PI_2);
        let phi = rng.gen_range(0.0..2.0 * PI);
        let t = rng.gen_range(0.1..5.0);
        let rate: f64 = rng.gen_range(0.0..3.0);
        let s = SuperposedCoherentState::new(alpha, theta, phi, StateKind::Quantum);
        let ci = (-2.0 * alpha * alpha).exp() * (2.0 * theta).sin() * phi.cos();
        if 1.0 + ci < 1e-3 {
            continue;
        }
        let window = if rate == 0.0 {
            t
        } else {
            (1.0 - (-rate * t).exp()) / rate
        };
        let expected = 4.0 * couplings.kinetic * alpha * alpha * ci / (1.0 + ci) * window;
        let got = amplitude_report(&couplings, &s, t, rate)
            .unwrap()
            .delta1_coh;
        assert!(
            (got - expected).abs() <= 1e-12 * expected.abs().max(1e-40),
            "{got:e} vs {expected:e}"
        );
    }
}

#[test]
fn first_moment_matches_branchwise_quadrature() {
    let c = Couplings {
        gravity: 0.07,
        sag: 0.01,
        kinetic: 0.2,
        trap_frequency: 1.3,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let alpha = rng.gen_range(0.1..1.5);
        let theta = rng.gen_range(0.0..FRAC_PI_2);
        let phi = rng.gen_range(0.0..2.0 * PI);
        let t = rng.gen_range(0.5..15.0);
        for kind in [StateKind::Quantum, StateKind::Classical] {
            let s = SuperposedCoherentState::new(alpha, theta, phi, kind);
            if s.validate().is_err() || 1.0 + s.coherence_factor() < 1e-3 {
                continue;
            }
            let engine = compute_i1(NoiseChannel::Free, &c, &s, t, Oscillating::Include)
                .unwrap()
                .total();
            let oracle = free_first_moment(&c, alpha, theta, phi, kind, t);
            assert!(engine.im.abs() < 1e-13);
            assert!(
                rel(engine.re, oracle) < 1e-10,
                "{} vs {oracle} ({kind:?})",
                engine.re
            );
        }
    }
}

#[test]
fn oscillating_gravity_correction_matches_quadrature() {
    // at φ = π/2 the kinetic oscillation is the same for superposition and mixture,
    // so the full discrepancy is the secular part plus the gravity-driven term
    let c = Couplings {
        gravity: 0.1,
        sag: 0.01,
        kinetic: 0.05,
        trap_frequency: 1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let alpha = rng.gen_range(0.1..1.2);
        let theta = rng.gen_range(0.05..1.5);
        let t = rng.gen_range(0.5..12.0);
        let quantum = free_first_moment(&c, alpha, theta, FRAC_PI_2, StateKind::Quantum, t);
        let mixture = free_first_moment(&c, alpha, theta, FRAC_PI_2, StateKind::Classical, t);
        let s = SuperposedCoherentState::new(alpha, theta, FRAC_PI_2, StateKind::Quantum);
        let osc = oscillating_delta1(&c, &s, t).unwrap();
        let expected = quantum - mixture;
        assert!(
            (osc.full - expected).abs() < 1e-10 * (1.0 + expected.abs()),
            "{} vs {expected}",
            osc.full
        );
        assert!(osc.correction.abs() <= osc.bound * (1.0 + 1e-12));
    }
}

#[test]
fn oscillating_correction_at_the_published_point() {
    let d = lattice(&AtomSpec::mg24());
    let couplings = d.couplings();
    let alpha = displacement_to_alpha(10e-9, &d);
    let s = SuperposedCoherentState::new(alpha, PI / 8.0, FRAC_PI_2, StateKind::Quantum);
    let osc = oscillating_delta1(&couplings, &s, 1.0).unwrap();
    // hand evaluation: C_i = 0 and C_i tan φ = e^{−2α²} sin 2θ sin φ
    let ci_tan = (-2.0 * alpha * alpha).exp() * (PI / 4.0).sin();
    let scale = 2.0 * couplings.gravity * alpha / couplings.trap_frequency;
    let wt = couplings.trap_frequency;
    let expected = scale * ci_tan * (wt.cos() - 1.0);
    assert!(rel(osc.correction, expected) < 1e-9);
    assert!(osc.correction.abs() < 1e-30);
    assert!(rel(osc.bound, 2.0 * scale * ci_tan) < 1e-12);
}

#[test]
fn exponential_polynomial_integral_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..40 {
        let power = rng.gen_range(0..5);
        let exponent = Complex64::new(-rng.gen_range(0.0..2.0), rng.gen_range(-3.0..3.0));
        let t = rng.gen_range(0.01..6.0);
        let re = simpson(
            |s| (s.powi(power as i32) * (exponent * s).exp()).re,
            t,
            20_000,
        );
        let im = simpson(
            |s| (s.powi(power as i32) * (exponent * s).exp()).im,
            t,
            20_000,
        );
        let exact = exact_exp_poly_integral(power, exponent, t);
        assert!((exact - Complex64::new(re, im)).norm() < 1e-10 * (1.0 + exact.norm()));
    }
}
