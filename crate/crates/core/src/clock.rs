//! Observable clock quantities built from the time-dilation moments.
//!
//! - [`FringeModel`]: the Ramsey fringe with a shifted centre frequency and a
//!   reduced contrast.
//! - [`detectability`]: the ratio of the coherence-induced frequency shift to the
//!   frequency uncertainty.
//! - [`idealized_clock_moments`]: mean and variance of an ideal clock's time
//!   operator after interacting with the motional state.
//! - [`classical_proper_time`]: the proper time of a point particle following the
//!   classical trajectory in the gravity-tilted trap.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::closed_form::{DilationReport, RegimeWarning};
use crate::error::{require_positive, Result};
use crate::units::{LatticeDerived, StateKind};

/// A Ramsey fringe ½(1 + p̃ cos((ω̃₀ − ω)T)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeModel {
    /// Unperturbed clock angular frequency ω₀, rad/s.
    pub clock_frequency: f64,
    /// Interrogation time T, s.
    pub interrogation_time: f64,
    /// Shifted centre frequency ω̃₀ = ω₀(T + I₁)/T, rad/s.
    pub shifted_frequency: f64,
    /// ω̃₀ − ω₀ = ω₀I₁/T, kept separately because it is far below the
    /// resolution of ω̃₀ itself.
    pub frequency_shift: f64,
    /// Contrast p̃ = 1 − ω₀²(Re I₂ − I₁²)/2.
    pub contrast: f64,
    /// Set when the second-order contrast loss exceeds one half.
    pub warning: Option<RegimeWarning>,
}

impl FringeModel {
    /// Builds the fringe from the first moment and the real part of the second.
    pub fn new(i1: f64, re_i2: f64, clock_frequency: f64, interrogation_time: f64) -> Result<Self> {
        require_positive("clock_frequency", clock_frequency)?;
        require_positive("interrogation_time", interrogation_time)?;
        let loss = 0.5 * clock_frequency * clock_frequency * (re_i2 - i1 * i1);
        let warning = (loss > 0.5).then(|| RegimeWarning {
            message: format!(
                "contrast loss {loss:.3e} exceeds 0.5; second-order fringe is unreliable"
            ),
        });
        Ok(Self {
            clock_frequency,
            interrogation_time,
            shifted_frequency: clock_frequency * (interrogation_time + i1) / interrogation_time,
            frequency_shift: clock_frequency * i1 / interrogation_time,
            contrast: 1.0 - loss,
            warning,
        })
    }

    /// The fringe of the superposition or of the mixture described by `report`.
    pub fn from_report(
        report: &DilationReport,
        kind: StateKind,
        clock_frequency: f64,
    ) -> Result<Self> {
        let (i1, i2) = match kind {
            StateKind::Quantum => (report.i1_quantum, report.i2_quantum),
            StateKind::Classical => (report.i1_classical, report.i2_classical),
        };
        Self::new(i1, i2, clock_frequency, report.interrogation_time)
    }

    /// Phase (ω̃₀ − ω)T accumulated against a laser at `laser_frequency`, written
    /// as (ω̃₀ − ω₀)T + (ω₀ − ω)T to keep the small shift exact.
    pub fn phase(&self, laser_frequency: f64) -> f64 {
        (self.frequency_shift + (self.clock_frequency - laser_frequency)) * self.interrogation_time
    }
}

/// Excited-state probability of the fringe at laser angular frequency `laser_frequency`,
/// clamped to [0, 1].
pub fn fringe_probability(laser_frequency: f64, model: &FringeModel) -> f64 {
    (0.5 * (1.0 + model.contrast * model.phase(laser_frequency).cos())).clamp(0.0, 1.0)
}

/// Comparison of the coherence-induced shift with the clock's frequency spread.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectabilityResult {
    /// Signed frequency discrepancy ω₀Δ₁,coh/T, rad/s.
    pub discrepancy: f64,
    /// κ·√(2/T² + ω₀²Δ²₂,cq/T²), rad/s.
    pub sigma: f64,
    /// |discrepancy| / sigma.
    pub ratio: f64,
    /// ratio ≥ 1.
    pub detectable: bool,
}

/// Detectability of the coherence discrepancy with proportionality constant `kappa`.
pub fn detectability(
    report: &DilationReport,
    clock_frequency: f64,
    kappa: f64,
) -> Result<DetectabilityResult> {
    require_positive("kappa", kappa)?;
    require_positive("clock_frequency", clock_frequency)?;
    let t = report.interrogation_time;
    let discrepancy = clock_frequency * report.delta1_coh / t;
    let sigma = kappa
        * (2.0 / (t * t) + clock_frequency * clock_frequency * report.delta2_combined_sq / (t * t))
            .sqrt();
    let ratio = discrepancy.abs() / sigma;
    Ok(DetectabilityResult {
        discrepancy,
        sigma,
        ratio,
        detectable: ratio >= 1.0,
    })
}

/// Initial moments of an ideal clock's time operator T_c and Hamiltonian H_c.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IdealClockState {
    /// ⟨T_c⟩(0), s.
    pub mean_time: f64,
    /// σ_c²(0) = ⟨T_c²⟩(0) − ⟨T_c⟩(0)², s².
    pub time_variance: f64,
    /// ⟨{T_c, H_c}⟩(0) (ħ = 1).
    pub anticommutator: f64,
    /// ⟨H_c⟩(0), rad/s.
    pub mean_energy: f64,
}

impl IdealClockState {
    /// ⟨{T_c, H_c}⟩ − 2⟨T_c⟩⟨H_c⟩, the weight of the clock-state-dependent term.
    pub fn covariance(&self) -> f64 {
        self.anticommutator - 2.0 * self.mean_time * self.mean_energy
    }
}

/// Time-operator mean and variance after time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdealClockMoments {
    /// ⟨T_c⟩(0) + t + I₁, s.
    pub mean: f64,
    /// σ_c²(0) + Re I₂ − I₁² + (Im I₂ + 2I₂′)·covariance, s².
    pub variance: f64,
}

/// Ideal-clock moments to second order in the motional coupling.
pub fn idealized_clock_moments(
    i1: f64,
    i2: Complex64,
    i2_prime: f64,
    initial: &IdealClockState,
    time: f64,
) -> IdealClockMoments {
    IdealClockMoments {
        mean: initial.mean_time + time + i1,
        variance: initial.time_variance + i2.re - i1 * i1
            + (i2.im + 2.0 * i2_prime) * initial.covariance(),
    }
}

/// Discrepancy between the superposition and the mixture for an ideal clock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdealClockCoherence {
    /// ⟨T_c⟩_qtm − ⟨T_c⟩_cls = I₁,qtm − I₁,cls, s.
    pub discrepancy: f64,
    /// σ²_coh = σ²_qtm + σ²_cls, s².
    pub variance: f64,
    /// Clock-state-independent part Δ²₂,qtm + Δ²₂,cls, s².
    pub state_independent_variance: f64,
    /// Σ (Im I₂ + 2I₂′)·covariance over both preparations, s².
    pub state_dependent_variance: f64,
}

/// Combines the ideal-clock moments of the two preparations.
///
/// `quantum` and `classical` are (I₁, I₂, I₂′) triples. The discrepancy and the
/// two variance parts are formed from the integrals directly, because the
/// totals carry t and σ_c²(0), which are many orders of magnitude larger.
pub fn idealized_coherence(
    quantum: (f64, Complex64, f64),
    classical: (f64, Complex64, f64),
    initial: &IdealClockState,
    time: f64,
) -> IdealClockCoherence {
    let q = idealized_clock_moments(quantum.0, quantum.1, quantum.2, initial, time);
    let c = idealized_clock_moments(classical.0, classical.1, classical.2, initial, time);
    let independent =
        (quantum.1.re - quantum.0 * quantum.0) + (classical.1.re - classical.0 * classical.0);
    let dependent = (quantum.1.im + 2.0 * quantum.2 + classical.1.im + 2.0 * classical.2)
        * initial.covariance();
    IdealClockCoherence {
        discrepancy: quantum.0 - classical.0,
        variance: q.variance + c.variance,
        state_independent_variance: independent,
        state_dependent_variance: dependent,
    }
}

/// Clock-state-independent variance σ²_coh,i = Δ²₂,qtm + Δ²₂,cls.
pub fn state_independent_variance(report: &DilationReport) -> f64 {
    report.delta2_quantum_sq + report.delta2_classical_sq
}

/// δ = |⟨T_c⟩_coh| − σ_coh,i; the discrepancy stands out of the spread when positive.
pub fn coherence_margin(report: &DilationReport) -> f64 {
    report.delta1_coh.abs() - state_independent_variance(report).max(0.0).sqrt()
}

/// Initial phase-space point of a classical particle in the trap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalInitial {
    /// Mean height z̄(0), m, measured in the lab frame (trap centre at 0).
    pub position: f64,
    /// Mean momentum p̄(0), kg·m/s.
    pub momentum: f64,
    /// Momentum variance σ_p², (kg·m/s)²; 0 for a point particle.
    pub momentum_variance: f64,
}

impl ClassicalInitial {
    /// The Gaussian matching a coherent state |α⟩:
    /// z̄ = √2 z_s Re α − g/ω_z², p̄ = √2 mω_z z_s Im α, σ_p² = mħω_z/2.
    pub fn coherent(alpha: Complex64, derived: &LatticeDerived) -> Self {
        let omega = derived.trap_frequency;
        let zs = derived.ground_width;
        let m = derived.mass;
        Self {
            position: std::f64::consts::SQRT_2 * zs * alpha.re - derived.consts.g / (omega * omega),
            momentum: std::f64::consts::SQRT_2 * m * omega * zs * alpha.im,
            momentum_variance: 0.5 * m * derived.consts.hbar * omega,
        }
    }
}

/// I₀ = ∫₀ᵀ (g z̄(t)/c² − (p̄(t)² + σ_p²(t))/(2m²c²)) dt along the harmonic
/// trajectory about the gravity-shifted minimum −g/ω_z², in seconds.
///
/// The variance term is included when `augment_variance` is set; the position
/// variance is the minimum-uncertainty value ħ²/(4σ_p²).
pub fn classical_proper_time(
    initial: &ClassicalInitial,
    derived: &LatticeDerived,
    duration: f64,
    augment_variance: bool,
) -> f64 {
    let omega = derived.trap_frequency;
    let m = derived.mass;
    let (g, c2, hbar) = (
        derived.consts.g,
        derived.consts.c * derived.consts.c,
        derived.consts.hbar,
    );
    let centre = -g / (omega * omega);
    let cos_amp = initial.position - centre;
    let sin_amp = initial.momentum / (m * omega);
    let wt = omega * duration;
    let (s1, c1) = wt.sin_cos();
    let s2 = (2.0 * wt).sin();

    let int_cos2 = 0.5 * duration + s2 / (4.0 * omega);
    let int_sin2 = 0.5 * duration - s2 / (4.0 * omega);
    let int_sincos = s1 * s1 / (2.0 * omega);

    let height = centre * duration + cos_amp * s1 / omega + sin_amp * (1.0 - c1) / omega;
    let m2w2 = m * m * omega * omega;
    let mut momentum_sq = m2w2
        * (cos_amp * cos_amp * int_sin2 + sin_amp * sin_amp * int_cos2
            - 2.0 * cos_amp * sin_amp * int_sincos);
    if augment_variance && initial.momentum_variance > 0.0 {
        let position_variance = hbar * hbar / (4.0 * initial.momentum_variance);
        momentum_sq += initial.momentum_variance * int_cos2 + m2w2 * position_variance * int_sin2;
    }
    g * height / c2 - momentum_sq / (2.0 * m * m * c2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{derive_lattice, AtomSpec, LatticeSpec, PhysicalConstants};

    #[test]
    fn fringe_examples() {
        let model = FringeModel::new(0.0, 0.0, 10.0, 1.0).unwrap();
        assert_eq!(fringe_probability(model.shifted_frequency, &model), 1.0);
        assert_eq!(model.frequency_shift, 0.0);
        let flat = FringeModel {
            contrast: 0.0,
            ..model.clone()
        };
        assert_eq!(fringe_probability(3.0, &flat), 0.5);

        let w0 = 4.11e15;
        let shifted = FringeModel::new(1e-19, 0.0, w0, 1.0).unwrap();
        let p = fringe_probability(w0, &shifted);
        let expected = 0.5 * (1.0 + shifted.contrast * (4.11e-4f64).cos());
        assert!((p - expected).abs() < 1e-15);
    }

    #[test]
    fn ideal_clock_without_coupling_just_ticks() {
        let init = IdealClockState {
            mean_time: 2.0,
            time_variance: 0.3,
            anticommutator: 1.0,
            mean_energy: 0.5,
        };
        let m = idealized_clock_moments(0.0, Complex64::new(0.0, 0.0), 0.0, &init, 4.0);
        assert_eq!(m.mean, 6.0);
        assert_eq!(m.variance, 0.3);
    }

    #[test]
    fn tiny_discrepancy_survives_a_long_interrogation() {
        let init = IdealClockState {
            mean_time: 0.0,
            time_variance: 1e-6,
            anticommutator: 0.5,
            mean_energy: 0.0,
        };
        let quantum = (-1e-19, Complex64::new(2e-38, 4e-40), 1e-40);
        let classical = (-4e-20, Complex64::new(3e-39, 0.0), 0.0);
        let out = idealized_coherence(quantum, classical, &init, 1.0);
        assert_eq!(out.discrepancy, -1e-19 - -4e-20);
        assert!((out.state_independent_variance - (1e-38 + 1.4e-39)).abs() < 1e-52);
        assert!((out.state_dependent_variance - 3e-40).abs() < 1e-54);
    }

    #[test]
    fn trap_minimum_gives_pure_sag_term() {
        let d = derive_lattice(
            &AtomSpec::mg24(),
            &LatticeSpec::baseline(),
            &PhysicalConstants::default(),
        )
        .unwrap();
        let at_rest = ClassicalInitial {
            position: -d.consts.g / d.trap_frequency.powi(2),
            momentum: 0.0,
            momentum_variance: 0.0,
        };
        let i0 = classical_proper_time(&at_rest, &d, 1.0, false);
        assert!((i0 + d.sag_coupling).abs() < 1e-12 * d.sag_coupling);
    }
}
