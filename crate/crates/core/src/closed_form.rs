//! Closed-form time-dilation moments for the superposed and mixed states.
//!
//! Both states share the moments `⟨a†²a²⟩ = α₀⁴` and differ in the mean
//! occupation: `α₀²(1 − C_i)/(1 + C_i)` for the superposition and `α₀²` for the
//! mixture. In the secular approximation (terms rotating at multiples of ω_z
//! dropped) the first moment I₁ and second moment I₂ depend on the state only
//! through these two numbers, which gives the formulas below.
//!
//! With `A = C_r + C_k`, `B = 2C_k`, occupation `n` and `n₂ = ⟨a†²a²⟩`:
//!
//! - free and phase damping: `I₁ = −(A + Bn)T`,
//!   `I₂ = A²T² + 2ABnT² + B²(n₂ + n)T²`;
//! - amplitude damping, with `F = ∫₀ᵀ e^{−Γt}dt` and `G = ∫₀ᵀ t e^{−Γt}dt`:
//!   `I₁ = −AT − BnF`, `I₂ = B²n₂F² + 2ABnTF + 2B²nG + A²T²`;
//! - diffusion: `I₁ = −AT − BnT − BΓT²/2`,
//!   `I₂ = A²T² + 2ABnT² + ABΓT³ + B²(n₂ + n)T² + B²(5n + 1)ΓT³/3 + 5B²Γ²T⁴/12`.

use serde::{Deserialize, Serialize};

use crate::algebra::NoiseChannel;
use crate::error::{Error, Result};
use crate::units::{Couplings, SuperposedCoherentState};

/// A non-fatal note that the secular approximation may be inaccurate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeWarning {
    pub message: String,
}

/// Quantum and classical time-dilation moments for one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationReport {
    pub channel: NoiseChannel,
    /// Interrogation time T, s.
    pub interrogation_time: f64,
    /// I₁ of the superposition, s.
    pub i1_quantum: f64,
    /// I₁ of the mixture, s.
    pub i1_classical: f64,
    /// Re I₂ of the superposition, s².
    pub i2_quantum: f64,
    /// Re I₂ of the mixture, s².
    pub i2_classical: f64,
    /// Δ₁,coh = I₁(quantum) − I₁(classical), s.
    pub delta1_coh: f64,
    /// Δ²₂ of the superposition, Re I₂ − I₁², s².
    pub delta2_quantum_sq: f64,
    /// Δ²₂ of the mixture, s².
    pub delta2_classical_sq: f64,
    /// Sum of the two variances, s².
    pub delta2_combined_sq: f64,
    /// Δ₁,coh / T.
    pub relative_discrepancy: f64,
    pub warnings: Vec<RegimeWarning>,
}

impl DilationReport {
    /// The state-independent clock standard deviation √(Δ²₂,qtm + Δ²₂,cls).
    pub fn combined_sigma(&self) -> f64 {
        self.delta2_combined_sq.max(0.0).sqrt()
    }
}

/// Shared inputs: couplings, the two occupations and the interference weight.
struct Moments {
    offset: f64,
    kinetic: f64,
    alpha_sq: f64,
    coherence: f64,
    occupation_quantum: f64,
    occupation_classical: f64,
    factorial_moment: f64,
}

impl Moments {
    fn new(couplings: &Couplings, state: &SuperposedCoherentState) -> Result<Self> {
        couplings.validate()?;
        let state = state.with_kind(crate::units::StateKind::Quantum);
        state.validate()?;
        let alpha_sq = state.alpha0 * state.alpha0;
        let coherence = state.coherence_factor();
        Ok(Self {
            offset: couplings.sag + couplings.kinetic,
            kinetic: couplings.kinetic,
            alpha_sq,
            coherence,
            occupation_quantum: alpha_sq * (1.0 - coherence) / (1.0 + coherence),
            occupation_classical: alpha_sq,
            factorial_moment: alpha_sq * alpha_sq,
        })
    }

    /// C_i/(1 + C_i).
    fn weight(&self) -> f64 {
        self.coherence / (1.0 + self.coherence)
    }

    /// (1 − C_i)/(1 + C_i).
    fn occupation_ratio(&self) -> f64 {
        (1.0 - self.coherence) / (1.0 + self.coherence)
    }
}

/// ∫₀ᵀ e^{−Γt} dt, exact for every Γ ≥ 0.
pub fn decay_factor(rate: f64, duration: f64) -> f64 {
    if rate == 0.0 {
        duration
    } else {
        -(-rate * duration).exp_m1() / rate
    }
}

/// ∫₀ᵀ t e^{−Γt} dt, by series for small ΓT and in closed form otherwise.
pub fn ramp_factor(rate: f64, duration: f64) -> f64 {
    let x = rate * duration;
    if x < 0.5 {
        // T² Σ_j (−x)^j / (j! (j + 2))
        let mut term = 1.0;
        let mut sum = 0.5;
        for j in 1..40 {
            term *= -x / f64::from(j);
            let add = term / f64::from(j + 2);
            sum += add;
            if add.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        duration * duration * sum
    } else {
        (1.0 - (-x).exp() * (1.0 + x)) / (rate * rate)
    }
}

fn check_duration(duration: f64) -> Result<()> {
    if duration > 0.0 && duration.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive {
            field: "interrogation_time",
            value: duration,
        })
    }
}

fn regime_warnings(
    couplings: &Couplings,
    channel: NoiseChannel,
    duration: f64,
) -> Vec<RegimeWarning> {
    let mut warnings = Vec::new();
    let omega = couplings.trap_frequency;
    if omega * duration < 100.0 {
        warnings.push(RegimeWarning {
            message: format!(
                "ω_z·T = {:.3e} is not large; dropped oscillating terms are not negligible",
                omega * duration
            ),
        });
    }
    let rate = channel.rate();
    if rate > 0.0 && omega / rate < 100.0 {
        warnings.push(RegimeWarning {
            message: format!(
                "ω_z/Γ = {:.3e} < 100; the {} closed form assumes a slow channel",
                omega / rate,
                channel.name()
            ),
        });
    }
    warnings
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    channel: NoiseChannel,
    couplings: &Couplings,
    duration: f64,
    i1: (f64, f64),
    i2: (f64, f64),
    delta1: f64,
    delta2_quantum: f64,
    delta2_classical: f64,
) -> DilationReport {
    DilationReport {
        channel,
        interrogation_time: duration,
        i1_quantum: i1.0,
        i1_classical: i1.1,
        i2_quantum: i2.0,
        i2_classical: i2.1,
        delta1_coh: delta1,
        delta2_quantum_sq: delta2_quantum,
        delta2_classical_sq: delta2_classical,
        delta2_combined_sq: delta2_quantum + delta2_classical,
        relative_discrepancy: delta1 / duration,
        warnings: regime_warnings(couplings, channel, duration),
    }
}

fn secular_free(
    couplings: &Couplings,
    state: &SuperposedCoherentState,
    duration: f64,
    channel: NoiseChannel,
) -> Result<DilationReport> {
    check_duration(duration)?;
    channel.validate()?;
    let mo = Moments::new(couplings, state)?;
    let (a, b, t) = (mo.offset, 2.0 * mo.kinetic, duration);
    let i1 = |n: f64| -(a + b * n) * t;
    let i2 = |n: f64| (a * a + 2.0 * a * b * n + b * b * (mo.factorial_moment + n)) * t * t;
    let ck2t2 = mo.kinetic * mo.kinetic * t * t;
    let delta1 = 4.0 * mo.kinetic * mo.weight() * mo.alpha_sq * t;
    let delta2_quantum =
        16.0 * ck2t2 * mo.coherence / (1.0 + mo.coherence).powi(2) * mo.alpha_sq * mo.alpha_sq
            + 4.0 * ck2t2 * mo.occupation_ratio() * mo.alpha_sq;
    let delta2_classical = 4.0 * ck2t2 * mo.alpha_sq;
    Ok(assemble(
        channel,
        couplings,
        duration,
        (i1(mo.occupation_quantum), i1(mo.occupation_classical)),
        (i2(mo.occupation_quantum), i2(mo.occupation_classical)),
        delta1,
        delta2_quantum,
        delta2_classical,
    ))
}

/// Secular moments under free harmonic evolution.
pub fn free_report(
    couplings: &Couplings,
    state: &SuperposedCoherentState,
    duration: f64,
) -> Result<DilationReport> {
    secular_free(couplings, state, duration, NoiseChannel::Free)
}

/// Secular moments under phase damping; identical numbers to [`free_report`]
/// because dephasing leaves every secular monomial a†^m a^m untouched.
pub fn phase_report(
    couplings: &Couplings,
    state: &SuperposedCoherentState,
    duration: f64,
    rate: f64,
) -> Result<DilationReport> {
    secular_free(couplings, state, duration, NoiseChannel::PhaseDamping(rate))
}

/// Secular moments under amplitude damping at rate Γ.
pub fn amplitude_report(
    couplings: &Couplings,
    state: &SuperposedCoherentState,
    duration: f64,
    rate: f64,
) -> Result<DilationReport> {
    check_duration(duration)?;
    let channel = NoiseChannel::AmplitudeDamping(rate);
    channel.validate()?;
    let mo = Moments::new(couplings, state)?;
    let (a, b, t) = (mo.offset, 2.0 * mo.kinetic, duration);
    let decay = decay_factor(rate, t);
    let ramp = ramp_factor(rate, t);
    let i1 = |n: f64| -a * t - b * n * decay;
    let i2 = |n: f64| {
        b * b * mo.factorial_moment * decay * decay
            + 2.0 * a * b * n * t * decay
            + 2.0 * b * b * n * ramp
            + a * a * t * t
    };
    let ck2 = mo.kinetic * mo.kinetic;
    let delta1 = 4.0 * mo.kinetic * mo.weight() * mo.alpha_sq * decay;
    let delta2_quantum = 16.0 * ck2 * mo.coherence / (1.0 + mo.coherence).powi(2)
        * mo.alpha_sq
        * mo.alpha_sq
        * decay
        * decay
        + 8.0 * ck2 * mo.occupation_ratio() * mo.alpha_sq * ramp;
    let delta2_classical = 8.0 * ck2 * mo.alpha_sq * ramp;
    Ok(assemble(
        channel,
        couplings,
        duration,
        (i1(mo.occupation_quantum), i1(mo.occupation_classical)),
        (i2(mo.occupation_quantum), i2(mo.occupation_classical)),
        delta1,
        delta2_quantum,
        delta2_classical,
    ))
}

/// Secular moments under symmetric diffusion at rate Γ.
pub fn diffusion_report(
    couplings: &Couplings,
    state: &SuperposedCoherentState,
    duration: f64,
    rate: f64,
) -> Result<DilationReport> {
    check_duration(duration)?;
    let channel = NoiseChannel::Diffusion(rate);
    channel.validate()?;
    let mo = Moments::new(couplings, state)?;
    let (a, b, t, g) = (mo.offset, 2.0 * mo.kinetic, duration, rate);
    let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
    let i1 = |n: f64| -a * t - b * n * t - 0.5 * b * g * t2;
    let i2 = |n: f64| {
        a * a * t2
            + 2.0 * a * b * n * t2
            + a * b * g * t3
            + b * b * (mo.factorial_moment + n) * t2
            + b * b * (5.0 * n + 1.0) * g * t3 / 3.0
            + 5.0 * b * b * g * g * t4 / 12.0
    };
    let ck2 = mo.kinetic * mo.kinetic;
    let heating = 4.0 / 3.0 * ck2 * g * t3 + 2.0 / 3.0 * ck2 * g * g * t4;
    let delta1 = 4.0 * mo.kinetic * mo.weight() * mo.alpha_sq * t;
    let delta2_quantum =
        16.0 * ck2 * mo.coherence / (1.0 + mo.coherence).powi(2) * mo.alpha_sq * mo.alpha_sq * t2
            + 8.0 / 3.0 * ck2 * mo.occupation_ratio() * mo.alpha_sq * g * t3
            + 4.0 * ck2 * mo.occupation_ratio() * mo.alpha_sq * t2
            + heating;
    let delta2_classical =
        4.0 * ck2 * mo.alpha_sq * t2 + 8.0 / 3.0 * ck2 * mo.alpha_sq * g * t3 + heating;
    Ok(assemble(
        channel,
        couplings,
        duration,
        (i1(mo.occupation_quantum), i1(mo.occupation_classical)),
        (i2(mo.occupation_quantum), i2(mo.occupation_classical)),
        delta1,
        delta2_quantum,
        delta2_classical,
    ))
}

/// Dispatches to the report for `channel`.
pub fn report(
    channel: NoiseChannel,
    couplings: &Couplings,
    state: &SuperposedCoherentState,
    duration: f64,
) -> Result<DilationReport> {
    match channel {
        NoiseChannel::Free => free_report(couplings, state, duration),
        NoiseChannel::AmplitudeDamping(r) => amplitude_report(couplings, state, duration, r),
        NoiseChannel::PhaseDamping(r) => phase_report(couplings, state, duration, r),
        NoiseChannel::Diffusion(r) => diffusion_report(couplings, state, duration, r),
    }
}

/// ⟨p²(t)⟩/(m²c²) under free evolution, for the kind carried by `state`.
///
/// Mixture: `4C_k(α₀² − α₀² cos(2ω_z t − 2φ_α) + ½)`. The superposition subtracts
/// `8α₀²C_k·C_i/(1 + C_i)`. At t = 0 a real amplitude (atom displaced at rest)
/// gives only the vacuum term 2C_k.
pub fn kinetic_expectation(
    couplings: &Couplings,
    state: &SuperposedCoherentState,
    time: f64,
) -> f64 {
    let ck = couplings.kinetic;
    let alpha_sq = state.alpha0 * state.alpha0;
    let phase = 2.0 * couplings.trap_frequency * time - 2.0 * state.amplitude_phase;
    let classical = 4.0 * ck * (alpha_sq - alpha_sq * phase.cos() + 0.5);
    match state.kind {
        crate::units::StateKind::Classical => classical,
        crate::units::StateKind::Quantum => {
            let ci = state.coherence_factor();
            classical - 8.0 * alpha_sq * ck * ci / (1.0 + ci)
        }
    }
}

/// First-moment discrepancy with the gravity-driven oscillating terms restored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatingDelta1 {
    /// Secular Δ₁,coh plus the oscillating correction, s.
    pub full: f64,
    /// Oscillating correction δ₁,coh, s.
    pub correction: f64,
    /// Upper bound on |δ₁,coh| that holds for every T, s.
    pub bound: f64,
}

/// Oscillating part of Δ₁,coh under free evolution for a real amplitude.
///
/// `δ₁ = 2C_gα/((1 + C_i)ω_z) · (C_i tan φ (cos ω_zT − 1) − C_i cos 2θ sin ω_zT)`,
/// bounded by `2C_gα/((1 + C_i)ω_z) · (2|C_i tan φ| + |C_i cos 2θ|)`. The product
/// `C_i tan φ` is evaluated as `e^{−2α₀²} sin 2θ sin φ`, finite at φ = π/2.
pub fn oscillating_delta1(
    couplings: &Couplings,
    state: &SuperposedCoherentState,
    duration: f64,
) -> Result<OscillatingDelta1> {
    let secular = free_report(couplings, state, duration)?;
    let ci = state.coherence_factor();
    let ci_tan = state.coherence_factor_tan();
    let ci_cos = ci * (2.0 * state.mixing_angle).cos();
    let omega = couplings.trap_frequency;
    let wt = omega * duration;
    let scale = 2.0 * couplings.gravity * state.alpha0 / ((1.0 + ci) * omega);
    let correction = scale * (ci_tan * (wt.cos() - 1.0) - ci_cos * wt.sin());
    let bound = scale.abs() * (2.0 * ci_tan.abs() + ci_cos.abs());
    Ok(OscillatingDelta1 {
        full: secular.delta1_coh + correction,
        correction,
        bound,
    })
}

/// ω₀²(Δ²₂,cq(with channel) − Δ²₂,cq(free))/2: the fractional contrast loss a
/// channel adds on top of free evolution.
pub fn added_variance_ratio(
    with_channel: &DilationReport,
    free: &DilationReport,
    clock_frequency: f64,
) -> f64 {
    0.5 * clock_frequency
        * clock_frequency
        * (with_channel.delta2_combined_sq - free.delta2_combined_sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::StateKind;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn couplings() -> Couplings {
        Couplings {
            gravity: 0.03,
            sag: 0.01,
            kinetic: 0.02,
            trap_frequency: 1.0,
        }
    }

    #[test]
    fn ramp_factor_branches_agree() {
        for rate in [1e-4f64, 1e-3, 0.1, 0.49, 0.5, 0.51, 2.0] {
            let t = 1.0;
            let x = rate * t;
            let direct = (1.0 - (-x).exp() * (1.0 + x)) / (rate * rate);
            let series = ramp_factor(rate, t);
            let tol = if x > 1e-3 { 1e-12 } else { 1e-3 };
            assert!(
                (series / direct - 1.0).abs() < tol,
                "{rate}: {series} {direct}"
            );
        }
        assert_eq!(ramp_factor(0.0, 3.0), 4.5);
    }

    #[test]
    fn zero_amplitude_has_no_discrepancy() {
        let s = SuperposedCoherentState::new(0.0, 0.3, 0.2, StateKind::Quantum);
        let r = free_report(&couplings(), &s, 5.0).unwrap();
        assert_eq!(r.delta1_coh, 0.0);
        assert_eq!(r.delta2_quantum_sq, 0.0);
        assert_eq!(r.delta2_classical_sq, 0.0);
    }

    #[test]
    fn variances_equal_i2_minus_i1_squared() {
        let s = SuperposedCoherentState::new(0.7, FRAC_PI_4, PI, StateKind::Quantum);
        for channel in [
            NoiseChannel::Free,
            NoiseChannel::AmplitudeDamping(0.05),
            NoiseChannel::PhaseDamping(0.05),
            NoiseChannel::Diffusion(0.05),
        ] {
            let r = report(channel, &couplings(), &s, 7.0).unwrap();
            let vq = r.i2_quantum - r.i1_quantum * r.i1_quantum;
            let vc = r.i2_classical - r.i1_classical * r.i1_classical;
            let scale = r.i1_quantum.powi(2);
            assert!(
                (vq - r.delta2_quantum_sq).abs() < 1e-13 * scale,
                "{channel:?}"
            );
            assert!(
                (vc - r.delta2_classical_sq).abs() < 1e-13 * scale,
                "{channel:?}"
            );
            assert!(((r.i1_quantum - r.i1_classical) - r.delta1_coh).abs() < 1e-14 * scale.sqrt());
        }
    }

    #[test]
    fn unnormalizable_state_is_rejected() {
        let s = SuperposedCoherentState::new(0.0, FRAC_PI_4, PI, StateKind::Quantum);
        assert!(matches!(
            free_report(&couplings(), &s, 1.0),
            Err(Error::Unnormalizable(_))
        ));
        assert!(amplitude_report(
            &couplings(),
            &SuperposedCoherentState::new(0.3, 0.1, 0.1, StateKind::Quantum),
            1.0,
            -1.0
        )
        .is_err());
    }

    #[test]
    fn kinetic_expectation_vacuum_and_no_interference() {
        let c = couplings();
        let vac = SuperposedCoherentState::new(0.0, 0.4, 0.0, StateKind::Quantum);
        assert!((kinetic_expectation(&c, &vac, 1.3) - 2.0 * c.kinetic).abs() < 1e-15);
        let s = SuperposedCoherentState::new(0.5, 0.0, 0.0, StateKind::Quantum);
        for t in [0.0, 0.4, 2.2] {
            let q = kinetic_expectation(&c, &s, t);
            let cl = kinetic_expectation(&c, &s.with_kind(StateKind::Classical), t);
            assert!((q - cl).abs() < 1e-16);
        }
    }

    #[test]
    fn oscillating_correction_vanishes_on_full_periods() {
        let s = SuperposedCoherentState::new(0.5, FRAC_PI_4, 2.0, StateKind::Quantum);
        let t = 2.0 * PI * 7.0;
        let o = oscillating_delta1(&couplings(), &s, t).unwrap();
        assert!(o.correction.abs() < 1e-14);
        let secular = free_report(&couplings(), &s, t).unwrap().delta1_coh;
        assert!((o.full - o.correction - secular).abs() < 1e-15 * secular.abs().max(1.0));
    }
}
