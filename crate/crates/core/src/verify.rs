//! Cross-checks between the analytic layers and the Fock-space oracle.
//!
//! Each check returns a [`CheckResult`] with the worst relative error seen and
//! the threshold it was held to. All checks run in a dimensionless regime
//! (ω_z = 1 by default) small enough for dense ODE integration.
//!
//! The Heisenberg rule table is passed in as a function so a deliberately broken
//! table can be substituted to confirm the checks catch it.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{coherent_overlap, evolve, EvolvedPoly, NoiseChannel, NormalOrderedPoly};
use crate::closed_form::report;
use crate::error::{Error, Result};
use crate::fock::{
    adjoint_evolve_operator, evolve_density, oracle_i1_i2, oracle_i2_superoperator, oracle_moments,
    oracle_moments_joint, CMatrix, DensityCheck, FockSpace, OracleSettings, RkSettings,
    ORACLE_MAX_PHASE,
};
use crate::integral::{compute_moments, Oscillating};
use crate::units::{Couplings, StateKind, SuperposedCoherentState};

/// Heisenberg rule table: evolves a polynomial under a channel at a trap frequency.
pub type RuleTable = dyn Fn(&NormalOrderedPoly, NoiseChannel, f64) -> EvolvedPoly + Sync;

/// The rule table shipped with the crate.
pub fn stock_rules(
    poly: &NormalOrderedPoly,
    channel: NoiseChannel,
    trap_frequency: f64,
) -> EvolvedPoly {
    evolve(poly, channel, trap_frequency)
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// Largest relative error over all cases.
    pub max_error: f64,
    pub threshold: f64,
    pub passed: bool,
    /// Number of compared quantities.
    pub cases: usize,
    /// Description of the case with the largest error.
    pub worst_case: String,
}

impl CheckResult {
    fn from_errors(name: &str, threshold: f64, errors: Vec<(f64, String)>) -> Self {
        let cases = errors.len();
        let (max_error, worst_case) =
            errors
                .into_iter()
                .fold((0.0, String::from("none")), |acc, (e, label)| {
                    if e > acc.0 || e.is_nan() {
                        (e, label)
                    } else {
                        acc
                    }
                });
        Self {
            name: name.to_string(),
            max_error,
            threshold,
            passed: max_error <= threshold && cases > 0,
            cases,
            worst_case,
        }
    }
}

/// |a − b| / max(|a|, |b|, scale).
pub fn relative_error(a: Complex64, b: Complex64, scale: f64) -> f64 {
    let denom = a.norm().max(b.norm()).max(scale);
    if denom == 0.0 {
        0.0
    } else {
        (a - b).norm() / denom
    }
}

/// Parameters of the verification regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub couplings: Couplings,
    pub amplitudes: Vec<f64>,
    pub mixing_angles: Vec<f64>,
    pub relative_phases: Vec<f64>,
    pub durations: Vec<f64>,
    /// Rate used for every noisy channel in the moment checks.
    pub rate: f64,
    pub oracle: OracleSettings,
    pub oracle_tolerance: f64,
    pub engine_tolerance: f64,
    /// Rule-table check: Fock dimension, evolution time, rate, RK4 steps.
    pub rule_dim: usize,
    pub rule_time: f64,
    pub rule_rate: f64,
    pub rule_steps: usize,
    pub rule_max_degree: u32,
    pub rule_tolerance: f64,
    /// Duration of the Schrödinger-form comparison.
    pub superoperator_time: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            couplings: Couplings {
                gravity: 0.1,
                sag: 0.01,
                kinetic: 1.0,
                trap_frequency: 1.0,
            },
            amplitudes: vec![0.3, 0.8],
            mixing_angles: vec![FRAC_PI_4, FRAC_PI_8],
            relative_phases: vec![PI, FRAC_PI_2],
            durations: vec![20.0, 50.0],
            rate: 0.02,
            oracle: OracleSettings::default(),
            oracle_tolerance: 1e-4,
            engine_tolerance: 1e-12,
            rule_dim: 40,
            rule_time: 6.0,
            rule_rate: 0.1,
            rule_steps: 1200,
            rule_max_degree: 6,
            rule_tolerance: 1e-6,
            superoperator_time: 5.0,
        }
    }
}

/// Largest duration accepted by the verification regime, in units of 1/ω_z.
pub const MAX_DIMENSIONLESS_DURATION: f64 = 100.0;
/// Largest rate accepted, as a fraction of ω_z.
pub const MAX_RELATIVE_RATE: f64 = 0.1;

impl VerifyConfig {
    /// Enforces the dimensionless-regime bounds and the Fock truncation.
    pub fn validate(&self) -> Result<()> {
        self.couplings.validate()?;
        let omega = self.couplings.trap_frequency;
        for &t in self
            .durations
            .iter()
            .chain([self.superoperator_time, self.rule_time].iter())
        {
            if !(t > 0.0) || omega * t > MAX_DIMENSIONLESS_DURATION.min(ORACLE_MAX_PHASE) {
                return Err(Error::Regime(format!(
                    "duration {t} outside (0, {MAX_DIMENSIONLESS_DURATION}/ω_z]"
                )));
            }
        }
        for rate in [self.rate, self.rule_rate] {
            if !(0.0..=MAX_RELATIVE_RATE * omega).contains(&rate) {
                return Err(Error::Regime(format!(
                    "rate {rate} outside [0, {MAX_RELATIVE_RATE}·ω_z]"
                )));
            }
        }
        let space = FockSpace::new(self.oracle.dim)?;
        for &a in &self.amplitudes {
            if a * a > space.max_alpha_sq() {
                return Err(Error::Truncation {
                    dim: self.oracle.dim,
                    alpha_sq: a * a,
                    suggested: (4.0 * a * a).ceil() as usize,
                });
            }
        }
        if self.amplitudes.is_empty() || self.durations.is_empty() {
            return Err(Error::Config("verification grids must not be empty".into()));
        }
        Ok(())
    }

    /// Every (α₀, θ, φ, kind) combination.
    pub fn states(&self) -> Vec<SuperposedCoherentState> {
        let mut out = Vec::new();
        for &a in &self.amplitudes {
            for &theta in &self.mixing_angles {
                for &phi in &self.relative_phases {
                    for kind in [StateKind::Quantum, StateKind::Classical] {
                        out.push(SuperposedCoherentState::new(a, theta, phi, kind));
                    }
                }
            }
        }
        out
    }

    /// Free evolution and the three noisy channels at the configured rate.
    pub fn channels(&self, rate: f64) -> [NoiseChannel; 4] {
        [
            NoiseChannel::Free,
            NoiseChannel::AmplitudeDamping(rate),
            NoiseChannel::PhaseDamping(rate),
            NoiseChannel::Diffusion(rate),
        ]
    }
}

fn describe(channel: NoiseChannel, state: &SuperposedCoherentState, t: f64, what: &str) -> String {
    format!(
        "{what} {} Γ={} α₀={} θ={:.4} φ={:.4} {:?} T={t}",
        channel.name(),
        channel.rate(),
        state.alpha0,
        state.mixing_angle,
        state.relative_phase,
        state.kind
    )
}

/// Heisenberg rule table against adjoint-ODE evolution, for every monomial up
/// to the configured degree, compared through coherent-state matrix elements.
pub fn check_channel_rules(config: &VerifyConfig, rules: &RuleTable) -> Result<CheckResult> {
    config.validate()?;
    let space = FockSpace::new(config.rule_dim)?;
    let omega = config.couplings.trap_frequency;
    let probes = [
        (Complex64::new(-0.3, 0.5), Complex64::new(0.7, 0.2)),
        (Complex64::new(0.6, 0.0), Complex64::new(0.6, 0.0)),
        (Complex64::new(0.1, -0.8), Complex64::new(-0.4, -0.3)),
    ];
    let vectors: Vec<_> = probes
        .iter()
        .map(|&(b, a)| Ok((b, a, space.coherent_vector(b)?, space.coherent_vector(a)?)))
        .collect::<Result<_>>()?;
    let mut jobs = Vec::new();
    for channel in config.channels(config.rule_rate) {
        for degree in 0..=config.rule_max_degree {
            for m in 0..=degree {
                jobs.push((channel, m, degree - m));
            }
        }
    }
    let settings = RkSettings {
        steps: config.rule_steps,
        tolerance: 1e-6,
    };
    let errors: Vec<Vec<(f64, String)>> = jobs
        .par_iter()
        .map(|&(channel, m, n)| {
            let numeric = adjoint_evolve_operator(
                &space.monomial(m, n),
                channel,
                omega,
                config.rule_time,
                settings,
            )?;
            let analytic = rules(
                &NormalOrderedPoly::monomial(m, n, Complex64::new(1.0, 0.0)),
                channel,
                omega,
            )
            .at(config.rule_time);
            Ok(vectors
                .iter()
                .map(|(beta, alpha, bv, av)| {
                    let ode = (bv.adjoint() * &numeric.matrix * av)[(0, 0)];
                    let overlap = coherent_overlap(*beta, *alpha);
                    let (mut value, mut scale) = (Complex64::new(0.0, 0.0), 0.0);
                    for ((p, q), c) in analytic.terms() {
                        let term = c * beta.conj().powu(p) * alpha.powu(q) * overlap;
                        value += term;
                        scale += term.norm();
                    }
                    let label = format!("{} a†^{m}a^{n} at β={beta}, α={alpha}", channel.name());
                    (relative_error(ode, value, scale), label)
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(CheckResult::from_errors(
        "channel-rules",
        config.rule_tolerance,
        errors.into_iter().flatten().collect(),
    ))
}

/// Integral engine with oscillating terms dropped against the closed forms.
pub fn check_engine_vs_closed_form(config: &VerifyConfig) -> Result<CheckResult> {
    config.validate()?;
    let states: Vec<_> = config
        .states()
        .into_iter()
        .filter(|s| s.kind == StateKind::Quantum)
        .collect();
    let mut errors = Vec::new();
    for channel in config.channels(config.rate) {
        for state in &states {
            for &t in &config.durations {
                let closed = report(channel, &config.couplings, state, t)?;
                let q =
                    compute_moments(channel, &config.couplings, state, t, Oscillating::Exclude)?;
                let c = compute_moments(
                    channel,
                    &config.couplings,
                    &state.with_kind(StateKind::Classical),
                    t,
                    Oscillating::Exclude,
                )?;
                let re = |x: f64| Complex64::new(x, 0.0);
                let (i1q, i1c) = (q.i1.total().re, c.i1.total().re);
                let (i2q, i2c) = (q.i2.total().re, c.i2.total().re);
                let pairs = [
                    ("I1 qtm", i1q, closed.i1_quantum, 0.0),
                    ("I1 cls", i1c, closed.i1_classical, 0.0),
                    ("I2 qtm", i2q, closed.i2_quantum, 0.0),
                    ("I2 cls", i2c, closed.i2_classical, 0.0),
                    ("Δ1", i1q - i1c, closed.delta1_coh, i1q.abs()),
                    (
                        "Δ2² qtm",
                        i2q - i1q * i1q,
                        closed.delta2_quantum_sq,
                        i2q.abs(),
                    ),
                    (
                        "Δ2² cls",
                        i2c - i1c * i1c,
                        closed.delta2_classical_sq,
                        i2c.abs(),
                    ),
                ];
                for (what, engine, form, scale) in pairs {
                    errors.push((
                        relative_error(re(engine), re(form), scale),
                        describe(channel, state, t, what),
                    ));
                }
            }
        }
    }
    Ok(CheckResult::from_errors(
        "engine-vs-closed-form",
        config.engine_tolerance,
        errors,
    ))
}

/// Fock-space quadrature moments against the integral engine with every term kept.
pub fn check_oracle_vs_engine(config: &VerifyConfig) -> Result<CheckResult> {
    config.validate()?;
    let states = config.states();
    let per_channel: Vec<Vec<(f64, String)>> = config
        .channels(config.rate)
        .par_iter()
        .map(|&channel| {
            let oracle = oracle_moments(
                channel,
                &config.couplings,
                &states,
                &config.durations,
                config.oracle,
            )?;
            let mut errors = Vec::new();
            for (state, row) in states.iter().zip(oracle) {
                for (&t, (o1, o2)) in config.durations.iter().zip(row) {
                    let engine = compute_moments(
                        channel,
                        &config.couplings,
                        state,
                        t,
                        Oscillating::Include,
                    )?;
                    errors.push((
                        relative_error(o1, engine.i1.total(), 0.0),
                        describe(channel, state, t, "I1"),
                    ));
                    errors.push((
                        relative_error(o2, engine.i2.total(), 0.0),
                        describe(channel, state, t, "I2"),
                    ));
                }
            }
            Ok(errors)
        })
        .collect::<Result<_>>()?;
    Ok(CheckResult::from_errors(
        "oracle-vs-engine",
        config.oracle_tolerance,
        per_channel.into_iter().flatten().collect(),
    ))
}

/// Amplitude damping and diffusion acting together, simulated jointly in Fock
/// space, against the independent-channel composition used by the noise sweep.
///
/// The composition takes Δ₁,coh from amplitude damping alone; diffusion shifts
/// both preparations' first moments equally, so this part is exact and is what
/// the check holds to `oracle_tolerance` (relative to the size of I₁). The
/// composed Δ²₂ (amplitude damping plus the diffusion excess over free
/// evolution) is only an approximation; its largest relative deviation is
/// reported in `worst_case` without being held to a threshold.
pub fn check_joint_composition(config: &VerifyConfig) -> Result<CheckResult> {
    config.validate()?;
    let rate = config.rate;
    let amplitude = NoiseChannel::AmplitudeDamping(rate);
    let diffusion = NoiseChannel::Diffusion(rate);
    let states = config.states();
    let oracle = oracle_moments_joint(
        &[amplitude, diffusion],
        &config.couplings,
        &states,
        &config.durations,
        config.oracle,
    )?;
    let variance = |(i1, i2): (Complex64, Complex64)| i2.re - i1.re * i1.re;
    let mut errors = Vec::new();
    let mut worst_variance = (0.0f64, String::new());
    for (pair, rows) in states.chunks(2).zip(oracle.chunks(2)) {
        let (quantum, classical) = (&pair[0], &pair[1]);
        for (k, &t) in config.durations.iter().enumerate() {
            let engine = |channel, state| {
                compute_moments(channel, &config.couplings, state, t, Oscillating::Include)
            };
            let (amp_q, amp_c) = (engine(amplitude, quantum)?, engine(amplitude, classical)?);
            let (dif_q, dif_c) = (engine(diffusion, quantum)?, engine(diffusion, classical)?);
            let (free_q, free_c) = (
                engine(NoiseChannel::Free, quantum)?,
                engine(NoiseChannel::Free, classical)?,
            );

            let joint_delta1 = rows[0][k].0.re - rows[1][k].0.re;
            let composed_delta1 = amp_q.i1.total().re - amp_c.i1.total().re;
            let scale = rows[0][k].0.norm();
            errors.push((
                relative_error(
                    Complex64::from(joint_delta1),
                    Complex64::from(composed_delta1),
                    scale,
                ),
                describe(amplitude, quantum, t, "joint Δ1 (with diffusion)"),
            ));

            let joint_delta2 = variance(rows[0][k]) + variance(rows[1][k]);
            let composed_delta2 =
                amp_q.variance() + amp_c.variance() + (dif_q.variance() + dif_c.variance())
                    - (free_q.variance() + free_c.variance());
            let deviation = relative_error(
                Complex64::from(joint_delta2),
                Complex64::from(composed_delta2),
                0.0,
            );
            if deviation > worst_variance.0 {
                worst_variance = (deviation, describe(amplitude, quantum, t, "Δ2²"));
            }
        }
    }
    let mut result = CheckResult::from_errors("joint-composition", config.oracle_tolerance, errors);
    result.worst_case = format!(
        "{}; composed Δ2² deviates from the joint value by up to {:.3e} (relative) at {}",
        result.worst_case, worst_variance.0, worst_variance.1
    );
    Ok(result)
}

/// Heisenberg-form and Schrödinger-form second moments agree.
pub fn check_superoperator_form(config: &VerifyConfig) -> Result<CheckResult> {
    config.validate()?;
    let t = config.superoperator_time;
    let omega = config.couplings.trap_frequency;
    let state = SuperposedCoherentState::new(
        config.amplitudes[0],
        config.mixing_angles[0],
        config.relative_phases[0],
        StateKind::Quantum,
    );
    let dim = config.oracle.dim.min(24);
    let intervals = (40.0 * omega * t).ceil() as usize;
    let settings = OracleSettings {
        dim,
        ..config.oracle
    };
    let errors: Vec<(f64, String)> = config
        .channels(config.rate)
        .par_iter()
        .map(|&channel| {
            let (_, heisenberg) = oracle_i1_i2(channel, &config.couplings, &state, t, settings)?;
            let schrodinger =
                oracle_i2_superoperator(channel, &config.couplings, &state, t, intervals, dim)?;
            Ok((
                relative_error(heisenberg, schrodinger, 0.0),
                describe(channel, &state, t, "I2"),
            ))
        })
        .collect::<Result<_>>()?;
    Ok(CheckResult::from_errors(
        "superoperator-form",
        config.oracle_tolerance,
        errors,
    ))
}

/// Density matrices stay Hermitian, normalised and positive under every channel.
/// The reported error is the worst normalised violation (1 = at the limit).
///
/// RK4 slightly damps the fastest coherences, which shows up as small negative
/// eigenvalues of a pure state; the step is 1/(300 ω_z) to keep them below 1e−8.
pub fn check_density_validity(config: &VerifyConfig) -> Result<CheckResult> {
    config.validate()?;
    let space = FockSpace::new(config.oracle.dim)?;
    let omega = config.couplings.trap_frequency;
    let t = config.durations.iter().copied().fold(0.0, f64::max);
    let steps = (t * 300.0 * omega.max(config.rate)).ceil() as usize;
    let mut jobs = Vec::new();
    for channel in config.channels(config.rate) {
        for state in config.states() {
            jobs.push((channel, state));
        }
    }
    let errors: Vec<(f64, String)> = jobs
        .par_iter()
        .map(|&(channel, state)| {
            let rho0: CMatrix = space.density_matrix(&state)?;
            let rho = evolve_density(&rho0, channel, omega, t, steps)?;
            let check = DensityCheck::of(&rho);
            let violation = (check.hermiticity_error / 1e-12)
                .max(check.trace_error / 1e-10)
                .max(-check.min_eigenvalue / 1e-8);
            Ok((violation, describe(channel, &state, t, "ρ")))
        })
        .collect::<Result<_>>()?;
    Ok(CheckResult::from_errors("density-validity", 1.0, errors))
}

/// Runs every check in a fixed order.
pub fn run_all(config: &VerifyConfig, rules: &RuleTable) -> Result<Vec<CheckResult>> {
    run_selected(config, rules, &CHECK_NAMES)
}

/// Names accepted by [`run_selected`], in execution order.
pub const CHECK_NAMES: [&str; 6] = [
    "channel-rules",
    "engine-vs-closed-form",
    "oracle-vs-engine",
    "joint-composition",
    "superoperator-form",
    "density-validity",
];

/// Runs the named checks in the order of [`CHECK_NAMES`].
pub fn run_selected(
    config: &VerifyConfig,
    rules: &RuleTable,
    names: &[&str],
) -> Result<Vec<CheckResult>> {
    if let Some(unknown) = names.iter().find(|n| !CHECK_NAMES.contains(n)) {
        return Err(Error::Config(format!(
            "unknown check `{unknown}`; expected one of {}",
            CHECK_NAMES.join(", ")
        )));
    }
    let mut out = Vec::new();
    for name in CHECK_NAMES.iter().filter(|n| names.contains(n)) {
        out.push(match *name {
            "channel-rules" => check_channel_rules(config, rules)?,
            "engine-vs-closed-form" => check_engine_vs_closed_form(config)?,
            "oracle-vs-engine" => check_oracle_vs_engine(config)?,
            "joint-composition" => check_joint_composition(config)?,
            "superoperator-form" => check_superoperator_form(config)?,
            _ => check_density_validity(config)?,
        });
    }
    Ok(out)
}
