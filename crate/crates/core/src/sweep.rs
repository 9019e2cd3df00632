//! Parameter sweeps over the displacement and over the noise rates.
//!
//! A [`SweepConfig`] is read from a TOML file. Grid points are evaluated in
//! parallel and returned in grid order, so output is deterministic.
//!
//! ```toml
//! atom = "mg24"                       # or an inline table, see below
//! depth_recoil = 300.0
//! interrogation_time = 1.0            # s
//! mixing_angle = 0.7853981633974483   # rad
//! relative_phase = 3.141592653589793  # rad
//! channel = "free"                    # free | amplitude | phase | diffusion
//! rate = 0.0                          # Hz, for the channel above
//! displacement_nm = { start = 0.0, stop = 30.0, count = 61 }
//! amplitude_rates = [0.0, 0.1, 1.0]   # Hz
//! diffusion_rates = { start = 0.01, stop = 100.0, count = 9, spacing = "log" }
//! displacement_for_noise_nm = 10.0
//! include_oscillating = false
//! kappa = 1.0
//! format = "csv"
//! output = "sweep.csv"
//!
//! # inline atom instead of a preset:
//! # [atom]
//! # name = "custom"
//! # mass_amu = 40.0
//! # magic_wavelength_nm = 800.0
//! # clock_frequency_THz = 400.0
//! ```

use std::f64::consts::{FRAC_PI_4, PI};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::NoiseChannel;
use crate::clock::{coherence_margin, detectability};
use crate::closed_form::{
    amplitude_report, diffusion_report, free_report, oscillating_delta1, report, DilationReport,
};
use crate::error::{require_positive, Error, Result};
use crate::output::{nullable_f64, Format, Row};
use crate::units::{
    derive_lattice, displacement_to_alpha, AtomSpec, Couplings, LatticeDerived, LatticeSpec,
    PhysicalConstants, StateKind, SuperposedCoherentState,
};

/// Spacing of a generated grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// A grid given either as an explicit list or as a generated range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        count: usize,
        #[serde(default)]
        spacing: Spacing,
    },
}

impl Grid {
    /// The grid points; non-empty, finite and strictly increasing.
    pub fn values(&self) -> Result<Vec<f64>> {
        let values = match *self {
            Grid::List(ref v) => v.clone(),
            Grid::Range {
                start,
                stop,
                count,
                spacing,
            } => {
                if count == 0 {
                    return Err(Error::Config("grid count must be at least 1".into()));
                }
                if count == 1 {
                    vec![start]
                } else {
                    let step = |i: usize| i as f64 / (count - 1) as f64;
                    match spacing {
                        Spacing::Linear => (0..count)
                            .map(|i| start + (stop - start) * step(i))
                            .collect(),
                        Spacing::Log => {
                            if start <= 0.0 || stop <= 0.0 {
                                return Err(Error::Config(
                                    "log grid bounds must be positive".into(),
                                ));
                            }
                            let (a, b) = (start.ln(), stop.ln());
                            (0..count).map(|i| (a + (b - a) * step(i)).exp()).collect()
                        }
                    }
                }
            }
        };
        if values.is_empty() {
            return Err(Error::Config("grid must not be empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("grid values must be finite".into()));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("grid must be strictly increasing".into()));
        }
        Ok(values)
    }
}

/// An atom given by preset name or inline in laboratory units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AtomChoice {
    Preset(String),
    Inline {
        name: String,
        mass_amu: f64,
        magic_wavelength_nm: f64,
        #[serde(rename = "clock_frequency_THz")]
        clock_frequency_thz: f64,
    },
}

impl AtomChoice {
    /// Resolves to a validated atom.
    pub fn resolve(&self, consts: &PhysicalConstants) -> Result<AtomSpec> {
        let atom = match self {
            AtomChoice::Preset(name) => AtomSpec::preset(name)?,
            AtomChoice::Inline {
                name,
                mass_amu,
                magic_wavelength_nm,
                clock_frequency_thz,
            } => AtomSpec::from_lab_units(
                name,
                *mass_amu,
                *magic_wavelength_nm,
                *clock_frequency_thz,
                consts,
            ),
        };
        atom.validate()?;
        Ok(atom)
    }
}

/// Builds a channel from its configuration name and rate (Hz).
pub fn channel_from_name(name: &str, rate: f64) -> Result<NoiseChannel> {
    let channel = match name.to_ascii_lowercase().as_str() {
        "free" => NoiseChannel::Free,
        "amplitude" | "amplitude-damping" => NoiseChannel::AmplitudeDamping(rate),
        "phase" | "phase-damping" => NoiseChannel::PhaseDamping(rate),
        "diffusion" => NoiseChannel::Diffusion(rate),
        other => {
            return Err(Error::Config(format!(
                "unknown channel `{other}`; expected free, amplitude, phase or diffusion"
            )))
        }
    };
    channel.validate()?;
    Ok(channel)
}

fn default_atom() -> AtomChoice {
    AtomChoice::Preset("mg24".into())
}
fn default_depth() -> f64 {
    300.0
}
fn default_time() -> f64 {
    1.0
}
fn default_mixing() -> f64 {
    FRAC_PI_4
}
fn default_phase() -> f64 {
    PI
}
fn default_channel() -> String {
    "free".into()
}
fn default_displacements() -> Grid {
    Grid::Range {
        start: 0.0,
        stop: 30.0,
        count: 61,
        spacing: Spacing::Linear,
    }
}
fn default_rates() -> Grid {
    let mut rates = vec![0.0];
    rates.extend((0..9).map(|i| 10f64.powf(-2.0 + 0.5 * i as f64)));
    Grid::List(rates)
}
fn default_noise_displacement() -> f64 {
    10.0
}
fn default_kappa() -> f64 {
    1.0
}

/// Everything a sweep needs; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_atom")]
    pub atom: AtomChoice,
    /// Trap depth in recoil energies.
    #[serde(default = "default_depth")]
    pub depth_recoil: f64,
    /// Interrogation time T, s.
    #[serde(default = "default_time")]
    pub interrogation_time: f64,
    /// Branch weight angle θ, rad.
    #[serde(default = "default_mixing")]
    pub mixing_angle: f64,
    /// Relative branch phase φ, rad.
    #[serde(default = "default_phase")]
    pub relative_phase: f64,
    /// Channel for the displacement sweep.
    #[serde(default = "default_channel")]
    pub channel: String,
    /// Rate of that channel, Hz.
    #[serde(default)]
    pub rate: f64,
    /// Half-separations d, nm.
    #[serde(default = "default_displacements")]
    pub displacement_nm: Grid,
    /// Amplitude-damping rates Γ_a, Hz.
    #[serde(default = "default_rates")]
    pub amplitude_rates: Grid,
    /// Diffusion rates Γ_d, Hz.
    #[serde(default = "default_rates")]
    pub diffusion_rates: Grid,
    /// Half-separation used by the noise sweep, nm.
    #[serde(default = "default_noise_displacement")]
    pub displacement_for_noise_nm: f64,
    /// Add the gravity-driven oscillating correction to Δ₁ (free channel only).
    #[serde(default)]
    pub include_oscillating: bool,
    /// Proportionality constant of the frequency uncertainty.
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default)]
    pub format: Format,
    /// Output path; stdout when absent.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config uses defaults")
    }
}

impl SweepConfig {
    /// Parses a TOML configuration.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a TOML configuration file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Checks every field against the physics preconditions.
    pub fn validate(&self) -> Result<()> {
        self.atom.resolve(&PhysicalConstants::default())?;
        require_positive("depth_recoil", self.depth_recoil)?;
        require_positive("interrogation_time", self.interrogation_time)?;
        require_positive("kappa", self.kappa)?;
        let channel = self.channel()?;
        if self.include_oscillating && channel != NoiseChannel::Free {
            return Err(Error::Config(
                "include_oscillating is only available for the free channel".into(),
            ));
        }
        for d in self.displacement_nm.values()? {
            if d < 0.0 {
                return Err(Error::Config(format!("displacement {d} nm is negative")));
            }
        }
        for rate in self
            .amplitude_rates
            .values()?
            .into_iter()
            .chain(self.diffusion_rates.values()?)
        {
            if rate < 0.0 {
                return Err(Error::Config(format!("rate {rate} Hz is negative")));
            }
        }
        if self.displacement_for_noise_nm < 0.0 {
            return Err(Error::Config(
                "displacement_for_noise_nm is negative".into(),
            ));
        }
        Ok(())
    }

    /// The displacement-sweep channel.
    pub fn channel(&self) -> Result<NoiseChannel> {
        channel_from_name(&self.channel, self.rate)
    }

    /// Atom and derived trap constants.
    pub fn lattice(&self) -> Result<(AtomSpec, LatticeDerived)> {
        let consts = PhysicalConstants::default();
        let atom = self.atom.resolve(&consts)?;
        let lattice = LatticeSpec {
            trap_depth_recoil: self.depth_recoil,
            interrogation_time: self.interrogation_time,
        };
        let derived = derive_lattice(&atom, &lattice, &consts)?;
        Ok((atom, derived))
    }

    fn state(&self, alpha0: f64) -> SuperposedCoherentState {
        SuperposedCoherentState::new(
            alpha0,
            self.mixing_angle,
            self.relative_phase,
            StateKind::Quantum,
        )
    }
}

/// One point of the displacement sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplacementRow {
    /// Half-separation d, m.
    pub displacement: f64,
    /// Coherent amplitude α₀.
    pub alpha: f64,
    /// |Δ₁,coh|, s.
    #[serde(deserialize_with = "nullable_f64")]
    pub delta1_abs: f64,
    /// Δ²₂,qtm + Δ²₂,cls, s².
    #[serde(deserialize_with = "nullable_f64")]
    pub delta2_combined_sq: f64,
    /// Δ₁,coh/T (signed).
    #[serde(deserialize_with = "nullable_f64")]
    pub relative_discrepancy: f64,
    /// |ω₀Δ₁,coh/T| divided by the frequency uncertainty.
    #[serde(deserialize_with = "nullable_f64")]
    pub detectability_ratio: f64,
}

impl Row for DisplacementRow {
    fn columns() -> &'static [&'static str] {
        &[
            "displacement_m",
            "alpha",
            "delta1_abs_s",
            "delta2_combined_sq_s2",
            "relative_discrepancy",
            "detectability_ratio",
        ]
    }
    fn values(&self) -> Vec<f64> {
        vec![
            self.displacement,
            self.alpha,
            self.delta1_abs,
            self.delta2_combined_sq,
            self.relative_discrepancy,
            self.detectability_ratio,
        ]
    }
}

/// One point of the noise sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    /// Amplitude-damping rate Γ_a, Hz.
    pub amplitude_rate: f64,
    /// Diffusion rate Γ_d, Hz.
    pub diffusion_rate: f64,
    /// |Δ₁,coh|, s.
    pub delta1_abs: f64,
    /// Composed Δ²₂,qtm + Δ²₂,cls, s².
    pub delta2_combined_sq: f64,
    /// |Δ₁,coh| − √(Δ²₂,qtm + Δ²₂,cls), s.
    pub margin: f64,
}

impl Row for NoiseRow {
    fn columns() -> &'static [&'static str] {
        &[
            "amplitude_rate_hz",
            "diffusion_rate_hz",
            "delta1_abs_s",
            "delta2_combined_sq_s2",
            "margin_s",
        ]
    }
    fn values(&self) -> Vec<f64> {
        vec![
            self.amplitude_rate,
            self.diffusion_rate,
            self.delta1_abs,
            self.delta2_combined_sq,
            self.margin,
        ]
    }
}

/// Evaluates one displacement point. A point where the superposition cannot be
/// normalised (d = 0 with C_i = −1) yields NaN in every computed column.
pub fn displacement_point(
    config: &SweepConfig,
    atom: &AtomSpec,
    derived: &LatticeDerived,
    displacement: f64,
) -> Result<DisplacementRow> {
    let couplings = derived.couplings();
    let alpha = displacement_to_alpha(displacement, derived);
    let state = config.state(alpha);
    if let Err(Error::Unnormalizable(_)) = state.validate() {
        // the two branches cancel exactly; there is no state to evaluate
        return Ok(DisplacementRow {
            displacement,
            alpha,
            delta1_abs: f64::NAN,
            delta2_combined_sq: f64::NAN,
            relative_discrepancy: f64::NAN,
            detectability_ratio: f64::NAN,
        });
    }
    let t = config.interrogation_time;
    let mut rep = report(config.channel()?, &couplings, &state, t)?;
    if config.include_oscillating {
        let osc = oscillating_delta1(&couplings, &state, t)?;
        rep.delta1_coh = osc.full;
        rep.relative_discrepancy = osc.full / t;
    }
    let det = detectability(&rep, atom.clock_angular_frequency, config.kappa)?;
    Ok(DisplacementRow {
        displacement,
        alpha,
        delta1_abs: rep.delta1_coh.abs(),
        delta2_combined_sq: rep.delta2_combined_sq,
        relative_discrepancy: rep.relative_discrepancy,
        detectability_ratio: det.ratio,
    })
}

/// The displacement sweep, in grid order.
pub fn sweep_displacement(config: &SweepConfig) -> Result<Vec<DisplacementRow>> {
    config.validate()?;
    let (atom, derived) = config.lattice()?;
    let grid = config.displacement_nm.values()?;
    grid.par_iter()
        .map(|&d_nm| displacement_point(config, &atom, &derived, d_nm * 1e-9))
        .collect()
}

/// Composes amplitude damping and diffusion acting together.
///
/// Δ₁ is taken from the amplitude-damping form and each channel's change of
/// Δ²₂ relative to free evolution is added. The two channels are treated as
/// independent; no joint closed form is used.
pub fn compose_noise(
    couplings: &Couplings,
    state: &SuperposedCoherentState,
    duration: f64,
    amplitude_rate: f64,
    diffusion_rate: f64,
) -> Result<DilationReport> {
    let free = free_report(couplings, state, duration)?;
    let amp = amplitude_report(couplings, state, duration, amplitude_rate)?;
    let dif = diffusion_report(couplings, state, duration, diffusion_rate)?;
    let mut out = amp.clone();
    out.delta2_quantum_sq =
        amp.delta2_quantum_sq + (dif.delta2_quantum_sq - free.delta2_quantum_sq);
    out.delta2_classical_sq =
        amp.delta2_classical_sq + (dif.delta2_classical_sq - free.delta2_classical_sq);
    out.delta2_combined_sq = out.delta2_quantum_sq + out.delta2_classical_sq;
    out.warnings.extend(dif.warnings);
    Ok(out)
}

/// The (Γ_a, Γ_d) sweep, amplitude rate outermost, in grid order.
pub fn sweep_noise(config: &SweepConfig) -> Result<Vec<NoiseRow>> {
    config.validate()?;
    let (_, derived) = config.lattice()?;
    let couplings = derived.couplings();
    let alpha = displacement_to_alpha(config.displacement_for_noise_nm * 1e-9, &derived);
    let state = config.state(alpha);
    let amplitude = config.amplitude_rates.values()?;
    let diffusion = config.diffusion_rates.values()?;
    let points: Vec<(f64, f64)> = amplitude
        .iter()
        .flat_map(|&a| diffusion.iter().map(move |&d| (a, d)))
        .collect();
    points
        .par_iter()
        .map(|&(ga, gd)| {
            let rep = compose_noise(&couplings, &state, config.interrogation_time, ga, gd)?;
            Ok(NoiseRow {
                amplitude_rate: ga,
                diffusion_rate: gd,
                delta1_abs: rep.delta1_coh.abs(),
                delta2_combined_sq: rep.delta2_combined_sq,
                margin: coherence_margin(&rep),
            })
        })
        .collect()
}

/// One derived trap quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEntry {
    pub name: String,
    pub value: f64,
    pub unit: String,
}

/// Trap constants of an atom and lattice, with α for each requested displacement.
pub fn params_table(
    atom: &AtomSpec,
    lattice: &LatticeSpec,
    displacements: &[f64],
) -> Result<Vec<ParamEntry>> {
    let consts = PhysicalConstants::default();
    let d = derive_lattice(atom, lattice, &consts)?;
    let entry = |name: &str, value: f64, unit: &str| ParamEntry {
        name: name.to_string(),
        value,
        unit: unit.to_string(),
    };
    let mut out = vec![
        entry("mass", d.mass, "kg"),
        entry("magic_wavelength", atom.magic_wavelength, "m"),
        entry(
            "clock_angular_frequency",
            atom.clock_angular_frequency,
            "rad/s",
        ),
        entry("wavenumber", d.wavenumber, "1/m"),
        entry("recoil_energy", d.recoil_energy, "J"),
        entry("trap_depth", d.trap_depth, "J"),
        entry("trap_frequency", d.trap_frequency, "rad/s"),
        entry("ground_width", d.ground_width, "m"),
        entry("gravity_coupling", d.gravity_coupling, "1"),
        entry("sag_coupling", d.sag_coupling, "1"),
        entry("kinetic_coupling", d.kinetic_coupling, "1"),
    ];
    for &disp in displacements {
        require_positive_or_zero(disp)?;
        out.push(entry(
            &format!("alpha(d={:e} m)", disp),
            displacement_to_alpha(disp, &d),
            "1",
        ));
    }
    Ok(out)
}

fn require_positive_or_zero(displacement: f64) -> Result<()> {
    if displacement >= 0.0 && displacement.is_finite() {
        Ok(())
    } else {
        Err(Error::Negative {
            field: "displacement",
            value: displacement,
        })
    }
}
