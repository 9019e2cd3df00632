//! Physical constants, atom and lattice specifications, and the trap couplings
//! derived from them.
//!
//! Along the lattice axis the trap is harmonic with frequency `ω_z` and ground-state
//! width `z_s`. Gravity and kinetic energy enter the time-dilation perturbation
//! through three dimensionless couplings:
//!
//! - gravity coupling `g·z_s/(√2 c²)`, multiplying `a + a†`;
//! - sag coupling `g²/(ω_z² c²)`, from the gravity-shifted trap minimum;
//! - kinetic coupling `ħω_z/(4 m c²)`, multiplying `a² + a†² − 2a†a − 1`.

use std::f64::consts::{PI, SQRT_2};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};

/// Fundamental constants in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Speed of light, m/s.
    pub c: f64,
    /// Local gravitational acceleration, m/s².
    pub g: f64,
    /// Atomic mass unit, kg.
    pub amu: f64,
}

impl Default for PhysicalConstants {
    /// CODATA 2018 values with standard gravity.
    fn default() -> Self {
        Self {
            hbar: 1.054_571_817e-34,
            c: 299_792_458.0,
            g: 9.806_65,
            amu: 1.660_539_066_60e-27,
        }
    }
}

impl PhysicalConstants {
    /// Checks that every constant is strictly positive.
    pub fn validate(&self) -> Result<()> {
        require_positive("hbar", self.hbar)?;
        require_positive("c", self.c)?;
        require_positive("g", self.g)?;
        require_positive("amu", self.amu)
    }
}

/// A clock atom: mass, magic trapping wavelength and clock transition frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub name: String,
    /// Atomic mass, kg.
    pub mass: f64,
    /// Magic wavelength of the lattice laser, m.
    pub magic_wavelength: f64,
    /// Clock transition angular frequency ω₀, rad/s.
    pub clock_angular_frequency: f64,
}

/// Names accepted by [`AtomSpec::preset`].
pub const PRESET_NAMES: [&str; 2] = ["mg24", "sr87"];

impl AtomSpec {
    /// Magnesium-24 in a 468 nm lattice. The clock frequency (655 THz, the
    /// 458 nm intercombination line) is an external reference value.
    pub fn mg24() -> Self {
        Self::from_lab_units("mg24", 24.0, 468.0, 655.0, &PhysicalConstants::default())
    }

    /// Strontium-87 in an 813 nm lattice. The clock frequency (429.228 THz, the
    /// 698 nm line) is an external reference value.
    pub fn sr87() -> Self {
        Self::from_lab_units(
            "sr87",
            87.0,
            813.0,
            429.228_004_229_873,
            &PhysicalConstants::default(),
        )
    }

    /// Looks up a built-in preset by (case-insensitive) name.
    pub fn preset(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "mg24" | "mg" | "24mg" => Ok(Self::mg24()),
            "sr87" | "sr" | "87sr" => Ok(Self::sr87()),
            _ => Err(Error::UnknownPreset {
                name: name.to_string(),
                available: PRESET_NAMES.join(", "),
            }),
        }
    }

    /// Builds a spec from laboratory units: mass in amu, wavelength in nm, clock
    /// frequency in THz (converted to angular frequency).
    pub fn from_lab_units(
        name: &str,
        mass_amu: f64,
        magic_wavelength_nm: f64,
        clock_frequency_thz: f64,
        consts: &PhysicalConstants,
    ) -> Self {
        Self {
            name: name.to_string(),
            mass: mass_amu * consts.amu,
            magic_wavelength: magic_wavelength_nm * 1e-9,
            clock_angular_frequency: 2.0 * PI * clock_frequency_thz * 1e12,
        }
    }

    /// Parses a key-value atom file with the keys `name`, `mass_amu`,
    /// `magic_wavelength_nm` and `clock_frequency_THz`.
    pub fn from_config_str(text: &str, consts: &PhysicalConstants) -> Result<Self> {
        let file: AtomFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let atom = Self::from_lab_units(
            &file.name,
            file.mass_amu,
            file.magic_wavelength_nm,
            file.clock_frequency_thz,
            consts,
        );
        atom.validate()?;
        Ok(atom)
    }

    /// Reads an atom file from disk; see [`AtomSpec::from_config_str`].
    pub fn from_config_file(path: &Path, consts: &PhysicalConstants) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_config_str(&text, consts)
    }

    /// Checks that mass, wavelength and clock frequency are strictly positive.
    pub fn validate(&self) -> Result<()> {
        require_positive("mass", self.mass)?;
        require_positive("magic_wavelength", self.magic_wavelength)?;
        require_positive("clock_angular_frequency", self.clock_angular_frequency)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomFile {
    name: String,
    mass_amu: f64,
    magic_wavelength_nm: f64,
    #[serde(rename = "clock_frequency_THz")]
    clock_frequency_thz: f64,
}

/// Lattice depth and Ramsey interrogation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    /// Trap depth as a multiple of the recoil energy.
    pub trap_depth_recoil: f64,
    /// Interrogation time T, s.
    pub interrogation_time: f64,
}

impl LatticeSpec {
    /// 300 recoil energies and one second of interrogation.
    pub fn baseline() -> Self {
        Self {
            trap_depth_recoil: 300.0,
            interrogation_time: 1.0,
        }
    }
}

/// Trap constants derived from an atom, a lattice and the physical constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeDerived {
    /// Lattice wavenumber 2π/λ, 1/m.
    pub wavenumber: f64,
    /// Recoil energy 2π²ħ²/(mλ²), J.
    pub recoil_energy: f64,
    /// Trap depth, J.
    pub trap_depth: f64,
    /// Axial trap angular frequency ω_z, rad/s.
    pub trap_frequency: f64,
    /// Ground-state width √(ħ/(mω_z)), m.
    pub ground_width: f64,
    /// Gravity coupling g·z_s/(√2c²).
    pub gravity_coupling: f64,
    /// Sag coupling g²/(ω_z²c²).
    pub sag_coupling: f64,
    /// Kinetic coupling ħω_z/(4mc²).
    pub kinetic_coupling: f64,
    /// Atomic mass, kg.
    pub mass: f64,
    /// Constants used in the derivation.
    pub consts: PhysicalConstants,
}

/// Derives every trap constant. Fails with the name of the first non-positive input.
pub fn derive_lattice(
    atom: &AtomSpec,
    lattice: &LatticeSpec,
    consts: &PhysicalConstants,
) -> Result<LatticeDerived> {
    consts.validate()?;
    atom.validate()?;
    require_positive("trap_depth_recoil", lattice.trap_depth_recoil)?;
    require_positive("interrogation_time", lattice.interrogation_time)?;

    let PhysicalConstants { hbar, c, g, .. } = *consts;
    let mass = atom.mass;
    let wavelength = atom.magic_wavelength;
    let wavenumber = 2.0 * PI / wavelength;
    let recoil_energy = 2.0 * PI * PI * hbar * hbar / (mass * wavelength * wavelength);
    let trap_depth = lattice.trap_depth_recoil * recoil_energy;
    let trap_frequency = (2.0 * trap_depth / mass).sqrt() * wavenumber;
    let ground_width = (hbar / (mass * trap_frequency)).sqrt();
    let c2 = c * c;
    Ok(LatticeDerived {
        wavenumber,
        recoil_energy,
        trap_depth,
        trap_frequency,
        ground_width,
        gravity_coupling: g * ground_width / (SQRT_2 * c2),
        sag_coupling: g * g / (trap_frequency * trap_frequency * c2),
        kinetic_coupling: hbar * trap_frequency / (4.0 * mass * c2),
        mass,
        consts: *consts,
    })
}

impl LatticeDerived {
    /// The couplings consumed by the operator-level computations.
    pub fn couplings(&self) -> Couplings {
        Couplings {
            gravity: self.gravity_coupling,
            sag: self.sag_coupling,
            kinetic: self.kinetic_coupling,
            trap_frequency: self.trap_frequency,
        }
    }
}

/// Converts a spatial half-separation `d` (m) into a coherent amplitude d/(√2 z_s).
pub fn displacement_to_alpha(displacement: f64, derived: &LatticeDerived) -> f64 {
    displacement / (SQRT_2 * derived.ground_width)
}

/// The three perturbation couplings together with the trap frequency.
///
/// This is all the operator-level code needs. Building one directly (rather than
/// through [`derive_lattice`]) gives the dimensionless regime used for
/// verification, e.g. `trap_frequency = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub gravity: f64,
    pub sag: f64,
    pub kinetic: f64,
    /// ω_z, in the reciprocal of the time unit used for T.
    pub trap_frequency: f64,
}

impl Couplings {
    /// Checks positivity of the trap frequency and non-negativity of the couplings.
    pub fn validate(&self) -> Result<()> {
        require_positive("trap_frequency", self.trap_frequency)?;
        require_non_negative("gravity coupling", self.gravity)?;
        require_non_negative("sag coupling", self.sag)?;
        require_non_negative("kinetic coupling", self.kinetic)
    }
}

/// Whether the motional state is a coherent superposition or the matching mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StateKind {
    /// (cos θ|α⟩ + e^{iφ} sin θ|−α⟩), normalised by 1/(1 + C_i).
    Quantum,
    /// cos²θ |α⟩⟨α| + sin²θ |−α⟩⟨−α|.
    Classical,
}

/// Two coherent branches |α⟩ and |−α⟩ with α = α₀e^{iφ_α}, combined either
/// coherently or as a statistical mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperposedCoherentState {
    /// Coherent amplitude modulus α₀ ≥ 0.
    pub alpha0: f64,
    /// Phase φ_α of the amplitude, rad.
    pub amplitude_phase: f64,
    /// Branch weight angle θ, rad.
    pub mixing_angle: f64,
    /// Relative phase φ between the branches, rad.
    pub relative_phase: f64,
    pub kind: StateKind,
}

impl SuperposedCoherentState {
    /// A state with real amplitude α₀.
    pub fn new(alpha0: f64, mixing_angle: f64, relative_phase: f64, kind: StateKind) -> Self {
        Self {
            alpha0,
            amplitude_phase: 0.0,
            mixing_angle,
            relative_phase,
            kind,
        }
    }

    /// A single coherent state |α⟩ (θ = 0) with complex amplitude.
    pub fn coherent(alpha: Complex64) -> Self {
        Self {
            alpha0: alpha.norm(),
            amplitude_phase: alpha.arg(),
            mixing_angle: 0.0,
            relative_phase: 0.0,
            kind: StateKind::Quantum,
        }
    }

    /// The same parameters with a different kind.
    pub fn with_kind(self, kind: StateKind) -> Self {
        Self { kind, ..self }
    }

    /// The complex amplitude α = α₀e^{iφ_α}.
    pub fn alpha(&self) -> Complex64 {
        Complex64::from_polar(self.alpha0, self.amplitude_phase)
    }

    /// The interference weight C_i = e^{−2α₀²} sin 2θ cos φ.
    pub fn coherence_factor(&self) -> f64 {
        coherence_factor(self)
    }

    /// C_i·tan φ evaluated without the tangent, finite at φ = π/2.
    pub fn coherence_factor_tan(&self) -> f64 {
        (-2.0 * self.alpha0 * self.alpha0).exp()
            * (2.0 * self.mixing_angle).sin()
            * self.relative_phase.sin()
    }

    /// Checks α₀ ≥ 0 and, for the quantum kind, 1 + C_i > 0.
    pub fn validate(&self) -> Result<()> {
        require_non_negative("alpha0", self.alpha0)?;
        let norm = 1.0 + self.coherence_factor();
        if self.kind == StateKind::Quantum && norm <= 0.0 {
            return Err(Error::Unnormalizable(norm));
        }
        Ok(())
    }
}

/// The interference weight C_i = e^{−2α₀²} sin 2θ cos φ of a superposition.
pub fn coherence_factor(state: &SuperposedCoherentState) -> f64 {
    (-2.0 * state.alpha0 * state.alpha0).exp()
        * (2.0 * state.mixing_angle).sin()
        * state.relative_phase.cos()
}
