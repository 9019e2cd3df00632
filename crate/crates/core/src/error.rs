//! Error type shared by every module.

use std::path::PathBuf;

/// Errors raised by parameter validation, oracle guards and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A physical input that must be strictly positive was not.
    #[error("{field} must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },

    /// A physical input that must be non-negative was negative.
    #[error("{field} must be non-negative, got {value}")]
    Negative { field: &'static str, value: f64 },

    /// A superposition whose normalisation 1 + C_i is not positive.
    #[error("superposition cannot be normalised: 1 + C_i = {0}")]
    Unnormalizable(f64),

    /// The Fock truncation cannot represent the requested coherent amplitude.
    #[error("Fock dimension {dim} is too small for |alpha|^2 = {alpha_sq}; use a dimension of at least {suggested}")]
    Truncation {
        dim: usize,
        alpha_sq: f64,
        suggested: usize,
    },

    /// A numerical routine was asked to run outside the regime it supports.
    #[error("regime guard: {0}")]
    Regime(String),

    /// Fixed-step integration did not reach the requested accuracy.
    #[error("ODE integration error estimate {achieved:e} exceeds tolerance {requested:e}; increase the step count")]
    Accuracy { achieved: f64, requested: f64 },

    /// An atom preset name that is not known.
    #[error("unknown atom preset `{name}`; available presets: {available}")]
    UnknownPreset { name: String, available: String },

    /// A malformed configuration file or value.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// File-system failure, with the offending path.
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(field: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { field, value })
    }
}

pub(crate) fn require_non_negative(field: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Negative { field, value })
    }
}
