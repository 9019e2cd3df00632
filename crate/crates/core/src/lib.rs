//! Motional-state corrections to gravitational time dilation in optical lattice clocks.
//!
//! An atom held in a vertical optical lattice accumulates proper time that depends on
//! its height and momentum. When the atom's motional state is a superposition of two
//! displaced coherent states, the accumulated time differs from that of the matching
//! classical mixture. This crate computes that difference and its variance:
//!
//! - [`units`]: physical constants, atom and lattice presets, derived trap couplings.
//! - [`algebra`]: normal-ordered ladder-operator polynomials, their Heisenberg
//!   evolution under free, amplitude-damping, phase-damping and diffusion channels,
//!   and analytic expectations in superposed coherent states.
//! - [`closed_form`]: closed-form first and second time-dilation moments per channel.
//! - [`integral`]: exact term-by-term integration of the evolved perturbation, with
//!   oscillating terms kept or dropped.
//! - [`fock`]: a brute-force truncated Fock-space oracle (adjoint Lindblad ODE,
//!   quadrature) and the perturbative two-level clock state.
//! - [`clock`]: Ramsey fringes, detectability, ideal-clock moments and the classical
//!   proper time of a point particle in the trap.
//! - [`sweep`] and [`verify`]: parameter sweeps and the oracle verification suite
//!   behind the `lattice-clock` command-line tool.
//!
//! Time-dilation integrals are expressed in seconds (first moment) and seconds
//! squared (second moment). Clock energies are angular frequencies (ħ = 1 for the
//! internal two-level system).

pub mod algebra;
pub mod clock;
pub mod closed_form;
pub mod error;
pub mod fock;
pub mod integral;
pub mod output;
pub mod sweep;
pub mod units;
pub mod verify;

pub use error::{Error, Result};
