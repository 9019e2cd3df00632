//! Normal-ordered ladder-operator polynomials and their Heisenberg evolution.
//!
//! A [`NormalOrderedPoly`] is a finite sum `Σ c_{mn} a†^m a^n`. Products are
//! re-normal-ordered exactly with `a^n a†^p = Σ_k C(n,k) C(p,k) k! a†^{p−k} a^{n−k}`.
//!
//! Under every supported channel a monomial evolves in closed form:
//!
//! | channel | `(a†^m a^n)[t]` |
//! |---|---|
//! | free | `a†^m a^n e^{i(m−n)ω t}` |
//! | amplitude damping (`L = √Γ a`) | `a†^m a^n e^{i(m−n)ω t − (m+n)Γt/2}` |
//! | phase damping (`L = √Γ a†a`) | `a†^m a^n e^{i(m−n)ω t − (m−n)²Γt/2}` |
//! | diffusion (`L = √Γ a`, `√Γ a†`) | `Σ_k m!n!/(k!(m−k)!(n−k)!) (Γt)^k a†^{m−k} a^{n−k} e^{i(m−n)ω t}` |
//!
//! The convention is `a[t] = a e^{−iωt}`, so a monomial carrying `m − n` net
//! creation operators rotates as `e^{i(m−n)ωt}`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, Result};
use crate::units::{StateKind, SuperposedCoherentState};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative tolerance below which coefficients are pruned.
pub const PRUNE_TOLERANCE: f64 = 1e-15;

/// Σ c_{mn} a†^m a^n, keyed by (m, n).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NormalOrderedPoly {
    terms: BTreeMap<(u32, u32), Complex64>,
}

impl NormalOrderedPoly {
    /// The zero polynomial.
    pub fn zero() -> Self {
        Self::default()
    }

    /// The identity operator.
    pub fn identity() -> Self {
        Self::constant(ONE)
    }

    /// A multiple of the identity.
    pub fn constant(value: Complex64) -> Self {
        Self::monomial(0, 0, value)
    }

    /// The single term `coeff · a†^m a^n`.
    pub fn monomial(creation: u32, annihilation: u32, coeff: Complex64) -> Self {
        let mut poly = Self::zero();
        poly.add_term(creation, annihilation, coeff);
        poly
    }

    /// The annihilation operator a.
    pub fn annihilation() -> Self {
        Self::monomial(0, 1, ONE)
    }

    /// The creation operator a†.
    pub fn creation() -> Self {
        Self::monomial(1, 0, ONE)
    }

    /// The number operator a†a.
    pub fn number() -> Self {
        Self::monomial(1, 1, ONE)
    }

    /// Builds a polynomial from (m, n, coefficient) triples, summing repeats.
    pub fn from_terms(terms: impl IntoIterator<Item = (u32, u32, Complex64)>) -> Self {
        let mut poly = Self::zero();
        for (m, n, c) in terms {
            poly.add_term(m, n, c);
        }
        poly
    }

    /// Adds `coeff · a†^m a^n` in place.
    pub fn add_term(&mut self, creation: u32, annihilation: u32, coeff: Complex64) {
        *self.terms.entry((creation, annihilation)).or_insert(ZERO) += coeff;
    }

    /// Coefficient of `a†^m a^n` (zero if absent).
    pub fn coeff(&self, creation: u32, annihilation: u32) -> Complex64 {
        self.terms
            .get(&(creation, annihilation))
            .copied()
            .unwrap_or(ZERO)
    }

    /// Iterates over ((m, n), coefficient) in key order.
    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), Complex64)> + '_ {
        self.terms.iter().map(|(k, v)| (*k, *v))
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True when no terms are stored.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest total degree m + n.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(m, n)| m + n).max().unwrap_or(0)
    }

    /// Largest coefficient modulus.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Removes coefficients smaller than [`PRUNE_TOLERANCE`] times the largest one.
    pub fn pruned(mut self) -> Self {
        let cutoff = PRUNE_TOLERANCE * self.max_coeff();
        self.terms.retain(|_, c| c.norm() > cutoff);
        self
    }

    /// Hermitian conjugate: swaps (m, n) → (n, m) and conjugates coefficients.
    pub fn adjoint(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(&(m, n), c)| ((n, m), c.conj()))
                .collect(),
        }
    }

    /// Multiplies every coefficient by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            terms: self.terms.iter().map(|(k, c)| (*k, c * factor)).collect(),
        }
    }

    /// Sum of two polynomials.
    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((m, n), c) in other.terms() {
            out.add_term(m, n, c);
        }
        out
    }

    /// Maximum coefficient difference to `other`, relative to the larger polynomial.
    pub fn relative_distance(&self, other: &Self) -> f64 {
        let scale = self.max_coeff().max(other.max_coeff());
        if scale == 0.0 {
            return 0.0;
        }
        let diff = self.plus(&other.scaled(-ONE));
        diff.max_coeff() / scale
    }
}

impl fmt::Display for NormalOrderedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, ((m, n), c)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6e}{:+.6e}i)", c.re, c.im)?;
            if m > 0 {
                write!(f, " a†^{m}")?;
            }
            if n > 0 {
                write!(f, " a^{n}")?;
            }
        }
        Ok(())
    }
}

/// Binomial coefficient as f64 (exact for the small arguments used here).
pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * f64::from(i))
}

/// Exact normal-ordered product `P · Q`, pruned.
pub fn multiply_normal_order(
    lhs: &NormalOrderedPoly,
    rhs: &NormalOrderedPoly,
) -> NormalOrderedPoly {
    multiply_unpruned(lhs, rhs).pruned()
}

/// Normal-ordered product without pruning, for callers whose couplings span many
/// orders of magnitude.
pub fn multiply_unpruned(lhs: &NormalOrderedPoly, rhs: &NormalOrderedPoly) -> NormalOrderedPoly {
    let mut out = NormalOrderedPoly::zero();
    for ((m, n), c1) in lhs.terms() {
        for ((p, q), c2) in rhs.terms() {
            // a†^m (a^n a†^p) a^q with a^n a†^p = Σ_k C(n,k) C(p,k) k! a†^{p−k} a^{n−k}
            for k in 0..=n.min(p) {
                let weight = binomial(n, k) * binomial(p, k) * factorial(k);
                out.add_term(m + p - k, n + q - k, c1 * c2 * weight);
            }
        }
    }
    out
}

/// Markovian noise acting on the motional mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "channel", content = "rate")]
pub enum NoiseChannel {
    /// Unitary harmonic evolution.
    Free,
    /// Energy decay with jump operator √Γ a.
    AmplitudeDamping(f64),
    /// Dephasing with jump operator √Γ a†a.
    PhaseDamping(f64),
    /// Symmetric heating/cooling with jump operators √Γ a and √Γ a†.
    Diffusion(f64),
}

impl NoiseChannel {
    /// The channel rate Γ (zero for the free channel).
    pub fn rate(&self) -> f64 {
        match *self {
            NoiseChannel::Free => 0.0,
            NoiseChannel::AmplitudeDamping(r)
            | NoiseChannel::PhaseDamping(r)
            | NoiseChannel::Diffusion(r) => r,
        }
    }

    /// Short lowercase name.
    pub fn name(&self) -> &'static str {
        match self {
            NoiseChannel::Free => "free",
            NoiseChannel::AmplitudeDamping(_) => "amplitude",
            NoiseChannel::PhaseDamping(_) => "phase",
            NoiseChannel::Diffusion(_) => "diffusion",
        }
    }

    /// Checks Γ ≥ 0.
    pub fn validate(&self) -> Result<()> {
        require_non_negative("channel rate", self.rate())
    }
}

/// Time dependence `e^{λt}` with λ = i·harmonic·ω − decay.
///
/// Frequencies are always integer multiples of the trap frequency, so the
/// oscillating/secular split is an exact integer test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    /// Integer multiple of ω carried by the exponent.
    pub harmonic: i32,
    /// Non-negative decay constant.
    pub decay: f64,
}

impl Rate {
    /// No time dependence.
    pub const STATIC: Rate = Rate {
        harmonic: 0,
        decay: 0.0,
    };

    /// The complex exponent λ for trap frequency ω.
    pub fn exponent(&self, trap_frequency: f64) -> Complex64 {
        Complex64::new(-self.decay, f64::from(self.harmonic) * trap_frequency)
    }

    /// True when the exponent has a non-zero imaginary part.
    pub fn is_oscillating(&self) -> bool {
        self.harmonic != 0
    }
}

/// One evolved term: `prefactor · t^k · e^{λt}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolvedTerm {
    pub prefactor: Complex64,
    pub rate: Rate,
}

/// Σ prefactor · t^k · e^{λt} · a†^m a^n, keyed by (m, n, k).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolvedPoly {
    /// Trap frequency used to turn [`Rate`]s into exponents.
    pub trap_frequency: f64,
    terms: BTreeMap<(u32, u32, u32), EvolvedTerm>,
}

impl EvolvedPoly {
    fn new(trap_frequency: f64) -> Self {
        Self {
            trap_frequency,
            terms: BTreeMap::new(),
        }
    }

    fn add(&mut self, key: (u32, u32, u32), prefactor: Complex64, rate: Rate) {
        match self.terms.get_mut(&key) {
            Some(term) => {
                debug_assert_eq!(
                    term.rate, rate,
                    "one (m, n, k) key must carry a single rate"
                );
                term.prefactor += prefactor;
            }
            None => {
                self.terms.insert(key, EvolvedTerm { prefactor, rate });
            }
        }
    }

    /// Iterates over ((m, n, k), term).
    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32, u32), EvolvedTerm)> + '_ {
        self.terms.iter().map(|(k, v)| (*k, *v))
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True when no terms are stored.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Looks up the term with key (m, n, k).
    pub fn term(&self, creation: u32, annihilation: u32, power: u32) -> Option<EvolvedTerm> {
        self.terms.get(&(creation, annihilation, power)).copied()
    }

    /// The operator at time `t` as an ordinary polynomial.
    pub fn at(&self, t: f64) -> NormalOrderedPoly {
        let mut out = NormalOrderedPoly::zero();
        for ((m, n, k), term) in self.terms() {
            let time = (term.rate.exponent(self.trap_frequency) * t).exp() * t.powi(k as i32);
            out.add_term(m, n, term.prefactor * time);
        }
        out
    }

    /// Hermitian conjugate, term-wise: (m, n) swap and conjugated prefactors and rates.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::new(self.trap_frequency);
        for ((m, n, k), term) in self.terms() {
            let rate = Rate {
                harmonic: -term.rate.harmonic,
                decay: term.rate.decay,
            };
            out.add((n, m, k), term.prefactor.conj(), rate);
        }
        out
    }
}

/// Channel rule for a single monomial, pushed into `out`.
fn evolve_monomial(
    out: &mut EvolvedPoly,
    creation: u32,
    annihilation: u32,
    coeff: Complex64,
    channel: NoiseChannel,
) {
    let (m, n) = (creation, annihilation);
    let harmonic = m as i32 - n as i32;
    match channel {
        NoiseChannel::Free => out.add(
            (m, n, 0),
            coeff,
            Rate {
                harmonic,
                decay: 0.0,
            },
        ),
        NoiseChannel::AmplitudeDamping(rate) => {
            let decay = 0.5 * f64::from(m + n) * rate;
            out.add((m, n, 0), coeff, Rate { harmonic, decay });
        }
        NoiseChannel::PhaseDamping(rate) => {
            let decay = 0.5 * f64::from(harmonic * harmonic) * rate;
            out.add((m, n, 0), coeff, Rate { harmonic, decay });
        }
        NoiseChannel::Diffusion(rate) => {
            for k in 0..=m.min(n) {
                let weight = factorial(m) * factorial(n)
                    / (factorial(k) * factorial(m - k) * factorial(n - k));
                let prefactor = coeff * weight * rate.powi(k as i32);
                if k > 0 && rate == 0.0 {
                    continue;
                }
                out.add(
                    (m - k, n - k, k),
                    prefactor,
                    Rate {
                        harmonic,
                        decay: 0.0,
                    },
                );
            }
        }
    }
}

/// Heisenberg-picture evolution of `poly` under `channel`, term by term.
pub fn evolve(poly: &NormalOrderedPoly, channel: NoiseChannel, trap_frequency: f64) -> EvolvedPoly {
    let mut out = EvolvedPoly::new(trap_frequency);
    for ((m, n), c) in poly.terms() {
        evolve_monomial(&mut out, m, n, c, channel);
    }
    out
}

/// Coherent-state overlap ⟨β|α⟩ = exp(−|α|²/2 − |β|²/2 + β*α).
pub fn coherent_overlap(beta: Complex64, alpha: Complex64) -> Complex64 {
    (-0.5 * alpha.norm_sqr() - 0.5 * beta.norm_sqr() + beta.conj() * alpha).exp()
}

/// A state written as Σ w · |α_ket⟩⟨α_bra| so that ⟨X⟩ = Σ w · ⟨α_bra|X|α_ket⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentBranches {
    branches: Vec<(Complex64, Complex64, Complex64)>,
}

impl CoherentBranches {
    /// Branch decomposition of a superposed (or mixed) coherent state.
    pub fn of(state: &SuperposedCoherentState) -> Self {
        let alpha = state.alpha();
        let (cos, sin) = (state.mixing_angle.cos(), state.mixing_angle.sin());
        let branches = match state.kind {
            StateKind::Quantum => {
                let amps = [
                    (Complex64::new(cos, 0.0), alpha),
                    (Complex64::from_polar(sin, state.relative_phase), -alpha),
                ];
                let norm = 1.0 + state.coherence_factor();
                let mut out = Vec::with_capacity(4);
                for &(c_bra, bra) in &amps {
                    for &(c_ket, ket) in &amps {
                        out.push((c_bra.conj() * c_ket / norm, bra, ket));
                    }
                }
                out
            }
            StateKind::Classical => vec![
                (Complex64::new(cos * cos, 0.0), alpha, alpha),
                (Complex64::new(sin * sin, 0.0), -alpha, -alpha),
            ],
        };
        let branches = branches
            .into_iter()
            .filter(|(w, _, _)| w.norm() > 0.0)
            .collect();
        Self { branches }
    }

    /// ⟨a†^m a^n⟩ = Σ w · (β*)^m α^n ⟨β|α⟩.
    pub fn monomial(&self, creation: u32, annihilation: u32) -> Complex64 {
        self.branches
            .iter()
            .map(|&(w, bra, ket)| {
                w * bra.conj().powu(creation) * ket.powu(annihilation) * coherent_overlap(bra, ket)
            })
            .sum()
    }

    /// Expectation of a polynomial.
    pub fn expectation(&self, poly: &NormalOrderedPoly) -> Complex64 {
        poly.terms()
            .map(|((m, n), c)| c * self.monomial(m, n))
            .sum()
    }
}

/// ⟨P⟩ in a superposed or mixed coherent state.
pub fn expectation(poly: &NormalOrderedPoly, state: &SuperposedCoherentState) -> Complex64 {
    CoherentBranches::of(state).expectation(poly)
}
