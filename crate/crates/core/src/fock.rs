//! Brute-force verification in a truncated Fock space.
//!
//! Everything here is computed numerically: ladder operators are dense matrices,
//! Heisenberg and Schrödinger Lindblad equations are integrated with fixed-step
//! RK4, and the time-dilation moments are obtained by quadrature. None of it
//! shares code with the analytic rule table of [`algebra`](crate::algebra), which
//! makes it a usable oracle for that table and for the integral engine.
//!
//! The second moment is evaluated as
//! `I₂ = 2∫₀ᵀ dt₁ Tr(Q(T − t₁) · V ρ[t₁])` with `Q(u) = ∫₀^u V[s] ds`. By duality
//! `Tr(V[s] X) = Tr(V e^{ℒs}(X))`, so this is the same number whether the inner
//! propagation is written in the Heisenberg or in the Schrödinger picture.
//! [`oracle_i2_superoperator`] evaluates the Schrödinger form directly so the two
//! can be compared.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{NoiseChannel, NormalOrderedPoly};
use crate::error::{Error, Result};
use crate::integral::VkOperator;
use crate::units::{Couplings, StateKind, SuperposedCoherentState};

/// Dense complex matrix.
pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default truncation dimension.
pub const DEFAULT_DIM: usize = 40;

/// A truncated Fock space {|0⟩, …, |N−1⟩}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpace {
    pub dim: usize,
}

impl FockSpace {
    /// A space of dimension `dim` ≥ 2.
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Regime(format!(
                "Fock dimension must be at least 2, got {dim}"
            )));
        }
        Ok(Self { dim })
    }

    /// The annihilation operator, a|n⟩ = √n |n−1⟩.
    pub fn annihilation(&self) -> CMatrix {
        self.monomial(0, 1)
    }

    /// The creation operator.
    pub fn creation(&self) -> CMatrix {
        self.monomial(1, 0)
    }

    /// The number operator.
    pub fn number(&self) -> CMatrix {
        self.monomial(1, 1)
    }

    /// Matrix of a†^m a^n, with ⟨j+m| a†^m a^n |j+n⟩ = √((j+n)!/j!) √((j+m)!/j!).
    pub fn monomial(&self, creation: u32, annihilation: u32) -> CMatrix {
        let (m, n) = (creation as usize, annihilation as usize);
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            let (row, col) = (j + m, j + n);
            if row >= self.dim || col >= self.dim {
                break;
            }
            let lower: f64 = (j + 1..=col).map(|x| x as f64).product::<f64>().sqrt();
            let raise: f64 = (j + 1..=row).map(|x| x as f64).product::<f64>().sqrt();
            out[(row, col)] = Complex64::new(lower * raise, 0.0);
        }
        out
    }

    /// Matrix of a polynomial.
    pub fn poly(&self, poly: &NormalOrderedPoly) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for ((m, n), c) in poly.terms() {
            out += self.monomial(m, n) * c;
        }
        out
    }

    /// Largest |α|² this space represents faithfully.
    pub fn max_alpha_sq(&self) -> f64 {
        self.dim as f64 / 4.0
    }

    /// Normalised truncated coherent state e^{−|α|²/2} Σ αⁿ/√(n!) |n⟩.
    pub fn coherent_vector(&self, alpha: Complex64) -> Result<DVector<Complex64>> {
        let alpha_sq = alpha.norm_sqr();
        if alpha_sq > self.max_alpha_sq() {
            return Err(Error::Truncation {
                dim: self.dim,
                alpha_sq,
                suggested: (4.0 * alpha_sq).ceil() as usize,
            });
        }
        let mut v = DVector::from_element(self.dim, ZERO);
        let mut amp = Complex64::new((-0.5 * alpha_sq).exp(), 0.0);
        for n in 0..self.dim {
            if n > 0 {
                amp *= alpha / (n as f64).sqrt();
            }
            v[n] = amp;
        }
        let norm = v.norm();
        Ok(v / Complex64::new(norm, 0.0))
    }

    /// Density matrix of a superposed or mixed coherent state.
    pub fn density_matrix(&self, state: &SuperposedCoherentState) -> Result<CMatrix> {
        state.validate()?;
        let alpha = state.alpha();
        let plus = self.coherent_vector(alpha)?;
        let minus = self.coherent_vector(-alpha)?;
        let (cos, sin) = (state.mixing_angle.cos(), state.mixing_angle.sin());
        let rho = match state.kind {
            StateKind::Quantum => {
                let psi = &plus * Complex64::new(cos, 0.0)
                    + &minus * Complex64::from_polar(sin, state.relative_phase);
                let norm = psi.norm();
                let psi = psi / Complex64::new(norm, 0.0);
                &psi * psi.adjoint()
            }
            StateKind::Classical => {
                &plus * plus.adjoint() * Complex64::new(cos * cos, 0.0)
                    + &minus * minus.adjoint() * Complex64::new(sin * sin, 0.0)
            }
        };
        Ok(rho)
    }
}

/// Checks on a numerically evolved density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityCheck {
    /// max |ρ − ρ†|.
    pub hermiticity_error: f64,
    /// |Tr ρ − 1|.
    pub trace_error: f64,
    /// Smallest eigenvalue of the Hermitian part.
    pub min_eigenvalue: f64,
}

impl DensityCheck {
    /// Evaluates all three diagnostics.
    pub fn of(rho: &CMatrix) -> Self {
        let herm = (rho - rho.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let hermitian_part = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
        let eigen = nalgebra::SymmetricEigen::new(hermitian_part);
        Self {
            hermiticity_error: herm,
            trace_error: (rho.trace() - Complex64::new(1.0, 0.0)).norm(),
            min_eigenvalue: eigen
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Hermitian within 1e−12, unit trace within 1e−10, eigenvalues above −1e−8.
    pub fn is_valid(&self) -> bool {
        self.hermiticity_error < 1e-12 && self.trace_error < 1e-10 && self.min_eigenvalue > -1e-8
    }
}

// Ladder actions exploiting the bidiagonal structure of a and a†.

/// a · A
fn a_left(x: &CMatrix) -> CMatrix {
    let n = x.nrows();
    CMatrix::from_fn(n, n, |i, j| {
        if i + 1 < n {
            x[(i + 1, j)] * ((i + 1) as f64).sqrt()
        } else {
            ZERO
        }
    })
}

/// A · a
fn a_right(x: &CMatrix) -> CMatrix {
    let n = x.nrows();
    CMatrix::from_fn(n, n, |i, j| {
        if j >= 1 {
            x[(i, j - 1)] * (j as f64).sqrt()
        } else {
            ZERO
        }
    })
}

/// a† · A
fn adag_left(x: &CMatrix) -> CMatrix {
    let n = x.nrows();
    CMatrix::from_fn(n, n, |i, j| {
        if i >= 1 {
            x[(i - 1, j)] * (i as f64).sqrt()
        } else {
            ZERO
        }
    })
}

/// A · a†
fn adag_right(x: &CMatrix) -> CMatrix {
    let n = x.nrows();
    CMatrix::from_fn(n, n, |i, j| {
        if j + 1 < n {
            x[(i, j + 1)] * ((j + 1) as f64).sqrt()
        } else {
            ZERO
        }
    })
}

/// Diagonal of the truncated a·a†: (1, 2, …, N−1, 0).
fn aadag_diag(n: usize, i: usize) -> f64 {
    if i + 1 < n {
        (i + 1) as f64
    } else {
        0.0
    }
}

/// Heisenberg-picture generator ℒ†(A) = iω[a†a, A] + Σ_L (L†AL − ½{L†L, A}).
pub fn adjoint_generator(x: &CMatrix, channel: NoiseChannel, trap_frequency: f64) -> CMatrix {
    let n = x.nrows();
    let mut out = CMatrix::from_fn(n, n, |i, j| {
        x[(i, j)] * I * (trap_frequency * (i as f64 - j as f64))
    });
    match channel {
        NoiseChannel::Free => {}
        NoiseChannel::AmplitudeDamping(g) => {
            let jump = adag_left(&a_right(x));
            for j in 0..n {
                for i in 0..n {
                    out[(i, j)] += (jump[(i, j)] - x[(i, j)] * (0.5 * (i + j) as f64)) * g;
                }
            }
        }
        NoiseChannel::PhaseDamping(g) => {
            for j in 0..n {
                for i in 0..n {
                    let d = i as f64 - j as f64;
                    out[(i, j)] -= x[(i, j)] * (0.5 * g * d * d);
                }
            }
        }
        NoiseChannel::Diffusion(g) => {
            let down = adag_left(&a_right(x));
            let up = a_left(&adag_right(x));
            for j in 0..n {
                for i in 0..n {
                    let anti = 0.5 * ((i + j) as f64 + aadag_diag(n, i) + aadag_diag(n, j));
                    out[(i, j)] += (down[(i, j)] + up[(i, j)] - x[(i, j)] * anti) * g;
                }
            }
        }
    }
    out
}

/// Schrödinger-picture generator ℒ(ρ) = −iω[a†a, ρ] + Σ_L (LρL† − ½{L†L, ρ}).
pub fn schrodinger_generator(rho: &CMatrix, channel: NoiseChannel, trap_frequency: f64) -> CMatrix {
    let n = rho.nrows();
    let mut out = CMatrix::from_fn(n, n, |i, j| {
        rho[(i, j)] * (-I) * (trap_frequency * (i as f64 - j as f64))
    });
    match channel {
        NoiseChannel::Free => {}
        NoiseChannel::AmplitudeDamping(g) => {
            let jump = a_left(&adag_right(rho));
            for j in 0..n {
                for i in 0..n {
                    out[(i, j)] += (jump[(i, j)] - rho[(i, j)] * (0.5 * (i + j) as f64)) * g;
                }
            }
        }
        NoiseChannel::PhaseDamping(g) => {
            for j in 0..n {
                for i in 0..n {
                    let d = i as f64 - j as f64;
                    out[(i, j)] -= rho[(i, j)] * (0.5 * g * d * d);
                }
            }
        }
        NoiseChannel::Diffusion(g) => {
            let down = a_left(&adag_right(rho));
            let up = adag_left(&a_right(rho));
            for j in 0..n {
                for i in 0..n {
                    let anti = 0.5 * ((i + j) as f64 + aadag_diag(n, i) + aadag_diag(n, j));
                    out[(i, j)] += (down[(i, j)] + up[(i, j)] - rho[(i, j)] * anti) * g;
                }
            }
        }
    }
    out
}

/// Heisenberg-picture generator with the dissipators of several channels acting
/// together; the harmonic part is counted once.
pub fn joint_adjoint_generator(
    x: &CMatrix,
    channels: &[NoiseChannel],
    trap_frequency: f64,
) -> CMatrix {
    joint(x, channels, trap_frequency, adjoint_generator)
}

/// Schrödinger-picture counterpart of [`joint_adjoint_generator`].
pub fn joint_schrodinger_generator(
    rho: &CMatrix,
    channels: &[NoiseChannel],
    trap_frequency: f64,
) -> CMatrix {
    joint(rho, channels, trap_frequency, schrodinger_generator)
}

fn joint(
    x: &CMatrix,
    channels: &[NoiseChannel],
    trap_frequency: f64,
    generator: fn(&CMatrix, NoiseChannel, f64) -> CMatrix,
) -> CMatrix {
    match channels {
        [single] => generator(x, *single, trap_frequency),
        _ => {
            let free = generator(x, NoiseChannel::Free, trap_frequency);
            let mut out = free.clone();
            for &channel in channels.iter().filter(|c| **c != NoiseChannel::Free) {
                out += generator(x, channel, trap_frequency) - &free;
            }
            out
        }
    }
}

/// One classical RK4 step of dy/dt = f(y).
fn rk4_step(y: &CMatrix, h: f64, f: &impl Fn(&CMatrix) -> CMatrix) -> CMatrix {
    let hc = Complex64::new(h, 0.0);
    let half = Complex64::new(0.5 * h, 0.0);
    let k1 = f(y);
    let k2 = f(&(y + &k1 * half));
    let k3 = f(&(y + &k2 * half));
    let k4 = f(&(y + &k3 * hc));
    y + (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * (hc / 6.0)
}

fn rk4(y0: &CMatrix, duration: f64, steps: usize, f: &impl Fn(&CMatrix) -> CMatrix) -> CMatrix {
    let h = duration / steps as f64;
    let mut y = y0.clone();
    for _ in 0..steps {
        y = rk4_step(&y, h, f);
    }
    y
}

fn max_abs(x: &CMatrix) -> f64 {
    x.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Fixed-step RK4 settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RkSettings {
    /// Steps of the coarse run; the fine run uses twice as many.
    pub steps: usize,
    /// Maximum accepted Richardson error estimate, relative to max |A(t)|.
    pub tolerance: f64,
}

/// A Heisenberg-evolved operator with its Richardson error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedOperator {
    /// Richardson-extrapolated matrix (16·fine − coarse)/15.
    pub matrix: CMatrix,
    /// |fine − coarse|/15 relative to max |fine|.
    pub error_estimate: f64,
}

fn check_step(channel: NoiseChannel, trap_frequency: f64, step: f64) -> Result<()> {
    check_step_joint(&[channel], trap_frequency, step)
}

/// Step guard with Γ the summed rate of all channels.
fn check_step_joint(channels: &[NoiseChannel], trap_frequency: f64, step: f64) -> Result<()> {
    let rate: f64 = channels.iter().map(NoiseChannel::rate).sum();
    let limit = 1.0 / (20.0 * trap_frequency.max(rate));
    if step > limit * (1.0 + 1e-12) {
        return Err(Error::Regime(format!(
            "RK4 step {step:.3e} exceeds the stability limit 1/(20·max(ω_z, Γ)) = {limit:.3e}"
        )));
    }
    Ok(())
}

/// Heisenberg evolution of an operator matrix to time `t` under `channel`.
pub fn adjoint_evolve_operator(
    op: &CMatrix,
    channel: NoiseChannel,
    trap_frequency: f64,
    time: f64,
    settings: RkSettings,
) -> Result<EvolvedOperator> {
    channel.validate()?;
    if settings.steps == 0 {
        return Err(Error::Regime("RK4 needs at least one step".into()));
    }
    check_step(channel, trap_frequency, time / settings.steps as f64)?;
    let gen = |x: &CMatrix| adjoint_generator(x, channel, trap_frequency);
    let coarse = rk4(op, time, settings.steps, &gen);
    let fine = rk4(op, time, 2 * settings.steps, &gen);
    let diff = &fine - &coarse;
    let scale = max_abs(&fine).max(f64::MIN_POSITIVE);
    let error_estimate = max_abs(&diff) / 15.0 / scale;
    if error_estimate > settings.tolerance {
        return Err(Error::Accuracy {
            achieved: error_estimate,
            requested: settings.tolerance,
        });
    }
    let matrix = &fine + diff * Complex64::new(1.0 / 15.0, 0.0);
    Ok(EvolvedOperator {
        matrix,
        error_estimate,
    })
}

/// Schrödinger evolution of a density matrix (single RK4 run).
pub fn evolve_density(
    rho: &CMatrix,
    channel: NoiseChannel,
    trap_frequency: f64,
    time: f64,
    steps: usize,
) -> Result<CMatrix> {
    channel.validate()?;
    check_step(channel, trap_frequency, time / steps.max(1) as f64)?;
    Ok(rk4(rho, time, steps.max(1), &|x: &CMatrix| {
        schrodinger_generator(x, channel, trap_frequency)
    }))
}

/// Quadrature settings for [`oracle_moments`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSettings {
    /// Fock dimension.
    pub dim: usize,
    /// Quadrature nodes per unit of ω_z·t (rounded so every duration is a
    /// multiple of four intervals).
    pub nodes_per_period: f64,
    /// RK4 sub-steps between quadrature nodes.
    pub substeps: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            dim: DEFAULT_DIM,
            nodes_per_period: 40.0,
            substeps: 2,
        }
    }
}

/// Largest ω_z·T the oracle accepts.
pub const ORACLE_MAX_PHASE: f64 = 1e3;

/// Tr(A·B) without forming the product.
fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut sum = ZERO;
    for i in 0..n {
        for k in 0..n {
            sum += a[(i, k)] * b[(k, i)];
        }
    }
    sum
}

/// Composite Simpson on equally spaced samples (even number of intervals),
/// refined by one Richardson step against the doubled spacing when possible.
fn simpson_richardson(values: &[Complex64], h: f64) -> Complex64 {
    let simpson = |stride: usize| {
        let n = (values.len() - 1) / stride;
        let mut sum = values[0] + values[n * stride];
        for i in 1..n {
            sum += values[i * stride] * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        sum * (h * stride as f64 / 3.0)
    };
    let intervals = values.len() - 1;
    let fine = simpson(1);
    if intervals.is_multiple_of(4) && intervals >= 8 {
        let coarse = simpson(2);
        fine + (fine - coarse) / 15.0
    } else {
        fine
    }
}

/// Quadrature moments (I₁, I₂) for several states and durations sharing one
/// channel. Every duration must lie on the quadrature grid of the longest one.
pub fn oracle_moments(
    channel: NoiseChannel,
    couplings: &Couplings,
    states: &[SuperposedCoherentState],
    durations: &[f64],
    settings: OracleSettings,
) -> Result<Vec<Vec<(Complex64, Complex64)>>> {
    oracle_moments_joint(&[channel], couplings, states, durations, settings)
}

/// [`oracle_moments`] with several channels acting at once.
pub fn oracle_moments_joint(
    channels: &[NoiseChannel],
    couplings: &Couplings,
    states: &[SuperposedCoherentState],
    durations: &[f64],
    settings: OracleSettings,
) -> Result<Vec<Vec<(Complex64, Complex64)>>> {
    if channels.is_empty() {
        return Err(Error::Config("at least one channel is required".into()));
    }
    for channel in channels {
        channel.validate()?;
    }
    couplings.validate()?;
    let omega = couplings.trap_frequency;
    let longest = durations.iter().copied().fold(0.0, f64::max);
    if omega * longest > ORACLE_MAX_PHASE {
        return Err(Error::Regime(format!(
            "ω_z·T = {:.3e} exceeds the oracle limit {ORACLE_MAX_PHASE:e}; use the integral engine for lab-scale parameters",
            omega * longest
        )));
    }
    let space = FockSpace::new(settings.dim)?;
    if longest == 0.0 {
        return Ok(vec![vec![(ZERO, ZERO); durations.len()]; states.len()]);
    }
    let intervals = {
        let raw = (settings.nodes_per_period * omega * longest).ceil() as usize;
        raw.div_ceil(4).max(2) * 4
    };
    let h = longest / intervals as f64;
    let mut grid_index = Vec::with_capacity(durations.len());
    for &t in durations {
        let idx = (t / h).round() as usize;
        if (idx as f64 * h - t).abs() > 1e-9 * longest || !idx.is_multiple_of(2) {
            return Err(Error::Regime(format!(
                "duration {t} is not on the even quadrature grid of spacing {h}"
            )));
        }
        grid_index.push(idx);
    }
    let substeps = settings.substeps.max(1);
    check_step_joint(channels, omega, h / substeps as f64)?;

    let vk = VkOperator::new(couplings);
    let v = space.poly(&vk.potential);

    // Q(u) = ∫₀^u V[s] ds on the grid, integrated together with V[s].
    let mut cumulative = Vec::with_capacity(intervals + 1);
    {
        let n = settings.dim;
        let mut stacked = CMatrix::zeros(n, 2 * n);
        stacked.columns_mut(0, n).copy_from(&v);
        cumulative.push(CMatrix::zeros(n, n));
        let gen = |y: &CMatrix| {
            let op = y.columns(0, n).into_owned();
            let mut out = CMatrix::zeros(n, 2 * n);
            out.columns_mut(0, n)
                .copy_from(&joint_adjoint_generator(&op, channels, omega));
            out.columns_mut(n, n).copy_from(&op);
            out
        };
        for _ in 0..intervals {
            stacked = rk4(&stacked, h, substeps, &gen);
            cumulative.push(stacked.columns(n, n).into_owned());
        }
    }

    let mut results = Vec::with_capacity(states.len());
    for state in states {
        let mut rho = space.density_matrix(state)?;
        let mut samples: Vec<Vec<Complex64>> = grid_index
            .iter()
            .map(|&g| Vec::with_capacity(g + 1))
            .collect();
        let i1: Vec<Complex64> = grid_index
            .iter()
            .map(|&g| trace_product(&cumulative[g], &rho))
            .collect();
        for step in 0..=intervals {
            let m = &v * &rho;
            for (k, &g) in grid_index.iter().enumerate() {
                if step <= g {
                    samples[k].push(trace_product(&cumulative[g - step], &m));
                }
            }
            if step < intervals {
                rho = rk4(&rho, h, substeps, &|x: &CMatrix| {
                    joint_schrodinger_generator(x, channels, omega)
                });
            }
        }
        let row = grid_index
            .iter()
            .enumerate()
            .map(|(k, &g)| {
                let i2 = if g == 0 {
                    ZERO
                } else {
                    simpson_richardson(&samples[k], h) * 2.0
                };
                (i1[k], i2)
            })
            .collect();
        results.push(row);
    }
    Ok(results)
}

/// Quadrature moments (I₁, I₂) for one state and duration.
pub fn oracle_i1_i2(
    channel: NoiseChannel,
    couplings: &Couplings,
    state: &SuperposedCoherentState,
    duration: f64,
    settings: OracleSettings,
) -> Result<(Complex64, Complex64)> {
    Ok(oracle_moments(
        channel,
        couplings,
        std::slice::from_ref(state),
        &[duration],
        settings,
    )?[0][0])
}

/// I₂ written with Schrödinger propagation of the inner factor:
/// `2∫₀ᵀ dt₂ ∫₀^{t₂} dt₁ Tr(V e^{ℒ(t₂−t₁)}(V ρ[t₁]))`. Quadratic in the grid size;
/// intended for short durations.
pub fn oracle_i2_superoperator(
    channel: NoiseChannel,
    couplings: &Couplings,
    state: &SuperposedCoherentState,
    duration: f64,
    intervals: usize,
    dim: usize,
) -> Result<Complex64> {
    let omega = couplings.trap_frequency;
    let intervals = intervals.div_ceil(2).max(1) * 2;
    let h = duration / intervals as f64;
    check_step(channel, omega, h)?;
    let space = FockSpace::new(dim)?;
    let v = space.poly(&VkOperator::new(couplings).potential);
    let gen = |x: &CMatrix| schrodinger_generator(x, channel, omega);
    let mut rho = space.density_matrix(state)?;
    let mut outer = Vec::with_capacity(intervals + 1);
    for step in 0..=intervals {
        // inner(t₁) = ∫₀^{T−t₁} Tr(V e^{ℒs}(V ρ[t₁])) ds
        let remaining = intervals - step;
        let mut m = &v * &rho;
        let mut values = Vec::with_capacity(remaining + 1);
        for s in 0..=remaining {
            values.push(trace_product(&v, &m));
            if s < remaining {
                m = rk4_step(&m, h, &gen);
            }
        }
        outer.push(if remaining == 0 {
            ZERO
        } else {
            trapezoid_simpson(&values, h)
        });
        if step < intervals {
            rho = rk4_step(&rho, h, &gen);
        }
    }
    Ok(simpson_richardson(&outer, h) * 2.0)
}

/// Simpson when the interval count is even, otherwise Simpson plus a final
/// three-eighths panel.
fn trapezoid_simpson(values: &[Complex64], h: f64) -> Complex64 {
    let intervals = values.len() - 1;
    if intervals == 1 {
        return (values[0] + values[1]) * (0.5 * h);
    }
    if intervals.is_multiple_of(2) {
        return simpson_plain(values, h);
    }
    let head = simpson_plain(&values[..intervals - 2], h);
    let tail = &values[intervals - 3..];
    head + (tail[0] + tail[1] * 3.0 + tail[2] * 3.0 + tail[3]) * (3.0 * h / 8.0)
}

fn simpson_plain(values: &[Complex64], h: f64) -> Complex64 {
    let n = values.len() - 1;
    if n == 0 {
        return ZERO;
    }
    let mut sum = values[0] + values[n];
    for i in 1..n {
        sum += values[i] * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * (h / 3.0)
}

/// The clock's internal Hamiltonian ½ω₀σ_z in the basis (|g⟩, |e⟩).
pub fn clock_hamiltonian(clock_frequency: f64) -> Matrix2<Complex64> {
    Matrix2::new(
        Complex64::new(-0.5 * clock_frequency, 0.0),
        ZERO,
        ZERO,
        Complex64::new(0.5 * clock_frequency, 0.0),
    )
}

/// Internal clock state to second order in the motional coupling.
///
/// `ρ = ρ⁽⁰⁾ + (−iHρ⁽⁰⁾I₁ + h.c.) + (½(Hρ⁽⁰⁾H − H²ρ⁽⁰⁾)I₂ − iH²ρ⁽⁰⁾I₂′ + h.c.)`, with
/// `ρ⁽⁰⁾` the free evolution of `initial` for time `t` and `H = ½ω₀σ_z`.
pub fn perturbative_clock_state(
    i1: Complex64,
    i2: Complex64,
    i2_prime: Complex64,
    initial: &Matrix2<Complex64>,
    clock_frequency: f64,
    time: f64,
) -> Matrix2<Complex64> {
    let h = clock_hamiltonian(clock_frequency);
    let half_phase = 0.5 * clock_frequency * time;
    let u = Matrix2::new(
        Complex64::from_polar(1.0, half_phase),
        ZERO,
        ZERO,
        Complex64::from_polar(1.0, -half_phase),
    );
    let rho0 = u * initial * u.adjoint();
    let h2 = h * h;
    let first = h * rho0 * (-I * i1);
    let first = first + first.adjoint();
    let second = (h * rho0 * h - h2 * rho0) * (0.5 * i2) + h2 * rho0 * (-I * i2_prime);
    let second = second + second.adjoint();
    rho0 + first + second
}

/// Excited-state probability after moving to the frame of a laser at angular
/// frequency `laser_frequency` and applying the closing π/2 pulse.
pub fn ramsey_excited_probability(
    rho: &Matrix2<Complex64>,
    laser_frequency: f64,
    time: f64,
) -> f64 {
    let half = 0.5 * laser_frequency * time;
    let frame = Matrix2::new(
        Complex64::from_polar(1.0, -half),
        ZERO,
        ZERO,
        Complex64::from_polar(1.0, half),
    );
    let rotated = frame * rho * frame.adjoint();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let pulse = Matrix2::new(
        Complex64::new(s, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(s, 0.0),
    );
    (pulse * rotated * pulse.adjoint())[(1, 1)].re
}

/// |+⟩⟨+| with |+⟩ = (|g⟩ + |e⟩)/√2, the state after the opening π/2 pulse.
pub fn plus_state() -> Matrix2<Complex64> {
    Matrix2::from_element(Complex64::new(0.5, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::multiply_normal_order;

    #[test]
    fn joint_generator_adds_dissipators() {
        let space = FockSpace::new(12).unwrap();
        let x = space.poly(&NormalOrderedPoly::from_terms([
            (2, 1, Complex64::new(0.3, -0.2)),
            (1, 1, Complex64::new(1.0, 0.0)),
        ]));
        let (amp, dif) = (
            NoiseChannel::AmplitudeDamping(0.3),
            NoiseChannel::Diffusion(0.1),
        );
        let free = adjoint_generator(&x, NoiseChannel::Free, 1.7);
        let expected = adjoint_generator(&x, amp, 1.7) + adjoint_generator(&x, dif, 1.7) - &free;
        assert!(max_abs(&(joint_adjoint_generator(&x, &[amp, dif], 1.7) - expected)) < 1e-14);
        assert_eq!(
            joint_adjoint_generator(&x, &[amp], 1.7),
            adjoint_generator(&x, amp, 1.7)
        );
        assert!(
            max_abs(
                &(joint_adjoint_generator(&x, &[NoiseChannel::Free, amp], 1.7)
                    - adjoint_generator(&x, amp, 1.7))
            ) < 1e-14
        );
        let rho = space
            .density_matrix(&SuperposedCoherentState::coherent(Complex64::new(0.4, 0.1)))
            .unwrap();
        let trace = joint_schrodinger_generator(&rho, &[amp, dif], 1.7).trace();
        assert!(trace.norm() < 1e-6, "{trace}");
    }

    #[test]
    fn ladder_helpers_match_dense_products() {
        let space = FockSpace::new(7).unwrap();
        let a = space.annihilation();
        let ad = space.creation();
        let x = CMatrix::from_fn(7, 7, |i, j| {
            Complex64::new(i as f64 + 0.3 * j as f64, j as f64 - 0.1 * i as f64)
        });
        assert!(max_abs(&(a_left(&x) - &a * &x)) < 1e-13);
        assert!(max_abs(&(a_right(&x) - &x * &a)) < 1e-13);
        assert!(max_abs(&(adag_left(&x) - &ad * &x)) < 1e-13);
        assert!(max_abs(&(adag_right(&x) - &x * &ad)) < 1e-13);
        let aad = &a * &ad;
        for i in 0..7 {
            assert!((aad[(i, i)].re - aadag_diag(7, i)).abs() < 1e-13);
        }
    }

    #[test]
    fn number_operator_squared_read_off_dense_product() {
        let space = FockSpace::new(12).unwrap();
        let n = space.number();
        let prod = &n * &n;
        let poly =
            multiply_normal_order(&NormalOrderedPoly::number(), &NormalOrderedPoly::number());
        let block = space.poly(&poly);
        assert!(max_abs(&(prod - block)) < 1e-12);
    }

    #[test]
    fn coherent_vector_examples() {
        let space = FockSpace::new(40).unwrap();
        let vac = space.coherent_vector(ZERO).unwrap();
        assert!((vac[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let a = Complex64::new(1.1, -0.9);
        let v = space.coherent_vector(a).unwrap();
        let n = (v.adjoint() * space.number() * &v)[(0, 0)];
        assert!((n.re - a.norm_sqr()).abs() < 1e-10);
        let p = space.coherent_vector(Complex64::new(0.395, 0.0)).unwrap();
        let m = space.coherent_vector(Complex64::new(-0.395, 0.0)).unwrap();
        let overlap = (m.adjoint() * p)[(0, 0)];
        assert!((overlap.re - (-2.0 * 0.395f64.powi(2)).exp()).abs() < 1e-12);
        assert!(matches!(
            space.coherent_vector(Complex64::new(3.3, 0.0)),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn operator_examples() {
        let space = FockSpace::new(20).unwrap();
        let settings = RkSettings {
            steps: 400,
            tolerance: 1e-6,
        };
        let a = space.annihilation();
        let rev = adjoint_evolve_operator(
            &a,
            NoiseChannel::Free,
            1.0,
            2.0 * std::f64::consts::PI,
            settings,
        )
        .unwrap();
        assert!(max_abs(&(rev.matrix - &a)) < 1e-9);

        let n = space.number();
        let amp =
            adjoint_evolve_operator(&n, NoiseChannel::AmplitudeDamping(0.1), 1.0, 10.0, settings)
                .unwrap();
        assert!(max_abs(&(amp.matrix - &n * Complex64::new((-1.0f64).exp(), 0.0))) < 1e-8);

        // diffusion pumps the truncation edge inward, so use a wider space
        let space = FockSpace::new(60).unwrap();
        let n = space.number();
        let n2 = space.monomial(2, 2);
        let g = 0.05;
        let t = 10.0;
        let dif =
            adjoint_evolve_operator(&n2, NoiseChannel::Diffusion(g), 1.0, t, settings).unwrap();
        let expected = &n2
            + &n * Complex64::new(4.0 * g * t, 0.0)
            + CMatrix::identity(60, 60) * Complex64::new(2.0 * g * g * t * t, 0.0);
        // compare away from the truncation edge
        let block = (dif.matrix - expected)
            .view((0, 0), (12, 12))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(block < 1e-7, "{block}");
    }

    #[test]
    fn step_limit_is_enforced() {
        let space = FockSpace::new(5).unwrap();
        let settings = RkSettings {
            steps: 10,
            tolerance: 1.0,
        };
        let err = adjoint_evolve_operator(&space.number(), NoiseChannel::Free, 1.0, 10.0, settings)
            .unwrap_err();
        assert!(matches!(err, Error::Regime(_)));
    }

    #[test]
    fn unperturbed_clock_state_is_free_evolution() {
        let rho = perturbative_clock_state(ZERO, ZERO, ZERO, &plus_state(), 3.0, 0.7);
        assert!((rho[(0, 1)] - Complex64::from_polar(0.5, 3.0 * 0.7)).norm() < 1e-15);
        let p = ramsey_excited_probability(&rho, 2.5, 0.7);
        assert!((p - 0.5 * (1.0 + (0.5f64 * 0.7).cos())).abs() < 1e-15);
    }
}
