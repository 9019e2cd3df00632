//! Exact term-by-term evaluation of the time-dilation moments.
//!
//! The first moment is `I₁ = ∫₀ᵀ ⟨V[t]⟩ dt` and the second is
//! `I₂ = 2∫₀ᵀ dt₂ ∫₀^{t₂} dt₁ ⟨(V[t₂ − t₁] V)[t₁]⟩`, where `V` is the perturbation
//! `V_k/(mc²) = C_g(a + a†) − C_r + C_k(a² + a†² − 2a†a − 1)` and `[t]` denotes
//! Heisenberg evolution under the chosen channel.
//!
//! Every evolved term has the form `c · t^k e^{λt} a†^m a^n`, so each expectation is
//! a finite sum of exponential polynomials and both integrals are evaluated in
//! closed form. In the second moment the variables are `s = t₂ − t₁` and `t₁`;
//! the region is the simplex `s, t₁ ≥ 0, s + t₁ ≤ T`.
//!
//! A term is oscillating when its exponent has a non-zero frequency in either
//! variable. Dropping those terms gives the secular results of
//! [`closed_form`](crate::closed_form).

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    evolve, factorial, multiply_unpruned, CoherentBranches, NoiseChannel, NormalOrderedPoly, Rate,
};
use crate::error::{Error, Result};
use crate::units::{Couplings, SuperposedCoherentState};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// |λT| below which exponential integrals are summed as power series.
const SERIES_RADIUS: f64 = 1.0;

/// The perturbation operators in ladder form.
#[derive(Debug, Clone, PartialEq)]
pub struct VkOperator {
    /// V_k/(mc²), dimensionless.
    pub potential: NormalOrderedPoly,
    /// ħ·W_k/(m²c⁴) = −(ħ/(mc²))·C_k(a² + a†² − 2a†a − 1), in units of time.
    ///
    /// `W_k = p²/(2m)` multiplies the squared clock Hamiltonian; with clock
    /// energies written as angular frequencies its integral carries units of s².
    /// ħ/(mc²) = 4C_k/ω_z.
    pub kinetic_correction: NormalOrderedPoly,
}

impl VkOperator {
    /// Builds both polynomials from the couplings.
    pub fn new(couplings: &Couplings) -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        let (cg, cr, ck) = (couplings.gravity, couplings.sag, couplings.kinetic);
        let kinetic_shape = |scale: f64| {
            NormalOrderedPoly::from_terms([
                (0, 2, c(scale)),
                (2, 0, c(scale)),
                (1, 1, c(-2.0 * scale)),
                (0, 0, c(-scale)),
            ])
        };
        let mut potential = kinetic_shape(ck);
        potential.add_term(0, 1, c(cg));
        potential.add_term(1, 0, c(cg));
        potential.add_term(0, 0, c(-cr));
        let time_scale = 4.0 * ck / couplings.trap_frequency;
        Self {
            potential,
            kinetic_correction: kinetic_shape(-time_scale * ck),
        }
    }
}

/// Whether oscillating terms are integrated or dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Oscillating {
    Include,
    Exclude,
}

/// A moment split into secular and oscillating contributions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Split {
    pub non_oscillating: Complex64,
    pub oscillating: Complex64,
}

impl Split {
    /// Sum of both parts.
    pub fn total(&self) -> Complex64 {
        self.non_oscillating + self.oscillating
    }

    fn add(&mut self, oscillating: bool, value: Complex64) {
        if oscillating {
            self.oscillating += value;
        } else {
            self.non_oscillating += value;
        }
    }
}

/// I₁ and I₂ for one state and channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    /// First moment, s.
    pub i1: Split,
    /// Second moment, s².
    pub i2: Split,
}

impl IntegralResult {
    /// Re I₂ − I₁², the variance of the accumulated time.
    pub fn variance(&self) -> f64 {
        self.i2.total().re - self.i1.total().re.powi(2)
    }
}

/// ∫₀ᵀ t^k e^{λt} dt.
///
/// Uses `T^{k+1}/(k+1)` for λ = 0, a power series when |λT| is small (where the
/// antiderivative would cancel catastrophically) and the closed-form
/// antiderivative `e^{λT} Σ_j (−1)^{k−j} k!/(j! λ^{k−j+1}) T^j − (−1)^k k!/λ^{k+1}`
/// otherwise.
pub fn exact_exp_poly_integral(power: u32, exponent: Complex64, duration: f64) -> Complex64 {
    if duration == 0.0 {
        return ZERO;
    }
    let k = power;
    let z = exponent * duration;
    if exponent == ZERO {
        return Complex64::new(duration.powi(k as i32 + 1) / f64::from(k + 1), 0.0);
    }
    let radius = SERIES_RADIUS.max(0.5 * f64::from(k + 1));
    if z.norm() <= radius {
        // T^{k+1} Σ_j z^j / (j! (k + j + 1))
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(1.0 / f64::from(k + 1), 0.0);
        for j in 1..200u32 {
            term *= z / f64::from(j);
            let add = term / f64::from(k + j + 1);
            sum += add;
            if add.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        return sum * duration.powi(k as i32 + 1);
    }
    let kf = factorial(k);
    let mut poly = ZERO;
    for j in 0..=k {
        let sign = if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        poly += sign * kf / factorial(j) * duration.powi(j as i32) / exponent.powu(k - j + 1);
    }
    let constant = if k.is_multiple_of(2) { 1.0 } else { -1.0 } * kf / exponent.powu(k + 1);
    (exponent * duration).exp() * poly - constant
}

/// ∫∫_{s,t ≥ 0, s+t ≤ T} s^a e^{λ_s s} t^b e^{λ_t t} ds dt.
pub fn simplex_integral(
    power_s: u32,
    exponent_s: Complex64,
    power_t: u32,
    exponent_t: Complex64,
    duration: f64,
) -> Complex64 {
    if duration == 0.0 {
        return ZERO;
    }
    let zs = (exponent_s * duration).norm();
    let zt = (exponent_t * duration).norm();
    if zs <= SERIES_RADIUS && zt <= SERIES_RADIUS {
        return simplex_series(power_s, exponent_s, power_t, exponent_t, duration);
    }
    if zs >= zt {
        simplex_inner_exact(power_s, exponent_s, power_t, exponent_t, duration)
    } else {
        simplex_inner_exact(power_t, exponent_t, power_s, exponent_s, duration)
    }
}

/// Double power series using ∫_simplex s^p t^q = p! q! T^{p+q+2} / (p+q+2)!.
fn simplex_series(a: u32, ls: Complex64, b: u32, lt: Complex64, duration: f64) -> Complex64 {
    let zs = ls * duration;
    let zt = lt * duration;
    let mut total = ZERO;
    // coefficient_i = z_s^i / i!, weight (a+i)!(b+j)!/(a+b+i+j+2)!
    let mut coeff_s = Complex64::new(1.0, 0.0);
    for i in 0..60u32 {
        if i > 0 {
            coeff_s *= zs / f64::from(i);
        }
        let mut coeff_t = Complex64::new(1.0, 0.0);
        let mut row = ZERO;
        for j in 0..60u32 {
            if j > 0 {
                coeff_t *= zt / f64::from(j);
            }
            let weight = dirichlet_weight(a + i, b + j);
            let add = coeff_s * coeff_t * weight;
            row += add;
            if j > 2 && add.norm() < 1e-19 * row.norm().max(1e-300) {
                break;
            }
            if zt == ZERO {
                break;
            }
        }
        total += row;
        if (i > 2 && row.norm() < 1e-19 * total.norm().max(1e-300)) || zs == ZERO {
            break;
        }
    }
    total * duration.powi((a + b + 2) as i32)
}

/// p! q! / (p + q + 2)!, computed as a running product to avoid overflow.
fn dirichlet_weight(p: u32, q: u32) -> f64 {
    // q! / ((p+1)(p+2)…(p+q+2))
    let (small, large) = if p <= q { (p, q) } else { (q, p) };
    let mut w = 1.0;
    for i in 1..=small {
        w *= f64::from(i) / f64::from(large + i);
    }
    w / (f64::from(large + small + 1) * f64::from(large + small + 2))
}

/// Integrates the `s` variable exactly, then the outer variable term by term.
fn simplex_inner_exact(a: u32, ls: Complex64, b: u32, lt: Complex64, duration: f64) -> Complex64 {
    // ∫₀^X s^a e^{λs} ds = e^{λX} Σ_j p_j X^j − p_const with X = T − t.
    let af = factorial(a);
    let mut outer = ZERO;
    for j in 0..=a {
        let sign = if (a - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        let pj = sign * af / factorial(j) / ls.powu(a - j + 1);
        // ∫₀ᵀ t^b e^{λ_t t} e^{λ_s (T−t)} (T−t)^j dt
        let mut inner = ZERO;
        for r in 0..=j {
            let sign_r = if r % 2 == 0 { 1.0 } else { -1.0 };
            inner += sign_r
                * crate::algebra::binomial(j, r)
                * duration.powi((j - r) as i32)
                * exact_exp_poly_integral(b + r, lt - ls, duration);
        }
        outer += pj * inner;
    }
    let constant = if a.is_multiple_of(2) { 1.0 } else { -1.0 } * af / ls.powu(a + 1);
    (ls * duration).exp() * outer - constant * exact_exp_poly_integral(b, lt, duration)
}

fn check(
    channel: NoiseChannel,
    couplings: &Couplings,
    state: &SuperposedCoherentState,
    duration: f64,
) -> Result<()> {
    channel.validate()?;
    couplings.validate()?;
    state.validate()?;
    if duration >= 0.0 && duration.is_finite() {
        Ok(())
    } else {
        Err(Error::Negative {
            field: "interrogation_time",
            value: duration,
        })
    }
}

fn single_integral(
    poly: &NormalOrderedPoly,
    channel: NoiseChannel,
    couplings: &Couplings,
    state: &SuperposedCoherentState,
    duration: f64,
    oscillating: Oscillating,
) -> Split {
    let branches = CoherentBranches::of(state);
    let omega = couplings.trap_frequency;
    let mut out = Split::default();
    for ((m, n, k), term) in evolve(poly, channel, omega).terms() {
        let osc = term.rate.is_oscillating();
        if osc && oscillating == Oscillating::Exclude {
            continue;
        }
        let value = term.prefactor
            * branches.monomial(m, n)
            * exact_exp_poly_integral(k, term.rate.exponent(omega), duration);
        out.add(osc, value);
    }
    out
}

/// I₁ = ∫₀ᵀ ⟨V[t]⟩ dt, in seconds.
pub fn compute_i1(
    channel: NoiseChannel,
    couplings: &Couplings,
    state: &SuperposedCoherentState,
    duration: f64,
    oscillating: Oscillating,
) -> Result<Split> {
    check(channel, couplings, state, duration)?;
    let vk = VkOperator::new(couplings);
    Ok(single_integral(
        &vk.potential,
        channel,
        couplings,
        state,
        duration,
        oscillating,
    ))
}

/// I₂′ = ∫₀ᵀ ⟨ħW[t]/(m²c⁴)⟩ dt, in seconds squared.
pub fn compute_i2_prime(
    channel: NoiseChannel,
    couplings: &Couplings,
    state: &SuperposedCoherentState,
    duration: f64,
    oscillating: Oscillating,
) -> Result<Split> {
    check(channel, couplings, state, duration)?;
    let vk = VkOperator::new(couplings);
    Ok(single_integral(
        &vk.kinetic_correction,
        channel,
        couplings,
        state,
        duration,
        oscillating,
    ))
}

/// One fully evolved term of the second-moment integrand.
#[derive(Debug, Clone, Copy)]
struct PairTerm {
    power_s: u32,
    rate_s: Rate,
    power_t: u32,
    rate_t: Rate,
}

/// I₂ = 2∫₀ᵀ dt₂ ∫₀^{t₂} dt₁ ⟨(V[t₂ − t₁] V)[t₁]⟩, in seconds squared.
pub fn compute_i2(
    channel: NoiseChannel,
    couplings: &Couplings,
    state: &SuperposedCoherentState,
    duration: f64,
    oscillating: Oscillating,
) -> Result<Split> {
    check(channel, couplings, state, duration)?;
    let omega = couplings.trap_frequency;
    let vk = VkOperator::new(couplings);
    let branches = CoherentBranches::of(state);
    let mut moments: HashMap<(u32, u32), Complex64> = HashMap::new();
    let mut expect = |m: u32, n: u32| {
        *moments
            .entry((m, n))
            .or_insert_with(|| branches.monomial(m, n))
    };

    let mut out = Split::default();
    for ((m, n, ks), outer) in evolve(&vk.potential, channel, omega).terms() {
        let product = multiply_unpruned(
            &NormalOrderedPoly::monomial(m, n, outer.prefactor),
            &vk.potential,
        );
        for ((p, q, kt), inner) in evolve(&product, channel, omega).terms() {
            let pair = PairTerm {
                power_s: ks,
                rate_s: outer.rate,
                power_t: kt,
                rate_t: inner.rate,
            };
            let osc = pair.rate_s.is_oscillating() || pair.rate_t.is_oscillating();
            if osc && oscillating == Oscillating::Exclude {
                continue;
            }
            let integral = simplex_integral(
                pair.power_s,
                pair.rate_s.exponent(omega),
                pair.power_t,
                pair.rate_t.exponent(omega),
                duration,
            );
            out.add(osc, 2.0 * inner.prefactor * expect(p, q) * integral);
        }
    }
    Ok(out)
}

/// Both moments at once.
pub fn compute_moments(
    channel: NoiseChannel,
    couplings: &Couplings,
    state: &SuperposedCoherentState,
    duration: f64,
    oscillating: Oscillating,
) -> Result<IntegralResult> {
    Ok(IntegralResult {
        i1: compute_i1(channel, couplings, state, duration, oscillating)?,
        i2: compute_i2(channel, couplings, state, duration, oscillating)?,
    })
}
