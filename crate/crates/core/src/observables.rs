//! Energies, power balance and excitation probabilities.
//!
//! Every function takes an evolved [`GaussianState`] together with the [`CoefficientSpec`]
//! it was evolved under. The driven-oscillator and trap functions require
//! the matching [`SystemKind`] and the matched width `λ₀ = mω/ħ`.

use alloc::vec::Vec;

use crate::coefficients::{CoefficientSpec, SystemKind};
use crate::gaussian::GaussianState;
use crate::math::{self, LN_2};
use crate::{Error, Result};

/// Relative tolerance on `λ₀ = mω/ħ` for the matched-width checks.
const WIDTH_MATCH_RTOL: f64 = 1e-12;

/// Power-balance terms of the driven oscillator at one time.
///
/// `du_dt = t1 + t2` identically, and so does `(t1 + chi) + (t2 − chi)`.
/// The four `rate_*` fields are competing definitions of work and heat
/// rates, reported side by side:
///
/// | field              | value                        |
/// |--------------------|------------------------------|
/// | `rate_work_source` | `−e ȧ`                       |
/// | `rate_work_tr`     | `−a ė`                       |
/// | `rate_heat_def`    | `mω²aȧ + mȧä + 2ȧe + aė`     |
/// | `rate_heat_tr`     | `mω²aȧ + mȧä + ȧe`           |
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermoRates {
    pub t: f64,
    pub du_dt: f64,
    /// `Tr(∂ρ/∂t · H)`.
    pub t1: f64,
    /// `Tr(ρ · ∂H/∂t)`.
    pub t2: f64,
    /// `d(a e)/dt`.
    pub chi: f64,
    pub rate_work_source: f64,
    pub rate_work_tr: f64,
    pub rate_heat_def: f64,
    pub rate_heat_tr: f64,
}

fn driven_omega(spec: &CoefficientSpec) -> Result<f64> {
    match spec.kind() {
        SystemKind::Harmonic { omega } | SystemKind::DrivenHarmonic { omega } => Ok(omega),
        _ => Err(Error::FamilyMismatch {
            expected: "driven-harmonic",
        }),
    }
}

fn require_matched(state: &GaussianState, spec: &CoefficientSpec, omega: f64) -> Result<()> {
    let expected = spec.mass() * omega / spec.hbar();
    if (state.lambda0 - expected).abs() <= WIDTH_MATCH_RTOL * expected {
        Ok(())
    } else {
        Err(Error::WidthMismatch {
            expected,
            got: state.lambda0,
        })
    }
}

/// `⟨H(t)⟩ = ⟨p²⟩/2m + c⟨x²⟩/2 + e⟨x⟩` for any spec and any width.
pub fn mean_energy(state: &GaussianState, spec: &CoefficientSpec) -> Result<f64> {
    let m = spec.mass();
    let c = spec.c_at(state.t)?;
    let e = spec.e_at(state.t)?;
    let p2 = state.momentum_variance() + state.momentum * state.momentum;
    let x2 = state.position_variance() + state.center * state.center;
    Ok(0.5 * p2 / m + 0.5 * c * x2 + e * state.center)
}

struct Classical {
    omega: f64,
    a: f64,
    a_dot: f64,
    e: f64,
}

fn classical(state: &GaussianState, spec: &CoefficientSpec) -> Result<Classical> {
    let omega = driven_omega(spec)?;
    require_matched(state, spec, omega)?;
    Ok(Classical {
        omega,
        a: state.center,
        a_dot: state.momentum / spec.mass(),
        e: spec.e_at(state.t)?,
    })
}

/// `U = ħω/2 + ½mω²a² + ½mȧ² + a e`.
pub fn driven_energy(state: &GaussianState, spec: &CoefficientSpec) -> Result<f64> {
    let k = classical(state, spec)?;
    let m = spec.mass();
    Ok(0.5 * spec.hbar() * k.omega
        + 0.5 * m * k.omega * k.omega * k.a * k.a
        + 0.5 * m * k.a_dot * k.a_dot
        + k.a * k.e)
}

/// Centre-of-mass energy `E_c = ½mω²a² + ½mȧ²`.
pub fn com_energy(state: &GaussianState, spec: &CoefficientSpec) -> Result<f64> {
    let k = classical(state, spec)?;
    let m = spec.mass();
    Ok(0.5 * m * (k.omega * k.omega * k.a * k.a + k.a_dot * k.a_dot))
}

pub fn thermo_rates(state: &GaussianState, spec: &CoefficientSpec) -> Result<ThermoRates> {
    let Classical { omega, a, a_dot, e } = classical(state, spec)?;
    let m = spec.mass();
    let e_dot = spec.e_dot_at(state.t)?;
    let a_ddot = -omega * omega * a - e / m;
    let mech = m * omega * omega * a * a_dot + m * a_dot * a_ddot;
    let t1 = mech + a_dot * e;
    let t2 = a * e_dot;
    Ok(ThermoRates {
        t: state.t,
        du_dt: t1 + t2,
        t1,
        t2,
        chi: a_dot * e + a * e_dot,
        rate_work_source: -e * a_dot,
        rate_work_tr: -a * e_dot,
        rate_heat_def: mech + 2.0 * a_dot * e + a * e_dot,
        rate_heat_tr: t1,
    })
}

/// `Pₙ = μⁿ e^{−μ}/n!` with `μ = Ec/ħω`.
pub fn poisson_excitation(ec: f64, hbar_omega: f64, n: u32) -> f64 {
    let mu = ec / hbar_omega;
    if mu <= 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let n = f64::from(n);
    math::exp(n * math::ln(mu) - mu - math::lgamma(n + 1.0))
}

/// Poisson terms from `n = 0` until the remaining tail is below `tail`.
pub fn poisson_distribution(ec: f64, hbar_omega: f64, tail: f64) -> Vec<f64> {
    collect_until(tail, |n| poisson_excitation(ec, hbar_omega, n), 1)
}

fn collect_until(tail: f64, term: impl Fn(u32) -> f64, stride: u32) -> Vec<f64> {
    let mut out = Vec::new();
    let mut total = 0.0;
    let mut n = 0u32;
    loop {
        let p = term(n);
        total += p;
        out.push(p);
        if 1.0 - total < tail || n > 1_000_000 {
            break;
        }
        n += stride;
    }
    out
}

struct TrapShape {
    zeta: f64,
    sigma: f64,
    nu: f64,
}

fn trap_shape(state: &GaussianState, spec: &CoefficientSpec) -> Result<(TrapShape, f64, f64, f64)> {
    let SystemKind::PaulTrap { omega, a, q, r } = spec.kind() else {
        return Err(Error::FamilyMismatch { expected: "paul-trap" });
    };
    require_matched(state, spec, omega)?;
    let shape = TrapShape {
        zeta: state.zeta,
        sigma: state.chirp / (2.0 * state.lambda0),
        nu: 0.5 * (1.0 + state.zeta),
    };
    let u = omega * state.t;
    Ok((shape, a - 2.0 * q * math::cos(2.0 * r * u), omega, u))
}

/// `2U/ħω` for the trapped particle:
/// `ζ/2 + 2σ²/ζ + (a − 2q cos 2ru)/(2ζ)` with `σ = κ/(2λ₀)`.
pub fn trap_energy_normalized(state: &GaussianState, spec: &CoefficientSpec) -> Result<f64> {
    let (s, drive, _, _) = trap_shape(state, spec)?;
    Ok(0.5 * s.zeta + 2.0 * s.sigma * s.sigma / s.zeta + 0.5 * drive / s.zeta)
}

pub fn trap_energy(state: &GaussianState, spec: &CoefficientSpec) -> Result<f64> {
    let (_, _, omega, _) = trap_shape(state, spec)?;
    Ok(0.5 * spec.hbar() * omega * trap_energy_normalized(state, spec)?)
}

/// Probability of finding the trapped particle in oscillator level `n`.
/// Odd levels are exactly zero.
pub fn trap_excitation(state: &GaussianState, spec: &CoefficientSpec, n: u32) -> Result<f64> {
    let (s, _, _, _) = trap_shape(state, spec)?;
    Ok(even_level_probability(&s, n))
}

fn even_level_probability(s: &TrapShape, n: u32) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    let k = f64::from(n / 2);
    let rho2 = s.nu * s.nu + s.sigma * s.sigma;
    let mut base = 1.0 - (2.0 * s.nu - 1.0) / rho2;
    if base < 0.0 && base > -1e-14 {
        base = 0.0;
    }
    let log_coef = 2.0 * math::lgamma(k + 0.5) + 2.0 * k * LN_2 - math::lgamma(2.0 * k + 1.0);
    let pow = if k == 0.0 { 1.0 } else { math::powf(base, k) };
    math::sqrt(s.zeta) / core::f64::consts::PI * math::exp(log_coef) / math::sqrt(rho2) * pow
}

/// Level probabilities `P(0), P(1), …` until the remaining tail is below
/// `tail` (odd entries are zero).
pub fn trap_distribution(state: &GaussianState, spec: &CoefficientSpec, tail: f64) -> Result<Vec<f64>> {
    let (s, _, _, _) = trap_shape(state, spec)?;
    let evens = collect_until(tail, |n| even_level_probability(&s, n), 2);
    let mut out = Vec::with_capacity(2 * evens.len());
    for p in evens {
        out.push(p);
        out.push(0.0);
    }
    out.pop();
    Ok(out)
}
