//! Closed-form evolution of the Gaussian initial state
//! `ψ₀(x) = (λ₀/π)^{1/4} exp(−λ₀x²/2)`.
//!
//! With `ζ = 1/(α² + λ₀²ħ²β²/m²)` the evolved state is
//!
//! ```text
//! ψ(x,t) = (λ₀ζ/π)^{1/4} exp( −(λ₀ζ/2)(x−a)² + (iκ/2)(x−a)² − iγ̇x/ħ )
//! κ      = (m/ħ) ζ (αα̇ + (λ₀ħ/m)² ββ̇)
//! ```
//!
//! centred at `a = −γ/m` with mean momentum `−γ̇`, up to a global phase.
//! The position variance is `1/(2λ₀ζ)`, so `ζ > 1` marks position
//! squeezing. κ carries no `1/β` and stays finite through caustics.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::coefficients::{CoefficientSample, CoefficientSpec, EvolutionCoefficients};
use crate::math::{self, PI};
use crate::{Error, Result};

/// Evolved Gaussian at one time, in terms of the raw coefficient data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianState {
    pub t: f64,
    /// Initial width parameter λ₀ (1/length²).
    pub lambda0: f64,
    pub zeta: f64,
    /// `a(t) = −γ/m`.
    pub center: f64,
    /// `−γ̇`.
    pub momentum: f64,
    /// Chirp κ (1/length²).
    pub chirp: f64,
    pub alpha: f64,
    pub alpha_dot: f64,
    pub beta: f64,
    pub beta_dot: f64,
    pub gamma: f64,
    pub gamma_dot: f64,
    pub mass: f64,
    pub hbar: f64,
}

impl GaussianState {
    pub fn from_sample(s: &CoefficientSample, mass: f64, hbar: f64, lambda0: f64) -> Self {
        let rate = lambda0 * hbar / mass;
        let zeta = 1.0 / (s.alpha * s.alpha + rate * rate * s.beta * s.beta);
        let chirp = (mass / hbar) * zeta * (s.alpha * s.alpha_dot + rate * rate * s.beta * s.beta_dot);
        GaussianState {
            t: s.t,
            lambda0,
            zeta,
            center: -s.gamma / mass,
            momentum: -s.gamma_dot,
            chirp,
            alpha: s.alpha,
            alpha_dot: s.alpha_dot,
            beta: s.beta,
            beta_dot: s.beta_dot,
            gamma: s.gamma,
            gamma_dot: s.gamma_dot,
            mass,
            hbar,
        }
    }

    /// Evolve to an arbitrary time inside the coefficient span.
    pub fn at(coeffs: &EvolutionCoefficients, spec: &CoefficientSpec, lambda0: f64, t: f64) -> Result<Self> {
        check_width(lambda0)?;
        Ok(Self::from_sample(&coeffs.at(t)?, spec.mass(), spec.hbar(), lambda0))
    }

    /// Density exponent `W = λ₀ζ`: `P(x) ∝ exp(−W (x−a)²)`.
    pub fn width(&self) -> f64 {
        self.lambda0 * self.zeta
    }

    pub fn position_variance(&self) -> f64 {
        0.5 / self.width()
    }

    pub fn momentum_variance(&self) -> f64 {
        let w = self.width();
        0.5 * self.hbar * self.hbar * (w * w + self.chirp * self.chirp) / w
    }

    /// Symmetrised position–momentum covariance.
    pub fn covariance(&self) -> f64 {
        0.5 * self.hbar * self.chirp / self.width()
    }

    /// `ρ(x, x'; t)`.
    pub fn density_matrix_element(&self, x: f64, x1: f64) -> Complex64 {
        let w = self.width();
        let (y, y1) = (x - self.center, x1 - self.center);
        let re = -0.5 * w * (y * y + y1 * y1);
        let im = 0.5 * self.chirp * (y * y - y1 * y1) + self.momentum * (x - x1) / self.hbar;
        Complex64::from_polar(math::sqrt(w / PI) * math::exp(re), im)
    }

    /// `P(x, t) = sqrt(W/π) exp(−W (x−a)²)`.
    pub fn position_density(&self, x: f64) -> f64 {
        let w = self.width();
        let y = x - self.center;
        math::sqrt(w / PI) * math::exp(-w * y * y)
    }

    /// Wigner function normalised so that `∫∫ W dx dp / (2πħ) = 1`.
    pub fn wigner(&self, x: f64, p: f64) -> f64 {
        let w = self.width();
        let y = x - self.center;
        let q = p - self.momentum - self.hbar * self.chirp * y;
        2.0 * math::exp(-w * y * y) * math::exp(-q * q / (self.hbar * self.hbar * w))
    }

    pub fn wavefunction(&self) -> Wavefunction {
        Wavefunction {
            norm: math::sqrt(math::sqrt(self.width() / PI)),
            width: self.width(),
            chirp: self.chirp,
            center: self.center,
            wavenumber: self.momentum / self.hbar,
        }
    }

    /// `Tr ρ²` from the phase-space covariance: `(ħ/2) / sqrt(det Σ)`.
    pub fn purity(&self) -> f64 {
        let c = self.covariance();
        let det = self.position_variance() * self.momentum_variance() - c * c;
        0.5 * self.hbar / math::sqrt(det)
    }
}

/// Normalised pure state whose projector is the evolved density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wavefunction {
    norm: f64,
    width: f64,
    chirp: f64,
    center: f64,
    wavenumber: f64,
}

impl Wavefunction {
    pub fn eval(&self, x: f64) -> Complex64 {
        let y = x - self.center;
        Complex64::from_polar(
            self.norm * math::exp(-0.5 * self.width * y * y),
            0.5 * self.chirp * y * y + self.wavenumber * x,
        )
    }
}

fn check_width(lambda0: f64) -> Result<()> {
    if lambda0 > 0.0 && lambda0.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "lambda0",
            value: lambda0,
            reason: "must be positive",
        })
    }
}

/// One state per grid time of `coeffs`.
pub fn evolve_gaussian(
    coeffs: &EvolutionCoefficients,
    spec: &CoefficientSpec,
    lambda0: f64,
) -> Result<Vec<GaussianState>> {
    check_width(lambda0)?;
    Ok(coeffs
        .samples()
        .iter()
        .map(|s| GaussianState::from_sample(s, spec.mass(), spec.hbar(), lambda0))
        .collect())
}

/// The width `λ₀ = mω/ħ` of the oscillator ground state.
pub fn matched_width(mass: f64, hbar: f64, omega: f64) -> f64 {
    mass * omega / hbar
}
