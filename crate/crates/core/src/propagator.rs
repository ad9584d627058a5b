//! The exact kernel
//!
//! ```text
//! K(x,t; x',0) = sqrt(m / (2π i ħ β)) · exp(i λ/ħ)
//!     · exp( i m/(2ħβ) [ β̇x² + αx'² − 2xx' + (2/m)(γβ̇ − γ̇β)x − (2γ/m)x' ] )
//! ```
//!
//! The square-root branch is fixed at `t → 0⁺` (phase −π/4) and continued
//! through each simple zero of β by a further −π/2 (Maslov index), so the
//! phase of `K(0,t;0,0)` is continuous between caustics.

use num_complex::Complex64;

use crate::coefficients::{compute_coefficients, CoefficientSample, CoefficientSpec, EvolutionCoefficients};
use crate::math::{self, PI};
use crate::quad::{integrate_complex, QuadSettings};
use crate::{Error, Result};

/// Refuse kernels with `|β| ≤ DEFAULT_CAUSTIC_EPS` (time units).
pub const DEFAULT_CAUSTIC_EPS: f64 = 1e-9;

/// `K(x,t;x',0) = A e^{iφ₀} exp(i (a x² + b x'² + c x x' + d x + e x' + λ/ħ))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelForm {
    pub t: f64,
    pub prefactor_modulus: f64,
    pub prefactor_phase: f64,
    pub coeff_xx: f64,
    pub coeff_x1x1: f64,
    pub coeff_cross: f64,
    pub coeff_x: f64,
    pub coeff_x1: f64,
    /// λ(t)/ħ.
    pub phase: f64,
    pub beta: f64,
    pub caustics: u32,
}

impl KernelForm {
    pub fn from_sample(sample: &CoefficientSample, mass: f64, hbar: f64) -> Self {
        let CoefficientSample {
            t,
            alpha,
            beta,
            beta_dot,
            gamma,
            lambda,
            caustics,
            ..
        } = *sample;
        let k = mass / (hbar * beta);
        KernelForm {
            t,
            prefactor_modulus: math::sqrt(mass / (2.0 * PI * hbar * beta.abs())),
            prefactor_phase: -0.25 * PI - 0.5 * PI * f64::from(caustics),
            coeff_xx: 0.5 * k * beta_dot,
            coeff_x1x1: 0.5 * k * alpha,
            coeff_cross: -k,
            coeff_x: sample.drift() / (hbar * beta),
            coeff_x1: -gamma / (hbar * beta),
            phase: lambda / hbar,
            beta,
            caustics,
        }
    }

    /// Total phase of `K(x,t;x',0)` (unwrapped).
    pub fn phase_at(&self, x: f64, x1: f64) -> f64 {
        self.prefactor_phase
            + self.coeff_xx * x * x
            + self.coeff_x1x1 * x1 * x1
            + self.coeff_cross * x * x1
            + self.coeff_x * x
            + self.coeff_x1 * x1
            + self.phase
    }

    pub fn evaluate(&self, x: f64, x1: f64) -> Complex64 {
        Complex64::from_polar(self.prefactor_modulus, self.phase_at(x, x1))
    }
}

/// Kernel at time `t` with the default caustic threshold.
pub fn kernel_at(coeffs: &EvolutionCoefficients, spec: &CoefficientSpec, t: f64) -> Result<KernelForm> {
    kernel_at_with(coeffs, spec, t, DEFAULT_CAUSTIC_EPS)
}

pub fn kernel_at_with(
    coeffs: &EvolutionCoefficients,
    spec: &CoefficientSpec,
    t: f64,
    caustic_eps: f64,
) -> Result<KernelForm> {
    let sample = coeffs.at(t)?;
    if sample.beta.abs() <= caustic_eps {
        return Err(Error::Caustic {
            t,
            zero: coeffs.nearest_beta_zero(t),
        });
    }
    Ok(KernelForm::from_sample(&sample, spec.mass(), spec.hbar()))
}

/// `K(x, t; x', 0)`.
pub fn evaluate_kernel(form: &KernelForm, x: f64, x1: f64) -> Complex64 {
    form.evaluate(x, x1)
}

/// `∫ K(x,t;x',0) f(x') dx'` over `window`, for checking the delta-function
/// limit at small `t`. `f` should be negligible at the window edges.
pub fn short_time_check<F>(
    spec: &CoefficientSpec,
    test_fn: F,
    x: f64,
    t: f64,
    window: (f64, f64),
) -> Result<Complex64>
where
    F: Fn(f64) -> f64,
{
    if !(t > 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            reason: "must be positive",
        });
    }
    let coeffs = compute_coefficients(spec, &[0.0, t])?;
    let form = kernel_at(&coeffs, spec, t)?;
    // Panel count from the largest quadratic phase swing across the window.
    let reach = (window.0 - x).abs().max((window.1 - x).abs());
    let swing = form.coeff_cross.abs() * reach * reach;
    let panels = ((swing / PI) as usize + 16).min(400_000);
    integrate_complex(
        |x1| form.evaluate(x, x1) * test_fn(x1),
        window.0,
        window.1,
        QuadSettings {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_intervals: 2_000_000,
            initial_panels: panels,
        },
    )
}
