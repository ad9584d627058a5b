//! Exact propagators for one-dimensional time-dependent quadratic
//! Hamiltonians `H = p²/2m + c(t)x²/2 + e(t)x`, and closed-form evolution of
//! Gaussian states under them.
//!
//! The pipeline is:
//!
//! 1. describe the system as a [`CoefficientSpec`] (directly, from parsed
//!    [`expr::Expr`] trees, or through a built-in [`potentials::PotentialFamily`]);
//! 2. integrate the classical coefficient functions α, β, γ and the phase λ
//!    with [`coefficients::compute_coefficients`];
//! 3. assemble kernels ([`propagator`]), evolved Gaussian states
//!    ([`gaussian`]) and derived quantities ([`observables`]).
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod coefficients;
pub mod expr;
pub mod gaussian;
pub mod math;
pub mod observables;
pub mod ode;
pub mod potentials;
pub mod propagator;
pub mod quad;

pub use coefficients::{
    compute_coefficients, compute_coefficients_with, CoefficientSample, CoefficientSpec,
    EvolutionCoefficients, SystemKind,
};
pub use expr::{parse_expression, Bindings, Expr};
pub use gaussian::{evolve_gaussian, GaussianState};
pub use num_complex::Complex64;
pub use ode::Tolerances;
pub use potentials::{PotentialFamily, Stability, StabilityVerdict};
pub use propagator::{evaluate_kernel, kernel_at, KernelForm};

use expr::EvalError;
use ode::OdeError;

/// Errors raised by the physics layers (everything above `expr` and `ode`).
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Ode(#[from] OdeError<EvalError>),
    #[error("output grid must start at t = 0 (got {0})")]
    GridStart(f64),
    #[error("t = {t} is outside the computed span [{lo}, {hi}]")]
    OutOfSpan { t: f64, lo: f64, hi: f64 },
    #[error("caustic at t = {t}: beta vanishes near t = {zero}")]
    Caustic { t: f64, zero: f64 },
    #[error("operation requires the {expected} family")]
    FamilyMismatch { expected: &'static str },
    #[error("operation requires the matched width lambda0 = m*omega/hbar = {expected} (got {got})")]
    WidthMismatch { expected: f64, got: f64 },
    #[error("quadrature did not converge (estimated error {estimate:e})")]
    Quadrature { estimate: f64 },
    #[error("empty or invalid range for {0}")]
    EmptyRange(&'static str),
}

impl From<OdeError> for Error {
    fn from(e: OdeError) -> Self {
        Error::Ode(e.widen())
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
