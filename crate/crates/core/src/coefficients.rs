//! Classical coefficient functions of the Heisenberg position operator.
//!
//! For `H = p²/2m + c(t)x²/2 + e(t)x` the position operator evolves as
//! `x(t) = α(t) x + β(t) p/m − γ(t)/m`, where α and β are the homogeneous
//! solutions of `ÿ + (c/m) y = 0` with `α(0)=1, α̇(0)=0` and `β(0)=0, β̇(0)=1`
//! (so β is the retarded Green's function `G(t, 0)`), and
//! `γ(t) = ∫₀ᵗ G(t,t') e(t') dt'` solves `γ̈ + (c/m)γ = e` from rest.
//!
//! The kernel phase obeys `λ̇ = −(1/2m) (D/β)²` with `D = γβ̇ − γ̇β`. That
//! integrand is not integrable across zeros of β, so the phase is carried in
//! the equivalent form
//!
//! ```text
//! λ(t) = D² α / (2 m β) + (1/m) ∫₀ᵗ D e α dt'
//! ```
//!
//! (integration by parts using `d(α/β)/dt = −1/β²` and `Ḋ = −e β`), which
//! agrees with the direct quadrature before the first caustic and continues
//! it analytically beyond.

use alloc::vec::Vec;

use crate::expr::{Bindings, EvalError, Expr};
use crate::ode::{DenseOutput, Integrator, Segment, Tolerances};
use crate::{Error, Result};

/// Which built-in family a spec came from, if any. Observables that only
/// make sense for one family check this tag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SystemKind {
    Custom,
    Free,
    Harmonic { omega: f64 },
    DrivenHarmonic { omega: f64 },
    PaulTrap { omega: f64, a: f64, q: f64, r: f64 },
}

impl SystemKind {
    /// Reference angular frequency, when the family defines one.
    pub fn omega(&self) -> Option<f64> {
        match *self {
            SystemKind::Harmonic { omega }
            | SystemKind::DrivenHarmonic { omega }
            | SystemKind::PaulTrap { omega, .. } => Some(omega),
            SystemKind::Custom | SystemKind::Free => None,
        }
    }
}

/// The physical problem: mass, ħ, and the coefficient expressions `c(t)`,
/// `e(t)` with every parameter already bound.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSpec {
    mass: f64,
    hbar: f64,
    c: Expr,
    e: Expr,
    e_dot: Expr,
    kind: SystemKind,
    omega_ref: Option<f64>,
}

impl CoefficientSpec {
    pub fn new(mass: f64, hbar: f64, c: &Expr, e: &Expr, bindings: &Bindings) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "mass",
                value: mass,
                reason: "must be positive",
            });
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "hbar",
                value: hbar,
                reason: "must be positive",
            });
        }
        let c = c.bind(bindings)?;
        let e = e.bind(bindings)?;
        let e_dot = e.differentiate();
        Ok(CoefficientSpec {
            mass,
            hbar,
            c,
            e,
            e_dot,
            kind: SystemKind::Custom,
            omega_ref: None,
        })
    }

    pub fn with_kind(mut self, kind: SystemKind) -> Self {
        self.kind = kind;
        if let Some(w) = kind.omega() {
            self.omega_ref = Some(w);
        }
        self
    }

    /// Declare a reference frequency (used for dimensionless time `u = ωt`).
    pub fn with_reference_omega(mut self, omega: f64) -> Self {
        self.omega_ref = Some(omega);
        self
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn c(&self) -> &Expr {
        &self.c
    }

    pub fn e(&self) -> &Expr {
        &self.e
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn reference_omega(&self) -> Option<f64> {
        self.omega_ref
    }

    pub fn c_at(&self, t: f64) -> Result<f64, EvalError> {
        self.c.eval(t, &Bindings::new())
    }

    pub fn e_at(&self, t: f64) -> Result<f64, EvalError> {
        self.e.eval(t, &Bindings::new())
    }

    pub fn e_dot_at(&self, t: f64) -> Result<f64, EvalError> {
        self.e_dot.eval(t, &Bindings::new())
    }

    /// Same system with the time origin moved to `t1`: `c(t + t1)`,
    /// `e(t + t1)`. The family tag survives only for time-independent `c`.
    pub fn time_shifted(&self, t1: f64) -> Self {
        let shift = Expr::Time.add(Expr::Const(t1));
        let c = self.c.substitute_time(&shift);
        let e = self.e.substitute_time(&shift);
        let kind = match self.kind {
            SystemKind::PaulTrap { .. } => SystemKind::Custom,
            k => k,
        };
        CoefficientSpec {
            mass: self.mass,
            hbar: self.hbar,
            e_dot: e.differentiate(),
            c,
            e,
            kind,
            omega_ref: self.omega_ref,
        }
    }
}

/// Coefficient values at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientSample {
    pub t: f64,
    pub alpha: f64,
    pub alpha_dot: f64,
    pub beta: f64,
    pub beta_dot: f64,
    pub gamma: f64,
    pub gamma_dot: f64,
    /// Kernel phase λ(t) in action units; singular at zeros of β when the
    /// drive is on.
    pub lambda: f64,
    /// Number of zeros of β in (0, t).
    pub caustics: u32,
}

impl CoefficientSample {
    /// `αβ̇ − α̇β`, identically 1.
    pub fn wronskian(&self) -> f64 {
        self.alpha * self.beta_dot - self.alpha_dot * self.beta
    }

    /// `γβ̇ − γ̇β`.
    pub fn drift(&self) -> f64 {
        self.gamma * self.beta_dot - self.gamma_dot * self.beta
    }

    /// Dimensionless `β_u = ω β(t)`.
    pub fn beta_scaled(&self, omega: f64) -> f64 {
        omega * self.beta
    }
}

const STATE_DIM: usize = 7;

/// Time-sampled α, β, γ, their derivatives and the phase λ, plus a
/// continuous interpolant over the whole span.
#[derive(Clone, Debug)]
pub struct EvolutionCoefficients {
    samples: Vec<CoefficientSample>,
    beta_zeros: Vec<f64>,
    dense: DenseOutput<STATE_DIM>,
    mass: f64,
}

impl EvolutionCoefficients {
    pub fn samples(&self) -> &[CoefficientSample] {
        &self.samples
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    /// Wronskian of the canonical pair at t = 0 (`f ġ − ḟ g`).
    pub fn wronskian0(&self) -> f64 {
        1.0
    }

    /// Located zeros of β for t > 0, ascending.
    pub fn beta_zeros(&self) -> &[f64] {
        &self.beta_zeros
    }

    pub fn span(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples[self.samples.len() - 1].t)
    }

    /// Coefficients at any `t` inside the span (dense interpolation between
    /// accepted steps; exact grid values on the grid).
    pub fn at(&self, t: f64) -> Result<CoefficientSample> {
        let (lo, hi) = self.span();
        if !(lo..=hi).contains(&t) {
            return Err(Error::OutOfSpan { t, lo, hi });
        }
        if let Ok(i) = self.samples.binary_search_by(|s| s.t.total_cmp(&t)) {
            return Ok(self.samples[i]);
        }
        let y = self
            .dense
            .eval(t)
            .ok_or(Error::OutOfSpan { t, lo, hi })?;
        let caustics = self.beta_zeros.partition_point(|&z| z < t) as u32;
        Ok(sample_from_state(t, &y, self.mass, caustics))
    }

    /// Zero of β nearest to `t` (0 counts: β(0) = 0).
    pub fn nearest_beta_zero(&self, t: f64) -> f64 {
        self.beta_zeros
            .iter()
            .copied()
            .chain(core::iter::once(0.0))
            .min_by(|a, b| (a - t).abs().total_cmp(&(b - t).abs()))
            .unwrap_or(0.0)
    }

    /// Retarded Green's function `G(t, t') = β(t)α(t') − α(t)β(t')` for
    /// `t > t'`, zero otherwise.
    pub fn greens_function(&self, t: f64, t_prime: f64) -> Result<f64> {
        let (lo, hi) = self.span();
        for s in [t, t_prime] {
            if !(lo..=hi).contains(&s) {
                return Err(Error::OutOfSpan { t: s, lo, hi });
            }
        }
        if t <= t_prime {
            return Ok(0.0);
        }
        let now = self.at(t)?;
        let then = self.at(t_prime)?;
        Ok(now.beta * then.alpha - now.alpha * then.beta)
    }

    /// `max |αβ̇ − α̇β − 1|` over the output grid.
    pub fn wronskian_drift(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.wronskian() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

fn sample_from_state(t: f64, y: &[f64; STATE_DIM], mass: f64, caustics: u32) -> CoefficientSample {
    let [alpha, alpha_dot, beta, beta_dot, gamma, gamma_dot, mu] = *y;
    let drift = gamma * beta_dot - gamma_dot * beta;
    // D = O(t²) and β ~ t near the origin, so the boundary term vanishes there.
    let boundary = if t < 1e-12 || drift == 0.0 {
        0.0
    } else {
        drift * drift * alpha / (2.0 * mass * beta)
    };
    CoefficientSample {
        t,
        alpha,
        alpha_dot,
        beta,
        beta_dot,
        gamma,
        gamma_dot,
        lambda: boundary + mu,
        caustics,
    }
}

/// [`compute_coefficients_with`] at the default tolerances.
pub fn compute_coefficients(spec: &CoefficientSpec, grid: &[f64]) -> Result<EvolutionCoefficients> {
    compute_coefficients_with(spec, grid, Tolerances::default())
}

/// Integrate `{α, α̇, β, β̇, γ, γ̇, μ}` over `grid` (which must start at 0).
pub fn compute_coefficients_with(
    spec: &CoefficientSpec,
    grid: &[f64],
    tol: Tolerances,
) -> Result<EvolutionCoefficients> {
    match grid.first() {
        Some(&t0) if t0 == 0.0 => {}
        Some(&t0) => return Err(Error::GridStart(t0)),
        None => return Err(Error::Ode(crate::ode::OdeError::InvalidGrid)),
    }
    let m = spec.mass();
    let rhs = |t: f64, y: &[f64; STATE_DIM]| -> Result<[f64; STATE_DIM], EvalError> {
        let k = spec.c_at(t)? / m;
        let e = spec.e_at(t)?;
        let [alpha, alpha_dot, beta, beta_dot, gamma, gamma_dot, _] = *y;
        let drift = gamma * beta_dot - gamma_dot * beta;
        Ok([
            alpha_dot,
            -k * alpha,
            beta_dot,
            -k * beta,
            gamma_dot,
            -k * gamma + e,
            drift * e * alpha / m,
        ])
    };

    let mut zeros = Vec::new();
    let mut sign = 1.0f64;
    let observer = |seg: &Segment<STATE_DIM>| locate_beta_zeros(seg, &mut sign, &mut zeros);

    let y0 = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
    let traj = Integrator::new(tol)
        .keep_dense(true)
        .run(rhs, y0, grid, observer)?;

    let samples = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, y)| {
            let caustics = zeros.partition_point(|&z| z < t) as u32;
            sample_from_state(t, y, m, caustics)
        })
        .collect();
    Ok(EvolutionCoefficients {
        samples,
        beta_zeros: zeros,
        dense: traj.dense.unwrap_or_default(),
        mass: m,
    })
}

/// Track sign changes of β across one step, bisecting the interpolant to
/// place each zero.
fn locate_beta_zeros(seg: &Segment<STATE_DIM>, sign: &mut f64, zeros: &mut Vec<f64>) {
    const PROBES: usize = 4;
    let beta_at = |t: f64| seg.eval(t)[2];
    let mut t_prev = seg.t0;
    for j in 1..=PROBES {
        let t_next = if j == PROBES {
            seg.t1()
        } else {
            seg.t0 + seg.h * j as f64 / PROBES as f64
        };
        let b = if j == PROBES { seg.end()[2] } else { beta_at(t_next) };
        if b != 0.0 && b.signum() != *sign {
            let (mut lo, mut hi) = (t_prev, t_next);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if beta_at(mid).signum() == *sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let z = 0.5 * (lo + hi);
            if z > 0.0 {
                zeros.push(z);
            }
            *sign = b.signum();
        }
        t_prev = t_next;
    }
}
