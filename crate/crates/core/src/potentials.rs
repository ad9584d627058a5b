//! Built-in coefficient families and the Mathieu equation
//! `y'' + (a − 2q cos 2ru) y = 0` of the Paul trap in the dimensionless
//! time `u = ωt`, where `2r = Ω/ω`.

use alloc::vec::Vec;

use crate::coefficients::{CoefficientSpec, SystemKind};
use crate::expr::{Bindings, Expr, Func};
use crate::math;
use crate::ode::{Integrator, Tolerances};
use crate::{Error, Result};

/// Half-width of the band around `|tr M| = 2` classified as marginal.
pub const MARGINAL_BAND: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialFamily {
    Free,
    /// `c = mω²`, `e = 0`.
    Harmonic { omega: f64 },
    /// `c = mω²` with drive `e(t)`.
    DrivenHarmonic { omega: f64, drive: Expr },
    /// `c = mω²(a − 2q cos Ωt)` with `Ω = 2rω`, `e = 0`.
    PaulTrap { omega: f64, a: f64, q: f64, r: f64 },
    Custom { c: Expr, e: Expr },
}

impl PotentialFamily {
    pub fn tag(&self) -> &'static str {
        match self {
            PotentialFamily::Free => "free",
            PotentialFamily::Harmonic { .. } => "harmonic",
            PotentialFamily::DrivenHarmonic { .. } => "driven-harmonic",
            PotentialFamily::PaulTrap { .. } => "paul-trap",
            PotentialFamily::Custom { .. } => "custom",
        }
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive",
        })
    }
}

fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}

/// Build the [`CoefficientSpec`] for `family`. `bindings` resolves free parameters in
/// custom or drive expressions.
pub fn make_spec(family: &PotentialFamily, mass: f64, hbar: f64, bindings: &Bindings) -> Result<CoefficientSpec> {
    positive("mass", mass)?;
    let zero = Expr::Const(0.0);
    let spec = match family {
        PotentialFamily::Free => CoefficientSpec::new(mass, hbar, &zero, &zero, bindings)?.with_kind(SystemKind::Free),
        PotentialFamily::Harmonic { omega } => {
            let omega = positive("omega", *omega)?;
            let c = Expr::Const(mass * omega * omega);
            CoefficientSpec::new(mass, hbar, &c, &zero, bindings)?.with_kind(SystemKind::Harmonic { omega })
        }
        PotentialFamily::DrivenHarmonic { omega, drive } => {
            let omega = positive("omega", *omega)?;
            let c = Expr::Const(mass * omega * omega);
            CoefficientSpec::new(mass, hbar, &c, drive, bindings)?
                .with_kind(SystemKind::DrivenHarmonic { omega })
        }
        PotentialFamily::PaulTrap { omega, a, q, r } => {
            let omega = positive("omega", *omega)?;
            let r = positive("r", *r)?;
            let (a, q) = (finite("a", *a)?, finite("q", *q)?);
            let drive = Expr::call(Func::Cos, Expr::Const(2.0 * r * omega).mul(Expr::Time));
            let c = Expr::Const(mass * omega * omega).mul(Expr::Const(a).sub(Expr::Const(2.0 * q).mul(drive)));
            CoefficientSpec::new(mass, hbar, &c, &zero, bindings)?.with_kind(SystemKind::PaulTrap { omega, a, q, r })
        }
        PotentialFamily::Custom { c, e } => CoefficientSpec::new(mass, hbar, c, e, bindings)?,
    };
    Ok(spec)
}

/// Canonical Mathieu solutions at one `u`: `f(0)=1, f'(0)=0`, `g(0)=0, g'(0)=1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MathieuPoint {
    pub u: f64,
    pub f: f64,
    pub f_dot: f64,
    pub g: f64,
    pub g_dot: f64,
}

impl MathieuPoint {
    pub fn wronskian(&self) -> f64 {
        self.f * self.g_dot - self.f_dot * self.g
    }

    /// `ζ = 1/(f² + g²)` for the matched initial width.
    pub fn zeta(&self) -> f64 {
        1.0 / (self.f * self.f + self.g * self.g)
    }
}

/// Integrate the canonical pair on `u_grid` (starting at 0).
pub fn mathieu_pair(a: f64, q: f64, r: f64, u_grid: &[f64]) -> Result<Vec<MathieuPoint>> {
    mathieu_pair_with(a, q, r, u_grid, Tolerances::default())
}

pub fn mathieu_pair_with(a: f64, q: f64, r: f64, u_grid: &[f64], tol: Tolerances) -> Result<Vec<MathieuPoint>> {
    positive("r", r)?;
    finite("a", a)?;
    finite("q", q)?;
    match u_grid.first() {
        Some(&u0) if u0 == 0.0 => {}
        Some(&u0) => return Err(Error::GridStart(u0)),
        None => return Err(Error::EmptyRange("u")),
    }
    let rhs = |u: f64, y: &[f64; 4]| {
        let k = a - 2.0 * q * math::cos(2.0 * r * u);
        [y[1], -k * y[0], y[3], -k * y[2]]
    };
    let traj = Integrator::new(tol).integrate(rhs, [1.0, 0.0, 0.0, 1.0], u_grid)?;
    Ok(traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&u, y)| MathieuPoint {
            u,
            f: y[0],
            f_dot: y[1],
            g: y[2],
            g_dot: y[3],
        })
        .collect())
}

/// `ζ(u)` of the trap for the matched width, from the Mathieu pair alone.
pub fn zeta_dimensionless(a: f64, q: f64, r: f64, u_grid: &[f64]) -> Result<Vec<f64>> {
    Ok(mathieu_pair(a, q, r, u_grid)?.iter().map(MathieuPoint::zeta).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Stability {
    Unstable = 0,
    Stable = 1,
    Marginal = 2,
}

impl Stability {
    pub fn from_trace(abs_trace: f64) -> Self {
        if abs_trace < 2.0 - MARGINAL_BAND {
            Stability::Stable
        } else if abs_trace > 2.0 + MARGINAL_BAND {
            Stability::Unstable
        } else {
            Stability::Marginal
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityVerdict {
    pub a: f64,
    pub q: f64,
    pub abs_trace: f64,
    /// `det M`, 1 up to integration error.
    pub determinant: f64,
    pub stability: Stability,
}

/// Floquet classification of one `(a, q)` point from the monodromy matrix
/// over the drive period `u ∈ [0, π/r]`.
pub fn classify(a: f64, q: f64, r: f64, tol: Tolerances) -> Result<StabilityVerdict> {
    let period = core::f64::consts::PI / positive("r", r)?;
    let end = mathieu_pair_with(a, q, r, &[0.0, period], tol)?[1];
    let abs_trace = (end.f + end.g_dot).abs();
    Ok(StabilityVerdict {
        a,
        q,
        abs_trace,
        determinant: end.wronskian(),
        stability: Stability::from_trace(abs_trace),
    })
}

/// Inclusive, evenly spaced axis of `count` points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl AxisRange {
    pub fn new(start: f64, stop: f64, count: usize) -> Self {
        AxisRange { start, stop, count }
    }

    pub fn validate(&self, name: &'static str) -> Result<()> {
        let ok = self.count > 0
            && self.start.is_finite()
            && self.stop.is_finite()
            && (self.count == 1 || self.stop > self.start);
        if ok {
            Ok(())
        } else {
            Err(Error::EmptyRange(name))
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.count <= 1 {
            self.start
        } else if i + 1 == self.count {
            self.stop
        } else {
            self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

/// One scanned point. Integration failures are kept per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanCell {
    pub a: f64,
    pub q: f64,
    pub verdict: Result<StabilityVerdict>,
}

/// The `(a, q)` points of a scan in row-major order (q outer, a inner).
pub fn scan_points(a_range: &AxisRange, q_range: &AxisRange) -> Result<Vec<(f64, f64)>> {
    a_range.validate("a")?;
    q_range.validate("q")?;
    let mut pts = Vec::with_capacity(a_range.count * q_range.count);
    for j in 0..q_range.count {
        for i in 0..a_range.count {
            pts.push((a_range.value(i), q_range.value(j)));
        }
    }
    Ok(pts)
}

/// Sequential scan. Cells are independent, so callers with threads can map
/// [`classify`] over [`scan_points`] instead.
pub fn stability_scan(a_range: &AxisRange, q_range: &AxisRange, r: f64, tol: Tolerances) -> Result<Vec<ScanCell>> {
    positive("r", r)?;
    Ok(scan_points(a_range, q_range)?
        .into_iter()
        .map(|(a, q)| ScanCell {
            a,
            q,
            verdict: classify(a, q, r, tol),
        })
        .collect())
}
