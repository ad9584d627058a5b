//! Adaptive Dormand–Prince 5(4) integration of small first-order systems
//! with dense output onto a caller-supplied grid.

use alloc::vec::Vec;
use core::convert::Infallible;

use crate::math;

/// Default relative tolerance.
pub const DEFAULT_RTOL: f64 = 1e-10;
/// Default absolute tolerance.
pub const DEFAULT_ATOL: f64 = 1e-12;
/// Hard cap on accepted steps per call.
pub const MAX_STEPS: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_ATOL,
        }
    }
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Tolerances { rtol, atol }
    }

    /// Both tolerances divided by `factor`.
    pub fn tightened(self, factor: f64) -> Self {
        Tolerances {
            rtol: self.rtol / factor,
            atol: self.atol / factor,
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum OdeError<E = Infallible> {
    #[error("output grid must be non-empty, finite and strictly increasing")]
    InvalidGrid,
    #[error("tolerances must be positive and finite (rtol = {rtol}, atol = {atol})")]
    InvalidTolerance { rtol: f64, atol: f64 },
    #[error("step size underflow (h = {h:e}) at t = {t}: stiff or singular right-hand side")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite right-hand side at t = {t}")]
    NonFiniteRhs { t: f64 },
    #[error("exceeded {steps} accepted steps at t = {t}")]
    TooManySteps { t: f64, steps: usize },
    #[error("right-hand side failed at t = {t}: {error}")]
    Rhs { t: f64, error: E },
}

impl OdeError<Infallible> {
    /// Widen an infallible-rhs error into any error type.
    pub fn widen<E>(self) -> OdeError<E> {
        match self {
            OdeError::InvalidGrid => OdeError::InvalidGrid,
            OdeError::InvalidTolerance { rtol, atol } => OdeError::InvalidTolerance { rtol, atol },
            OdeError::StepUnderflow { t, h } => OdeError::StepUnderflow { t, h },
            OdeError::NonFiniteRhs { t } => OdeError::NonFiniteRhs { t },
            OdeError::TooManySteps { t, steps } => OdeError::TooManySteps { t, steps },
            OdeError::Rhs { error, .. } => match error {},
        }
    }
}

/// One accepted step with its continuous extension.
#[derive(Clone, Debug)]
pub struct Segment<const N: usize> {
    pub t0: f64,
    pub h: f64,
    coeffs: [[f64; N]; 5],
}

impl<const N: usize> Segment<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn start(&self) -> [f64; N] {
        self.coeffs[0]
    }

    pub fn end(&self) -> [f64; N] {
        let mut y = [0.0; N];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.coeffs[0][i] + self.coeffs[1][i];
        }
        y
    }

    /// Dense-output interpolant at `t` (4th-order continuous extension).
    pub fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let r = &self.coeffs;
        let mut y = [0.0; N];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = r[0][i]
                + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
        }
        y
    }
}

/// All accepted steps of one integration, usable as a continuous solution.
#[derive(Clone, Debug, Default)]
pub struct DenseOutput<const N: usize> {
    segments: Vec<Segment<N>>,
}

impl<const N: usize> DenseOutput<N> {
    pub fn segments(&self) -> &[Segment<N>] {
        &self.segments
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.segments.first()?.t0, self.segments.last()?.t1()))
    }

    /// Interpolated state, or `None` outside the integrated span.
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        let (lo, hi) = self.span()?;
        if !(lo..=hi).contains(&t) {
            return None;
        }
        let idx = self.segments.partition_point(|s| s.t1() < t);
        let seg = &self.segments[idx.min(self.segments.len() - 1)];
        if t == seg.t1() {
            return Some(seg.end());
        }
        Some(seg.eval(t))
    }
}

/// States on the requested grid plus step diagnostics.
#[derive(Clone, Debug)]
pub struct Trajectory<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub step_sizes: Vec<f64>,
    pub dense: Option<DenseOutput<N>>,
}

#[derive(Clone, Copy, Debug)]
pub struct Integrator {
    tol: Tolerances,
    max_steps: usize,
    keep_dense: bool,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator::new(Tolerances::default())
    }
}

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn all_finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

impl Integrator {
    pub fn new(tol: Tolerances) -> Self {
        Integrator {
            tol,
            max_steps: MAX_STEPS,
            keep_dense: false,
        }
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    pub fn max_steps(mut self, n: usize) -> Self {
        self.max_steps = n;
        self
    }

    /// Retain every step's interpolant in [`Trajectory::dense`].
    pub fn keep_dense(mut self, keep: bool) -> Self {
        self.keep_dense = keep;
        self
    }

    /// Integrate an infallible right-hand side.
    pub fn integrate<const N: usize, F>(
        &self,
        mut rhs: F,
        y0: [f64; N],
        grid: &[f64],
    ) -> Result<Trajectory<N>, OdeError>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        self.run(
            |t, y| Ok::<_, Infallible>(rhs(t, y)),
            y0,
            grid,
            |_: &Segment<N>| {},
        )
    }

    /// Integrate a fallible right-hand side, calling `observer` on every
    /// accepted step.
    pub fn run<const N: usize, F, E, O>(
        &self,
        mut rhs: F,
        y0: [f64; N],
        grid: &[f64],
        mut observer: O,
    ) -> Result<Trajectory<N>, OdeError<E>>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
        O: FnMut(&Segment<N>),
    {
        let Tolerances { rtol, atol } = self.tol;
        if !(rtol > 0.0 && atol > 0.0 && rtol.is_finite() && atol.is_finite()) {
            return Err(OdeError::InvalidTolerance { rtol, atol });
        }
        if grid.is_empty()
            || grid.iter().any(|t| !t.is_finite())
            || grid.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(OdeError::InvalidGrid);
        }

        let mut eval = |t: f64, y: &[f64; N]| -> Result<[f64; N], OdeError<E>> {
            rhs(t, y).map_err(|error| OdeError::Rhs { t, error })
        };

        let t_start = grid[0];
        let t_end = grid[grid.len() - 1];
        let span = t_end - t_start;

        let mut traj = Trajectory {
            times: Vec::with_capacity(grid.len()),
            states: Vec::with_capacity(grid.len()),
            step_sizes: Vec::new(),
            dense: self.keep_dense.then(DenseOutput::default),
        };
        if !all_finite(&y0) {
            return Err(OdeError::NonFiniteRhs { t: t_start });
        }
        traj.times.push(t_start);
        traj.states.push(y0);
        if grid.len() == 1 {
            return Ok(traj);
        }

        let scale = |y: &[f64; N], i: usize| atol + rtol * y[i].abs();
        let mut t = t_start;
        let mut y = y0;
        let mut k1 = eval(t, &y)?;
        if !all_finite(&k1) {
            return Err(OdeError::NonFiniteRhs { t });
        }

        // Initial step (Hairer, Nørsett & Wanner, II.4).
        let rms = |v: &[f64; N], w: &[f64; N]| {
            let mut s = 0.0;
            for i in 0..N {
                let q = v[i] / scale(w, i);
                s += q * q;
            }
            math::sqrt(s / N.max(1) as f64)
        };
        let d0 = rms(&y, &y);
        let d1 = rms(&k1, &y);
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h0 = h0.min(span);
        let y_probe = combine(&y, h0, &[(1.0, &k1)]);
        let k_probe = eval(t + h0, &y_probe)?;
        let mut diff = [0.0; N];
        for i in 0..N {
            diff[i] = k_probe[i] - k1[i];
        }
        let d2 = rms(&diff, &y) / h0;
        let dmax = d1.max(d2);
        let h1 = if !dmax.is_finite() {
            h0 * 1e-3
        } else if dmax <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            math::powf(0.01 / dmax, 0.2)
        };
        let mut h = (100.0 * h0).min(h1).min(span);

        let h_min = 1e-14 * span;
        let mut next = 1;
        let mut accepted = 0usize;

        while next < grid.len() {
            if accepted >= self.max_steps {
                return Err(OdeError::TooManySteps {
                    t,
                    steps: accepted,
                });
            }
            let last = t + h >= t_end;
            if last {
                h = t_end - t;
            }

            let k2 = eval(t + C2 * h, &combine(&y, h, &[(A21, &k1)]))?;
            let k3 = eval(t + C3 * h, &combine(&y, h, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = eval(
                t + C4 * h,
                &combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            )?;
            let k5 = eval(
                t + C5 * h,
                &combine(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = eval(
                t + h,
                &combine(
                    &y,
                    h,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            )?;
            let y_new = combine(
                &y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let t_new = if last { t_end } else { t + h };
            let k7 = eval(t_new, &y_new)?;

            let mut err = 0.0f64;
            let stages_finite = [&k2, &k3, &k4, &k5, &k6, &k7, &y_new]
                .iter()
                .all(|k| all_finite(k));
            if stages_finite {
                for i in 0..N {
                    let e = h
                        * (E1 * k1[i]
                            + E3 * k3[i]
                            + E4 * k4[i]
                            + E5 * k5[i]
                            + E6 * k6[i]
                            + E7 * k7[i]);
                    let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
                    err = err.max(e.abs() / sc);
                }
            } else {
                err = f64::INFINITY;
            }

            if err <= 1.0 {
                let mut coeffs = [[0.0; N]; 5];
                for i in 0..N {
                    let ydiff = y_new[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    coeffs[0][i] = y[i];
                    coeffs[1][i] = ydiff;
                    coeffs[2][i] = bspl;
                    coeffs[3][i] = ydiff - h * k7[i] - bspl;
                    coeffs[4][i] = h
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                }
                let seg = Segment { t0: t, h, coeffs };
                while next < grid.len() && grid[next] <= t_new {
                    let tg = grid[next];
                    let state = if tg == t_new { y_new } else { seg.eval(tg) };
                    traj.times.push(tg);
                    traj.states.push(state);
                    next += 1;
                }
                observer(&seg);
                if let Some(d) = traj.dense.as_mut() {
                    d.segments.push(seg);
                }
                traj.step_sizes.push(h);
                accepted += 1;

                t = t_new;
                y = y_new;
                k1 = k7;
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * math::powf(err, -0.2)).clamp(0.2, 5.0)
                };
                h *= fac;
            } else {
                let fac = if err.is_finite() {
                    (0.9 * math::powf(err, -0.2)).max(0.2)
                } else {
                    0.2
                };
                h *= fac;
            }
            if h < h_min && next < grid.len() {
                return Err(OdeError::StepUnderflow { t, h });
            }
        }
        Ok(traj)
    }
}

/// Integrate `rhs` from `grid[0]` reporting states at every grid point.
pub fn integrate<const N: usize, F>(
    rhs: F,
    y0: [f64; N],
    grid: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<Trajectory<N>, OdeError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    Integrator::new(Tolerances::new(rtol, atol)).integrate(rhs, y0, grid)
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            let mut v: Vec<f64> = (0..n).map(|i| start + step * i as f64).collect();
            v[n - 1] = stop;
            v
        }
    }
}

/// Grid `0, dt, 2 dt, ...` up to and including `t_max` (appended if the
/// last multiple falls short).
pub fn uniform_grid(t_max: f64, dt: f64) -> Vec<f64> {
    let n = math::round(t_max / dt) as usize;
    let mut v: Vec<f64> = (0..=n).map(|i| i as f64 * dt).filter(|&t| t <= t_max).collect();
    match v.last() {
        Some(&last) if (t_max - last).abs() <= 1e-12 * t_max.abs().max(1.0) => {
            let k = v.len() - 1;
            v[k] = t_max;
        }
        _ => v.push(t_max),
    }
    v
}
