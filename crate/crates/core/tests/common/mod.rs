//! Test-side numerical oracles. Nothing here calls into the library except
//! where a test explicitly feeds library output to an oracle.

#![allow(dead_code)]

pub mod grammar;

use quadprop_core::Complex64;
use std::f64::consts::PI;

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    // Split into a few panels first so that smooth oscillations are not
    // mistaken for convergence on the first comparison.
    let panels = 16;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = if i + 1 == panels { b } else { lo + h };
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            rec(f, lo, hi, fa, fm, fb, whole, tol / panels as f64, 40)
        })
        .sum()
}

/// Composite trapezoid rule with `n` intervals. Spectrally accurate for
/// smooth integrands that decay to zero at both ends.
pub fn trapezoid<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, n: usize) -> Complex64 {
    let h = (b - a) / n as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..n {
        s += f(a + h * i as f64);
    }
    s * h
}

pub fn trapezoid_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    trapezoid(|x| Complex64::new(f(x), 0.0), a, b, n).re
}

/// Nodes and weights of the `n`-point Gauss–Hermite rule for weight
/// `exp(−x²)`, by Newton iteration on the orthonormal recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let pim4 = PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / (j as f64 + 1.0)).sqrt() * p2 - (j as f64 / (j as f64 + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `∫ g(x) dx` for `g` concentrated like `exp(−s (x − c)²)`, by
/// Gauss–Hermite after rescaling.
pub fn gauss_hermite_integral<F: Fn(f64) -> f64>(g: F, center: f64, s: f64, n: usize) -> f64 {
    let (x, w) = gauss_hermite(n);
    let scale = 1.0 / s.sqrt();
    x.iter()
        .zip(&w)
        .map(|(&z, &wi)| wi * (z * z).exp() * g(center + scale * z))
        .sum::<f64>()
        * scale
}

/// Normalised Hermite functions `ψ₀ … ψ_{n_max}` of the unit oscillator at `x`.
pub fn hermite_functions(x: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(PI.powf(-0.25) * (-0.5 * x * x).exp());
    if n_max >= 1 {
        out.push(2f64.sqrt() * x * out[0]);
    }
    for n in 1..n_max {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// Five-point central difference.
pub fn fd5<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Kernel of `H = p²/2m + mω²x²/2 + e(t)x` from the classical action with
/// its three drive integrals done by quadrature. The branch of the square
/// root steps by −π/2 at every multiple of π/ω.
pub struct DrivenOscillatorOracle<E: Fn(f64) -> f64> {
    pub mass: f64,
    pub omega: f64,
    pub hbar: f64,
    pub drive: E,
    pub tol: f64,
}

pub struct ActionTerms {
    pub t: f64,
    /// `∫₀ᵀ f(t) sin ωt dt` with force `f = −e`.
    pub i_final: f64,
    /// `∫₀ᵀ f(t) sin ω(T − t) dt`.
    pub i_initial: f64,
    /// `∫₀ᵀ dt f(t) sin ω(T − t) ∫₀ᵗ ds f(s) sin ωs`.
    pub i_double: f64,
}

impl<E: Fn(f64) -> f64> DrivenOscillatorOracle<E> {
    pub fn action_terms(&self, t_final: f64) -> ActionTerms {
        let w = self.omega;
        let force = |t: f64| -(self.drive)(t);
        let i_final = simpson(&|t: f64| force(t) * (w * t).sin(), 0.0, t_final, self.tol);
        let i_initial = simpson(&|t: f64| force(t) * (w * (t_final - t)).sin(), 0.0, t_final, self.tol);
        let inner = |t: f64| simpson(&|s: f64| force(s) * (w * s).sin(), 0.0, t, self.tol);
        let i_double = simpson(&|t: f64| force(t) * (w * (t_final - t)).sin() * inner(t), 0.0, t_final, self.tol);
        ActionTerms {
            t: t_final,
            i_final,
            i_initial,
            i_double,
        }
    }

    pub fn kernel(&self, terms: &ActionTerms, x: f64, x1: f64) -> Complex64 {
        let (m, w, hb, t) = (self.mass, self.omega, self.hbar, terms.t);
        let s = (w * t).sin();
        let action = m * w / (2.0 * s) * ((x * x + x1 * x1) * (w * t).cos() - 2.0 * x * x1)
            + x * terms.i_final / s
            + x1 * terms.i_initial / s
            - terms.i_double / (m * w * s);
        let turns = (w * t / PI).floor();
        let phase = -0.25 * PI - 0.5 * PI * turns + action / hb;
        let modulus = (m * w / (2.0 * PI * hb * s.abs())).sqrt();
        Complex64::from_polar(modulus, phase)
    }
}

/// `φ(x) = ∫ K(x, y) ψ₀(y) dy` for `ψ₀(y) = (λ₀/π)^{1/4} exp(−λ₀y²/2)`,
/// by the trapezoid rule, with the kernel supplied by the caller.
pub fn propagate_gaussian<K: Fn(f64, f64) -> Complex64>(kernel: K, lambda0: f64, x: f64, n: usize) -> Complex64 {
    let reach = 12.0 / lambda0.sqrt();
    let norm = (lambda0 / PI).powf(0.25);
    trapezoid(|y| kernel(x, y) * norm * (-0.5 * lambda0 * y * y).exp(), -reach, reach, n)
}

pub fn rel_err(got: Complex64, want: Complex64) -> f64 {
    (got - want).norm() / want.norm()
}
