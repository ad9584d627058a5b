//! Globally adaptive Gauss–Kronrod (7, 15) quadrature for complex-valued
//! integrands on finite intervals.

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

use num_complex::Complex64;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Uniform panels to start from; raise this for integrands with many
    /// known oscillations.
    pub initial_panels: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_intervals: 20_000,
            initial_panels: 1,
        }
    }
}

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let k = kronrod * half;
    let g = gauss * half;
    (k, (k - g).norm())
}

struct Piece {
    lo: f64,
    hi: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// `∫_a^b f(x) dx` to within `max(abs_tol, rel_tol |I|)`.
pub fn integrate_complex<F>(mut f: F, a: f64, b: f64, settings: QuadSettings) -> Result<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    let n0 = settings.initial_panels.max(1);
    let width = (b - a) / n0 as f64;
    let mut heap = BinaryHeap::with_capacity(n0 * 2);
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for i in 0..n0 {
        let lo = a + width * i as f64;
        let hi = if i + 1 == n0 { b } else { lo + width };
        let (value, e) = gk15(&mut f, lo, hi);
        total += value;
        err += e;
        heap.push(Piece { lo, hi, value, err: e });
    }
    while err > settings.abs_tol.max(settings.rel_tol * total.norm()) {
        if heap.len() >= settings.max_intervals.max(n0 + 1) {
            return Err(Error::Quadrature { estimate: err });
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        let (v1, e1) = gk15(&mut f, worst.lo, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.hi);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.err;
        heap.push(Piece { lo: worst.lo, hi: mid, value: v1, err: e1 });
        heap.push(Piece { lo: mid, hi: worst.hi, value: v2, err: e2 });
    }
    // Re-sum to shed the running-update rounding.
    Ok(heap.iter().map(|p| p.value).sum())
}

/// Real-valued convenience wrapper.
pub fn integrate<F>(mut f: F, a: f64, b: f64, settings: QuadSettings) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate_complex(|x| Complex64::new(f(x), 0.0), a, b, settings).map(|z| z.re)
}
