mod common;

use common::simpson;
use quadprop_core::gaussian::evolve_gaussian;
use quadprop_core::ode::linspace;
use quadprop_core::potentials::{
    classify, make_spec, mathieu_pair, stability_scan, zeta_dimensionless, AxisRange, PotentialFamily, Stability,
};
use quadprop_core::{compute_coefficients, parse_expression, Bindings, CoefficientSpec, Tolerances};

fn trap(a: f64, q: f64) -> CoefficientSpec {
    make_spec(&PotentialFamily::PaulTrap { omega: 1.0, a, q, r: 10.0 }, 1.0, 1.0, &Bindings::new()).unwrap()
}

#[test]
fn harmonic_pair_is_cos_and_sin() {
    let w = 1.0;
    let spec = make_spec(&PotentialFamily::Harmonic { omega: w }, 1.0, 1.0, &Bindings::new()).unwrap();
    let co = compute_coefficients(&spec, &linspace(0.0, 100.0, 2001)).unwrap();
    let worst = co
        .samples()
        .iter()
        .map(|s| (s.alpha - (w * s.t).cos()).abs().max((s.beta - (w * s.t).sin() / w).abs()))
        .fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst:e}");
}

#[test]
fn harmonic_pair_other_frequency() {
    let (m, w) = (3.0, 2.3);
    let spec = make_spec(&PotentialFamily::Harmonic { omega: w }, m, 0.5, &Bindings::new()).unwrap();
    let co = compute_coefficients(&spec, &linspace(0.0, 10.0, 101)).unwrap();
    for s in co.samples() {
        assert!((s.alpha - (w * s.t).cos()).abs() < 1e-8);
        assert!((s.beta - (w * s.t).sin() / w).abs() < 1e-8);
        assert!((s.beta_scaled(w) - (w * s.t).sin()).abs() < 1e-8);
    }
}

#[test]
fn wronskian_is_one() {
    for spec in [
        trap(1.0, 0.25),
        make_spec(
            &PotentialFamily::Custom {
                c: parse_expression("1 + 0.5*sin(0.3*t)").unwrap(),
                e: parse_expression("sin(3*t)").unwrap(),
            },
            1.0,
            1.0,
            &Bindings::new(),
        )
        .unwrap(),
    ] {
        let co = compute_coefficients(&spec, &linspace(0.0, 20.0, 401)).unwrap();
        assert_eq!(co.wronskian0(), 1.0);
        assert!(co.wronskian_drift() < 1e-8, "{:e}", co.wronskian_drift());
    }
    // Inside an instability tongue α and β grow without bound, so only the
    // relative residual can stay small.
    let co = compute_coefficients(&trap(-0.2, 0.6), &linspace(0.0, 20.0, 401)).unwrap();
    for s in co.samples() {
        let size = (s.alpha * s.beta_dot).abs() + (s.alpha_dot * s.beta).abs();
        assert!((s.wronskian() - 1.0).abs() < 1e-8 * size);
    }
}

/// `γ(t) = ∫₀ᵗ G(t, s) e(s) ds` by quadrature of the Green's function.
#[test]
fn gamma_is_the_green_function_response() {
    let spec = make_spec(
        &PotentialFamily::Custom {
            c: parse_expression("1 - 0.4*cos(2*t)").unwrap(),
            e: parse_expression("0.3*cos(0.7*t) + 0.2").unwrap(),
        },
        1.0,
        1.0,
        &Bindings::new(),
    )
    .unwrap();
    let co = compute_coefficients(&spec, &linspace(0.0, 6.0, 61)).unwrap();
    for &t in &[1.0, 3.7, 6.0] {
        let green = |s: f64| co.greens_function(t, s).unwrap() * spec.e_at(s).unwrap();
        let want = simpson(&green, 0.0, t, 1e-11);
        let got = co.at(t).unwrap().gamma;
        assert!((got - want).abs() < 1e-8, "t = {t}: {got} vs {want}");
    }
    assert_eq!(co.greens_function(1.0, 2.0).unwrap(), 0.0);
}

#[test]
fn dense_values_agree_with_grid_values() {
    let spec = trap(1.0, 0.25);
    let coarse = compute_coefficients(&spec, &[0.0, 20.0]).unwrap();
    let fine = compute_coefficients(&spec, &linspace(0.0, 20.0, 81)).unwrap();
    for s in fine.samples() {
        let d = coarse.at(s.t).unwrap();
        assert!((d.alpha - s.alpha).abs() < 1e-8 && (d.beta - s.beta).abs() < 1e-8);
        assert_eq!(d.caustics, s.caustics);
    }
    assert!(coarse.at(21.0).is_err());
}

#[test]
fn trap_zeta_two_paths_agree() {
    let u = linspace(0.0, 20.0, 401);
    let spec = trap(1.0, 0.25);
    let co = compute_coefficients(&spec, &u).unwrap();
    let from_state: Vec<f64> = evolve_gaussian(&co, &spec, 1.0).unwrap().iter().map(|s| s.zeta).collect();
    let from_mathieu = zeta_dimensionless(1.0, 0.25, 10.0, &u).unwrap();
    for (a, b) in from_state.iter().zip(&from_mathieu) {
        assert!((a - b).abs() < 1e-9);
    }
    assert_eq!(from_mathieu[0], 1.0);
    let min = from_mathieu.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = from_mathieu.iter().cloned().fold(0.0, f64::max);
    assert!(min > 0.0 && min < 1.0 && max > 1.0, "min {min}, max {max}");
}

#[test]
fn mathieu_wronskian() {
    for p in mathieu_pair(0.3, 0.4, 2.0, &linspace(0.0, 30.0, 301)).unwrap() {
        assert!((p.wronskian() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn scan_is_area_preserving_and_separates_the_q0_column() {
    let tol = Tolerances::default();
    let cells = stability_scan(&AxisRange::new(-2.0, 3.0, 20), &AxisRange::new(0.0, 1.0, 20), 10.0, tol).unwrap();
    assert_eq!(cells.len(), 400);
    for c in &cells {
        let v = c.verdict.as_ref().unwrap();
        assert!((v.determinant - 1.0).abs() < 1e-8);
        if c.q == 0.0 {
            let want = if c.a > 0.0 { Stability::Stable } else { Stability::Unstable };
            assert_eq!(v.stability, want, "a = {}", c.a);
        }
    }
    // Inverted oscillator: trace 2 cosh(π/r).
    let v = classify(-1.0, 0.0, 10.0, tol).unwrap();
    assert!((v.abs_trace - 2.0 * (std::f64::consts::PI / 10.0).cosh()).abs() < 1e-9);
}

#[test]
fn stable_cells_stay_bounded_and_unstable_cells_grow() {
    let tol = Tolerances::default();
    let u = linspace(0.0, 10.0 * std::f64::consts::PI / 10.0, 501);
    let stable = classify(1.0, 0.25, 10.0, tol).unwrap();
    assert_eq!(stable.stability, Stability::Stable);
    let z = zeta_dimensionless(1.0, 0.25, 10.0, &u).unwrap();
    assert!(z.iter().all(|&v| v > 0.2 && v < 5.0));

    let unstable = classify(-0.5, 0.0, 10.0, tol).unwrap();
    assert_eq!(unstable.stability, Stability::Unstable);
    let pts = mathieu_pair(-0.5, 0.0, 10.0, &u).unwrap();
    let peaks: Vec<f64> = pts.chunks(50).map(|c| c.iter().map(|p| p.g.abs()).fold(0.0, f64::max)).collect();
    assert!(peaks.windows(2).all(|w| w[1] > w[0]));
}
