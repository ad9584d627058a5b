//! Expression-language fixtures shared by the parser tests and the
//! acceptance run.

use quadprop_core::Bindings;
use rand::Rng;
use std::f64::consts::PI;

pub fn bindings() -> Bindings {
    [("a", 1.0), ("q", 0.25), ("r", 10.0), ("w", 0.7), ("m", 2.0)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

/// Hand-written grammar cases: `(source, t, expected)`, expected computed
/// with std float arithmetic.
pub fn grammar_cases() -> Vec<(&'static str, f64, f64)> {
    let t = 1.3f64;
    vec![
        ("1", 0.0, 1.0),
        ("2.5", 0.0, 2.5),
        ("1e-3", 0.0, 1e-3),
        ("2.5E2", 0.0, 250.0),
        (".5", 0.0, 0.5),
        ("t", t, t),
        ("pi", 0.0, PI),
        ("-t", t, -t),
        ("--t", t, t),
        ("2+3*4", 0.0, 14.0),
        ("(2+3)*4", 0.0, 20.0),
        ("2^3^2", 0.0, 512.0),
        ("(2^3)^2", 0.0, 64.0),
        ("-2^2", 0.0, -4.0),
        ("2^-1", 0.0, 0.5),
        ("8/4/2", 0.0, 1.0),
        ("8-4-2", 0.0, 2.0),
        ("2*3/4", 0.0, 1.5),
        ("1-2+3", 0.0, 2.0),
        ("2*-3", 0.0, -6.0),
        ("sin(t)", t, t.sin()),
        ("cos(t)", t, t.cos()),
        ("exp(t)", t, t.exp()),
        ("sqrt(t)", t, t.sqrt()),
        ("log(t)", t, t.ln()),
        ("sin(0)", 0.0, 0.0),
        ("a - 2*q*cos(2*r*t)", 0.0, 0.5),
        ("a - 2*q*cos(2*r*t)", t, 1.0 - 0.5 * (20.0 * t).cos()),
        ("m*w^2", 0.0, 2.0 * 0.49),
        ("0.3*cos(w*t)", t, 0.3 * (0.7 * t).cos()),
        ("  1 +\t2 ", 0.0, 3.0),
        ("sin(t)^2 + cos(t)^2", t, t.sin().powi(2) + t.cos().powi(2)),
        ("exp(-t^2/2)", t, (-t * t / 2.0).exp()),
        ("t*t*t", t, t * t * t),
        ("t^0.5", t, t.sqrt()),
        ("sqrt(sqrt(16))", 0.0, 2.0),
        ("log(exp(t))", t, t.exp().ln()),
        ("(((t)))", t, t),
        ("-(t+1)", t, -(t + 1.0)),
        ("1/(1+t^2)", t, 1.0 / (1.0 + t * t)),
        ("a*t^2 + q*t + r", t, t * t + 0.25 * t + 10.0),
        ("pi*t", t, PI * t),
        ("2*pi/w", 0.0, 2.0 * PI / 0.7),
        ("sin(2*t)*cos(3*t)", t, (2.0 * t).sin() * (3.0 * t).cos()),
        ("exp(sin(t))", t, t.sin().exp()),
        ("-a", 0.0, -1.0),
        ("q^2", 0.0, 0.0625),
        ("10/4", 0.0, 2.5),
        ("3-(-2)", 0.0, 5.0),
        ("t^2^0.5", t, t.powf(2f64.powf(0.5))),
    ]
}


/// Random smooth, domain-safe expression of `t` (safe for `t ∈ [0, 10]`)
/// built from the same shapes as the property tests.
pub fn random_smooth_source<R: Rng>(rng: &mut R, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..4) {
            0 => "t".into(),
            1 => "a".into(),
            2 => "w".into(),
            _ => format!("({})", rng.gen_range(-2.0..2.0)),
        };
    }
    let sub = |rng: &mut R| random_smooth_source(rng, depth - 1);
    match rng.gen_range(0..13) {
        0 => format!("({} + {})", sub(rng), sub(rng)),
        1 => format!("({} - {})", sub(rng), sub(rng)),
        2 => format!("({} * {})", sub(rng), sub(rng)),
        3 => format!("({} / (2 + sin({})))", sub(rng), sub(rng)),
        4 => format!("sin({})", sub(rng)),
        5 => format!("cos({})", sub(rng)),
        6 => format!("exp(0.3*sin({}))", sub(rng)),
        7 => format!("sqrt(1 + ({})^2)", sub(rng)),
        8 => format!("log(2 + cos({}))", sub(rng)),
        9 => format!("({})^2", sub(rng)),
        10 => format!("-({})", sub(rng)),
        11 => {
            let p: f64 = rng.gen_range(0.5..1.5);
            format!("(1 + ({})^2)^{p}", sub(rng))
        }
        _ => format!("(1.5 + sin({}))^(cos(t))", sub(rng)),
    }
}
