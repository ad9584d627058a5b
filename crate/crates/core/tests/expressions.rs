mod common;

use common::grammar::{bindings, grammar_cases};
use proptest::prelude::*;
use quadprop_core::expr::{differentiate, eval_expression, reduce_general_lagrangian, EvalError, Expr, ParseError};
use quadprop_core::{parse_expression, Bindings};

#[test]
fn fifty_grammar_round_trips() {
    let cases = grammar_cases();
    assert_eq!(cases.len(), 50);
    let b = bindings();
    for (src, t, want) in cases {
        let ast = parse_expression(src).unwrap_or_else(|e| panic!("{src}: {e}"));
        let got = eval_expression(&ast, t, &b).unwrap();
        assert!((got - want).abs() <= 1e-14 * want.abs().max(1.0), "{src}: {got} vs {want}");
        // Printing and reparsing gives the same value.
        let again = parse_expression(&ast.to_string()).unwrap();
        assert_eq!(eval_expression(&again, t, &b).unwrap().to_bits(), got.to_bits(), "{src}");
    }
}

#[test]
fn parse_errors_are_located() {
    let cases: &[(&str, usize)] = &[("sin(", 4), ("1 +", 3), ("(1", 2), ("1 2", 2), ("*", 0), ("2^", 2), ("", 0)];
    for &(src, offset) in cases {
        match parse_expression(src) {
            Err(e) => assert_eq!(e.offset(), offset, "{src}: {e}"),
            Ok(ast) => panic!("{src} parsed as {ast}"),
        }
    }
    assert!(matches!(
        parse_expression("tan(t)"),
        Err(ParseError::UnknownFunction { ref name, offset: 0 }) if name == "tan"
    ));
}

#[test]
fn evaluation_errors() {
    let b = Bindings::new();
    let err = eval_expression(&parse_expression("1/t").unwrap(), 0.0, &b).unwrap_err();
    assert!(matches!(err, EvalError::Domain { t, .. } if t == 0.0));
    let err = eval_expression(&parse_expression("k*t").unwrap(), 1.0, &b).unwrap_err();
    assert_eq!(err, EvalError::Unbound("k".into()));
    assert!(eval_expression(&parse_expression("sqrt(t-2)").unwrap(), 1.0, &b).is_err());
    assert!(eval_expression(&parse_expression("log(t)").unwrap(), 0.0, &b).is_err());
}

#[test]
fn lagrangian_reduction_examples() {
    let b = Bindings::new();
    let p = |s: &str| parse_expression(s).unwrap();
    let (c, e) = reduce_general_lagrangian(&p("0"), &p("-2*0.49"), &p("0"), &p("0"));
    assert_eq!((c.eval(3.0, &b).unwrap(), e.eval(3.0, &b).unwrap()), (0.98, 0.0));
    let (c, _) = reduce_general_lagrangian(&p("t"), &p("0"), &p("0"), &p("0"));
    assert_eq!(c.eval(7.0, &b).unwrap(), 1.0);
    let (_, e) = reduce_general_lagrangian(&p("0"), &p("0"), &p("t^2"), &p("t"));
    for &t in &[0.5, 2.0, 9.0] {
        assert!((e.eval(t, &b).unwrap() - t).abs() < 1e-14);
    }
}

/// Smooth, domain-safe expressions of `t` (for `t ∈ [0, 10]`) as source text.
fn smooth_source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("t".to_string()),
        Just("a".to_string()),
        Just("w".to_string()),
        (-2.0f64..2.0).prop_map(|c| format!("({c})")),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(x, y)| format!("({x} + {y})")),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| format!("({x} - {y})")),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| format!("({x} * {y})")),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| format!("({x} / (2 + sin({y})))")),
            inner.clone().prop_map(|x| format!("sin({x})")),
            inner.clone().prop_map(|x| format!("cos({x})")),
            inner.clone().prop_map(|x| format!("exp(0.3*sin({x}))")),
            inner.clone().prop_map(|x| format!("sqrt(1 + ({x})^2)")),
            inner.clone().prop_map(|x| format!("log(2 + cos({x}))")),
            inner.clone().prop_map(|x| format!("({x})^2")),
            inner.clone().prop_map(|x| format!("-({x})")),
            (inner.clone(), 0.5f64..1.5).prop_map(|(x, p)| format!("(1 + ({x})^2)^{p}")),
            inner.prop_map(|x| format!("(1.5 + sin({x}))^(cos(t))")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 100,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn derivative_matches_central_difference(src in smooth_source(), t in 0.0f64..10.0) {
        let b = bindings();
        let ast = parse_expression(&src).unwrap();
        let d = differentiate(&ast);
        let h = 1e-5;
        let f = |s: f64| eval_expression(&ast, s, &b).unwrap();
        let fd = (f(t + h) - f(t - h)) / (2.0 * h);
        let exact = eval_expression(&d, t, &b).unwrap();
        // The difference quotient itself is off by h² f'''/6, so f''' enters the scale.
        let third = eval_expression(&differentiate(&differentiate(&d)), t, &b).unwrap();
        let scale = 1f64.max(f(t).abs()).max(exact.abs()).max(third.abs());
        prop_assert!((exact - fd).abs() <= 10.0 * h * h * scale,
            "{src} at t = {t}: {exact} vs {fd}");
    }

    #[test]
    fn printing_round_trips(src in smooth_source(), t in 0.0f64..10.0) {
        let b = bindings();
        let ast = parse_expression(&src).unwrap();
        let printed = ast.to_string();
        let back = parse_expression(&printed).unwrap();
        prop_assert_eq!(&back, &ast);
        prop_assert_eq!(eval_expression(&back, t, &b).unwrap().to_bits(), eval_expression(&ast, t, &b).unwrap().to_bits());
    }

    #[test]
    fn parsing_is_total(src in "[ -~]{0,24}") {
        // Either an AST or a located error, never a panic.
        if let Err(e) = parse_expression(&src) {
            prop_assert!(e.offset() <= src.len());
        }
    }
}

#[test]
fn time_dependence_and_parameters() {
    let ast: Expr = "a - 2*q*cos(2*r*t)".parse().unwrap();
    assert!(ast.depends_on_time());
    let mut params = ast.params();
    params.sort();
    assert_eq!(params, ["a", "q", "r"]);
    let bound = ast.bind(&bindings()).unwrap();
    assert!(bound.params().is_empty());
    assert_eq!(bound.eval(0.0, &Bindings::new()).unwrap(), 0.5);
}
