//! Expression-layer properties: normalization idempotence, exact zero
//! decisions on polynomials, the Leibniz rule, and derivative agreement with
//! the central-difference oracle.

mod common;

use common::{central_diff, float_points, rel_close, ORACLE_POINTS};
use courant::chart::Chart;
use courant::expr::{
    classify_zero, normalize, parse_expr, Expr, SampleConfig, ZeroVerdict,
};
use proptest::prelude::*;

fn chart3() -> Chart {
    Chart::new(vec!["x1", "x2", "x3"]).unwrap()
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-6i64..=6).prop_map(Expr::int),
        ((-6i64..=6), (1i64..=4)).prop_map(|(n, d)| Expr::rat(n, d)),
        prop_oneof![Just("x1"), Just("x2"), Just("x3")].prop_map(Expr::coord),
    ];
    leaf.prop_recursive(4, 64, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::div(a, b)),
            (inner.clone(), 0i32..=3).prop_map(|(a, k)| Expr::pow(a, k)),
            inner.clone().prop_map(Expr::neg),
            inner.clone().prop_map(Expr::sin),
            inner.clone().prop_map(Expr::cos),
            inner.prop_map(Expr::exp),
        ]
    })
}

fn arb_polynomial() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-6i64..=6).prop_map(Expr::int),
        prop_oneof![Just("x1"), Just("x2"), Just("x3")].prop_map(Expr::coord),
    ];
    leaf.prop_recursive(3, 32, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), 0i32..=3).prop_map(|(a, k)| Expr::pow(a, k)),
            inner.prop_map(Expr::neg),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalize_is_idempotent(e in arb_expr()) {
        let chart = chart3();
        let _ = &chart;
        if let Ok(n1) = normalize(&e) {
            let n2 = normalize(&n1).expect("normal forms stay normalizable");
            prop_assert_eq!(n1, n2);
        }
    }

    #[test]
    fn polynomial_zero_is_decided_exactly(e in arb_polynomial()) {
        let chart = chart3();
        let cfg = SampleConfig::default();
        // e - e is identically zero and must be decided without sampling
        let diff = Expr::sub(e.clone(), e.clone());
        prop_assert!(matches!(classify_zero(&diff, &chart, &cfg), ZeroVerdict::Zero));
        // e + 1 - e is the nonzero constant 1
        let one = Expr::sub(Expr::add(e.clone(), Expr::one()), e);
        prop_assert!(matches!(classify_zero(&one, &chart, &cfg), ZeroVerdict::NonZero(_)));
    }

    #[test]
    fn display_round_trips_semantically(e in arb_expr()) {
        // rendered expressions (reports, emitted model blocks) must re-parse
        // to the same function
        let chart = chart3();
        let text = e.to_string();
        let reparsed = parse_expr(&text, &chart).expect("rendered text parses");
        match (normalize(&e), normalize(&reparsed)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "normalization disagreement: {:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn leibniz_rule(e1 in arb_polynomial(), e2 in arb_polynomial()) {
        let chart = chart3();
        let cfg = SampleConfig::default();
        let product = Expr::mul(e1.clone(), e2.clone()).diff("x2");
        let expanded = Expr::add(
            Expr::mul(e1.diff("x2"), e2.clone()),
            Expr::mul(e1, e2.diff("x2")),
        );
        let residual = Expr::sub(product, expanded);
        prop_assert!(classify_zero(&residual, &chart, &cfg).is_exactly_zero());
    }
}

#[test]
fn derivative_matches_central_difference() {
    let chart = chart3();
    let e = parse_expr("x1*x2^3", &chart).unwrap();
    let sym = e.diff("x2");
    let expected = parse_expr("3*x1*x2^2", &chart).unwrap();
    common::assert_expr_eq(&sym, &expected, &chart);
    for p in float_points(&chart, ORACLE_POINTS) {
        let sym_v = sym.eval_f64(&chart, &p).unwrap();
        let num_v = central_diff(&e, &chart, &p, 1);
        assert!(rel_close(sym_v, num_v), "{sym_v} vs {num_v}");
    }
}

#[test]
fn derivative_oracle_on_mixed_expressions() {
    let chart = chart3();
    for text in ["sin(x1*x2) + exp(x3)", "x1/(1 + x2^2)", "cos(x1)^2 * x3"] {
        let e = parse_expr(text, &chart).unwrap();
        for c in 0..3 {
            let sym = e.diff(chart.name(c));
            for p in float_points(&chart, ORACLE_POINTS) {
                let sym_v = sym.eval_f64(&chart, &p).unwrap();
                let num_v = central_diff(&e, &chart, &p, c);
                assert!(rel_close(sym_v, num_v), "{text} d{c}: {sym_v} vs {num_v}");
            }
        }
    }
}

#[test]
fn classify_zero_catalog_verdicts() {
    let chart = chart3();
    let cfg = SampleConfig::default();
    let cases = [
        ("(x1+1)^2 - x1^2 - 2*x1 - 1", "zero"),
        ("sin(x1)^2 + cos(x1)^2 - 1", "sampled"),
        ("x1", "nonzero"),
    ];
    for (text, expected) in cases {
        let verdict = classify_zero(&parse_expr(text, &chart).unwrap(), &chart, &cfg);
        match expected {
            "zero" => assert!(matches!(verdict, ZeroVerdict::Zero)),
            "sampled" => assert!(matches!(verdict, ZeroVerdict::SampledZero)),
            _ => assert!(matches!(verdict, ZeroVerdict::NonZero(_))),
        }
    }
}

#[test]
fn sampling_is_reproducible() {
    let chart = chart3();
    let cfg = SampleConfig::default();
    let e = parse_expr("sin(x1) - x2", &chart).unwrap();
    let a = classify_zero(&e, &chart, &cfg);
    let b = classify_zero(&e, &chart, &cfg);
    assert_eq!(a, b);
}
