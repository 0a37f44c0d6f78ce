use std::f64::consts::LN_2;

use kset::catalog::DEFAULT_TRUNCATION_TOL;
use kset::{Complex64, FunctionKind, FunctionSpec, LogPolar, LogRadii, Point};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn reference_values() {
    let v = FunctionSpec::fatou().eval(c(0.0, 0.0)).unwrap().value.unwrap();
    assert_eq!(v, c(2.0, 0.0));
    let d = FunctionSpec::fatou().eval_derivative(c(0.0, 0.0)).unwrap().value.unwrap();
    assert_eq!(d, c(0.0, 0.0));
    let v = FunctionSpec::prod_pow2().eval(c(-2.0, 0.0)).unwrap();
    assert!(v.abs() == 0.0 && v.log_abs == f64::NEG_INFINITY);
}

#[test]
fn grammar_literals() {
    for (text, ok) in [
        ("lambda-exp:0.3", true),
        ("fatou", true),
        ("sine", true),
        ("quad:-2+0i", true),
        ("prod2n", true),
        ("surgery:gamma=24,levels=8", true),
        ("bd:k=1,base=3", true),
        ("poly:1,0,1", true),
        ("nosuch", false),
        ("quad:", false),
        ("surgery:gamma=24,levels=1", false),
    ] {
        assert_eq!(FunctionSpec::parse(text).is_ok(), ok, "{text}");
    }
}

#[test]
fn truncation_doubling() {
    for r in [1.0, 24.0, 1e3, 1e6] {
        let spec = FunctionSpec::prod_pow2();
        let n = spec.truncation_index(r);
        let doubled = FunctionSpec::new(FunctionKind::BdProduct {
            k: 1.0,
            log_radii: LogRadii::Explicit((1..=2 * n).map(|j| j as f64 * LN_2).collect()),
        })
        .unwrap();
        for theta in [0.0, 1.0, 2.5, 3.0] {
            let z = Complex64::from_polar(r, theta);
            let a = spec.eval(z).unwrap().log_abs;
            let b = doubled.eval(z).unwrap().log_abs;
            assert!((a - b).abs() < 2.0 * DEFAULT_TRUNCATION_TOL, "r = {r}: {a} vs {b}");
        }
    }
}

proptest! {
    #[test]
    fn prod2n_lower_bound(x in 1e-6..1e6f64) {
        let v = FunctionSpec::prod_pow2().eval(c(x, 0.0)).unwrap();
        prop_assert!(v.log_abs >= 2.0 * (x / 2.0).ln_1p() - 1e-12);
    }

    #[test]
    fn lambda_exp_log_abs_exact(lambda in 1e-3..10.0f64, x in -700.0..700.0f64, y in -50.0..50.0f64) {
        let v = FunctionSpec::lambda_exp(lambda).eval(c(x, y)).unwrap();
        prop_assert!((v.log_abs - (lambda.ln() + x)).abs() < 1e-12 * (1.0 + x.abs()));
    }

    #[test]
    fn grammar_round_trip(re in -3.0..3.0f64, im in -3.0..3.0f64, lambda in 0.01..5.0f64) {
        for spec in [FunctionSpec::quadratic(c(re, im)), FunctionSpec::lambda_exp(lambda),
                     FunctionSpec::poly(vec![c(re, 0.0), c(0.0, im), c(1.0, 0.0)])] {
            let text = spec.to_string();
            let back = FunctionSpec::parse(&text).unwrap();
            prop_assert_eq!(back.to_string(), text.clone());
            let z = c(0.3, -0.7);
            prop_assert_eq!(back.eval(z).unwrap().value, spec.eval(z).unwrap().value);
        }
    }

    #[test]
    fn polar_agrees_with_cartesian(rho in 0.01..50.0f64, theta in -3.1..3.1f64) {
        let z = Complex64::from_polar(rho, theta);
        for spec in [FunctionSpec::prod_pow2(), FunctionSpec::bd_default(), FunctionSpec::sine(),
                     FunctionSpec::lambda_exp(0.3), FunctionSpec::monomial(3)] {
            let a = spec.eval_point(Point::Cartesian(z)).unwrap();
            let b = spec.eval_point(Point::Polar(LogPolar::from_complex(z))).unwrap();
            prop_assert!((a.log_abs - b.log_abs).abs() < 1e-9 * (1.0 + a.log_abs.abs()), "{}", spec);
        }
    }
}
