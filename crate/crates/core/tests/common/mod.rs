#![allow(dead_code)]

use contact_core::Expr;
use proptest::prelude::*;

/// Random smooth expressions over `names` whose evaluation is finite
/// everywhere: denominators are `2 + sin(.)` and log arguments `1.5 + cos(.)`.
pub fn smooth_expr(names: &'static [&'static str], depth: u32) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-2.0..2.0f64).prop_map(Expr::Const),
        proptest::sample::select(names).prop_map(Expr::var),
    ];
    leaf.prop_recursive(depth, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::div(a, Expr::add(Expr::Const(2.0), Expr::sin(b)))),
            (inner.clone(), 0u8..4).prop_map(|(a, k)| Expr::pow(a, Expr::Const(k as f64))),
            inner
                .clone()
                .prop_map(|a| Expr::pow(Expr::add(Expr::Const(1.0), Expr::mul(a.clone(), a)), Expr::Const(0.5))),
            inner.clone().prop_map(Expr::sin),
            inner.clone().prop_map(Expr::cos),
            inner.clone().prop_map(Expr::neg),
            inner.clone().prop_map(|a| Expr::exp(Expr::sin(a))),
            inner.prop_map(|a| Expr::log(Expr::add(Expr::Const(1.5), Expr::cos(a)))),
        ]
    })
}

pub fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.5..1.5f64, dim)
}

/// Sasaki–Einstein states with `theta` away from the poles.
pub fn se_point() -> impl Strategy<Value = Vec<f64>> {
    (0.1..std::f64::consts::PI - 0.1, 0.1..std::f64::consts::PI - 0.1, -3.0..3.0f64, -3.0..3.0f64, 0.0..12.0f64)
        .prop_map(|(a, b, c, d, e)| vec![a, b, c, d, e])
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}
