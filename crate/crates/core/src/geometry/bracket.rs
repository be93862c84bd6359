//! Jacobi bracket, Reeb derivatives and the complete-integrability check.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::chart::Chart;
use super::system::HamiltonianSystem;
use crate::error::{Error, Result};
use crate::expr::Expr;

/// `[f, g] = -d eta(X_g, X_f) + f R(g) - g R(f)` at `x`.
pub fn jacobi_bracket(sys: &HamiltonianSystem, f: &Expr, g: &Expr, x: &[f64]) -> Result<f64> {
    let cf = sys.compile_function(f)?;
    let cg = sys.compile_function(g)?;
    bracket_compiled(sys, &cf, &cg, x)
}

pub(crate) fn bracket_compiled(
    sys: &HamiltonianSystem,
    f: &super::CompiledFunction,
    g: &super::CompiledFunction,
    x: &[f64],
) -> Result<f64> {
    let chart = sys.chart();
    let xf = sys.function_field(f, x)?;
    let xg = sys.function_field(g, x)?;
    let omega = chart.d_eta(x);
    let dim = chart.dim();
    let mut two_form = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            two_form += xg[i] * omega[(i, j)] * xf[j];
        }
    }
    let fv = sys.function_value(f, x)?;
    let gv = sys.function_value(g, x)?;
    let rf = sys.function_reeb(f, x)?;
    let rg = sys.function_reeb(g, x)?;
    Ok(-two_form + fv * rg - gv * rf)
}

/// The bracket as an expression, so it can be nested or differentiated.
pub fn bracket_expr(chart: &Chart, f: &Expr, g: &Expr) -> Expr {
    let dim = chart.dim();
    let xf = chart.vector_field_exprs(f);
    let xg = chart.vector_field_exprs(g);
    let omega = chart.d_eta_exprs();
    let mut terms = Vec::new();
    for i in 0..dim {
        for j in 0..dim {
            let w = &omega[i * dim + j];
            if w.constant_value() == Some(0.0) {
                continue;
            }
            terms.push(Expr::mul(Expr::mul(xg[i].clone(), w.clone()), xf[j].clone()));
        }
    }
    let two_form = Expr::sum(terms);
    Expr::sub(
        Expr::sub(
            Expr::mul(f.clone(), chart.reeb_derivative_expr(g)),
            Expr::mul(g.clone(), chart.reeb_derivative_expr(f)),
        ),
        two_form,
    )
}

/// `iota_R df` at `x`.
pub fn reeb_derivative(sys: &HamiltonianSystem, f: &Expr, x: &[f64]) -> Result<f64> {
    let cf = sys.compile_function(f)?;
    sys.function_reeb(&cf, x)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairBracket {
    pub i: usize,
    pub j: usize,
    /// Largest `|[h_i, h_j]|` over the samples.
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntegrabilityReport {
    pub integrals: Vec<alloc::string::String>,
    pub n_samples: usize,
    pub tolerance: f64,
    pub independence_threshold: f64,
    /// Largest `|[h_i, h_j]|` over all pairs `i < j` and samples.
    pub max_involution: f64,
    /// Largest `|[h_i, 1]|`.
    pub max_reeb: f64,
    /// Smallest singular value of the `(n+1) x (2n+1)` field matrix, minimized over samples.
    pub min_singular_value: f64,
    pub pair_brackets: Vec<PairBracket>,
    pub involution_pass: bool,
    pub independence_pass: bool,
    pub pass: bool,
}

pub const INDEPENDENCE_THRESHOLD: f64 = 1e-6;

/// Checks that `integrals` (with `h0 = 1` first) are in involution, are
/// Reeb first integrals, and have linearly independent contact fields at
/// every sample.
pub fn check_integrability(
    sys: &HamiltonianSystem,
    integrals: &[Expr],
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<IntegrabilityReport> {
    let chart = sys.chart();
    let expected = chart.n() + 1;
    if integrals.len() != expected {
        return Err(Error::WrongIntegralCount {
            expected,
            found: integrals.len(),
        });
    }
    let compiled = integrals
        .iter()
        .map(|h| sys.compile_function(h))
        .collect::<Result<Vec<_>>>()?;
    let one = sys.compile_function(&Expr::Const(1.0))?;

    let k = integrals.len();
    let mut pairs: Vec<PairBracket> = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            pairs.push(PairBracket { i, j, max_abs: 0.0 });
        }
    }
    let mut max_reeb = 0.0f64;
    let mut min_sv = f64::INFINITY;
    for x in samples {
        for p in pairs.iter_mut() {
            let b = bracket_compiled(sys, &compiled[p.i], &compiled[p.j], x)?;
            p.max_abs = p.max_abs.max(b.abs());
        }
        let mut fields = DMatrix::zeros(k, chart.dim());
        for (i, h) in compiled.iter().enumerate() {
            max_reeb = max_reeb.max(bracket_compiled(sys, h, &one, x)?.abs());
            let v = sys.function_field(h, x)?;
            for (c, val) in v.into_iter().enumerate() {
                fields[(i, c)] = val;
            }
        }
        let sv = fields.singular_values();
        min_sv = min_sv.min(sv.iter().copied().fold(f64::INFINITY, f64::min));
    }
    let max_involution = pairs.iter().map(|p| p.max_abs).fold(0.0, f64::max);
    let involution_pass = max_involution <= tol && max_reeb <= tol;
    let independence_pass = min_sv > INDEPENDENCE_THRESHOLD;
    Ok(IntegrabilityReport {
        integrals: integrals.iter().map(alloc::string::ToString::to_string).collect(),
        n_samples: samples.len(),
        tolerance: tol,
        independence_threshold: INDEPENDENCE_THRESHOLD,
        max_involution,
        max_reeb,
        min_singular_value: min_sv,
        pair_brackets: pairs,
        involution_pass,
        independence_pass,
        pass: involution_pass && independence_pass,
    })
}

/// Residuals of two candidate weak Leibniz rules for `[f, g h]`:
/// the constant-correction form `[f,g] h + g [f,h] - [f,1]` and the
/// product-correction form `[f,g] h + g [f,h] - g h [f,1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LeibnizDiagnostic {
    pub constant_correction_residual: f64,
    pub product_correction_residual: f64,
}

pub fn weak_leibniz_diagnostic(
    sys: &HamiltonianSystem,
    f: &Expr,
    g: &Expr,
    h: &Expr,
    x: &[f64],
) -> Result<LeibnizDiagnostic> {
    let gh = Expr::mul(g.clone(), h.clone());
    let lhs = jacobi_bracket(sys, f, &gh, x)?;
    let fg = jacobi_bracket(sys, f, g, x)?;
    let fh = jacobi_bracket(sys, f, h, x)?;
    let f1 = jacobi_bracket(sys, f, &Expr::Const(1.0), x)?;
    let gv = sys.eval_expr(g, x)?;
    let hv = sys.eval_expr(h, x)?;
    let base = fg * hv + gv * fh;
    Ok(LeibnizDiagnostic {
        constant_correction_residual: (lhs - (base - f1)).abs(),
        product_correction_residual: (lhs - (base - gv * hv * f1)).abs(),
    })
}
