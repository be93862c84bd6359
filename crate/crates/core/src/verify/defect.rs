use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::expr::{EvalContext, Expr};
use crate::flow::{integrate_final, AugmentedTrajectory, BrownianPath, Scheme, SdeSystem};
use crate::geometry::Chart;

/// Residual of `phi_t^* eta = lambda_t eta` along a trajectory.
///
/// `residuals[s][j] = sum_i eta_i(x_s) J_s[i][j] - lambda_s eta_j(x_0)`; the
/// `q`, `p` and `z` blocks of `j` are the derivatives with respect to the
/// corresponding initial coordinates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContactDefectReport {
    pub times: Vec<f64>,
    pub residuals: Vec<Vec<f64>>,
    pub sup_norms: Vec<f64>,
    pub max: f64,
}

pub fn contact_defect(traj: &AugmentedTrajectory, chart: &Chart) -> Result<ContactDefectReport> {
    let dim = chart.dim();
    let first = traj
        .states
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty trajectory".into()))?;
    if first.x.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: first.x.len(),
        });
    }
    let eta0 = chart.contact_form(&first.x);
    let mut report = ContactDefectReport {
        times: traj.times.clone(),
        residuals: Vec::with_capacity(traj.states.len()),
        sup_norms: Vec::with_capacity(traj.states.len()),
        max: 0.0,
    };
    for st in &traj.states {
        if st.jacobian.nrows() != dim || st.jacobian.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: st.jacobian.nrows(),
            });
        }
        let eta = chart.contact_form(&st.x);
        let lambda = st.lambda();
        let mut sup = 0.0f64;
        let r: Vec<f64> = (0..dim)
            .map(|j| {
                let mut acc = 0.0;
                for (i, e) in eta.iter().enumerate() {
                    acc += e * st.jacobian[(i, j)];
                }
                let v = acc - lambda * eta0[j];
                sup = sup.max(libm::fabs(v));
                v
            })
            .collect();
        report.max = report.max.max(sup);
        report.sup_norms.push(sup);
        report.residuals.push(r);
    }
    Ok(report)
}

/// `max_s |exp(log_lambda_s) - closed_form(t_s)|`, where `closed_form` may
/// only mention `t`.
pub fn conformal_factor_deviation(times: &[f64], log_lambda: &[f64], closed_form: &Expr) -> Result<f64> {
    if let Some(v) = closed_form.free_vars().into_iter().find(|v| v != "t") {
        return Err(Error::UnknownIdentifier { name: v });
    }
    if times.len() != log_lambda.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            found: log_lambda.len(),
        });
    }
    let mut ctx = EvalContext::new();
    let mut worst = 0.0f64;
    for (&t, &ll) in times.iter().zip(log_lambda) {
        ctx.set("t", t);
        let d = libm::fabs(libm::exp(ll) - closed_form.eval(&ctx)?);
        if d.is_nan() {
            return Ok(f64::NAN);
        }
        worst = worst.max(d);
    }
    Ok(worst)
}

pub fn conformal_factor_check(traj: &AugmentedTrajectory, closed_form: &Expr) -> Result<f64> {
    let ll: Vec<f64> = traj.states.iter().map(|s| s.log_lambda).collect();
    conformal_factor_deviation(&traj.times, &ll, closed_form)
}

/// Central differences of the final state with respect to each initial
/// coordinate, re-integrating on the same path.
pub fn finite_difference_jacobian<S: SdeSystem + ?Sized>(
    sys: &S,
    x0: &[f64],
    path: &BrownianPath,
    scheme: Scheme,
    h: f64,
) -> Result<DMatrix<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("difference step must be positive, got {h}")));
    }
    let dim = sys.dim();
    let mut jac = DMatrix::zeros(dim, dim);
    let mut xp = x0.to_vec();
    for j in 0..dim {
        xp[j] = x0[j] + h;
        let plus = integrate_final(sys, &xp, path, scheme)?;
        xp[j] = x0[j] - h;
        let minus = integrate_final(sys, &xp, path, scheme)?;
        xp[j] = x0[j];
        for i in 0..dim {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// `||a - b||_F / ||b||_F` (absolute when `b` vanishes).
pub fn relative_frobenius_error(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let diff = (a - b).norm();
    let scale = b.norm();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}
