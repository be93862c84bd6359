//! Built-in systems.
//!
//! * `dissipative-2d`: `H0 = (p1^2 + p2^2)/(2m) + V(q) + gamma z` on the
//!   Darboux chart with `n = 2`, driven by one constant noise Hamiltonian
//!   `H1 = -eps`, so that `dz` picks up `+eps dB`. The conformal factor is
//!   `exp(-gamma (t - t0))`.
//! * `sasaki-einstein-t11`: `H0 = 1` with noise Hamiltonians
//!   `1, cos(theta1)/3, cos(theta2)/3, phi1, phi2` on `T^{1,1}`. Every
//!   Hamiltonian is `psi`-independent, so the flow is a strict
//!   contactomorphism (`lambda = 1`).
//!
//! [`ActionAngleMap`] is the explicit change of variables
//! `(theta, phi, psi) -> (y1, y2, vartheta1, vartheta2, vartheta0)` with
//! `y_i = cos(theta_i)/3`, `vartheta_i = phi_i`, `vartheta0 = psi/3`, in which
//! the contact form reads `dvartheta0 + y1 dvartheta1 + y2 dvartheta2`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::geometry::{Chart, HamiltonianSystem};

pub const DISSIPATIVE_ID: &str = "dissipative-2d";
pub const SASAKI_EINSTEIN_ID: &str = "sasaki-einstein-t11";

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub summary: &'static str,
    /// Parameter names with their default values rendered as text.
    pub parameters: &'static [(&'static str, &'static str)],
}

pub fn entries() -> [CatalogEntry; 2] {
    [
        CatalogEntry {
            id: DISSIPATIVE_ID,
            summary: "damped mechanical system on R x T*R^2: H0 = |p|^2/(2m) + V(q) + gamma z, \
                      additive noise eps dB in the z equation; lambda_t = exp(-gamma (t - t0))",
            parameters: &[("m", "1"), ("gamma", "0.5"), ("eps", "0.1"), ("V", "(q1^2+q2^2)/2")],
        },
        CatalogEntry {
            id: SASAKI_EINSTEIN_ID,
            summary: "Reeb-type system on T^{1,1}: H0 = 1, noise Hamiltonians 1, cos(theta1)/3, \
                      cos(theta2)/3, phi1, phi2; strict contactomorphism (lambda = 1)",
            parameters: &[],
        },
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissipativeParams {
    pub m: f64,
    pub gamma: f64,
    pub eps: f64,
    pub potential: String,
}

impl Default for DissipativeParams {
    fn default() -> Self {
        DissipativeParams {
            m: 1.0,
            gamma: 0.5,
            eps: 0.1,
            potential: "(q1^2+q2^2)/2".to_string(),
        }
    }
}

pub fn dissipative_system(m: f64, gamma: f64, eps: f64, potential: &str) -> Result<HamiltonianSystem> {
    if !(m > 0.0) {
        return Err(Error::InvalidArgument(format!("m must be positive, got {m}")));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    let chart = Chart::darboux(2);
    let constants = vec![
        ("m".to_string(), m),
        ("gamma".to_string(), gamma),
        ("eps".to_string(), eps),
    ];
    let mut names = chart.coordinate_names();
    names.extend(["m", "gamma", "eps"]);
    let v = parse(potential, &names)?;
    let kinetic = parse("(p1^2 + p2^2)/(2*m)", &names)?;
    let friction = parse("gamma*z", &names)?;
    let h0 = Expr::add(Expr::add(kinetic, v), friction);
    let h1 = Expr::neg(Expr::var("eps"));
    HamiltonianSystem::new(chart, h0, vec![h1], constants)
}

pub fn dissipative_default() -> HamiltonianSystem {
    let p = DissipativeParams::default();
    dissipative_system(p.m, p.gamma, p.eps, &p.potential).expect("default parameters are valid")
}

/// `exp(-gamma (t - t0))` as an expression in `t`.
pub fn dissipative_lambda(gamma: f64, t0: f64) -> Expr {
    Expr::exp(Expr::neg(Expr::mul(
        Expr::Const(gamma),
        Expr::sub(Expr::var("t"), Expr::Const(t0)),
    )))
}

/// Stationary-in-law variance of `z_T` for the dissipative system: `z`
/// solves `dz = (f(t) - gamma z) dt + eps dB` with deterministic `f`.
pub fn dissipative_z_variance(gamma: f64, eps: f64, horizon: f64) -> f64 {
    eps * eps * (1.0 - libm::exp(-2.0 * gamma * horizon)) / (2.0 * gamma)
}

pub fn sasaki_einstein_system() -> HamiltonianSystem {
    HamiltonianSystem::from_sources(
        Chart::sasaki_einstein(),
        "1",
        &["1", "(1/3)*cos(theta1)", "(1/3)*cos(theta2)", "phi1", "phi2"],
        Vec::new(),
    )
    .expect("catalog sources parse")
}

/// `1, cos(theta1)/3, cos(theta2)/3`: the Reeb-type integrals in involution.
pub fn sasaki_einstein_integrals() -> Vec<Expr> {
    let names = Chart::sasaki_einstein();
    let names = names.coordinate_names();
    ["1", "(1/3)*cos(theta1)", "(1/3)*cos(theta2)"]
        .iter()
        .map(|s| parse(s, &names).expect("catalog sources parse"))
        .collect()
}

/// Drift and diffusion matrix of the Sasaki–Einstein system written out
/// coordinate by coordinate; column `k` multiplies `dB^{k+1}`.
pub fn sasaki_einstein_coefficients(x: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let (t1, t2, f1, f2) = (x[0], x[1], x[2], x[3]);
    let drift = vec![0.0, 0.0, 0.0, 0.0, 3.0];
    #[rustfmt::skip]
    let b = DMatrix::from_row_slice(5, 5, &[
        0.0, 0.0, 0.0, 3.0 / libm::sin(t1), 0.0,
        0.0, 0.0, 0.0, 0.0, 3.0 / libm::sin(t2),
        0.0, 1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0, 0.0,
        3.0, 0.0, 0.0, 3.0 * f1, 3.0 * f2,
    ]);
    (drift, b)
}

/// Action–angle coordinates on `T^{1,1}`, ordered `(y1, y2, vartheta1, vartheta2, vartheta0)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ActionAngleMap;

impl ActionAngleMap {
    pub fn forward(&self, x: &[f64]) -> [f64; 5] {
        [
            libm::cos(x[0]) / 3.0,
            libm::cos(x[1]) / 3.0,
            x[2],
            x[3],
            x[4] / 3.0,
        ]
    }

    /// Inverse on `theta_i in (0, pi)`; requires `|y_i| <= 1/3`.
    pub fn inverse(&self, w: &[f64]) -> Result<[f64; 5]> {
        for &y in &w[..2] {
            if !(libm::fabs(3.0 * y) <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "action {y} outside [-1/3, 1/3]"
                )));
            }
        }
        Ok([
            libm::acos(3.0 * w[0]),
            libm::acos(3.0 * w[1]),
            w[2],
            w[3],
            3.0 * w[4],
        ])
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(5, 5);
        j[(0, 0)] = -libm::sin(x[0]) / 3.0;
        j[(1, 1)] = -libm::sin(x[1]) / 3.0;
        j[(2, 2)] = 1.0;
        j[(3, 3)] = 1.0;
        j[(4, 4)] = 1.0 / 3.0;
        j
    }

    /// Pushes the system's drift and diffusion through `DPhi`. Stratonovich
    /// calculus obeys the ordinary chain rule, so no correction term appears.
    pub fn pushforward(&self, sys: &HamiltonianSystem, x: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        sys.chart().check_state(x)?;
        let (drift, diffusion) = crate::flow::drift_diffusion(sys, x)?;
        let j = self.jacobian(x);
        let a = &j * nalgebra::DVector::from_vec(drift);
        let cols: Vec<_> = diffusion
            .into_iter()
            .map(|c| &j * nalgebra::DVector::from_vec(c))
            .collect();
        let b = DMatrix::from_columns(&cols);
        Ok((a.iter().copied().collect(), b))
    }

    /// Drift and diffusion of the Sasaki–Einstein system expressed in
    /// action–angle coordinates `w`, obtained by differentiating the map
    /// by hand: `dy_i = -dB^{i+3}`, `dvartheta_i = dB^{i+1}`,
    /// `dvartheta0 = dt + dB^1 + vartheta1 dB^4 + vartheta2 dB^5`.
    pub fn transformed_coefficients(&self, w: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
        let drift = vec![0.0, 0.0, 0.0, 0.0, 1.0];
        #[rustfmt::skip]
        let b = DMatrix::from_row_slice(5, 5, &[
            0.0, 0.0, 0.0, -1.0, 0.0,
            0.0, 0.0, 0.0, 0.0, -1.0,
            0.0, 1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0, 0.0,
            1.0, 0.0, 0.0, w[2], w[3],
        ]);
        (drift, b)
    }

    /// `dvartheta0 + y1 dvartheta1 + y2 dvartheta2` at `w`, in the map's coordinate order.
    pub fn canonical_form(&self, w: &[f64]) -> [f64; 5] {
        [0.0, 0.0, w[0], w[1], 1.0]
    }

    /// `(DPhi)^T eta0(Phi(x))`, to be compared with the chart's contact form.
    pub fn pulled_back_form(&self, x: &[f64]) -> Vec<f64> {
        let eta0 = nalgebra::DVector::from_row_slice(&self.canonical_form(&self.forward(x)));
        (self.jacobian(x).transpose() * eta0).iter().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dissipative_drift_at_reference_state() {
        let sys = dissipative_default();
        let x = [1.0, 0.0, 2.0, 0.0, 0.0];
        assert_eq!(sys.contact_vector_field(0, &x).unwrap(), vec![2.0, 0.0, -2.0, 0.0, 1.5]);
        assert_eq!(sys.contact_vector_field(1, &x).unwrap(), vec![0.0, 0.0, 0.0, 0.0, 0.1]);
    }

    #[test]
    fn dissipative_rejects_bad_parameters() {
        assert!(dissipative_system(0.0, 0.5, 0.1, "q1").is_err());
        assert!(dissipative_system(1.0, -0.5, 0.1, "q1").is_err());
        assert!(matches!(
            dissipative_system(1.0, 0.5, 0.1, "q3^2"),
            Err(Error::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn lambda_closed_form_at_horizon() {
        let e = dissipative_lambda(0.5, 0.0);
        let v = e.eval(&crate::expr::EvalContext::from_pairs([("t", 2.0)])).unwrap();
        assert!((v - 0.36787944117144233).abs() < 1e-16);
    }

    #[test]
    fn z_variance_oracle_value() {
        assert!((dissipative_z_variance(0.5, 0.1, 1.0) - 0.006321205588285577).abs() < 1e-15);
    }

    #[test]
    fn sasaki_einstein_drift_and_column_four() {
        let sys = sasaki_einstein_system();
        let x = [core::f64::consts::FRAC_PI_2, 1.0, 0.7, -0.2, 2.0];
        let (a, b) = crate::flow::drift_diffusion(&sys, &x).unwrap();
        assert_eq!(a, vec![0.0, 0.0, 0.0, 0.0, 3.0]);
        let col4 = &b[3];
        let expected = [3.0, 0.0, 0.0, 0.0, 3.0 * 0.7];
        for (g, e) in col4.iter().zip(expected) {
            assert!((g - e).abs() < 1e-15, "{col4:?}");
        }
    }

    #[test]
    fn action_angle_round_trip_point() {
        let m = ActionAngleMap;
        let x = [0.4, 2.9, -1.0, 3.0, 7.0];
        let back = m.inverse(&m.forward(&x)).unwrap();
        for (a, b) in back.iter().zip(x) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(m.inverse(&[0.5, 0.0, 0.0, 0.0, 0.0]).is_err());
    }
}
