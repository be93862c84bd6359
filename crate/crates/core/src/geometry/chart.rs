//! Coordinate charts of a contact manifold.
//!
//! Two charts are supported:
//!
//! * Darboux `(q1..qn, p1..pn, z)` with `eta = dz - p dq` and Reeb field `d/dz`.
//! * The Sasaki–Einstein space `T^{1,1}` in `(theta1, theta2, phi1, phi2, psi)`
//!   with `eta = (dpsi + cos(theta1) dphi1 + cos(theta2) dphi2) / 3` and Reeb
//!   field `3 d/dpsi`.
//!
//! The Hamiltonian vector-field rules differ in sign convention between the
//! two charts: `eta(X_H) = sigma * H` with `sigma = -1` for Darboux and
//! `sigma = +1` for Sasaki–Einstein. The coordinate rules are authoritative;
//! `sigma` is what makes the intrinsic relations hold for both.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::expr::Expr;

/// States closer than this to `sin(theta) = 0` are rejected.
pub const SINGULAR_SIN_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    Darboux { n: usize },
    SasakiEinstein,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    kind: ChartKind,
    names: Vec<String>,
}

impl Chart {
    pub fn darboux(n: usize) -> Chart {
        let mut names = Vec::with_capacity(2 * n + 1);
        names.extend((1..=n).map(|j| format!("q{j}")));
        names.extend((1..=n).map(|j| format!("p{j}")));
        names.push("z".to_string());
        Chart {
            kind: ChartKind::Darboux { n },
            names,
        }
    }

    pub fn sasaki_einstein() -> Chart {
        Chart {
            kind: ChartKind::SasakiEinstein,
            names: ["theta1", "theta2", "phi1", "phi2", "psi"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }

    /// Looks a chart up by its config id (`"darboux"` or `"sasaki-einstein"`).
    /// `n` is only used for Darboux charts.
    pub fn from_id(id: &str, n: usize) -> Result<Chart> {
        match id {
            "darboux" => Ok(Chart::darboux(n)),
            "sasaki-einstein" => Ok(Chart::sasaki_einstein()),
            other => Err(Error::InvalidArgument(format!("unknown chart `{other}`"))),
        }
    }

    pub fn id(&self) -> &'static str {
        match self.kind {
            ChartKind::Darboux { .. } => "darboux",
            ChartKind::SasakiEinstein => "sasaki-einstein",
        }
    }

    pub fn kind(&self) -> ChartKind {
        self.kind
    }

    /// Half-dimension `n`; the chart has `2n + 1` coordinates.
    pub fn n(&self) -> usize {
        match self.kind {
            ChartKind::Darboux { n } => n,
            ChartKind::SasakiEinstein => 2,
        }
    }

    pub fn dim(&self) -> usize {
        2 * self.n() + 1
    }

    pub fn sigma(&self) -> f64 {
        match self.kind {
            ChartKind::Darboux { .. } => -1.0,
            ChartKind::SasakiEinstein => 1.0,
        }
    }

    pub fn coordinate_names(&self) -> Vec<&str> {
        self.names.iter().map(String::as_str).collect()
    }

    pub fn coordinate_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Validates length and, for Sasaki–Einstein, distance from the
    /// `sin(theta_i) = 0` coordinate singularity.
    pub fn check_state(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if self.kind == ChartKind::SasakiEinstein {
            for (i, coord) in ["theta1", "theta2"].into_iter().enumerate() {
                let s = libm::sin(x[i]);
                if !(s.abs() >= SINGULAR_SIN_THRESHOLD) {
                    return Err(Error::SingularChartPoint {
                        coordinate: coord,
                        value: s.abs(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Components of the contact form at `x`.
    pub fn contact_form(&self, x: &[f64]) -> Vec<f64> {
        let mut eta = vec![0.0; self.dim()];
        match self.kind {
            ChartKind::Darboux { n } => {
                for j in 0..n {
                    eta[j] = -x[n + j];
                }
                eta[2 * n] = 1.0;
            }
            ChartKind::SasakiEinstein => {
                eta[2] = libm::cos(x[0]) / 3.0;
                eta[3] = libm::cos(x[1]) / 3.0;
                eta[4] = 1.0 / 3.0;
            }
        }
        eta
    }

    /// Matrix of `d eta`: entry `(i, j)` is `d eta(e_i, e_j)`.
    pub fn d_eta(&self, x: &[f64]) -> DMatrix<f64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        match self.kind {
            ChartKind::Darboux { n } => {
                // d eta = sum dq_j ^ dp_j
                for j in 0..n {
                    m[(j, n + j)] = 1.0;
                    m[(n + j, j)] = -1.0;
                }
            }
            ChartKind::SasakiEinstein => {
                // d eta = -(1/3) sum sin(theta_i) dtheta_i ^ dphi_i
                for i in 0..2 {
                    let s = libm::sin(x[i]) / 3.0;
                    m[(i, 2 + i)] = -s;
                    m[(2 + i, i)] = s;
                }
            }
        }
        m
    }

    pub fn reeb(&self, _x: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.dim()];
        match self.kind {
            ChartKind::Darboux { n } => r[2 * n] = 1.0,
            ChartKind::SasakiEinstein => r[4] = 3.0,
        }
        r
    }

    /// Symbolic entries of `d eta`, row-major.
    pub fn d_eta_exprs(&self) -> Vec<Expr> {
        let dim = self.dim();
        let mut m = vec![Expr::Const(0.0); dim * dim];
        match self.kind {
            ChartKind::Darboux { n } => {
                for j in 0..n {
                    m[j * dim + n + j] = Expr::Const(1.0);
                    m[(n + j) * dim + j] = Expr::Const(-1.0);
                }
            }
            ChartKind::SasakiEinstein => {
                for i in 0..2 {
                    let s = Expr::div(Expr::sin(Expr::Var(self.names[i].clone())), Expr::Const(3.0));
                    m[i * dim + 2 + i] = Expr::neg(s.clone());
                    m[(2 + i) * dim + i] = s;
                }
            }
        }
        m
    }

    /// `iota_R dH` as an expression.
    pub fn reeb_derivative_expr(&self, h: &Expr) -> Expr {
        match self.kind {
            ChartKind::Darboux { n } => h.differentiate(&self.names[2 * n]),
            ChartKind::SasakiEinstein => Expr::mul(Expr::Const(3.0), h.differentiate("psi")),
        }
    }

    /// Contact Hamiltonian vector field of `h`, one expression per coordinate.
    pub fn vector_field_exprs(&self, h: &Expr) -> Vec<Expr> {
        let d = |name: &str| h.differentiate(name);
        match self.kind {
            ChartKind::Darboux { n } => {
                let z = &self.names[2 * n];
                let hz = d(z);
                let mut out = Vec::with_capacity(2 * n + 1);
                for j in 0..n {
                    out.push(d(&self.names[n + j]));
                }
                for j in 0..n {
                    let p = Expr::Var(self.names[n + j].clone());
                    out.push(Expr::neg(Expr::add(
                        d(&self.names[j]),
                        Expr::mul(p, hz.clone()),
                    )));
                }
                let p_hp = Expr::sum((0..n).map(|j| {
                    Expr::mul(Expr::Var(self.names[n + j].clone()), d(&self.names[n + j]))
                }));
                out.push(Expr::sub(p_hp, h.clone()));
                out
            }
            ChartKind::SasakiEinstein => {
                let three = || Expr::Const(3.0);
                let theta = |i: usize| Expr::Var(self.names[i].clone());
                let h_psi = d("psi");
                let mut out = vec![Expr::Const(0.0); 5];
                for i in 0..2 {
                    let h_phi = d(&self.names[2 + i]);
                    let h_theta = d(&self.names[i]);
                    let sin = Expr::sin(theta(i));
                    out[i] = Expr::div(
                        Expr::mul(
                            three(),
                            Expr::sub(h_phi, Expr::mul(h_psi.clone(), Expr::cos(theta(i)))),
                        ),
                        sin.clone(),
                    );
                    out[2 + i] = Expr::neg(Expr::div(Expr::mul(three(), h_theta), sin));
                }
                let cot_terms = Expr::sum((0..2).map(|i| {
                    Expr::mul(
                        Expr::div(Expr::cos(theta(i)), Expr::sin(theta(i))),
                        d(&self.names[i]),
                    )
                }));
                out[4] = Expr::mul(three(), Expr::add(h.clone(), cot_terms));
                out
            }
        }
    }

    /// `det` of `d eta` restricted to `ker eta` (orthonormal basis).
    /// Nonzero exactly when `eta ^ (d eta)^n` is a volume form at `x`.
    pub fn volume_determinant(&self, x: &[f64]) -> f64 {
        let dim = self.dim();
        if dim == 1 {
            return 1.0;
        }
        let eta = self.contact_form(x);
        let norm = libm::sqrt(eta.iter().map(|a| a * a).sum());
        let unit: Vec<f64> = eta.iter().map(|a| a / norm).collect();
        let full = orthonormal_completion(&unit);
        let basis = full.rows(1, dim - 1).transpose();
        let restricted = basis.transpose() * self.d_eta(x) * basis;
        restricted.determinant()
    }
}

/// Rows: `first` (a unit vector) followed by an orthonormal basis of its
/// complement, by Gram-Schmidt on the standard basis.
fn orthonormal_completion(first: &[f64]) -> DMatrix<f64> {
    let dim = first.len();
    let mut rows: Vec<Vec<f64>> = vec![first.to_vec()];
    for k in 0..dim {
        if rows.len() == dim {
            break;
        }
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        for r in &rows {
            let dot: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (vi, ri) in v.iter_mut().zip(r) {
                *vi -= dot * ri;
            }
        }
        let norm = libm::sqrt(v.iter().map(|a| a * a).sum());
        if norm > 1e-8 {
            v.iter_mut().for_each(|a| *a /= norm);
            rows.push(v);
        }
    }
    DMatrix::from_fn(dim, dim, |i, j| rows[i][j])
}
