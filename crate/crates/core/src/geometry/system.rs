use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::{parse, Expr, Tape};

/// A function on the chart compiled together with its gradient, contact
/// vector field, field Jacobian and Reeb derivative.
#[derive(Debug, Clone)]
pub struct CompiledFunction {
    expr: Expr,
    value: Tape,
    gradient: Vec<Tape>,
    field: Vec<Tape>,
    /// `d X_i / d x_j`, row-major.
    field_jacobian: Vec<Tape>,
    reeb: Tape,
}

impl CompiledFunction {
    fn new(chart: &Chart, expr: Expr, layout: &[&str], with_jacobian: bool) -> Result<Self> {
        let names = chart.coordinate_names();
        let gradient = names
            .iter()
            .map(|v| Tape::compile(&expr.differentiate(v), layout))
            .collect::<Result<Vec<_>>>()?;
        let field_exprs = chart.vector_field_exprs(&expr);
        let field = field_exprs
            .iter()
            .map(|e| Tape::compile(e, layout))
            .collect::<Result<Vec<_>>>()?;
        let field_jacobian = if with_jacobian {
            let mut out = Vec::with_capacity(names.len() * names.len());
            for fe in &field_exprs {
                for v in &names {
                    out.push(Tape::compile(&fe.differentiate(v), layout)?);
                }
            }
            out
        } else {
            Vec::new()
        };
        Ok(CompiledFunction {
            value: Tape::compile(&expr, layout)?,
            reeb: Tape::compile(&chart.reeb_derivative_expr(&expr), layout)?,
            expr,
            gradient,
            field,
            field_jacobian,
        })
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

/// Chart, drift Hamiltonian `H0`, noise Hamiltonians `H1..Hd` and named
/// constants, with all vector fields and their Jacobians precompiled.
///
/// Hamiltonian index `0` is the drift; `1..=d` are the diffusion terms.
#[derive(Debug, Clone)]
pub struct HamiltonianSystem {
    chart: Chart,
    constants: Vec<(String, f64)>,
    hamiltonians: Vec<CompiledFunction>,
}

impl HamiltonianSystem {
    pub fn new(
        chart: Chart,
        drift: Expr,
        noise: Vec<Expr>,
        constants: Vec<(String, f64)>,
    ) -> Result<Self> {
        for (name, value) in &constants {
            if chart.coordinate_index(name).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "constant `{name}` shadows a chart coordinate"
                )));
            }
            if !value.is_finite() {
                return Err(Error::InvalidArgument(format!("constant `{name}` is not finite")));
            }
        }
        let mut sys = HamiltonianSystem {
            chart,
            constants,
            hamiltonians: Vec::new(),
        };
        let layout_owned = sys.layout();
        let layout: Vec<&str> = layout_owned.iter().map(String::as_str).collect();
        for h in core::iter::once(drift).chain(noise) {
            for v in h.free_vars() {
                if !layout.contains(&v.as_str()) {
                    return Err(Error::UnknownIdentifier { name: v });
                }
            }
            let compiled = CompiledFunction::new(&sys.chart, h, &layout, true)?;
            sys.hamiltonians.push(compiled);
        }
        Ok(sys)
    }

    /// Parses the Hamiltonians from source text over the chart coordinates
    /// and the given constants.
    pub fn from_sources(
        chart: Chart,
        drift: &str,
        noise: &[&str],
        constants: Vec<(String, f64)>,
    ) -> Result<Self> {
        let mut names: Vec<&str> = chart.coordinate_names();
        names.extend(constants.iter().map(|(n, _)| n.as_str()));
        let h0 = parse(drift, &names)?;
        let hk = noise
            .iter()
            .map(|s| parse(s, &names))
            .collect::<Result<Vec<_>>>()?;
        drop(names);
        Self::new(chart, h0, hk, constants)
    }

    fn layout(&self) -> Vec<String> {
        let mut out: Vec<String> = self.chart.coordinate_names().iter().map(|s| String::from(*s)).collect();
        out.extend(self.constants.iter().map(|(n, _)| n.clone()));
        out
    }

    /// Names accepted in expressions over this system: coordinates, then constants.
    pub fn declared_names(&self) -> Vec<&str> {
        let mut names = self.chart.coordinate_names();
        names.extend(self.constants.iter().map(|(n, _)| n.as_str()));
        names
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn constants(&self) -> &[(String, f64)] {
        &self.constants
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// Number of noise Hamiltonians `d`.
    pub fn noise_dim(&self) -> usize {
        self.hamiltonians.len() - 1
    }

    pub fn hamiltonian(&self, i: usize) -> &Expr {
        &self.hamiltonians[i].expr
    }

    pub(crate) fn slots(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.chart.check_state(x)?;
        let mut s = Vec::with_capacity(x.len() + self.constants.len());
        s.extend_from_slice(x);
        s.extend(self.constants.iter().map(|(_, v)| *v));
        Ok(s)
    }

    fn index(&self, i: usize) -> Result<&CompiledFunction> {
        self.hamiltonians.get(i).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "Hamiltonian index {i} out of range 0..={}",
                self.noise_dim()
            ))
        })
    }

    /// Compiles an arbitrary function over this system's names.
    pub fn compile_function(&self, f: &Expr) -> Result<CompiledFunction> {
        let layout_owned = self.layout();
        let layout: Vec<&str> = layout_owned.iter().map(String::as_str).collect();
        CompiledFunction::new(&self.chart, f.clone(), &layout, false)
    }

    /// Compiles `f` to a tape over this system's slot layout.
    pub fn compile_expr(&self, f: &Expr) -> Result<Tape> {
        let layout_owned = self.layout();
        let layout: Vec<&str> = layout_owned.iter().map(String::as_str).collect();
        Tape::compile(f, &layout)
    }

    /// Evaluates a tape produced by [`Self::compile_expr`] at state `x`.
    pub fn eval_tape(&self, tape: &Tape, x: &[f64]) -> Result<f64> {
        tape.eval(&self.slots(x)?)
    }

    pub fn eval_expr(&self, f: &Expr, x: &[f64]) -> Result<f64> {
        self.eval_tape(&self.compile_expr(f)?, x)
    }

    pub fn hamiltonian_value(&self, i: usize, x: &[f64]) -> Result<f64> {
        let h = self.index(i)?;
        h.value.eval(&self.slots(x)?)
    }

    /// `X_{H_i}(x)`.
    pub fn contact_vector_field(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        let h = self.index(i)?;
        let slots = self.slots(x)?;
        eval_all(&h.field, &slots)
    }

    pub fn field_jacobian(&self, i: usize, x: &[f64]) -> Result<DMatrix<f64>> {
        let h = self.index(i)?;
        let slots = self.slots(x)?;
        let dim = self.dim();
        let vals = eval_all(&h.field_jacobian, &slots)?;
        Ok(DMatrix::from_row_slice(dim, dim, &vals))
    }

    /// `iota_R dH_i` at `x`.
    pub fn reeb_rate(&self, i: usize, x: &[f64]) -> Result<f64> {
        let h = self.index(i)?;
        h.reeb.eval(&self.slots(x)?)
    }

    /// Evaluates all `d + 1` fields into `out` (row `i` = `X_{H_i}`).
    pub fn eval_fields_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let slots = self.slots(x)?;
        let dim = self.dim();
        for (i, h) in self.hamiltonians.iter().enumerate() {
            for (c, t) in h.field.iter().enumerate() {
                out[i * dim + c] = t.eval(&slots)?;
            }
        }
        Ok(())
    }

    pub fn eval_jacobians_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let slots = self.slots(x)?;
        let block = self.dim() * self.dim();
        for (i, h) in self.hamiltonians.iter().enumerate() {
            for (c, t) in h.field_jacobian.iter().enumerate() {
                out[i * block + c] = t.eval(&slots)?;
            }
        }
        Ok(())
    }

    pub fn eval_reeb_rates_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let slots = self.slots(x)?;
        for (i, h) in self.hamiltonians.iter().enumerate() {
            out[i] = h.reeb.eval(&slots)?;
        }
        Ok(())
    }

    /// Residuals of the intrinsic relations `eta(X) = sigma H` and
    /// `dH = -sigma iota_X d eta + R(H) eta` at `x` (sup norm for the second).
    pub fn check_intrinsic_relations(&self, i: usize, x: &[f64]) -> Result<(f64, f64)> {
        let h = self.index(i)?;
        intrinsic_residuals(self, h, x)
    }

    /// As [`Self::check_intrinsic_relations`], for any compiled function.
    pub fn intrinsic_residuals_of(&self, f: &CompiledFunction, x: &[f64]) -> Result<(f64, f64)> {
        intrinsic_residuals(self, f, x)
    }

    pub fn function_value(&self, f: &CompiledFunction, x: &[f64]) -> Result<f64> {
        f.value.eval(&self.slots(x)?)
    }

    pub fn function_gradient(&self, f: &CompiledFunction, x: &[f64]) -> Result<Vec<f64>> {
        eval_all(&f.gradient, &self.slots(x)?)
    }

    pub fn function_field(&self, f: &CompiledFunction, x: &[f64]) -> Result<Vec<f64>> {
        eval_all(&f.field, &self.slots(x)?)
    }

    pub fn function_reeb(&self, f: &CompiledFunction, x: &[f64]) -> Result<f64> {
        f.reeb.eval(&self.slots(x)?)
    }
}

fn eval_all(tapes: &[Tape], slots: &[f64]) -> Result<Vec<f64>> {
    tapes.iter().map(|t| t.eval(slots)).collect()
}

fn intrinsic_residuals(
    sys: &HamiltonianSystem,
    f: &CompiledFunction,
    x: &[f64],
) -> Result<(f64, f64)> {
    let chart = sys.chart();
    let slots = sys.slots(x)?;
    let value = f.value.eval(&slots)?;
    let field = eval_all(&f.field, &slots)?;
    let grad = eval_all(&f.gradient, &slots)?;
    let eta = chart.contact_form(x);
    let omega = chart.d_eta(x);
    let sigma = chart.sigma();
    let reeb_h: f64 = chart.reeb(x).iter().zip(&grad).map(|(r, g)| r * g).sum();

    let eta_x: f64 = eta.iter().zip(&field).map(|(a, b)| a * b).sum();
    let r1 = (eta_x - sigma * value).abs();

    let dim = chart.dim();
    let mut r2 = 0.0f64;
    for j in 0..dim {
        // (iota_X d eta)_j = sum_i X_i * d eta(e_i, e_j)
        let contraction: f64 = (0..dim).map(|i| field[i] * omega[(i, j)]).sum();
        let rhs = -sigma * contraction + reeb_h * eta[j];
        r2 = r2.max((grad[j] - rhs).abs());
    }
    Ok((r1, r2))
}
