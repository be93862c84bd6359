//! JSON run configuration.
//!
//! ```json
//! {
//!   "system": { "catalog": "dissipative-2d", "params": { "gamma": 0.5 } },
//!   "t0": 0.0, "t_end": 1.0, "dt": 0.001,
//!   "scheme": "heun", "master_seed": 42,
//!   "initial_state": [1.0, 0.0, 2.0, 0.0, 0.0]
//! }
//! ```
//!
//! An inline system replaces `catalog`/`params` with `chart`, `n`, `h0`,
//! `noise` and `constants`. Command-line flags override individual fields;
//! the effective configuration is embedded in every JSON report and reloads
//! to the same run.

use std::collections::BTreeMap;
use std::path::Path;

use contact_core::catalog::{self, DissipativeParams};
use contact_core::expr::{EvalContext, Expr};
use contact_core::flow::steps_between;
use contact_core::geometry::{Chart, ChartKind};
use contact_core::{BrownianPath, HamiltonianSystem, Scheme};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult, CoreResultExt};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSpec,
    #[serde(default)]
    pub t0: f64,
    #[serde(alias = "T")]
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default)]
    pub master_seed: u64,
    /// Stream used by single-path commands; ensembles use consecutive
    /// streams starting here.
    #[serde(default)]
    pub stream_index: u64,
    pub initial_state: Vec<f64>,
    /// Noise streams (1-based, as in `dB^1..dB^d`) whose increments are zeroed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub zeroed_streams: Vec<usize>,
    /// Wrap Sasaki–Einstein angles when writing trajectories.
    #[serde(default, skip_serializing_if = "is_false")]
    pub wrap_angles: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub integrals: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<BracketSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_order: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Outputs::is_empty")]
    pub outputs: Outputs,
}

fn default_scheme() -> Scheme {
    Scheme::EulerHeun
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<String>,
    #[serde(default, skip_serializing_if = "CatalogParams::is_empty")]
    pub params: CatalogParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub noise: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub constants: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, rename = "V", skip_serializing_if = "Option::is_none")]
    pub potential: Option<String>,
}

impl CatalogParams {
    fn is_empty(&self) -> bool {
        *self == CatalogParams::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketSpec {
    pub f: String,
    pub g: String,
    /// Third function for the weak Leibniz diagnostic on `[f, g h]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureKind {
    FinestReference,
    ContactDefect,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// Trajectory CSV of `simulate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<String>,
    /// JSON report of the verification and ensemble commands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    /// Per-step contact defect of `verify-contact`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defect_csv: Option<String>,
}

impl Outputs {
    fn is_empty(&self) -> bool {
        *self == Outputs::default()
    }
}

/// Conformal factor known in closed form, as an expression in `t`.
#[derive(Debug, Clone)]
pub struct LambdaForm {
    pub expr: Expr,
    /// `true` when the closed form is identically one.
    pub strict: bool,
}

pub struct BuiltSystem {
    pub id: String,
    pub sys: HamiltonianSystem,
    pub lambda: Option<LambdaForm>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::config(format!("invalid config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn n_steps(&self) -> CliResult<usize> {
        if !(self.dt > 0.0) {
            return Err(CliError::config(format!("dt must be positive, got {}", self.dt)));
        }
        steps_between(self.t0, self.t_end, self.dt).map_err(|e| CliError::config(format!("dt: {e}")))
    }

    /// Builds the system and checks the rest of the config against it.
    pub fn build(&self) -> CliResult<BuiltSystem> {
        let built = self.system.build(self.t0)?;
        self.n_steps()?;
        let chart = built.sys.chart();
        if self.initial_state.len() != chart.dim() {
            return Err(CliError::config(format!(
                "initial_state has {} entries, chart `{}` needs {}",
                self.initial_state.len(),
                chart.id(),
                chart.dim()
            )));
        }
        chart
            .check_state(&self.initial_state)
            .map_err(|e| CliError::config(format!("initial_state: {e}")))?;
        let d = built.sys.noise_dim();
        if let Some(&k) = self.zeroed_streams.iter().find(|&&k| k == 0 || k > d) {
            return Err(CliError::config(format!(
                "zeroed_streams: stream {k} outside 1..={d}"
            )));
        }
        Ok(built)
    }

    pub fn zeroed_components(&self) -> Vec<usize> {
        self.zeroed_streams.iter().map(|k| k - 1).collect()
    }

    /// Path of stream `self.stream_index + offset` with the configured streams zeroed.
    pub fn path(&self, noise_dim: usize, offset: u64) -> CliResult<BrownianPath> {
        let p = BrownianPath::sample(
            self.t0,
            noise_dim,
            self.n_steps()?,
            self.dt,
            self.master_seed,
            self.stream_index + offset,
        )
        .op("sample_brownian")?;
        Ok(if self.zeroed_streams.is_empty() {
            p
        } else {
            p.with_components_zeroed(&self.zeroed_components())
        })
    }
}

impl SystemSpec {
    pub fn catalog(id: &str) -> Self {
        SystemSpec {
            catalog: Some(id.to_string()),
            ..SystemSpec::default()
        }
    }

    pub fn build(&self, t0: f64) -> CliResult<BuiltSystem> {
        let inline = self.chart.is_some() || self.h0.is_some() || !self.noise.is_empty() || !self.constants.is_empty();
        match (&self.catalog, inline) {
            (Some(_), true) => Err(CliError::config(
                "system: give either `catalog` or an inline system, not both",
            )),
            (Some(id), false) => self.build_catalog(id, t0),
            (None, _) => self.build_inline(t0),
        }
    }

    fn build_catalog(&self, id: &str, t0: f64) -> CliResult<BuiltSystem> {
        let p = &self.params;
        match id {
            catalog::DISSIPATIVE_ID => {
                let d = DissipativeParams::default();
                let gamma = p.gamma.unwrap_or(d.gamma);
                let sys = catalog::dissipative_system(
                    p.m.unwrap_or(d.m),
                    gamma,
                    p.eps.unwrap_or(d.eps),
                    p.potential.as_deref().unwrap_or(&d.potential),
                )
                .map_err(|e| CliError::config(format!("system params: {e}")))?;
                Ok(BuiltSystem {
                    id: id.to_string(),
                    sys,
                    lambda: Some(LambdaForm {
                        expr: catalog::dissipative_lambda(gamma, t0),
                        strict: false,
                    }),
                })
            }
            catalog::SASAKI_EINSTEIN_ID => {
                if !p.is_empty() {
                    return Err(CliError::config("system params: sasaki-einstein-t11 takes no parameters"));
                }
                Ok(BuiltSystem {
                    id: id.to_string(),
                    sys: catalog::sasaki_einstein_system(),
                    lambda: Some(LambdaForm {
                        expr: Expr::Const(1.0),
                        strict: true,
                    }),
                })
            }
            other => Err(CliError::config(format!("unknown catalog system `{other}`"))),
        }
    }

    fn build_inline(&self, t0: f64) -> CliResult<BuiltSystem> {
        let chart_id = self
            .chart
            .as_deref()
            .ok_or_else(|| CliError::config("system: missing `catalog` or `chart`"))?;
        if !self.params.is_empty() {
            return Err(CliError::config("system: `params` only applies to catalog systems"));
        }
        let chart = Chart::from_id(chart_id, self.n.unwrap_or(1)).map_err(CliError::config)?;
        if chart.kind() == ChartKind::SasakiEinstein && self.n.is_some_and(|n| n != 2) {
            return Err(CliError::config("system: the sasaki-einstein chart has n = 2"));
        }
        let h0 = self
            .h0
            .as_deref()
            .ok_or_else(|| CliError::config("system: missing `h0`"))?;
        let noise: Vec<&str> = self.noise.iter().map(String::as_str).collect();
        let constants: Vec<(String, f64)> = self.constants.iter().map(|(k, v)| (k.clone(), *v)).collect();
        let sys = HamiltonianSystem::from_sources(chart, h0, &noise, constants)
            .map_err(|e| CliError::config(format!("system: {e}")))?;
        let lambda = derived_lambda(&sys, t0);
        Ok(BuiltSystem {
            id: "inline".to_string(),
            sys,
            lambda,
        })
    }
}

/// When every noise Hamiltonian is a Reeb first integral and the drift has
/// a constant Reeb derivative `c`, `lambda_t = exp(-c (t - t0))`.
fn derived_lambda(sys: &HamiltonianSystem, t0: f64) -> Option<LambdaForm> {
    let mut ctx = EvalContext::new();
    for (k, v) in sys.constants() {
        ctx.set(k, *v);
    }
    let rate = |i: usize| -> Option<f64> {
        let r = sys.chart().reeb_derivative_expr(sys.hamiltonian(i));
        let free = r.free_vars();
        if free.iter().all(|v| sys.constants().iter().any(|(k, _)| k == v)) {
            r.eval(&ctx).ok()
        } else {
            None
        }
    };
    for i in 1..=sys.noise_dim() {
        if rate(i)? != 0.0 {
            return None;
        }
    }
    let c = rate(0)?;
    if c == 0.0 {
        return Some(LambdaForm {
            expr: Expr::Const(1.0),
            strict: true,
        });
    }
    Some(LambdaForm {
        expr: catalog::dissipative_lambda(c, t0),
        strict: false,
    })
}

/// `phi_i` into `[-pi, pi)` and `psi` into `[0, 4 pi)`; other charts unchanged.
pub fn wrap_for_report(chart: &Chart, x: &mut [f64]) {
    use std::f64::consts::PI;
    if chart.kind() != ChartKind::SasakiEinstein {
        return;
    }
    for v in &mut x[2..4] {
        *v = (*v + PI).rem_euclid(2.0 * PI) - PI;
    }
    x[4] = x[4].rem_euclid(4.0 * PI);
}
