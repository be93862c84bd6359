//! One function per subcommand. Each writes its output and returns whether
//! the verification it performs passed.

use contact_core::catalog;
use contact_core::geometry::{
    bracket_expr, check_integrability, jacobi_bracket, sample_states, weak_leibniz_diagnostic,
    IntegrabilityReport, LeibnizDiagnostic,
};
use contact_core::verify::{
    conformal_factor_check, contact_defect, convergence_study, sample_observable, ConvergenceReport,
    EnsembleSpec, EnsembleStats, ErrorMeasure,
};
use contact_core::flow::{integrate, integrate_augmented};
use contact_core::{parse, Expr, HamiltonianSystem};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{wrap_for_report, MeasureKind, RunConfig};
use crate::error::{CliError, CliResult, CoreResultExt};
use crate::output::{write_csv, write_json};

pub const DEFAULT_MIN_ORDER: f64 = 0.9;
pub const DEFAULT_LAMBDA_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_BRACKET_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_SAMPLES: usize = 100;
/// Defects below this are rounding noise, and their ratios say nothing about order.
pub const DEFECT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail(String),
}

/// Where a command writes: `--out` wins over the config's `outputs`.
fn target<'a>(out: Option<&'a str>, configured: &'a Option<String>) -> Option<&'a str> {
    out.or(configured.as_deref())
}

fn parse_over(sys: &HamiltonianSystem, what: &str, source: &str) -> CliResult<Expr> {
    parse(source, &sys.declared_names()).map_err(|e| CliError::config(format!("{what}: {e}")))
}

pub fn simulate(cfg: &RunConfig, out: Option<&str>) -> CliResult<Verdict> {
    let built = cfg.build()?;
    let sys = &built.sys;
    let path = cfg.path(sys.noise_dim(), 0)?;
    let traj = integrate(sys, &cfg.initial_state, &path, cfg.scheme).op("integrate")?;
    let chart = sys.chart();
    let mut header = vec!["t".to_string()];
    header.extend(chart.coordinate_names().iter().map(|s| s.to_string()));
    header.push("lambda".to_string());
    let rows = traj.times.iter().zip(&traj.states).zip(&traj.log_lambda).map(|((t, x), ll)| {
        let mut x = x.clone();
        if cfg.wrap_angles {
            wrap_for_report(chart, &mut x);
        }
        let mut row = Vec::with_capacity(x.len() + 2);
        row.push(*t);
        row.extend(x);
        row.push(ll.exp());
        row
    });
    write_csv(target(out, &cfg.outputs.trajectory), &header, rows)?;
    Ok(Verdict::Pass)
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct VerifyContactReport {
    pub command: String,
    pub system: String,
    pub scheme: String,
    pub dt: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub max_defect: f64,
    pub final_defect: f64,
    pub convergence: ConvergenceReport,
    pub defect_order: Option<f64>,
    pub defect_at_roundoff: bool,
    pub lambda_final: f64,
    pub lambda_closed_form: Option<String>,
    pub lambda_max_deviation: Option<f64>,
    pub strict_contactomorphism: bool,
    pub min_order: f64,
    pub lambda_tolerance: f64,
    pub pass: bool,
    pub config: RunConfig,
}

pub fn verify_contact(cfg: &RunConfig, out: Option<&str>) -> CliResult<Verdict> {
    let built = cfg.build()?;
    let sys = &built.sys;
    let levels = cfg.levels.unwrap_or(3);
    let n_paths = cfg.n_paths.unwrap_or(1).max(1);
    let min_order = cfg.min_order.unwrap_or(DEFAULT_MIN_ORDER);
    let lambda_tol = cfg.lambda_tolerance.unwrap_or(DEFAULT_LAMBDA_TOLERANCE);

    let path = cfg.path(sys.noise_dim(), 0)?;
    let traj = integrate_augmented(sys, &cfg.initial_state, &path, cfg.scheme).op("integrate_augmented")?;
    let defect = contact_defect(&traj, sys.chart()).op("contact_defect")?;
    if let Some(p) = cfg.outputs.defect_csv.as_deref() {
        let mut header = vec!["t".to_string()];
        header.extend((1..=sys.dim()).map(|j| format!("r_{j}")));
        header.push("sup".to_string());
        let rows = defect.times.iter().zip(&defect.residuals).zip(&defect.sup_norms).map(|((t, r), s)| {
            let mut row = vec![*t];
            row.extend(r);
            row.push(*s);
            row
        });
        write_csv(Some(p), &header, rows)?;
    }

    let mut paths = vec![path];
    for k in 1..n_paths as u64 {
        paths.push(cfg.path(sys.noise_dim(), k)?);
    }
    let conv = convergence_study(sys, &cfg.initial_state, &paths, cfg.scheme, levels, ErrorMeasure::ContactDefect)
        .op("convergence_study")?;
    let at_roundoff = conv.errors.iter().all(|e| *e <= DEFECT_FLOOR);
    let order = (!conv.orders.is_empty()).then(|| conv.min_order());

    let lambda_final = traj.last().lambda();
    let (closed, deviation, strict) = match &built.lambda {
        Some(form) => {
            let dev = conformal_factor_check(&traj, &form.expr).op("conformal_factor_check")?;
            (Some(form.expr.to_string()), Some(dev), form.strict && dev <= lambda_tol)
        }
        None => (None, None, false),
    };
    let order_ok = at_roundoff || order.is_some_and(|o| o >= min_order);
    let lambda_ok = deviation.is_none_or(|d| d <= lambda_tol);
    let pass = order_ok && lambda_ok;
    let report = VerifyContactReport {
        command: "verify-contact".into(),
        system: built.id.clone(),
        scheme: cfg.scheme.to_string(),
        dt: cfg.dt,
        n_steps: cfg.n_steps()?,
        n_paths,
        max_defect: defect.max,
        final_defect: *defect.sup_norms.last().unwrap_or(&0.0),
        convergence: conv,
        defect_order: order,
        defect_at_roundoff: at_roundoff,
        lambda_final,
        lambda_closed_form: closed,
        lambda_max_deviation: deviation,
        strict_contactomorphism: strict,
        min_order,
        lambda_tolerance: lambda_tol,
        pass,
        config: cfg.clone(),
    };
    write_json(target(out, &cfg.outputs.report), &report)?;
    Ok(if pass {
        Verdict::Pass
    } else if !order_ok {
        Verdict::Fail(format!("defect order {order:?} below {min_order}"))
    } else {
        Verdict::Fail(format!("conformal factor deviates by {deviation:?}"))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct IntegrabilityOutput {
    pub command: String,
    pub system: String,
    pub report: IntegrabilityReport,
    pub config: RunConfig,
}

pub fn check_integrability_cmd(cfg: &RunConfig, out: Option<&str>) -> CliResult<Verdict> {
    let built = cfg.build()?;
    let sys = &built.sys;
    if cfg.integrals.is_empty() {
        return Err(CliError::config("integrals: none given"));
    }
    let integrals = cfg
        .integrals
        .iter()
        .map(|s| parse_over(sys, "integrals", s))
        .collect::<CliResult<Vec<_>>>()?;
    let samples = sample_states(sys.chart(), cfg.n_samples.unwrap_or(DEFAULT_SAMPLES), cfg.master_seed);
    let tol = cfg.tolerance.unwrap_or(DEFAULT_BRACKET_TOLERANCE);
    let report = check_integrability(sys, &integrals, &samples, tol).op("check_integrability")?;
    let verdict = if report.pass {
        Verdict::Pass
    } else {
        Verdict::Fail(format!(
            "max bracket {:e}, max Reeb derivative {:e}, min singular value {:e}",
            report.max_involution, report.max_reeb, report.min_singular_value
        ))
    };
    write_json(
        target(out, &cfg.outputs.report),
        &IntegrabilityOutput {
            command: "check-integrability".into(),
            system: built.id.clone(),
            report,
            config: cfg.clone(),
        },
    )?;
    Ok(verdict)
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct BracketOutput {
    pub command: String,
    pub system: String,
    pub f: String,
    pub g: String,
    /// `[f, g]` as an expression over the chart.
    pub symbolic: String,
    pub state: Vec<f64>,
    pub value: f64,
    pub leibniz: Option<LeibnizDiagnostic>,
    pub config: RunConfig,
}

pub fn bracket(cfg: &RunConfig, out: Option<&str>) -> CliResult<Verdict> {
    let built = cfg.build()?;
    let sys = &built.sys;
    let spec = cfg
        .bracket
        .as_ref()
        .ok_or_else(|| CliError::config("bracket: missing `f` and `g`"))?;
    let f = parse_over(sys, "bracket.f", &spec.f)?;
    let g = parse_over(sys, "bracket.g", &spec.g)?;
    let x = &cfg.initial_state;
    let value = jacobi_bracket(sys, &f, &g, x).op("jacobi_bracket")?;
    let leibniz = match &spec.h {
        Some(h) => {
            let h = parse_over(sys, "bracket.h", h)?;
            Some(weak_leibniz_diagnostic(sys, &f, &g, &h, x).op("weak_leibniz_diagnostic")?)
        }
        None => None,
    };
    write_json(
        target(out, &cfg.outputs.report),
        &BracketOutput {
            command: "bracket".into(),
            system: built.id.clone(),
            f: spec.f.clone(),
            g: spec.g.clone(),
            symbolic: bracket_expr(sys.chart(), &f, &g).to_string(),
            state: x.clone(),
            value,
            leibniz,
            config: cfg.clone(),
        },
    )?;
    Ok(Verdict::Pass)
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct MonteCarloOutput {
    pub command: String,
    pub system: String,
    pub stats: EnsembleStats,
    pub config: RunConfig,
}

/// Runs streams `stream_index..stream_index + n_paths` on `workers` threads
/// (0 = rayon default) and reduces in stream order.
pub fn run_ensemble(cfg: &RunConfig, sys: &HamiltonianSystem, observable: &str, workers: usize) -> CliResult<EnsembleStats> {
    let n_paths = cfg.n_paths.ok_or_else(|| CliError::config("n_paths: missing"))?;
    if n_paths < 2 {
        return Err(CliError::config(format!("n_paths: need at least 2, got {n_paths}")));
    }
    let obs = parse_over(sys, "observable", observable)?;
    let tape = sys.compile_expr(&obs).op("compile")?;
    let spec = EnsembleSpec {
        t0: cfg.t0,
        t_end: cfg.t_end,
        dt: cfg.dt,
        n_paths,
        master_seed: cfg.master_seed,
        scheme: cfg.scheme,
        zeroed_components: cfg.zeroed_components(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::config(format!("workers: {e}")))?;
    let first = cfg.stream_index;
    let samples: Vec<f64> = pool
        .install(|| {
            (0..n_paths as u64)
                .into_par_iter()
                .map(|k| sample_observable(sys, &cfg.initial_state, &spec, &tape, first + k))
                .collect::<contact_core::Result<Vec<_>>>()
        })
        .op("monte_carlo")?;
    EnsembleStats::from_samples(observable.to_string(), &samples).op("monte_carlo")
}

pub fn monte_carlo(cfg: &RunConfig, out: Option<&str>, workers: usize) -> CliResult<Verdict> {
    let built = cfg.build()?;
    let observable = cfg
        .observable
        .as_deref()
        .ok_or_else(|| CliError::config("observable: missing"))?;
    let stats = run_ensemble(cfg, &built.sys, observable, workers)?;
    write_json(
        target(out, &cfg.outputs.report),
        &MonteCarloOutput {
            command: "monte-carlo".into(),
            system: built.id.clone(),
            stats,
            config: cfg.clone(),
        },
    )?;
    Ok(Verdict::Pass)
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ConvergenceOutput {
    pub command: String,
    pub system: String,
    pub measure: MeasureKind,
    pub report: ConvergenceReport,
    pub config: RunConfig,
}

pub fn convergence(cfg: &RunConfig, out: Option<&str>) -> CliResult<Verdict> {
    let built = cfg.build()?;
    let sys = &built.sys;
    let levels = cfg.levels.unwrap_or(3);
    let measure = cfg.measure.unwrap_or(MeasureKind::FinestReference);
    let paths = (0..cfg.n_paths.unwrap_or(1).max(1) as u64)
        .map(|k| cfg.path(sys.noise_dim(), k))
        .collect::<CliResult<Vec<_>>>()?;
    let m = match measure {
        MeasureKind::FinestReference => ErrorMeasure::FinestReference,
        MeasureKind::ContactDefect => ErrorMeasure::ContactDefect,
    };
    let report = convergence_study(sys, &cfg.initial_state, &paths, cfg.scheme, levels, m).op("convergence_study")?;
    write_json(
        target(out, &cfg.outputs.report),
        &ConvergenceOutput {
            command: "convergence".into(),
            system: built.id.clone(),
            measure,
            report,
            config: cfg.clone(),
        },
    )?;
    Ok(Verdict::Pass)
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SystemListing {
    pub id: String,
    pub summary: String,
    pub parameters: Vec<(String, String)>,
}

pub fn list_systems(out: Option<&str>) -> CliResult<Verdict> {
    let list: Vec<SystemListing> = catalog::entries()
        .iter()
        .map(|e| SystemListing {
            id: e.id.to_string(),
            summary: e.summary.to_string(),
            parameters: e.parameters.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        })
        .collect();
    write_json(out, &list)?;
    Ok(Verdict::Pass)
}
