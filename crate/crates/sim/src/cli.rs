use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use contact_core::Scheme;

use crate::config::{BracketSpec, MeasureKind, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "contact-sim", version, about = "Simulate and verify stochastic contact Hamiltonian systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true, value_parser = parse_scheme)]
    pub scheme: Option<Scheme>,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// Write the report but exit 0 even if the verification fails.
    #[arg(long, global = true)]
    pub report_only: bool,
    /// Worker threads for ensembles (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Also write the effective configuration (after flag overrides) here.
    #[arg(long, global = true)]
    pub emit_config: Option<PathBuf>,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: contact_core::Error| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one path and write the trajectory CSV (t, coordinates, lambda).
    Simulate,
    /// Certify the conformal contact property along a path.
    VerifyContact {
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        paths: Option<usize>,
    },
    /// Involution and independence of first integrals.
    CheckIntegrability {
        /// Integral source; repeat once per function, `1` first.
        #[arg(long = "integral")]
        integrals: Vec<String>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Jacobi bracket of two functions at the initial state.
    Bracket {
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        g: Option<String>,
        /// Adds the weak Leibniz diagnostic for `[f, g h]`.
        #[arg(long)]
        h: Option<String>,
    },
    /// Ensemble statistics of an observable at the final time.
    MonteCarlo {
        #[arg(long)]
        observable: Option<String>,
        #[arg(long)]
        paths: Option<usize>,
    },
    /// Strong convergence study on coarsenings of shared paths.
    Convergence {
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, value_enum)]
        measure: Option<MeasureKind>,
        #[arg(long)]
        paths: Option<usize>,
    },
    /// Print the built-in systems.
    ListSystems,
}

impl Cli {
    /// Loads the config and applies flag overrides.
    pub fn effective_config(&self) -> CliResult<RunConfig> {
        let path = self
            .common
            .config
            .as_ref()
            .ok_or_else(|| CliError::config("--config is required for this command"))?;
        let mut cfg = RunConfig::load(path)?;
        let c = &self.common;
        if let Some(s) = c.seed {
            cfg.master_seed = s;
        }
        if let Some(dt) = c.dt {
            cfg.dt = dt;
        }
        if let Some(s) = c.scheme {
            cfg.scheme = s;
        }
        match &self.command {
            Command::VerifyContact { levels, paths } => {
                cfg.levels = levels.or(cfg.levels);
                cfg.n_paths = paths.or(cfg.n_paths);
            }
            Command::CheckIntegrability { integrals, samples } => {
                if !integrals.is_empty() {
                    cfg.integrals = integrals.clone();
                }
                cfg.n_samples = samples.or(cfg.n_samples);
            }
            Command::Bracket { f, g, h } => {
                if f.is_some() || g.is_some() || h.is_some() {
                    let old = cfg.bracket.take();
                    let pick = |new: &Option<String>, old: Option<String>| new.clone().or(old);
                    let (of, og, oh) = match old {
                        Some(b) => (Some(b.f), Some(b.g), b.h),
                        None => (None, None, None),
                    };
                    let f = pick(f, of).ok_or_else(|| CliError::config("bracket: missing `f`"))?;
                    let g = pick(g, og).ok_or_else(|| CliError::config("bracket: missing `g`"))?;
                    cfg.bracket = Some(BracketSpec { f, g, h: pick(h, oh) });
                }
            }
            Command::MonteCarlo { observable, paths } => {
                cfg.observable = observable.clone().or(cfg.observable);
                cfg.n_paths = paths.or(cfg.n_paths);
            }
            Command::Convergence { levels, measure, paths } => {
                cfg.levels = levels.or(cfg.levels);
                cfg.measure = measure.or(cfg.measure);
                cfg.n_paths = paths.or(cfg.n_paths);
            }
            Command::Simulate | Command::ListSystems => {}
        }
        Ok(cfg)
    }
}
