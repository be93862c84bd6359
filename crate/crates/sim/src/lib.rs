//! Configuration files, CSV/JSON output, parallel ensembles and the
//! `contact-sim` command-line driver on top of `contact-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use cli::{Cli, Command};
pub use commands::Verdict;
pub use config::RunConfig;
pub use error::{CliError, CliResult};

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(Verdict::Pass) => 0,
        Ok(Verdict::Fail(msg)) => {
            eprintln!("verification failed: {msg}");
            if cli.common.report_only {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<Verdict> {
    let out = cli.common.out.as_deref();
    if let Command::ListSystems = cli.command {
        return commands::list_systems(out);
    }
    let cfg = cli.effective_config()?;
    if let Some(p) = &cli.common.emit_config {
        std::fs::write(p, cfg.to_json() + "\n").map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        })?;
    }
    match cli.command {
        Command::Simulate => commands::simulate(&cfg, out),
        Command::VerifyContact { .. } => commands::verify_contact(&cfg, out),
        Command::CheckIntegrability { .. } => commands::check_integrability_cmd(&cfg, out),
        Command::Bracket { .. } => commands::bracket(&cfg, out),
        Command::MonteCarlo { .. } => commands::monte_carlo(&cfg, out, cli.common.workers),
        Command::Convergence { .. } => commands::convergence(&cfg, out),
        Command::ListSystems => unreachable!(),
    }
}
