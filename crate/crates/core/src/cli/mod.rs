//! Command-line front end.

pub mod config;
pub mod figures;
pub mod sweep;
pub mod table;
pub mod validate;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::analysis::AnalysisError;
use config::{RunConfig, SolverChoice};
use figures::Figure;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("unknown figure {0:?} (expected fig3a, fig3b, fig5, fig8a, fig8b, fig9)")]
    UnknownFigure(String),
    #[error("unknown check {0:?} (expected one of {1})")]
    UnknownCheck(String, String),
    #[error("thread pool: {0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

#[derive(Debug, Parser)]
#[command(name = "qheat", version, about = "Steady-state heat flow in filtered quantum heat diodes and transistors")]
pub struct Cli {
    /// Steady-state solver.
    #[arg(long, global = true, value_enum)]
    pub solver: Option<SolverChoice>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Reserved; no stochastic paths use it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one configuration and print currents and figures of merit.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Regenerate a figure's CSV and gnuplot script.
    Reproduce {
        figure: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the invariant and oracle checks.
    Validate {
        #[arg(long)]
        check: Option<String>,
    },
    /// Sweep the configured axis and write a CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Runs a parsed command; `Ok(false)` means it finished but reported failures.
pub fn run(cli: &Cli, out: &mut (dyn Write + Send)) -> Result<bool, CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    pool.build()?.install(|| dispatch(cli, out))
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn dispatch(cli: &Cli, out: &mut (dyn Write + Send)) -> Result<bool, CliError> {
    match &cli.command {
        Command::Solve { config } => {
            let cfg = RunConfig::load(config)?;
            solve(&cfg, cli.solver.unwrap_or(cfg.solver), out)
        }
        Command::Reproduce { figure, out: dir } => {
            let fig: Figure = figure.parse()?;
            let art = figures::reproduce(fig, cli.solver.unwrap_or_default());
            for p in art.write(dir)? {
                writeln!(out, "wrote {}", p.display()).map_err(io_err)?;
            }
            Ok(true)
        }
        Command::Validate { check } => {
            let results = validate::run_default(check.as_deref())?;
            for r in &results {
                writeln!(out, "{r}").map_err(io_err)?;
            }
            let ok = results.iter().all(|r| r.passed);
            writeln!(out, "{} of {} checks passed", results.iter().filter(|r| r.passed).count(), results.len()).map_err(io_err)?;
            Ok(ok)
        }
        Command::Sweep { config, out: dir } => {
            let cfg = RunConfig::load(config)?;
            let t = sweep::run_sweep(&cfg, cli.solver.unwrap_or(cfg.solver))?;
            let path = cfg.output.csv.clone().unwrap_or_else(|| PathBuf::from("sweep.csv"));
            let path = if path.is_absolute() { path } else { dir.join(path) };
            t.write(&path)?;
            let failures = t.values("residual").iter().filter(|r| r.is_nan()).count();
            writeln!(out, "wrote {} ({} rows, {} failed)", path.display(), t.rows.len(), failures).map_err(io_err)?;
            Ok(true)
        }
    }
}

/// Single point: prints a summary and writes the CSV row if `output.csv` is set.
pub fn solve(cfg: &RunConfig, solver: SolverChoice, out: &mut (dyn Write + Send)) -> Result<bool, CliError> {
    if cfg.sweep.is_some() {
        return Err(CliError::Config("`solve` takes a config without a `sweep` section".into()));
    }
    let hm = cfg.manager(solver.primary())?;
    // surfaces solver errors with their message before the tabulated pass
    let base = hm.solve()?;
    let e = sweep::evaluate(&hm, solver);
    for l in cfg.device().labels() {
        writeln!(out, "J_{l:<2} = {:+.12e}", base.current(*l)).map_err(io_err)?;
    }
    let names = sweep::columns(cfg.device());
    for (n, v) in names.iter().zip(&e.values) {
        if !n.starts_with("J_") || *n == "J_R_swapped" {
            writeln!(out, "{n:<11} = {v:+.12e}").map_err(io_err)?;
        }
    }
    writeln!(out, "sum J       = {:+.3e}", base.current_sum()).map_err(io_err)?;
    writeln!(out, "residual    = {:.3e}", base.residual).map_err(io_err)?;
    writeln!(out, "solver      = {solver}").map_err(io_err)?;
    if let Some(gap) = e.rate_gap {
        writeln!(out, "rate gap    = {gap:.3e}").map_err(io_err)?;
    }
    if cfg.device() == crate::models::Device::Diode && e.values[3] > 1.0 + 1e-12 {
        writeln!(out, "warning: R > 1, both temperature assignments drive heat the same way").map_err(io_err)?;
    }
    writeln!(out, "status      = {}", e.status).map_err(io_err)?;
    if let Some(path) = &cfg.output.csv {
        let mut t = table::Table::new(sweep::header(cfg.device(), None, solver == SolverChoice::Both));
        t.comment("sign: J > 0 is energy flowing from the bath into the device");
        t.push(sweep::row(None, &e));
        t.write(path)?;
    }
    Ok(e.status == "ok")
}
