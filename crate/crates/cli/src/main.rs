mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use config::{parse_grid, GridConfig, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Cross-validation bandwidth selection for locally stationary time series.
#[derive(Parser, Debug)]
#[command(name = "lscv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one series and write `series.csv` (columns t, u, x).
    Simulate(Flags),
    /// Fit the local estimator at one bandwidth and write `fit.csv`.
    Fit(Flags),
    /// Cross-validate over the bandwidth grid; writes `cv.csv` and `summary.json`.
    Cv(Flags),
    /// Run a Monte Carlo study; writes `replications.csv`, `summary.json` and `plots/`.
    Study(Flags),
}

#[derive(Args, Debug)]
struct Flags {
    /// TOML run configuration; flags override its keys
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// worker threads (0 = all cores)
    #[arg(long)]
    workers: Option<usize>,
    /// output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// model preset a, b, c or d
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    /// bandwidth grid as MIN:MAX:POINTS (log spaced)
    #[arg(long, value_parser = parse_grid)]
    grid: Option<GridConfig>,
    /// fit tvAR(1) to tvMA(1) or tvARCH(1) data
    #[arg(long)]
    misspecified: bool,
    /// gaussian, uniform, exponential or pareto
    #[arg(long)]
    innovation: Option<String>,
    /// bandwidth for `fit`
    #[arg(long)]
    h: Option<f64>,
    /// series CSV to analyse instead of simulating
    #[arg(long)]
    input: Option<PathBuf>,
    /// also compute the plug-in bandwidth
    #[arg(long)]
    plugin: bool,
}

impl Flags {
    fn to_config(&self) -> RunConfig {
        RunConfig {
            model: self.model.clone(),
            table: None,
            n: self.n,
            reps: self.reps,
            seed: self.seed,
            workers: self.workers,
            out: self.out.clone(),
            misspecified: self.misspecified.then_some(true),
            innovation: self.innovation.clone(),
            grid: self.grid,
            h: self.h,
            input: self.input.clone(),
            plugin: self.plugin.then_some(true),
        }
    }

    fn merged(&self) -> Result<RunConfig, commands::Failure> {
        let base = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        Ok(base.merge(self.to_config()))
    }

    fn resolve(&self) -> Result<config::Resolved, commands::Failure> {
        Ok(self.merged()?.resolve()?)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(f) => f.resolve().and_then(|r| commands::simulate_cmd(&r)),
        Command::Fit(f) => f.resolve().and_then(|r| commands::fit(&r)),
        Command::Cv(f) => f.resolve().and_then(|r| commands::cv(&r)),
        Command::Study(f) => f
            .merged()
            .and_then(|c| Ok((c.resolve()?, c)))
            .and_then(|(r, c)| commands::study(&r, &c)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
