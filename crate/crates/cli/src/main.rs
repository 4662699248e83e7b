// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod data;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use error::CliError;

#[derive(Parser)]
#[command(name = "seiar", version, about = "Simulate, analyze and fit the SEIAR epidemic model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: paths.out, else the current directory)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WithData {
    #[command(flatten)]
    common: Common,
    /// Daily case series CSV (default: paths.data)
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the model; writes trajectory.csv and incidence.csv
    Simulate(Common),
    /// Threshold, equilibria and their stability; writes stability.csv
    Stability(Common),
    /// Fit free parameters to data; writes fit.csv, residuals.csv, fit_summary.json
    Fit(WithData),
    /// Detection-ratio sweep; writes sweep.csv and decline.csv
    Sweep(Common),
    /// Fit, then forecast past the data; writes forecast.csv and peak.csv
    Predict(WithData),
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf), CliError> {
    let cfg = RunConfig::load(&common.config)?;
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    let out = common.out.clone().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    Ok((cfg, out))
}

fn load_data(cfg: &RunConfig, flag: &Option<PathBuf>) -> Result<data::CaseSeries, CliError> {
    let path = flag
        .clone()
        .or_else(|| cfg.data_path.clone())
        .ok_or_else(|| CliError::Config("no data file: pass --data or set paths.data".into()))?;
    data::read_case_series(&path)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (files, out) = match &cli.command {
        Command::Simulate(c) => {
            let (cfg, out) = load(c)?;
            (commands::simulate(&cfg)?, out)
        }
        Command::Stability(c) => {
            let (cfg, out) = load(c)?;
            (commands::stability(&cfg)?, out)
        }
        Command::Sweep(c) => {
            let (cfg, out) = load(c)?;
            (commands::sweep(&cfg)?, out)
        }
        Command::Fit(w) => {
            let (cfg, out) = load(&w.common)?;
            let data = load_data(&cfg, &w.data)?;
            (commands::fit_cmd(&cfg, &data)?, out)
        }
        Command::Predict(w) => {
            let (cfg, out) = load(&w.common)?;
            let data = load_data(&cfg, &w.data)?;
            (commands::predict(&cfg, &data)?, out)
        }
    };
    output::write_atomically(&out, &files)?;
    for f in &files {
        println!("{}", out.join(f.name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
