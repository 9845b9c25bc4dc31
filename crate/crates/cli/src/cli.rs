//! Argument parsing and the top-level run loop.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Parser;
use serde_json::json;

use crate::commands::{self, CommandName, Expect, Overrides};
use crate::config::{Format, RunConfig, SCHEMA_VERSION};
use crate::report::{write_atomic, Report, TOOL_VERSION};
use crate::threads;

#[derive(Debug, Parser)]
#[command(name = "curvlab", version, about = "Curvature invariants of quotient Hilbert modules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandName,
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Overrides the command's verdict tolerance.
    #[arg(long, global = true, value_name = "X")]
    pub tol: Option<f64>,
    /// Outer grid radius.
    #[arg(long = "grid-r", global = true, value_name = "R")]
    pub grid_r: Option<f64>,
    /// Grid resolution: radii on the disk, points per axis otherwise.
    #[arg(long = "grid-n", global = true, value_name = "K")]
    pub grid_n: Option<usize>,
    /// Expected isomorphism verdict; a mismatch exits with status 2.
    #[arg(long, global = true, value_enum)]
    pub expect: Option<Expect>,
}

/// Exit status: 0 ok, 2 verdict failure, 1 input or computation error.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let start = Instant::now();
    let config_path = cli.config.as_ref().context("--config PATH is required")?;
    let config = RunConfig::load(config_path)?;
    let overrides = Overrides { tol: cli.tol, grid_r: cli.grid_r, grid_n: cli.grid_n, expect: cli.expect };
    let pool = threads::pool()?;
    let mut outcome = pool.install(|| commands::dispatch(cli.command, &config, &overrides))?;

    let format = cli.format.or(config.output.format).unwrap_or_default();
    let out = cli.out.clone().or_else(|| config.output.path.clone());
    let bytes = match format {
        Format::Csv => outcome.table.to_csv()?,
        Format::Json => {
            if let Some(side) = &config.output.per_point {
                write_atomic(side, &outcome.table.to_csv()?)?;
                if let Some(slot) = outcome.result.get_mut("per_point") {
                    *slot = json!(side);
                } else if let Some(map) = outcome.result.as_object_mut() {
                    map.insert("per_point".into(), json!(side));
                }
            }
            Report {
                schema: SCHEMA_VERSION,
                command: cli.command.as_str(),
                options: json!(overrides),
                config_hash: config.hash(),
                tool_version: TOOL_VERSION,
                result: outcome.result,
                wall_clock_ms: start.elapsed().as_millis(),
            }
            .to_json()?
        }
    };
    match out {
        Some(path) => write_atomic(&path, &bytes)?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(outcome.passed)
}
