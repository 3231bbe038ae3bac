//! Command-line front end: experiment commands and the verification suite.
//!
//! Exit codes: `0` success, `1` verification or I/O failure, `2` usage,
//! configuration or domain error.

mod commands;
mod config;
pub mod verify;

use std::io;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use commands::{
    build_frame, chasles_schedule, cmd_chasles, cmd_converge, cmd_frames, cmd_surface,
    interval_reference, ChaslesRow, ChaslesSummary, Frame, FrameTerm, SampledPolynomial,
    EXP_REFERENCE_ORDER,
};
pub use config::{ExperimentConfig, Interval, Overrides};

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] crate::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Core(_) | LabError::Config(_) => 2,
            LabError::Io { .. } | LabError::Csv(_) | LabError::Json(_) => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "chasles-lab",
    version,
    about = "Riemann sums of a polynomial-valued tent map: surfaces, frames, convergence and additivity checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample Φ(x, t) = f(x)(t) on a grid and write x,t,phi CSV
    Surface(Overrides),
    /// Write one JSON frame per resolution: tagged values and their Riemann sum
    Frames(Overrides),
    /// Write the convergence report N,sum_norm,gap_prev,dist_ref
    Converge(Overrides),
    /// Compare sums over [a,b] with sums over [a,c] and [c,b]
    Chasles(Overrides),
    /// Run the invariant suite and print a pass/fail table
    Verify {
        #[command(flatten)]
        flags: Overrides,
        /// Multiply every tent coefficient by this factor (mutation testing)
        #[arg(long, hide = true, default_value_t = 1.0)]
        fault_peak_scale: f64,
    },
}

fn out_path(cfg: &ExperimentConfig, default: &str) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| Path::new(default).to_path_buf())
}

/// Runs a parsed command, printing a short summary. Returns the exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, LabError> {
    match cli.command {
        Command::Surface(flags) => {
            let cfg = ExperimentConfig::resolve(&flags)?;
            let out = out_path(&cfg, "surface.csv");
            let rows = cmd_surface(&cfg, &out)?;
            println!("wrote {rows} rows to {}", out.display());
        }
        Command::Frames(flags) => {
            let cfg = ExperimentConfig::resolve(&flags)?;
            let out = out_path(&cfg, "frames");
            let files = cmd_frames(&cfg, &out)?;
            println!("wrote {} frames to {}", files.len(), out.display());
        }
        Command::Converge(flags) => {
            let cfg = ExperimentConfig::resolve(&flags)?;
            let out = out_path(&cfg, "converge.csv");
            let report = cmd_converge(&cfg, &out)?;
            println!(
                "{} over {} rows ({}), wrote {}",
                report.verdict,
                report.rows.len(),
                cfg.interval.name(),
                out.display()
            );
        }
        Command::Chasles(flags) => {
            let cfg = ExperimentConfig::resolve(&flags)?;
            let out = out_path(&cfg, "chasles.csv");
            let s = cmd_chasles(&cfg, &out)?;
            let last = s.last();
            println!(
                "[{}, {}] vs [{}, {}] + [{}, {}] at N = {}: discrepancy {:e} ({})",
                s.a,
                s.b,
                s.a,
                s.c,
                s.c,
                s.b,
                last.n,
                last.discrepancy,
                if last.additive { "additive" } else { "not additive" }
            );
            println!(
                "degrees total/left/right: {}/{}/{}",
                last.total_degree, last.left_degree, last.right_degree
            );
            println!("wrote {}", out.display());
        }
        Command::Verify {
            flags,
            fault_peak_scale,
        } => {
            let cfg = ExperimentConfig::resolve(&flags)?;
            let opts = verify::VerifyOptions {
                peak_scale: fault_peak_scale,
                depth: cfg.depth,
                seed: cfg.seed,
            };
            let results = verify::run_suite(&opts);
            print!("{}", verify::render_table(&results));
            return Ok(if results.iter().all(|r| r.passed) { 0 } else { 1 });
        }
    }
    Ok(0)
}
