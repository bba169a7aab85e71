//! `bihardy`: check weight conditions, classify power data, search witnesses,
//! verify the reduction identities and calibrate against the classical constant.
//!
//! Exit codes: 0 holds (or all checks pass), 2 fails, 3 not covered, 4 unknown,
//! 1 on configuration errors and numerical diagnostics.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use commands::{Output, EXIT_ERROR};

#[derive(Parser)]
#[command(
    name = "bihardy",
    version,
    about = "Weighted bilinear Hardy inequalities on radial spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Print JSON instead of a table
    #[arg(long, global = true)]
    json: bool,

    #[arg(long, global = true, value_name = "TOL")]
    rel_tol: Option<f64>,

    #[arg(long, global = true, value_name = "TOL")]
    abs_tol: Option<f64>,

    /// Seed of the witness search
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Total number of witness evaluations
    #[arg(long, global = true)]
    budget: Option<usize>,

    /// JSON output file; the CSV trace for `witness`
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Evaluate B1..B6 and the constant bracket
    Check,
    /// Closed-form verdict for power data
    Classify,
    /// Search truncated-power pairs for a large ratio
    Witness,
    /// Check the transfer identities between space and line
    ReduceVerify,
    /// One-dimensional Hardy ratios against the sharp constant
    Calibrate,
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let mut cfg = commands::load(cli.config.as_deref())?;
    // flags win over the file
    if cli.rel_tol.is_some() {
        cfg.quadrature.rel_tol = cli.rel_tol;
    }
    if cli.abs_tol.is_some() {
        cfg.quadrature.abs_tol = cli.abs_tol;
    }
    if cli.seed.is_some() {
        cfg.witness.seed = cli.seed;
    }
    if cli.budget.is_some() {
        cfg.witness.budget = cli.budget;
    }
    let quad = cfg.quad()?;
    let out = Output {
        json: cli.json,
        out: cli.out,
    };
    match cli.command {
        Command::Check => commands::check(&cfg, &quad, &out),
        Command::Classify => commands::classify_cmd(&cfg, &out),
        Command::Witness => commands::witness(&cfg, &quad, &cfg.search()?, &out),
        Command::ReduceVerify => commands::reduce_verify(&cfg, &quad, &out),
        Command::Calibrate => commands::calibrate(&cfg, &quad, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
