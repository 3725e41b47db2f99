//! `mpot`: run the dealer market, estimate potentials from tick files,
//! calibrate against potential-free surrogates, and sweep the feedback
//! strength.
//!
//! Exit codes: 0 success, 2 usage (bad flags or subcommands), 3 domain
//! (invalid configuration, malformed content, insufficient or degenerate
//! data, stalled runs), 4 operating-system I/O failures.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use market_potential::Error;

#[derive(Parser)]
#[command(name = "mpot", version, about)]
struct Cli {
    /// Worker threads for parallel stages; 0 keeps the library default.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the dealer market and write its transaction price series.
    Simulate(SimulateArgs),
    /// Estimate the potential from a tick CSV.
    Analyze(AnalyzeArgs),
    /// Generate a potential-free series and report the estimator's reading.
    Null(NullArgs),
    /// Run one simulation per feedback strength and fit the response line.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Market configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output tick CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Manifest path; defaults to `<out>.manifest`.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured transaction count.
    #[arg(long)]
    ticks: Option<usize>,
    /// Override the configured feedback strength.
    #[arg(long)]
    d: Option<f64>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Input tick CSV.
    #[arg(long)]
    ticks: PathBuf,
    /// Directory for estimates.csv, curve.csv, and diffusion.csv.
    #[arg(long)]
    out_dir: PathBuf,
    /// Analysis configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Centered smoothing width applied at ingestion; odd, 1 disables.
    #[arg(long)]
    smooth: Option<usize>,
    /// Potential-curve bin count.
    #[arg(long)]
    bins: Option<usize>,
    /// Largest diffusion lag.
    #[arg(long)]
    max_lag: Option<usize>,
    /// Manifest path; defaults to `<out_dir>/manifest.txt`.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct NullArgs {
    #[command(subcommand)]
    kind: NullKind,
}

#[derive(Subcommand)]
enum NullKind {
    /// Gaussian random walk.
    Walk {
        #[arg(long, default_value_t = 420_000)]
        length: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        volatility: f64,
        #[command(flatten)]
        common: NullCommon,
    },
    /// Return-shuffled copy of an existing tick series.
    Shuffle {
        /// Source tick CSV whose returns are permuted.
        #[arg(long)]
        ticks: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        common: NullCommon,
    },
    /// Mean-reverting recursion with a known planted curvature.
    Planted {
        #[arg(long, default_value_t = 100_000)]
        length: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        volatility: f64,
        /// Curvature built into the series; the report compares against it.
        #[arg(long, default_value_t = 0.5)]
        planted_b: f64,
        #[command(flatten)]
        common: NullCommon,
    },
}

#[derive(Args)]
struct NullCommon {
    /// Analysis configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write the generated series to this tick CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Manifest path; defaults to `<out>.manifest`, or `null.manifest`
    /// when no series is written.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path for the per-d rows.
    #[arg(long)]
    out: PathBuf,
    /// Manifest path; defaults to `<out>.manifest`.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers > 0 {
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global()
        {
            eprintln!("mpot: --workers {}: {err}", cli.workers);
            return ExitCode::from(3);
        }
    }
    let outcome = match &cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Analyze(args) => commands::analyze(args),
        Command::Null(args) => commands::null(args),
        Command::Sweep(args) => commands::sweep(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("mpot: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
