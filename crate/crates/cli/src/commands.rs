//! Subcommand bodies. Each returns the process exit code on success so a
//! run can complete its outputs and still signal a domain condition, as a
//! sweep with stalled rows does.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use market_potential::{
    b_star, diffusion_curve, displacement_series, gaussian_walk, ingest_ticks, planted_process,
    potential_curve, rolling_b, run_sweep, shuffled_surrogate, write_curve_csv,
    write_diffusion_csv, write_estimates_csv, write_sweep_csv, AnalysisParams, MarketState,
    PlantedSpec, Result, TickSeries, WalkSpec,
};

use crate::config::{self, AnalyzeExtras};
use crate::manifest;
use crate::{AnalyzeArgs, NullArgs, NullCommon, NullKind, SimulateArgs, SweepArgs};

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn write_with<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut out = BufWriter::new(File::create(path)?);
    fill(&mut out)?;
    out.flush()?;
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<u8> {
    let mut config = match &args.config {
        Some(path) => config::load_market(path)?,
        None => Default::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(ticks) = args.ticks {
        config.n_ticks = ticks;
    }
    if let Some(d) = args.d {
        config.d = d;
    }

    let mut market = MarketState::init(&config)?;
    market.run_until(config.n_ticks)?;
    let steps = market.steps();
    let series = market.into_series();
    series.write_csv_file(&args.out)?;

    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| suffixed(&args.out, ".manifest"));
    manifest::write(&manifest_path, &[&manifest::market_section(&config)])?;

    println!(
        "simulated {} ticks in {} steps -> {}",
        series.len(),
        steps,
        args.out.display()
    );
    println!("manifest -> {}", manifest_path.display());
    Ok(0)
}

pub fn analyze(args: &AnalyzeArgs) -> Result<u8> {
    let (params, mut extras) = match &args.config {
        Some(path) => config::load_analysis(path)?,
        None => (AnalysisParams::default(), AnalyzeExtras::default()),
    };
    if let Some(smooth) = args.smooth {
        extras.smooth = smooth;
    }
    if let Some(bins) = args.bins {
        extras.bins = bins;
    }
    if let Some(max_lag) = args.max_lag {
        extras.max_lag = max_lag;
    }

    let series = ingest_ticks(&args.ticks, extras.smooth)?;
    let rolled = rolling_b(series.prices(), &params)?;
    let overall = b_star(&rolled.estimates)?;
    let pairs = displacement_series(series.prices(), &params)?;
    let curve = potential_curve(&pairs, &params, extras.bins)?;
    let diffusion = diffusion_curve(series.prices(), extras.max_lag)?;

    std::fs::create_dir_all(&args.out_dir)?;
    let estimates_path = args.out_dir.join("estimates.csv");
    let curve_path = args.out_dir.join("curve.csv");
    let diffusion_path = args.out_dir.join("diffusion.csv");
    write_with(&estimates_path, |out| {
        write_estimates_csv(&rolled.estimates, out)
    })?;
    write_with(&curve_path, |out| write_curve_csv(&curve, out))?;
    write_with(&diffusion_path, |out| write_diffusion_csv(&diffusion, out))?;

    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| args.out_dir.join("manifest.txt"));
    manifest::write(
        &manifest_path,
        &[
            &manifest::analysis_section(&params),
            &manifest::extras_section(&extras),
        ],
    )?;

    println!(
        "{} ticks analyzed: {} windows ({} degenerate), b* {overall:+.5}",
        series.len(),
        rolled.estimates.len(),
        rolled.n_degenerate
    );
    println!(
        "estimates -> {}, curve ({} bins) -> {}, diffusion (lags 1..={}) -> {}",
        estimates_path.display(),
        curve.bin_centers.len(),
        curve_path.display(),
        extras.max_lag,
        diffusion_path.display()
    );
    println!("manifest -> {}", manifest_path.display());
    Ok(0)
}

/// Disjoint windows: the stride equals the window, so every estimate reads
/// fresh data and the reported spread is a clean calibration number.
fn default_null_params() -> AnalysisParams {
    let params = AnalysisParams::default();
    AnalysisParams {
        stride: params.window,
        ..params
    }
}

pub fn null(args: &NullArgs) -> Result<u8> {
    match &args.kind {
        NullKind::Walk {
            length,
            seed,
            volatility,
            common,
        } => {
            let series = gaussian_walk(&WalkSpec {
                length: *length,
                seed: *seed,
                volatility: *volatility,
            })?;
            let spec_section = format!(
                "# surrogate: walk\n# length = {length}\n# seed = {seed}\n# volatility = {volatility}\n"
            );
            null_report(
                &format!("walk (length {length}, seed {seed}, volatility {volatility})"),
                &series,
                None,
                common,
                &spec_section,
            )
        }
        NullKind::Shuffle {
            ticks,
            seed,
            common,
        } => {
            let source = ingest_ticks(ticks, 1)?;
            let series = shuffled_surrogate(&source, *seed)?;
            let spec_section = format!(
                "# surrogate: shuffle\n# source = {}\n# seed = {seed}\n",
                ticks.display()
            );
            null_report(
                &format!("shuffle of {} (seed {seed})", ticks.display()),
                &series,
                None,
                common,
                &spec_section,
            )
        }
        NullKind::Planted {
            length,
            seed,
            volatility,
            planted_b,
            common,
        } => {
            let params = load_null_params(common)?;
            let series = planted_process(&PlantedSpec {
                length: *length,
                seed: *seed,
                volatility: *volatility,
                planted_b: *planted_b,
                m_analysis: params.m_analysis,
            })?;
            let spec_section = format!(
                "# surrogate: planted\n# length = {length}\n# seed = {seed}\n\
                 # volatility = {volatility}\n# planted_b = {planted_b}\n"
            );
            null_report(
                &format!(
                    "planted (length {length}, seed {seed}, volatility {volatility}, b {planted_b})"
                ),
                &series,
                Some(*planted_b),
                common,
                &spec_section,
            )
        }
    }
}

fn load_null_params(common: &NullCommon) -> Result<AnalysisParams> {
    match &common.config {
        Some(path) => config::load_analysis_strict(path),
        None => Ok(default_null_params()),
    }
}

fn null_report(
    label: &str,
    series: &TickSeries,
    planted: Option<f64>,
    common: &NullCommon,
    spec_section: &str,
) -> Result<u8> {
    let params = load_null_params(common)?;
    let rolled = rolling_b(series.prices(), &params)?;
    let mean = b_star(&rolled.estimates)?;
    let n = rolled.estimates.len();
    let std = if n >= 2 {
        let ss: f64 = rolled
            .estimates
            .iter()
            .map(|e| (e.b - mean) * (e.b - mean))
            .sum();
        (ss / (n as f64 - 1.0)).sqrt()
    } else {
        f64::NAN
    };

    if let Some(out) = &common.out {
        series.write_csv_file(out)?;
    }
    let manifest_path = common.manifest.clone().unwrap_or_else(|| {
        common
            .out
            .as_deref()
            .map(|out| suffixed(out, ".manifest"))
            .unwrap_or_else(|| PathBuf::from("null.manifest"))
    });
    manifest::write(
        &manifest_path,
        &[spec_section, &manifest::analysis_section(&params)],
    )?;

    println!("surrogate: {label}");
    println!("windows {n} ({} degenerate)", rolled.n_degenerate);
    println!("mean b {mean:+.5}");
    println!("std b  {std:.5}");
    if let Some(planted_b) = planted {
        println!("recovery error {:+.5}", mean - planted_b);
    }
    if let Some(out) = &common.out {
        println!("series -> {}", out.display());
    }
    println!("manifest -> {}", manifest_path.display());
    Ok(0)
}

pub fn sweep(args: &SweepArgs) -> Result<u8> {
    let spec = match &args.config {
        Some(path) => config::load_sweep(path)?,
        None => config::default_sweep_spec(),
    };
    let result = run_sweep(&spec)?;
    write_with(&args.out, |out| write_sweep_csv(&result, out))?;

    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| suffixed(&args.out, ".manifest"));
    manifest::write(&manifest_path, &[&manifest::sweep_sections(&spec)])?;

    for row in &result.rows {
        println!(
            "d {:+.3}: b* {:+.5} (std {:.5}, {} windows, {} degenerate){}",
            row.d,
            row.b_star,
            row.b_std,
            row.n_windows,
            row.n_degenerate,
            if row.stalled { ", STALLED" } else { "" }
        );
    }
    match &result.fit {
        Some(fit) => println!(
            "fit: intercept {:+.5}, slope {:+.5}, r^2 {:.5}",
            fit.intercept, fit.slope, fit.r_squared
        ),
        None => println!("fit: unavailable (fewer than two clean rows)"),
    }
    println!("rows -> {}", args.out.display());
    println!("manifest -> {}", manifest_path.display());

    let stalled = result.rows.iter().filter(|row| row.stalled).count();
    if stalled > 0 {
        eprintln!(
            "mpot: {stalled} of {} runs stalled before producing their ticks",
            result.rows.len()
        );
        return Ok(3);
    }
    Ok(0)
}
