//! Feedback-strength sweeps: simulate the market across a grid of `d` values
//! and fit the response of the long-run curvature `b*` to `d`.
//!
//! Every run's seed derives from the sweep's base seed, the run's `d`, and a
//! run index, so rows are reproducible one at a time and invariant under
//! reordering of the grid. The headline output is the line fit of `b*`
//! against `d`: a market of pure contrarians steepens the restoring force,
//! trend followers weaken and eventually invert it.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use std::io::Write;

use crate::dealer::{run_simulation, MarketConfig};
use crate::potential::{b_star, rolling_b_sequential, AnalysisParams, RollingEstimates};
use crate::{Error, Result};

/// Experiment design for one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Market configuration shared by all runs; its `d`, `seed`, and
    /// `n_ticks` fields are overridden per run.
    pub base: MarketConfig,
    /// Feedback strengths to simulate, one run per value, reported in order.
    pub d_values: Vec<f64>,
    pub analysis: AnalysisParams,
    /// Transactions per run.
    pub ticks_per_run: usize,
    /// Root of the per-run seed derivation.
    pub base_seed: u64,
}

/// The default 9-point feedback grid, `-1.0` to `1.0` in steps of `0.25`.
pub fn default_d_grid() -> Vec<f64> {
    (0..9).map(|i| -1.0 + 0.25 * i as f64).collect()
}

impl SweepSpec {
    /// Checks the design and its embedded configurations.
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.analysis.validate()?;
        if self.d_values.is_empty() {
            return Err(Error::InvalidConfig {
                field: "d_values",
                reason: "must name at least one feedback strength".to_string(),
            });
        }
        if let Some(bad) = self.d_values.iter().find(|d| !d.is_finite()) {
            return Err(Error::InvalidConfig {
                field: "d_values",
                reason: format!("must be finite, got {bad}"),
            });
        }
        let span = self.analysis.window + self.analysis.m_analysis;
        if self.ticks_per_run < span {
            return Err(Error::InvalidConfig {
                field: "ticks_per_run",
                reason: format!(
                    "must cover at least one window plus warm-up ({span}), got {}",
                    self.ticks_per_run
                ),
            });
        }
        Ok(())
    }

    /// The fully resolved configuration of the run at feedback strength `d`.
    pub fn run_config(&self, d: f64) -> MarketConfig {
        MarketConfig {
            d,
            seed: derive_seed(self.base_seed, d, 0),
            n_ticks: self.ticks_per_run,
            ..self.base.clone()
        }
    }
}

/// Per-run seed: FNV-1a over the little-endian bytes of the base seed, the
/// bit pattern of `d`, and the run index, in that order.
///
/// The derivation depends on the value of `d`, never on its position in the
/// grid, so permuting or extending `d_values` leaves existing rows untouched.
pub fn derive_seed(base_seed: u64, d: f64, run_index: u64) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = FNV_OFFSET;
    for byte in base_seed
        .to_le_bytes()
        .into_iter()
        .chain(d.to_bits().to_le_bytes())
        .chain(run_index.to_le_bytes())
    {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// One grid point's outcome.
///
/// A stalled run keeps its place in the table with `b_star` and `b_std` set
/// to NaN; `b_std` is also NaN when fewer than two windows were fitted.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub d: f64,
    /// Mean window curvature of the run.
    pub b_star: f64,
    /// Sample standard deviation of the window curvatures.
    pub b_std: f64,
    pub n_windows: usize,
    pub n_degenerate: usize,
    /// True when the run hit its step budget before producing its ticks.
    pub stalled: bool,
}

/// Ordinary least-squares line through `(x, y)` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
}

/// A sweep's rows, in requested `d` order, plus the `b*` versus `d` line.
///
/// The fit covers the rows with finite `b_star` and is absent when fewer
/// than two such rows exist.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub fit: Option<LineFit>,
}

impl SweepResult {
    /// True when any grid point failed to produce its ticks.
    pub fn any_stalled(&self) -> bool {
        self.rows.iter().any(|row| row.stalled)
    }
}

fn summarize(d: f64, rolled: &RollingEstimates) -> SweepRow {
    let n_windows = rolled.estimates.len();
    let b_star = b_star(&rolled.estimates).unwrap_or(f64::NAN);
    let b_std = if n_windows >= 2 {
        let var = rolled
            .estimates
            .iter()
            .map(|e| {
                let dev = e.b - b_star;
                dev * dev
            })
            .sum::<f64>()
            / (n_windows - 1) as f64;
        var.sqrt()
    } else {
        f64::NAN
    };
    SweepRow {
        d,
        b_star,
        b_std,
        n_windows,
        n_degenerate: rolled.n_degenerate,
        stalled: false,
    }
}

fn run_one(
    spec: &SweepSpec,
    d: f64,
    rolling: fn(&[f64], &AnalysisParams) -> Result<RollingEstimates>,
) -> Result<SweepRow> {
    let config = spec.run_config(d);
    match run_simulation(&config) {
        Ok(series) => {
            let rolled = rolling(series.prices(), &spec.analysis)?;
            Ok(summarize(d, &rolled))
        }
        Err(Error::MarketStalled { .. }) => Ok(SweepRow {
            d,
            b_star: f64::NAN,
            b_std: f64::NAN,
            n_windows: 0,
            n_degenerate: 0,
            stalled: true,
        }),
        Err(other) => Err(other),
    }
}

fn assemble(spec: &SweepSpec, rows: Vec<SweepRow>) -> SweepResult {
    debug_assert_eq!(rows.len(), spec.d_values.len());
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|row| row.b_star.is_finite())
        .map(|row| (row.d, row.b_star))
        .collect();
    let fit = if points.len() >= 2 {
        fit_line(&points).ok()
    } else {
        None
    };
    SweepResult { rows, fit }
}

/// Sequential form of [`run_sweep`]; always available and always produces
/// results identical to the parallel form.
pub fn run_sweep_sequential(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let rows = spec
        .d_values
        .iter()
        .map(|&d| run_one(spec, d, rolling_b_sequential))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(spec, rows))
}

/// Runs one simulation per `d`, summarizes each into a [`SweepRow`], and
/// fits the `b*` versus `d` line over the rows that produced estimates.
///
/// Stalled runs are flagged in their rows rather than failing the sweep;
/// callers decide how loudly to report them (see
/// [`SweepResult::any_stalled`]). With the `parallel` feature the grid
/// points run concurrently; rows always come back in `d_values` order.
#[cfg(feature = "parallel")]
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let rows = spec
        .d_values
        .par_iter()
        .map(|&d| run_one(spec, d, crate::potential::rolling_b))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(spec, rows))
}

/// Runs one simulation per `d`, summarizes each into a [`SweepRow`], and
/// fits the `b*` versus `d` line over the rows that produced estimates.
///
/// Stalled runs are flagged in their rows rather than failing the sweep.
/// This build has the `parallel` feature disabled, so runs execute in
/// sequence.
#[cfg(not(feature = "parallel"))]
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep_sequential(spec)
}

/// Ordinary least squares of `y` on `x`.
///
/// `r_squared` is defined as 1 when the points have no `y` variance at all
/// (a perfectly flat, perfectly fitted line).
pub fn fit_line(points: &[(f64, f64)]) -> Result<LineFit> {
    let n = points.len();
    if n < 2 {
        return Err(Error::UnderdeterminedFit);
    }
    let inv_n = 1.0 / n as f64;
    let mean_x = points.iter().map(|&(x, _)| x).sum::<f64>() * inv_n;
    let mean_y = points.iter().map(|&(_, y)| y).sum::<f64>() * inv_n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(x, y) in points {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::UnderdeterminedFit);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        let ss_res: f64 = points
            .iter()
            .map(|&(x, y)| {
                let e = y - (slope * x + intercept);
                e * e
            })
            .sum();
        1.0 - ss_res / syy
    };
    Ok(LineFit {
        intercept,
        slope,
        r_squared,
    })
}

/// Writes sweep rows as `d,b_star,b_std,n_windows,n_degenerate,stalled` CSV.
pub fn write_sweep_csv<W: Write>(result: &SweepResult, out: &mut W) -> Result<()> {
    writeln!(out, "d,b_star,b_std,n_windows,n_degenerate,stalled")?;
    for row in &result.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.d, row.b_star, row.b_std, row.n_windows, row.n_degenerate, row.stalled
        )?;
    }
    Ok(())
}
