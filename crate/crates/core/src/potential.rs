//! Potential-force estimation from tick series.
//!
//! The working model is that tick prices feel a quadratic potential centered
//! on their own trailing mean: with displacement `x(u) = P(u) - P_M(u)` and
//! drift `y(u) = P(u+1) - P(u)`, prices obey `y = -(b/(m-1)) x + noise`. An
//! ordinary least-squares fit of drift on displacement therefore measures the
//! curvature as `b = -(m-1) * slope`: positive `b` pulls the price back to
//! its moving average, negative `b` pushes it away, and a free random walk
//! gives `b` near zero.
//!
//! [`rolling_b`] repeats the fit over strided windows to track the curvature
//! through time, [`potential_curve`] reconstructs the potential shape without
//! assuming it is quadratic, and [`diffusion_curve`] measures how price
//! variance grows with lag, the independent signature of the same force.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use std::io::Write;

use crate::{Error, Result};

/// Parameters shared by every estimation routine.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisParams {
    /// Trailing-mean length defining the displacement `x = P - P_M`.
    pub m_analysis: usize,
    /// Ticks per estimation window.
    pub window: usize,
    /// Ticks between successive window starts.
    pub stride: usize,
    /// Smallest displacement standard deviation a window may have and still
    /// be fitted; guards against constant-price stretches.
    pub min_displacement_spread: f64,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self {
            m_analysis: 16,
            window: 2000,
            stride: 100,
            min_displacement_spread: 1e-12,
        }
    }
}

impl AnalysisParams {
    /// Checks every field against its documented domain.
    pub fn validate(&self) -> Result<()> {
        let invalid = |field: &'static str, reason: String| Error::InvalidConfig { field, reason };
        if self.m_analysis < 2 {
            return Err(invalid(
                "m_analysis",
                format!("must be at least 2, got {}", self.m_analysis),
            ));
        }
        if self.window <= self.m_analysis {
            return Err(invalid(
                "window",
                format!(
                    "must exceed m_analysis = {}, got {}",
                    self.m_analysis, self.window
                ),
            ));
        }
        if self.stride == 0 {
            return Err(invalid("stride", "must be at least 1".to_string()));
        }
        if !(self.min_displacement_spread.is_finite() && self.min_displacement_spread > 0.0) {
            return Err(invalid(
                "min_displacement_spread",
                format!("must be positive, got {}", self.min_displacement_spread),
            ));
        }
        Ok(())
    }
}

/// One window's fitted potential curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialEstimate {
    /// Tick index of the first price in the window.
    pub window_start: usize,
    /// Potential curvature, `-(m_analysis - 1)` times the slope.
    pub b: f64,
    /// OLS slope of drift on displacement.
    pub slope: f64,
    /// OLS intercept; a nonzero value captures net drift in the window.
    pub intercept: f64,
    /// Standard deviation of the fit residuals, the noise term of the model.
    pub residual_std: f64,
    /// Number of (displacement, drift) pairs behind the fit.
    pub n_points: usize,
}

/// All window estimates of one series plus skip diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct RollingEstimates {
    /// Accepted estimates, in window order.
    pub estimates: Vec<PotentialEstimate>,
    /// Windows skipped for lack of displacement spread.
    pub n_degenerate: usize,
}

/// The empirical potential shape over displacement bins.
///
/// All three vectors cover the populated bins only, in ascending center
/// order, so `counts` is strictly positive throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialCurve {
    /// Displacement value at each populated bin's center.
    pub bin_centers: Vec<f64>,
    /// `(m_analysis - 1) * U` at each bin center, shifted so the minimum is 0.
    pub u_values: Vec<f64>,
    /// Samples behind each bin.
    pub counts: Vec<usize>,
}

/// Mean of the `m` prices ending at tick `u`, the trailing center the
/// displacement is measured from.
pub fn super_moving_average(prices: &[f64], u: usize, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidConfig {
            field: "m_analysis",
            reason: "must be at least 1".to_string(),
        });
    }
    if u >= prices.len() {
        return Err(Error::InsufficientHistory {
            needed: u + 1,
            got: prices.len(),
        });
    }
    if u + 1 < m {
        return Err(Error::InsufficientHistory {
            needed: m,
            got: u + 1,
        });
    }
    let window = &prices[u + 1 - m..=u];
    Ok(window.iter().sum::<f64>() / m as f64)
}

/// Builds the `(displacement, drift)` pairs `(P(u) - P_M(u), P(u+1) - P(u))`
/// for every tick `u` where both quantities exist, in tick order.
///
/// The first usable tick is `m_analysis - 1`, the last is one before the
/// series end, so the result holds `len - m_analysis` pairs.
pub fn displacement_series(prices: &[f64], params: &AnalysisParams) -> Result<Vec<(f64, f64)>> {
    params.validate()?;
    let m = params.m_analysis;
    if prices.len() <= m + 1 {
        return Err(Error::InsufficientHistory {
            needed: m + 2,
            got: prices.len(),
        });
    }
    (m - 1..prices.len() - 1)
        .map(|u| {
            let center = super_moving_average(prices, u, m)?;
            Ok((prices[u] - center, prices[u + 1] - prices[u]))
        })
        .collect()
}

/// Ordinary least squares of drift on displacement over one window of pairs.
///
/// `window_start` only labels the result. The returned `b` is computed from
/// the slope, so `b == -(m_analysis - 1) * slope` holds bitwise. Windows
/// whose displacement spread (population standard deviation) falls below
/// `min_displacement_spread` carry no signal and are rejected as degenerate.
pub fn estimate_b(
    pairs: &[(f64, f64)],
    params: &AnalysisParams,
    window_start: usize,
) -> Result<PotentialEstimate> {
    params.validate()?;
    let n = pairs.len();
    if n < 2 {
        return Err(Error::DegenerateWindow {
            spread: 0.0,
            threshold: params.min_displacement_spread,
        });
    }
    let inv_n = 1.0 / n as f64;
    let mean_x = pairs.iter().map(|&(x, _)| x).sum::<f64>() * inv_n;
    let mean_y = pairs.iter().map(|&(_, y)| y).sum::<f64>() * inv_n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in pairs {
        let dx = x - mean_x;
        sxx += dx * dx;
        sxy += dx * (y - mean_y);
    }
    let spread = (sxx * inv_n).sqrt();
    if spread.is_nan() || spread < params.min_displacement_spread {
        return Err(Error::DegenerateWindow {
            spread,
            threshold: params.min_displacement_spread,
        });
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let b = -((params.m_analysis - 1) as f64) * slope;
    let residual_std = if n > 2 {
        let ss_res: f64 = pairs
            .iter()
            .map(|&(x, y)| {
                let e = y - (slope * x + intercept);
                e * e
            })
            .sum();
        (ss_res / (n - 2) as f64).sqrt()
    } else {
        0.0
    };
    Ok(PotentialEstimate {
        window_start,
        b,
        slope,
        intercept,
        residual_std,
        n_points: n,
    })
}

/// Window start offsets for a series of `len` prices.
///
/// A window starting at `s` consumes ticks `[s, s + window)` and regresses
/// over its interior pairs; it fits whenever `s + window + m_analysis ≤ len`,
/// so the last `m_analysis` ticks of one window never double as the
/// trailing-mean warm-up of data beyond the series end.
fn window_starts(len: usize, params: &AnalysisParams) -> Result<Vec<usize>> {
    let span = params.window + params.m_analysis;
    if len < span {
        return Err(Error::InsufficientHistory {
            needed: span,
            got: len,
        });
    }
    Ok((0..=len - span).step_by(params.stride).collect())
}

/// One window of [`rolling_b`]: fit over the pairs wholly inside
/// `prices[start .. start + window]`.
fn estimate_window(
    prices: &[f64],
    params: &AnalysisParams,
    start: usize,
) -> Result<PotentialEstimate> {
    let window = &prices[start..start + params.window];
    let pairs = displacement_series(window, params)?;
    estimate_b(&pairs, params, start)
}

fn collect_windows(
    results: impl IntoIterator<Item = Result<PotentialEstimate>>,
) -> Result<RollingEstimates> {
    let mut estimates = Vec::new();
    let mut n_degenerate = 0usize;
    for result in results {
        match result {
            Ok(estimate) => estimates.push(estimate),
            Err(Error::DegenerateWindow { .. }) => n_degenerate += 1,
            Err(other) => return Err(other),
        }
    }
    Ok(RollingEstimates {
        estimates,
        n_degenerate,
    })
}

/// Sequential form of [`rolling_b`]; always available and always produces
/// results identical to the parallel form.
pub fn rolling_b_sequential(prices: &[f64], params: &AnalysisParams) -> Result<RollingEstimates> {
    params.validate()?;
    let starts = window_starts(prices.len(), params)?;
    collect_windows(starts.into_iter().map(|s| estimate_window(prices, params, s)))
}

/// Fits the potential curvature over strided windows of the series.
///
/// Windows start at `0, stride, 2 * stride, ...` and each spans `window`
/// ticks. Degenerate windows are skipped and counted, never fitted. With the
/// `parallel` feature the windows are evaluated concurrently; the output
/// order is window order either way.
#[cfg(feature = "parallel")]
pub fn rolling_b(prices: &[f64], params: &AnalysisParams) -> Result<RollingEstimates> {
    params.validate()?;
    let starts = window_starts(prices.len(), params)?;
    let results: Vec<Result<PotentialEstimate>> = starts
        .par_iter()
        .map(|&s| estimate_window(prices, params, s))
        .collect();
    collect_windows(results)
}

/// Fits the potential curvature over strided windows of the series.
///
/// Windows start at `0, stride, 2 * stride, ...` and each spans `window`
/// ticks. Degenerate windows are skipped and counted, never fitted. This
/// build has the `parallel` feature disabled, so evaluation is sequential.
#[cfg(not(feature = "parallel"))]
pub fn rolling_b(prices: &[f64], params: &AnalysisParams) -> Result<RollingEstimates> {
    rolling_b_sequential(prices, params)
}

/// Arithmetic mean of the window curvatures: the long-run summary `b*`.
pub fn b_star(estimates: &[PotentialEstimate]) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::NoEstimates);
    }
    Ok(estimates.iter().map(|e| e.b).sum::<f64>() / estimates.len() as f64)
}

/// Linear-interpolation quantile of already-sorted values.
fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    let last = sorted.len() - 1;
    let pos = q * last as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Reconstructs the empirical potential shape from `(displacement, drift)`
/// pairs without assuming it is quadratic.
///
/// Displacements across the central 98% quantile range are binned uniformly
/// into `n_bins` bins; the per-bin mean drift is the local force, and minus
/// its cumulative trapezoidal integral over populated bin centers, scaled by
/// `m_analysis - 1` and shifted to minimum zero, is the curve. For a true
/// quadratic potential the result approximates `(b/2) x²`.
pub fn potential_curve(
    pairs: &[(f64, f64)],
    params: &AnalysisParams,
    n_bins: usize,
) -> Result<PotentialCurve> {
    params.validate()?;
    if n_bins < 3 {
        return Err(Error::InvalidConfig {
            field: "n_bins",
            reason: format!("must be at least 3, got {n_bins}"),
        });
    }
    let n = pairs.len();
    if n < 2 {
        return Err(Error::DegenerateWindow {
            spread: 0.0,
            threshold: params.min_displacement_spread,
        });
    }
    let mean_x = pairs.iter().map(|&(x, _)| x).sum::<f64>() / n as f64;
    let var_x = pairs
        .iter()
        .map(|&(x, _)| {
            let dx = x - mean_x;
            dx * dx
        })
        .sum::<f64>()
        / n as f64;
    let spread = var_x.sqrt();
    if spread.is_nan() || spread < params.min_displacement_spread {
        return Err(Error::DegenerateWindow {
            spread,
            threshold: params.min_displacement_spread,
        });
    }

    let mut xs: Vec<f64> = pairs.iter().map(|&(x, _)| x).collect();
    xs.sort_by(f64::total_cmp);
    let lo = sorted_quantile(&xs, 0.01);
    let hi = sorted_quantile(&xs, 0.99);
    let width = hi - lo;
    if width.is_nan() || width <= 0.0 {
        return Err(Error::DegenerateWindow {
            spread,
            threshold: params.min_displacement_spread,
        });
    }

    let bin_width = width / n_bins as f64;
    let mut sums = vec![0.0f64; n_bins];
    let mut counts = vec![0usize; n_bins];
    for &(x, y) in pairs {
        if x < lo || x > hi {
            continue;
        }
        let idx = (((x - lo) / bin_width) as usize).min(n_bins - 1);
        sums[idx] += y;
        counts[idx] += 1;
    }

    let mut bin_centers = Vec::new();
    let mut forces = Vec::new();
    let mut kept_counts = Vec::new();
    for j in 0..n_bins {
        if counts[j] > 0 {
            bin_centers.push(lo + (j as f64 + 0.5) * bin_width);
            forces.push(sums[j] / counts[j] as f64);
            kept_counts.push(counts[j]);
        }
    }

    // minus the cumulative trapezoidal integral of the mean drift, scaled.
    let scale = (params.m_analysis - 1) as f64;
    let mut u_values = Vec::with_capacity(bin_centers.len());
    let mut acc = 0.0f64;
    u_values.push(0.0);
    for j in 1..bin_centers.len() {
        let dx = bin_centers[j] - bin_centers[j - 1];
        acc -= 0.5 * (forces[j] + forces[j - 1]) * dx;
        u_values.push(scale * acc);
    }
    let min_u = u_values.iter().copied().fold(f64::INFINITY, f64::min);
    for u in &mut u_values {
        *u -= min_u;
    }

    Ok(PotentialCurve {
        bin_centers,
        u_values,
        counts: kept_counts,
    })
}

/// Sample variance of `P(u+lag) - P(u)` for every lag `1..=max_lag`.
///
/// A potential-free walk grows linearly, `variance ≈ lag * volatility²`;
/// attraction bends the curve below that line and repulsion above it.
pub fn diffusion_curve(prices: &[f64], max_lag: usize) -> Result<Vec<(usize, f64)>> {
    if max_lag == 0 {
        return Err(Error::InvalidConfig {
            field: "max_lag",
            reason: "must be at least 1".to_string(),
        });
    }
    if prices.len() <= max_lag + 1 {
        return Err(Error::InsufficientHistory {
            needed: max_lag + 2,
            got: prices.len(),
        });
    }
    let mut curve = Vec::with_capacity(max_lag);
    for lag in 1..=max_lag {
        let n = prices.len() - lag;
        let mut mean = 0.0f64;
        for u in 0..n {
            mean += prices[u + lag] - prices[u];
        }
        mean /= n as f64;
        let mut ss = 0.0f64;
        for u in 0..n {
            let dev = (prices[u + lag] - prices[u]) - mean;
            ss += dev * dev;
        }
        curve.push((lag, ss / (n - 1) as f64));
    }
    Ok(curve)
}

/// Writes window estimates as
/// `window_start,b,slope,intercept,residual_std,n_points` CSV.
pub fn write_estimates_csv<W: Write>(estimates: &[PotentialEstimate], out: &mut W) -> Result<()> {
    writeln!(out, "window_start,b,slope,intercept,residual_std,n_points")?;
    for e in estimates {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            e.window_start, e.b, e.slope, e.intercept, e.residual_std, e.n_points
        )?;
    }
    Ok(())
}

/// Writes a potential curve as `x,u_of_x,count` CSV.
pub fn write_curve_csv<W: Write>(curve: &PotentialCurve, out: &mut W) -> Result<()> {
    writeln!(out, "x,u_of_x,count")?;
    for ((x, u), count) in curve
        .bin_centers
        .iter()
        .zip(&curve.u_values)
        .zip(&curve.counts)
    {
        writeln!(out, "{x},{u},{count}")?;
    }
    Ok(())
}

/// Writes a diffusion curve as `lag,variance` CSV.
pub fn write_diffusion_csv<W: Write>(curve: &[(usize, f64)], out: &mut W) -> Result<()> {
    writeln!(out, "lag,variance")?;
    for (lag, variance) in curve {
        writeln!(out, "{lag},{variance}")?;
    }
    Ok(())
}
