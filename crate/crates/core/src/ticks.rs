//! Tick price series: container, CSV round-trip, and ingestion of external data.
//!
//! The on-disk format is a minimal CSV with the exact header `u,price`, one
//! row per transaction in tick-time order. Prices are written with Rust's
//! shortest round-trip decimal formatting, so reading a file back yields
//! bit-identical `f64` values.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::dealer::MarketConfig;
use crate::{Error, Result};

/// Header of every tick CSV file.
pub const TICK_CSV_HEADER: &str = "u,price";

/// A sequence of transaction prices indexed by tick time `u = 0, 1, 2, ...`.
///
/// Series produced by the simulator carry the [`MarketConfig`] that generated
/// them; ingested or derived series carry no provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct TickSeries {
    prices: Vec<f64>,
    meta: Option<MarketConfig>,
}

impl TickSeries {
    /// Wraps raw prices without provenance.
    pub fn new(prices: Vec<f64>) -> Self {
        Self { prices, meta: None }
    }

    /// Wraps prices produced by a simulation, keeping its configuration.
    pub fn with_meta(prices: Vec<f64>, meta: MarketConfig) -> Self {
        Self {
            prices,
            meta: Some(meta),
        }
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn meta(&self) -> Option<&MarketConfig> {
        self.meta.as_ref()
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    /// One-tick price changes `P(u+1) - P(u)`; one element shorter than the series.
    pub fn returns(&self) -> Vec<f64> {
        self.prices.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Centered moving-average smoothing with an odd window `w`.
    ///
    /// Output index `i` is the mean of `prices[i..i + w]`, i.e. the smoothed
    /// value at the window's center tick; the result is `w - 1` ticks shorter.
    /// `w = 1` returns the series unchanged. The result carries no provenance
    /// because it is no longer a raw simulation output.
    pub fn smoothed(&self, w: usize) -> Result<TickSeries> {
        if w == 0 || w.is_multiple_of(2) {
            return Err(Error::InvalidConfig {
                field: "smooth",
                reason: format!("window must be odd and positive, got {w}"),
            });
        }
        if self.prices.len() < w {
            return Err(Error::InsufficientHistory {
                needed: w,
                got: self.prices.len(),
            });
        }
        let inv = 1.0 / w as f64;
        let prices = self
            .prices
            .windows(w)
            .map(|win| win.iter().sum::<f64>() * inv)
            .collect();
        Ok(TickSeries::new(prices))
    }

    /// Writes the series as `u,price` CSV.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "{TICK_CSV_HEADER}")?;
        for (u, price) in self.prices.iter().enumerate() {
            writeln!(out, "{u},{price}")?;
        }
        Ok(())
    }

    /// Writes the series to a file at `path`.
    pub fn write_csv_file<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_csv(&mut out)?;
        out.flush()?;
        Ok(())
    }

    /// Reads a `u,price` CSV. `source_name` labels parse errors (usually the
    /// file path).
    ///
    /// Tick indices must be strictly increasing and prices finite; violations
    /// are reported with their line number.
    pub fn read_csv<R: BufRead>(input: R, source_name: &str) -> Result<TickSeries> {
        let parse_err = |line: usize, reason: String| Error::Parse {
            source_name: source_name.to_string(),
            line,
            reason,
        };
        let mut lines = input.lines().enumerate();
        match lines.next() {
            Some((_, header)) => {
                if header?.trim_end() != TICK_CSV_HEADER {
                    return Err(parse_err(1, format!("expected header `{TICK_CSV_HEADER}`")));
                }
            }
            None => return Err(parse_err(1, "empty file".to_string())),
        }
        let mut prices = Vec::new();
        let mut last_u: Option<u64> = None;
        for (idx, line) in lines {
            let line_no = idx + 1;
            let line = line?;
            let row = line.trim_end();
            if row.is_empty() {
                continue;
            }
            let (u_text, price_text) = row
                .split_once(',')
                .ok_or_else(|| parse_err(line_no, "expected `u,price`".to_string()))?;
            let u: u64 = u_text
                .trim()
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad tick index `{u_text}`")))?;
            if let Some(prev) = last_u {
                if u <= prev {
                    return Err(parse_err(
                        line_no,
                        format!("tick index {u} does not increase past {prev}"),
                    ));
                }
            }
            let price: f64 = price_text
                .trim()
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad price `{price_text}`")))?;
            if !price.is_finite() {
                return Err(parse_err(line_no, format!("non-finite price `{price_text}`")));
            }
            last_u = Some(u);
            prices.push(price);
        }
        Ok(TickSeries::new(prices))
    }
}

/// Reads a tick CSV from `path` and applies centered smoothing of width
/// `smooth` (pass 1 to keep the raw series).
pub fn ingest_ticks<P: AsRef<Path>>(path: P, smooth: usize) -> Result<TickSeries> {
    let path = path.as_ref();
    let file = File::open(path)?;
    let series = TickSeries::read_csv(BufReader::new(file), &path.to_string_lossy())?;
    series.smoothed(smooth)
}
