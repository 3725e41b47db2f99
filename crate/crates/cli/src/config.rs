//! Flat `key = value` configuration files. Keys are exactly the field names
//! of the structures they fill; unknown keys are errors naming the line, so
//! a typo can never silently fall back to a default. `#` starts a comment,
//! blank lines are skipped, and a repeated key keeps its last value, which
//! lets run manifests double as configuration files.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use market_potential::{AnalysisParams, Error, MarketConfig, Result, SweepSpec};

pub struct KvLine {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub fn parse_kv_file(path: &Path) -> Result<(Vec<KvLine>, String)> {
    let source = path.to_string_lossy().into_owned();
    let text = std::fs::read_to_string(path)?;
    let lines = parse_kv(&text, &source)?;
    Ok((lines, source))
}

fn parse_kv(text: &str, source_name: &str) -> Result<Vec<KvLine>> {
    let mut entries = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Parse {
                source_name: source_name.to_string(),
                line,
                reason: format!("expected `key = value`, got {content:?}"),
            });
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(Error::Parse {
                source_name: source_name.to_string(),
                line,
                reason: "key and value must both be non-empty".to_string(),
            });
        }
        entries.push(KvLine { line, key, value });
    }
    Ok(entries)
}

fn parse_value<T>(kv: &KvLine, source_name: &str) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    kv.value.parse().map_err(|err| Error::Parse {
        source_name: source_name.to_string(),
        line: kv.line,
        reason: format!("{}: {err}", kv.key),
    })
}

fn unknown_key(kv: &KvLine, source_name: &str, expected: &str) -> Error {
    Error::Parse {
        source_name: source_name.to_string(),
        line: kv.line,
        reason: format!("unknown key `{}`; expected one of: {expected}", kv.key),
    }
}

const MARKET_KEYS: &str = "n_dealers, spread, c_min, c_max, d, m_dealer, initial_price, seed, \
                           n_ticks, max_steps";
const ANALYSIS_KEYS: &str = "m_analysis, window, stride, min_displacement_spread";

fn apply_market(config: &mut MarketConfig, kv: &KvLine, source_name: &str) -> Result<bool> {
    match kv.key.as_str() {
        "n_dealers" => config.n_dealers = parse_value(kv, source_name)?,
        "spread" => config.spread = parse_value(kv, source_name)?,
        "c_min" => config.c_min = parse_value(kv, source_name)?,
        "c_max" => config.c_max = parse_value(kv, source_name)?,
        "d" => config.d = parse_value(kv, source_name)?,
        "m_dealer" => config.m_dealer = parse_value(kv, source_name)?,
        "initial_price" => config.initial_price = parse_value(kv, source_name)?,
        "seed" => config.seed = parse_value(kv, source_name)?,
        "n_ticks" => config.n_ticks = parse_value(kv, source_name)?,
        "max_steps" => config.max_steps = parse_value(kv, source_name)?,
        _ => return Ok(false),
    }
    Ok(true)
}

fn apply_analysis(params: &mut AnalysisParams, kv: &KvLine, source_name: &str) -> Result<bool> {
    match kv.key.as_str() {
        "m_analysis" => params.m_analysis = parse_value(kv, source_name)?,
        "window" => params.window = parse_value(kv, source_name)?,
        "stride" => params.stride = parse_value(kv, source_name)?,
        "min_displacement_spread" => {
            params.min_displacement_spread = parse_value(kv, source_name)?;
        }
        _ => return Ok(false),
    }
    Ok(true)
}

/// Loads a market configuration, starting from defaults.
pub fn load_market(path: &Path) -> Result<MarketConfig> {
    let (lines, source) = parse_kv_file(path)?;
    let mut config = MarketConfig::default();
    for kv in &lines {
        if !apply_market(&mut config, kv, &source)? {
            return Err(unknown_key(kv, &source, MARKET_KEYS));
        }
    }
    Ok(config)
}

/// Ingestion and reporting knobs of `analyze` that live outside
/// `AnalysisParams` but inside its configuration file.
pub struct AnalyzeExtras {
    pub smooth: usize,
    pub bins: usize,
    pub max_lag: usize,
}

impl Default for AnalyzeExtras {
    fn default() -> Self {
        AnalyzeExtras {
            smooth: 1,
            bins: 40,
            max_lag: 200,
        }
    }
}

/// Loads analysis parameters plus the `analyze` extras from one file.
pub fn load_analysis(path: &Path) -> Result<(AnalysisParams, AnalyzeExtras)> {
    let (lines, source) = parse_kv_file(path)?;
    let mut params = AnalysisParams::default();
    let mut extras = AnalyzeExtras::default();
    for kv in &lines {
        if apply_analysis(&mut params, kv, &source)? {
            continue;
        }
        match kv.key.as_str() {
            "smooth" => extras.smooth = parse_value(kv, &source)?,
            "bins" => extras.bins = parse_value(kv, &source)?,
            "max_lag" => extras.max_lag = parse_value(kv, &source)?,
            _ => {
                return Err(unknown_key(
                    kv,
                    &source,
                    &format!("{ANALYSIS_KEYS}, smooth, bins, max_lag"),
                ))
            }
        }
    }
    Ok((params, extras))
}

/// Loads analysis parameters only, rejecting the `analyze` extras; used by
/// `null`, whose generated series are never smoothed.
pub fn load_analysis_strict(path: &Path) -> Result<AnalysisParams> {
    let (lines, source) = parse_kv_file(path)?;
    let mut params = AnalysisParams::default();
    for kv in &lines {
        if !apply_analysis(&mut params, kv, &source)? {
            return Err(unknown_key(kv, &source, ANALYSIS_KEYS));
        }
    }
    Ok(params)
}

/// Loads a sweep design. The base market's `d`, `seed`, and `n_ticks` are
/// derived per run, so those keys are rejected with a pointer to their
/// sweep-level replacements.
pub fn load_sweep(path: &Path) -> Result<SweepSpec> {
    let (lines, source) = parse_kv_file(path)?;
    let mut spec = default_sweep_spec();
    for kv in &lines {
        match kv.key.as_str() {
            "d" | "seed" | "n_ticks" => {
                return Err(Error::Parse {
                    source_name: source.clone(),
                    line: kv.line,
                    reason: format!(
                        "`{}` is derived per run; use d_values, base_seed, or ticks_per_run",
                        kv.key
                    ),
                });
            }
            "ticks_per_run" => spec.ticks_per_run = parse_value(kv, &source)?,
            "base_seed" => spec.base_seed = parse_value(kv, &source)?,
            "d_values" => spec.d_values = parse_d_values(kv, &source)?,
            _ => {
                if apply_market(&mut spec.base, kv, &source)?
                    || apply_analysis(&mut spec.analysis, kv, &source)?
                {
                    continue;
                }
                return Err(unknown_key(
                    kv,
                    &source,
                    &format!(
                        "{}, {ANALYSIS_KEYS}, ticks_per_run, base_seed, d_values",
                        "n_dealers, spread, c_min, c_max, m_dealer, initial_price, max_steps"
                    ),
                ));
            }
        }
    }
    Ok(spec)
}

pub fn default_sweep_spec() -> SweepSpec {
    SweepSpec {
        base: MarketConfig::default(),
        d_values: market_potential::default_d_grid(),
        analysis: AnalysisParams::default(),
        ticks_per_run: 100_000,
        base_seed: 1,
    }
}

fn parse_d_values(kv: &KvLine, source_name: &str) -> Result<Vec<f64>> {
    kv.value
        .split(',')
        .map(|field| {
            field.trim().parse::<f64>().map_err(|err| Error::Parse {
                source_name: source_name.to_string(),
                line: kv.line,
                reason: format!("d_values entry {:?}: {err}", field.trim()),
            })
        })
        .collect()
}
