//! Run manifests: the fully resolved configuration of an invocation, written
//! next to its outputs. A manifest is itself a valid configuration file, and
//! it opens with the exact command line as a comment, so any artifact can be
//! regenerated byte for byte. Nothing time- or host-dependent is recorded.

use std::fmt::Write as _;
use std::path::Path;

use market_potential::{derive_seed, AnalysisParams, MarketConfig, Result, SweepSpec};

use crate::config::AnalyzeExtras;

/// The invoking command line, with whitespace-bearing arguments quoted.
pub fn command_line() -> String {
    std::env::args()
        .map(|arg| {
            if arg.chars().any(char::is_whitespace) {
                format!("'{arg}'")
            } else {
                arg
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn market_section(config: &MarketConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n_dealers = {}", config.n_dealers);
    let _ = writeln!(out, "spread = {}", config.spread);
    let _ = writeln!(out, "c_min = {}", config.c_min);
    let _ = writeln!(out, "c_max = {}", config.c_max);
    let _ = writeln!(out, "d = {}", config.d);
    let _ = writeln!(out, "m_dealer = {}", config.m_dealer);
    let _ = writeln!(out, "initial_price = {}", config.initial_price);
    let _ = writeln!(out, "seed = {}", config.seed);
    let _ = writeln!(out, "n_ticks = {}", config.n_ticks);
    let _ = writeln!(out, "max_steps = {}", config.max_steps);
    out
}

/// Like [`market_section`] but without the per-run derived fields, so the
/// output loads back as a sweep configuration.
fn sweep_base_section(config: &MarketConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n_dealers = {}", config.n_dealers);
    let _ = writeln!(out, "spread = {}", config.spread);
    let _ = writeln!(out, "c_min = {}", config.c_min);
    let _ = writeln!(out, "c_max = {}", config.c_max);
    let _ = writeln!(out, "m_dealer = {}", config.m_dealer);
    let _ = writeln!(out, "initial_price = {}", config.initial_price);
    let _ = writeln!(out, "max_steps = {}", config.max_steps);
    out
}

pub fn analysis_section(params: &AnalysisParams) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "m_analysis = {}", params.m_analysis);
    let _ = writeln!(out, "window = {}", params.window);
    let _ = writeln!(out, "stride = {}", params.stride);
    let _ = writeln!(
        out,
        "min_displacement_spread = {}",
        params.min_displacement_spread
    );
    out
}

pub fn extras_section(extras: &AnalyzeExtras) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "smooth = {}", extras.smooth);
    let _ = writeln!(out, "bins = {}", extras.bins);
    let _ = writeln!(out, "max_lag = {}", extras.max_lag);
    out
}

pub fn sweep_sections(spec: &SweepSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# per-run derived seeds:");
    for &d in &spec.d_values {
        let _ = writeln!(out, "#   d = {d} -> seed {}", derive_seed(spec.base_seed, d, 0));
    }
    out.push_str(&sweep_base_section(&spec.base));
    out.push_str(&analysis_section(&spec.analysis));
    let _ = writeln!(out, "ticks_per_run = {}", spec.ticks_per_run);
    let _ = writeln!(out, "base_seed = {}", spec.base_seed);
    let d_values = spec
        .d_values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(", ");
    let _ = writeln!(out, "d_values = {d_values}");
    out
}

/// Writes `# command:` plus the given sections.
pub fn write(path: &Path, sections: &[&str]) -> Result<()> {
    let mut text = format!("# command: {}\n", command_line());
    for section in sections {
        text.push_str(section);
    }
    std::fs::write(path, text)?;
    Ok(())
}
