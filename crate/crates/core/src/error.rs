use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in simulation, estimation, or data handling.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its documented domain.
    #[error("invalid configuration: {field}: {reason}")]
    InvalidConfig {
        field: &'static str,
        reason: String,
    },

    /// An operation needs a longer series than it was given.
    #[error("insufficient history: need {needed} points, have {got}")]
    InsufficientHistory { needed: usize, got: usize },

    /// A fit window carries no usable displacement signal.
    #[error("degenerate window: displacement spread {spread:e} is below the threshold {threshold:e}")]
    DegenerateWindow { spread: f64, threshold: f64 },

    /// The simulator hit its step budget before producing the requested ticks.
    #[error("market stalled: {ticks} of {target} ticks after {steps} steps")]
    MarketStalled {
        steps: u64,
        ticks: usize,
        target: usize,
    },

    /// An aggregate was requested over an empty set of estimates.
    #[error("no estimates to aggregate")]
    NoEstimates,

    /// A line fit was attempted without two distinct abscissa values.
    #[error("underdetermined fit: need at least two distinct x values")]
    UnderdeterminedFit,

    /// A data or configuration file failed to parse.
    #[error("{source_name}:{line}: {reason}")]
    Parse {
        source_name: String,
        line: usize,
        reason: String,
    },

    /// An underlying I/O operation failed.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
