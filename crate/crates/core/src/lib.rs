//! Deterministic multi-dealer market simulation and potential-force estimation.
//!
//! The crate has two halves that meet in the middle at a tick price series:
//!
//! * [`dealer`] simulates a market of bid-quoting dealers whose quotes drift
//!   with their positions and react to a weighted moving average of recent
//!   price changes. Running the market produces a [`TickSeries`] of executed
//!   transaction prices.
//! * [`potential`] estimates, from any tick series, the strength of the
//!   restoring force that pulls the price toward its own moving average. The
//!   headline statistic `b` is positive for attraction toward the moving
//!   average, negative for repulsion, and near zero for a free random walk.
//!
//! [`surrogate`] generates calibration series with known properties (Gaussian
//! walks, shuffled copies of a real series, and processes with a planted
//! restoring force), and [`sweep`] runs the simulator across a grid of trend
//! feedback strengths and fits the response of `b` to the feedback parameter.
//!
//! All randomness flows through explicitly seeded ChaCha8 generators, so every
//! simulation, surrogate, and sweep is reproducible bit for bit from its
//! configuration. With the default `parallel` feature the rolling estimator
//! and the sweep harness fan out across windows and grid points via rayon;
//! sequential equivalents are always available and return identical results.

pub mod dealer;
mod error;
pub mod potential;
pub mod surrogate;
pub mod sweep;
pub mod ticks;

pub use dealer::{
    foreseeing_weights, run_simulation, weighted_mean_dp, DealerState, MarketConfig, MarketState,
    Position, TradePair,
};
pub use error::{Error, Result};
pub use potential::{
    b_star, diffusion_curve, displacement_series, estimate_b, potential_curve, rolling_b,
    rolling_b_sequential, super_moving_average, write_curve_csv, write_diffusion_csv,
    write_estimates_csv, AnalysisParams, PotentialCurve, PotentialEstimate, RollingEstimates,
};
pub use surrogate::{
    gaussian_walk, planted_process, shuffled_surrogate, PlantedSpec, WalkSpec,
    SURROGATE_BASE_PRICE,
};
pub use sweep::{
    default_d_grid, derive_seed, fit_line, run_sweep, run_sweep_sequential, write_sweep_csv,
    LineFit, SweepResult, SweepRow, SweepSpec,
};
pub use ticks::{ingest_ticks, TickSeries};
