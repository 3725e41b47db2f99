//! Null models and oracles for calibrating the potential estimator.
//!
//! Three generators with known ground truth: [`gaussian_walk`] has no
//! potential force at all (the estimator's zero point), [`shuffled_surrogate`]
//! destroys the temporal order of a real series while keeping its return
//! distribution (the estimator's null for any given data), and
//! [`planted_process`] simulates the estimation model itself with a chosen
//! curvature (the estimator's known-answer oracle).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::ticks::TickSeries;
use crate::{Error, Result};

/// Price every surrogate starts from.
pub const SURROGATE_BASE_PRICE: f64 = 100.0;

/// Specification of a pure Gaussian random walk.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkSpec {
    /// Number of ticks, including the starting price.
    pub length: usize,
    pub seed: u64,
    /// Standard deviation of the per-tick price change.
    pub volatility: f64,
}

impl WalkSpec {
    fn validate(&self) -> Result<()> {
        if self.length < 2 {
            return Err(Error::InvalidConfig {
                field: "length",
                reason: format!("must be at least 2, got {}", self.length),
            });
        }
        if !(self.volatility.is_finite() && self.volatility > 0.0) {
            return Err(Error::InvalidConfig {
                field: "volatility",
                reason: format!("must be positive, got {}", self.volatility),
            });
        }
        Ok(())
    }
}

/// Specification of a synthetic series with a planted potential curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSpec {
    /// Number of ticks, including the flat warm-up.
    pub length: usize,
    pub seed: u64,
    /// Standard deviation of the per-tick noise term.
    pub volatility: f64,
    /// Curvature the series is generated with; the estimator should recover it.
    pub planted_b: f64,
    /// Trailing-mean length of the generating recursion; analysis must use
    /// the same value to see `planted_b`.
    pub m_analysis: usize,
}

impl PlantedSpec {
    fn validate(&self) -> Result<()> {
        if self.m_analysis < 2 {
            return Err(Error::InvalidConfig {
                field: "m_analysis",
                reason: format!("must be at least 2, got {}", self.m_analysis),
            });
        }
        if self.length <= self.m_analysis {
            return Err(Error::InvalidConfig {
                field: "length",
                reason: format!(
                    "must exceed the warm-up m_analysis = {}, got {}",
                    self.m_analysis, self.length
                ),
            });
        }
        if !(self.volatility.is_finite() && self.volatility > 0.0) {
            return Err(Error::InvalidConfig {
                field: "volatility",
                reason: format!("must be positive, got {}", self.volatility),
            });
        }
        let bound = (self.m_analysis - 1) as f64;
        if !(self.planted_b.is_finite() && self.planted_b.abs() < bound) {
            return Err(Error::InvalidConfig {
                field: "planted_b",
                reason: format!(
                    "|planted_b| must stay below m_analysis - 1 = {bound} or the \
                     recursion diverges, got {}",
                    self.planted_b
                ),
            });
        }
        Ok(())
    }
}

/// Pure random walk: `P(0) = 100`, i.i.d. Gaussian increments.
pub fn gaussian_walk(spec: &WalkSpec) -> Result<TickSeries> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, spec.volatility).expect("validated volatility");
    let mut prices = Vec::with_capacity(spec.length);
    let mut price = SURROGATE_BASE_PRICE;
    prices.push(price);
    for _ in 1..spec.length {
        price += normal.sample(&mut rng);
        prices.push(price);
    }
    Ok(TickSeries::new(prices))
}

/// Rebuilds a series from `source`'s first price and a seeded Fisher–Yates
/// permutation of its returns: the same moves in a memoryless order.
pub fn shuffled_surrogate(source: &TickSeries, seed: u64) -> Result<TickSeries> {
    if source.len() < 3 {
        return Err(Error::InsufficientHistory {
            needed: 3,
            got: source.len(),
        });
    }
    let mut returns = source.returns();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    returns.shuffle(&mut rng);
    let mut prices = Vec::with_capacity(source.len());
    let mut price = source.prices()[0];
    prices.push(price);
    for r in returns {
        price += r;
        prices.push(price);
    }
    Ok(TickSeries::new(prices))
}

/// Iterates `P(u+1) = P(u) - (b/(m-1)) (P(u) - P_M(u)) + noise` from the
/// given warm-up prices until `length` ticks exist. A `noise_std` of zero
/// runs the deterministic skeleton of the recursion.
fn planted_recursion(
    warm_up: &[f64],
    length: usize,
    planted_b: f64,
    m: usize,
    noise_std: f64,
    seed: u64,
) -> Vec<f64> {
    debug_assert!(warm_up.len() == m && length > m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = (noise_std > 0.0).then(|| Normal::new(0.0, noise_std).expect("positive std"));
    let beta = planted_b / (m - 1) as f64;
    let mut prices = warm_up.to_vec();
    let mut window_sum: f64 = warm_up.iter().sum();
    for _ in m..length {
        let p = *prices.last().expect("warm-up is non-empty");
        let center = window_sum / m as f64;
        let noise = normal.as_ref().map_or(0.0, |n| n.sample(&mut rng));
        let next = p - beta * (p - center) + noise;
        // Slide the trailing-sum window by one tick.
        window_sum += next - prices[prices.len() - m];
        prices.push(next);
    }
    prices
}

/// Synthetic series obeying the estimation model with curvature `planted_b`:
/// the first `m_analysis` prices sit flat at 100, then every tick feels the
/// planted restoring force plus Gaussian noise.
pub fn planted_process(spec: &PlantedSpec) -> Result<TickSeries> {
    spec.validate()?;
    let warm_up = vec![SURROGATE_BASE_PRICE; spec.m_analysis];
    Ok(TickSeries::new(planted_recursion(
        &warm_up,
        spec.length,
        spec.planted_b,
        spec.m_analysis,
        spec.volatility,
        spec.seed,
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{displacement_series, estimate_b, AnalysisParams};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn walk_return_std_matches_volatility() {
        let spec = WalkSpec {
            length: 10_000,
            seed: 123,
            volatility: 1.0,
        };
        let walk = gaussian_walk(&spec).unwrap();
        assert_eq!(walk.len(), 10_000);
        assert_eq!(walk.prices()[0], SURROGATE_BASE_PRICE);
        let returns = walk.returns();
        let mean = returns.iter().sum::<f64>() / returns.len() as f64;
        let var = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>()
            / (returns.len() - 1) as f64;
        let std = var.sqrt();
        assert!((0.97..=1.03).contains(&std), "sample std {std} out of band");
    }

    #[test]
    fn walk_is_deterministic_per_seed() {
        let spec = WalkSpec {
            length: 500,
            seed: 9,
            volatility: 0.5,
        };
        assert_eq!(
            gaussian_walk(&spec).unwrap().prices(),
            gaussian_walk(&spec).unwrap().prices()
        );
        let other = gaussian_walk(&WalkSpec { seed: 10, ..spec }).unwrap();
        assert_ne!(gaussian_walk(&WalkSpec { seed: 9, length: 500, volatility: 0.5 }).unwrap().prices(), other.prices());
    }

    #[test]
    fn walk_rejects_bad_specs() {
        assert!(matches!(
            gaussian_walk(&WalkSpec { length: 1, seed: 0, volatility: 1.0 }),
            Err(Error::InvalidConfig { field: "length", .. })
        ));
        assert!(matches!(
            gaussian_walk(&WalkSpec { length: 10, seed: 0, volatility: 0.0 }),
            Err(Error::InvalidConfig { field: "volatility", .. })
        ));
    }

    #[test]
    fn shuffle_preserves_the_return_multiset_and_endpoints() {
        let source = gaussian_walk(&WalkSpec {
            length: 2_000,
            seed: 21,
            volatility: 0.7,
        })
        .unwrap();
        let shuffled = shuffled_surrogate(&source, 77).unwrap();
        assert_eq!(shuffled.len(), source.len());

        let mut original = source.returns();
        let mut permuted = shuffled.returns();
        assert_ne!(original, permuted, "a 2000-tick shuffle must actually move returns");
        original.sort_by(f64::total_cmp);
        permuted.sort_by(f64::total_cmp);
        assert_eq!(original, permuted, "return multiset must be exactly preserved");

        assert_eq!(shuffled.prices()[0], source.prices()[0]);
        // The endpoint is the same sum taken in a different order, so it
        // agrees to rounding, not bitwise.
        assert_relative_eq!(
            shuffled.prices()[source.len() - 1],
            source.prices()[source.len() - 1],
            max_relative = 1e-12
        );
    }

    #[test]
    fn shuffle_is_deterministic_per_seed() {
        let source = gaussian_walk(&WalkSpec {
            length: 300,
            seed: 4,
            volatility: 1.0,
        })
        .unwrap();
        let a = shuffled_surrogate(&source, 5).unwrap();
        let b = shuffled_surrogate(&source, 5).unwrap();
        assert_eq!(a.prices(), b.prices());
        let c = shuffled_surrogate(&source, 6).unwrap();
        assert_ne!(a.prices(), c.prices());
    }

    #[test]
    fn shuffle_rejects_short_sources() {
        let short = TickSeries::new(vec![100.0, 101.0]);
        assert!(matches!(
            shuffled_surrogate(&short, 0),
            Err(Error::InsufficientHistory { needed: 3, got: 2 })
        ));
    }

    #[test]
    fn planted_zero_curvature_replays_the_gaussian_walk() {
        // With b = 0 the recursion is a pure walk on the same draw sequence,
        // so past the flat warm-up it must replay gaussian_walk bit for bit.
        let m = 16;
        let spec = PlantedSpec {
            length: 1_000,
            seed: 31,
            volatility: 0.8,
            planted_b: 0.0,
            m_analysis: m,
        };
        let planted = planted_process(&spec).unwrap();
        let walk = gaussian_walk(&WalkSpec {
            length: 1_000 - (m - 1),
            seed: 31,
            volatility: 0.8,
        })
        .unwrap();
        assert_eq!(&planted.prices()[..m], vec![100.0; m].as_slice());
        assert_eq!(&planted.prices()[m - 1..], walk.prices());
    }

    #[test]
    fn planted_curvature_is_recovered_by_the_estimator() {
        let m = 16;
        let spec = PlantedSpec {
            length: 2_016,
            seed: 404,
            volatility: 0.3,
            planted_b: 1.0,
            m_analysis: m,
        };
        let series = planted_process(&spec).unwrap();
        let params = AnalysisParams {
            window: 2_000,
            ..AnalysisParams::default()
        };
        let pairs = displacement_series(series.prices(), &params).unwrap();
        let est = estimate_b(&pairs[..2_000 - m], &params, 0).unwrap();
        assert!(
            (0.8..=1.2).contains(&est.b),
            "planted 1.0 recovered as {}",
            est.b
        );
    }

    #[test]
    fn planted_rejects_unstable_curvature() {
        let err = planted_process(&PlantedSpec {
            length: 100,
            seed: 0,
            volatility: 1.0,
            planted_b: 15.0,
            m_analysis: 16,
        })
        .unwrap_err();
        match err {
            Error::InvalidConfig { field, reason } => {
                assert_eq!(field, "planted_b");
                assert!(reason.contains("m_analysis - 1 = 15"), "reason: {reason}");
            }
            other => panic!("expected InvalidConfig, got {other}"),
        }
    }

    proptest! {
        /// The noise-free recursion is a convex combination of its trailing
        /// window whenever 0 < b < m - 1, so the running window envelope of
        /// |P - 100| can never widen, from any perturbed start.
        #[test]
        fn noise_free_planted_envelope_contracts(
            b in 0.01f64..0.99,
            m in 2usize..12,
            perturbations in proptest::collection::vec(-50.0f64..50.0, 1..8),
            steps in 50usize..200,
        ) {
            let b = b * (m - 1) as f64;
            let mut warm_up = vec![SURROGATE_BASE_PRICE; m];
            for (slot, p) in warm_up.iter_mut().rev().zip(&perturbations) {
                *slot += p;
            }
            let length = m + steps;
            let prices = planted_recursion(&warm_up, length, b, m, 0.0, 0);
            let start_spread = warm_up
                .iter()
                .map(|p| (p - SURROGATE_BASE_PRICE).abs())
                .fold(0.0, f64::max);
            let envelope = |window: &[f64]| {
                window
                    .iter()
                    .map(|p| (p - SURROGATE_BASE_PRICE).abs())
                    .fold(0.0, f64::max)
            };
            let mut last = f64::INFINITY;
            for window in prices.windows(m) {
                let e = envelope(window);
                // Tiny float slack: the convex combination is computed via a
                // sliding sum, not exact arithmetic.
                prop_assert!(e <= last * (1.0 + 1e-12) + 1e-9, "envelope widened: {e} > {last}");
                prop_assert!(e <= start_spread * (1.0 + 1e-12) + 1e-9);
                last = e;
            }
        }
    }

    #[test]
    fn noise_free_planted_settles_at_the_conserved_mean() {
        // The recursion has a unit characteristic root whose conserved
        // functional weights the warm-up by its coefficient tail sums; the
        // newest slot's normalized weight works out to 2/(2 + b). A spike of
        // height s there must therefore settle at exactly 2s/(2 + b) above
        // the flat level.
        let m = 16;
        let spike = 25.0;
        for b in [0.25, 1.0, 4.0] {
            let mut warm_up = vec![SURROGATE_BASE_PRICE; m];
            warm_up[m - 1] += spike;
            let prices = planted_recursion(&warm_up, 4_000, b, m, 0.0, 0);
            let limit = SURROGATE_BASE_PRICE + spike * 2.0 / (2.0 + b);
            let final_dev = (prices.last().unwrap() - limit).abs();
            assert!(
                final_dev < 1e-6,
                "b = {b}: settled {final_dev} away from the conserved mean {limit}"
            );
        }
    }
}
