//! Deterministic multi-dealer market simulator.
//!
//! Each of `n_dealers` dealers carries a quote `p_i`: a buyer is waiting to
//! buy at `p_i`, a seller is waiting to sell at `p_i + spread`. Between
//! transactions every quote drifts by the dealer's own step size in the
//! direction of its position (buyers up, sellers down) plus a common
//! trend-following term: the feedback strength `d` times a linearly weighted
//! average of the last `m_dealer` price changes. A transaction happens as
//! soon as the highest buyer quote reaches the lowest seller ask; it prints
//! at the midpoint of the two, and both parties flip position, which takes
//! their quotes off the sides they just traded on. The executed prices form
//! the tick series that the estimation half of the crate consumes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ticks::TickSeries;
use crate::{Error, Result};

/// Market side of a dealer. Buyers raise their quotes, sellers lower them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Buyer,
    Seller,
}

impl Position {
    /// Drift direction: `+1.0` for buyers, `-1.0` for sellers.
    pub fn sign(self) -> f64 {
        match self {
            Position::Buyer => 1.0,
            Position::Seller => -1.0,
        }
    }

    /// The opposite side, taken by both parties after they trade.
    pub fn flipped(self) -> Self {
        match self {
            Position::Buyer => Position::Seller,
            Position::Seller => Position::Buyer,
        }
    }
}

/// One dealer's full state.
#[derive(Debug, Clone, PartialEq)]
pub struct DealerState {
    pub id: usize,
    /// Current bid quote; the dealer's ask is `bid + spread`.
    pub bid: f64,
    pub position: Position,
    /// Per-step quote drift magnitude, fixed at initialization.
    pub step_size: f64,
}

/// Everything needed to reproduce a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketConfig {
    /// Number of dealers in the market.
    pub n_dealers: usize,
    /// Gap between each dealer's bid and ask quotes.
    pub spread: f64,
    /// Smallest admissible per-step drift magnitude.
    pub c_min: f64,
    /// Largest admissible per-step drift magnitude.
    pub c_max: f64,
    /// Trend feedback strength; positive values chase recent price moves.
    pub d: f64,
    /// Number of past price changes in the dealers' trend average.
    pub m_dealer: usize,
    /// Price level around which initial quotes are scattered.
    pub initial_price: f64,
    /// Seed of the run's random stream.
    pub seed: u64,
    /// Number of transactions to generate.
    pub n_ticks: usize,
    /// Step budget; exceeding it aborts the run as stalled.
    pub max_steps: u64,
}

impl Default for MarketConfig {
    fn default() -> Self {
        Self {
            n_dealers: 300,
            spread: 1.0,
            c_min: 0.01,
            c_max: 0.02,
            d: 0.0,
            m_dealer: 16,
            initial_price: 100.0,
            seed: 1,
            n_ticks: 100_000,
            max_steps: 50_000_000,
        }
    }
}

impl MarketConfig {
    /// Checks every field against its documented domain.
    pub fn validate(&self) -> Result<()> {
        let invalid = |field: &'static str, reason: String| Error::InvalidConfig { field, reason };
        if self.n_dealers < 2 {
            return Err(invalid(
                "n_dealers",
                format!("need at least 2 dealers to trade, got {}", self.n_dealers),
            ));
        }
        if !(self.spread.is_finite() && self.spread > 0.0) {
            return Err(invalid("spread", format!("must be positive, got {}", self.spread)));
        }
        if !(self.c_min.is_finite() && self.c_min > 0.0) {
            return Err(invalid("c_min", format!("must be positive, got {}", self.c_min)));
        }
        if !(self.c_max.is_finite() && self.c_max >= self.c_min) {
            return Err(invalid(
                "c_max",
                format!("must be at least c_min = {}, got {}", self.c_min, self.c_max),
            ));
        }
        if !self.d.is_finite() {
            return Err(invalid("d", format!("must be finite, got {}", self.d)));
        }
        if self.m_dealer == 0 {
            return Err(invalid("m_dealer", "must be at least 1".to_string()));
        }
        if !self.initial_price.is_finite() {
            return Err(invalid(
                "initial_price",
                format!("must be finite, got {}", self.initial_price),
            ));
        }
        if self.max_steps == 0 {
            return Err(invalid("max_steps", "must be at least 1".to_string()));
        }
        Ok(())
    }
}

/// The matched sides of one transaction: the dealer with the highest bid buys
/// from the dealer with the lowest ask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TradePair {
    pub buyer: usize,
    pub seller: usize,
}

/// Weights of the trend average, newest change first; they sum to one and
/// decay linearly from `2/(m+1)` to `2/(m(m+1))`.
pub fn foreseeing_weights(m: usize) -> Vec<f64> {
    let denom = (m * (m + 1) / 2) as f64;
    (0..m).map(|k| (m - k) as f64 / denom).collect()
}

/// Linearly weighted average of the `m` most recent price changes, newest
/// weighted heaviest. `returns_newest_first[0]` is the latest change.
pub fn weighted_mean_dp(returns_newest_first: &[f64], m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidConfig {
            field: "m_dealer",
            reason: "must be at least 1".to_string(),
        });
    }
    if returns_newest_first.len() < m {
        return Err(Error::InsufficientHistory {
            needed: m,
            got: returns_newest_first.len(),
        });
    }
    let denom = (m * (m + 1) / 2) as f64;
    let weighted: f64 = returns_newest_first[..m]
        .iter()
        .enumerate()
        .map(|(k, &dp)| (m - k) as f64 * dp)
        .sum();
    Ok(weighted / denom)
}

/// A market mid-run: dealers, executed prices, and the step counter.
#[derive(Debug, Clone)]
pub struct MarketState {
    config: MarketConfig,
    dealers: Vec<DealerState>,
    prices: Vec<f64>,
    /// Last `m_dealer` price changes, newest first.
    recent_returns: Vec<f64>,
    steps: u64,
}

impl MarketState {
    /// Draws the initial dealer population from the configured seed.
    ///
    /// Per dealer, in order: step size uniform on `[c_min, c_max]`, bid
    /// uniform on `[initial_price - spread/2, initial_price + spread/2]`,
    /// position equiprobable. The draw order is part of the reproducibility
    /// contract.
    pub fn init(config: &MarketConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let half_spread = config.spread / 2.0;
        let dealers = (0..config.n_dealers)
            .map(|id| {
                let step_size = rng.random_range(config.c_min..=config.c_max);
                let bid = rng.random_range(
                    config.initial_price - half_spread..=config.initial_price + half_spread,
                );
                let position = if rng.random::<bool>() {
                    Position::Buyer
                } else {
                    Position::Seller
                };
                DealerState {
                    id,
                    bid,
                    position,
                    step_size,
                }
            })
            .collect();
        Ok(Self {
            config: config.clone(),
            dealers,
            prices: Vec::with_capacity(config.n_ticks),
            recent_returns: Vec::with_capacity(config.m_dealer),
            steps: 0,
        })
    }

    /// Builds a market from hand-picked dealers, for controlled experiments.
    ///
    /// The dealers must be consistent with `config`: right count, ids matching
    /// their index, finite bids, and step sizes within `[c_min, c_max]`.
    pub fn from_dealers(config: &MarketConfig, dealers: Vec<DealerState>) -> Result<Self> {
        config.validate()?;
        if dealers.len() != config.n_dealers {
            return Err(Error::InvalidConfig {
                field: "n_dealers",
                reason: format!(
                    "config says {} dealers but {} were supplied",
                    config.n_dealers,
                    dealers.len()
                ),
            });
        }
        for (i, dealer) in dealers.iter().enumerate() {
            if dealer.id != i {
                return Err(Error::InvalidConfig {
                    field: "n_dealers",
                    reason: format!("dealer at index {i} has id {}", dealer.id),
                });
            }
            if !dealer.bid.is_finite() {
                return Err(Error::InvalidConfig {
                    field: "initial_price",
                    reason: format!("dealer {i} has non-finite bid {}", dealer.bid),
                });
            }
            if !(dealer.step_size >= config.c_min && dealer.step_size <= config.c_max) {
                return Err(Error::InvalidConfig {
                    field: "c_min",
                    reason: format!(
                        "dealer {i} has step size {} outside [{}, {}]",
                        dealer.step_size, config.c_min, config.c_max
                    ),
                });
            }
        }
        Ok(Self {
            config: config.clone(),
            dealers,
            prices: Vec::with_capacity(config.n_ticks),
            recent_returns: Vec::with_capacity(config.m_dealer),
            steps: 0,
        })
    }

    pub fn config(&self) -> &MarketConfig {
        &self.config
    }

    pub fn dealers(&self) -> &[DealerState] {
        &self.dealers
    }

    /// Executed transaction prices so far, oldest first.
    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Moves every bid by one time step.
    ///
    /// The trend term is zero until `m_dealer` price changes exist, so the
    /// market warms up exactly as it would with no feedback.
    pub fn advance_one_step(&mut self) {
        let trend = weighted_mean_dp(&self.recent_returns, self.config.m_dealer).unwrap_or(0.0);
        let feedback = self.config.d * trend;
        for dealer in &mut self.dealers {
            dealer.bid += dealer.position.sign() * dealer.step_size + feedback;
        }
        self.steps += 1;
    }

    /// The crossed pair, if the best buyer quote has reached the best seller
    /// ask.
    ///
    /// Only dealers holding the buyer position compete on the bid side, and
    /// only sellers on the ask side; that is what lets a position flip
    /// uncross the book even though quotes never move at a trade. Ties on
    /// either side resolve to the lowest dealer index. A one-sided market
    /// (no buyers or no sellers) never crosses.
    pub fn find_crossing(&self) -> Option<TradePair> {
        let mut best_buyer: Option<usize> = None;
        let mut best_seller: Option<usize> = None;
        for (i, dealer) in self.dealers.iter().enumerate() {
            match dealer.position {
                Position::Buyer => {
                    if best_buyer.is_none_or(|b| dealer.bid > self.dealers[b].bid) {
                        best_buyer = Some(i);
                    }
                }
                Position::Seller => {
                    if best_seller.is_none_or(|s| dealer.bid < self.dealers[s].bid) {
                        best_seller = Some(i);
                    }
                }
            }
        }
        let buyer = best_buyer?;
        let seller = best_seller?;
        let crossed = self.dealers[buyer].bid >= self.dealers[seller].bid + self.config.spread;
        crossed.then_some(TradePair { buyer, seller })
    }

    /// Executes one transaction between a crossed pair and returns its price:
    /// the midpoint of the buyer's quote and the seller's ask. Both parties
    /// flip position and the price change feeds the trend average.
    ///
    /// Panics if the pair is not actually crossed; callers obtain pairs from
    /// [`MarketState::find_crossing`].
    pub fn execute_trade(&mut self, pair: TradePair) -> f64 {
        let best_bid = self.dealers[pair.buyer].bid;
        let best_ask = self.dealers[pair.seller].bid + self.config.spread;
        assert!(
            pair.buyer != pair.seller
                && self.dealers[pair.buyer].position == Position::Buyer
                && self.dealers[pair.seller].position == Position::Seller
                && best_bid >= best_ask,
            "execute_trade called on a pair that is not crossed"
        );
        let price = (best_bid + best_ask) / 2.0;
        if let Some(&last) = self.prices.last() {
            self.recent_returns.insert(0, price - last);
            self.recent_returns.truncate(self.config.m_dealer);
        }
        self.prices.push(price);
        self.dealers[pair.buyer].position = self.dealers[pair.buyer].position.flipped();
        self.dealers[pair.seller].position = self.dealers[pair.seller].position.flipped();
        price
    }

    /// Steps the market until it holds `target_ticks` executed prices.
    ///
    /// After each step, crossings are resolved one pair at a time, re-scanning
    /// after every transaction, until no quotes cross. Exceeding the step
    /// budget aborts with [`Error::MarketStalled`] and leaves the partial
    /// series in place.
    pub fn run_until(&mut self, target_ticks: usize) -> Result<()> {
        while self.prices.len() < target_ticks {
            if self.steps >= self.config.max_steps {
                return Err(Error::MarketStalled {
                    steps: self.steps,
                    ticks: self.prices.len(),
                    target: target_ticks,
                });
            }
            self.advance_one_step();
            while self.prices.len() < target_ticks {
                match self.find_crossing() {
                    Some(pair) => {
                        self.execute_trade(pair);
                    }
                    None => break,
                }
            }
        }
        Ok(())
    }

    /// Consumes the market, yielding its executed prices with provenance.
    pub fn into_series(self) -> TickSeries {
        TickSeries::with_meta(self.prices, self.config)
    }
}

/// Initializes a market from `config` and runs it for `config.n_ticks`
/// transactions.
pub fn run_simulation(config: &MarketConfig) -> Result<TickSeries> {
    let mut market = MarketState::init(config)?;
    market.run_until(config.n_ticks)?;
    Ok(market.into_series())
}
