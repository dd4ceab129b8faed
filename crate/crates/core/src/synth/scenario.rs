use serde::{Deserialize, Serialize};

use crate::synth::SynthError;
use crate::trade::Millis;

/// Organic background market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Baseline {
    /// Order arrivals per minute (a market order yields several fills).
    pub orders_per_minute: f64,
    /// Starting and mean-reverting price level, in quote units.
    pub price: f64,
    /// Log-normal order size in quote units: `ln` median and sigma.
    pub notional_log_median: f64,
    pub notional_log_sigma: f64,
    /// Share of orders that sweep the book as multi-fill market orders.
    pub market_order_fraction: f64,
    pub max_fills: u32,
    pub buy_fraction: f64,
    /// Per-order log-price noise and pull toward the price level.
    pub volatility: f64,
    pub mean_reversion: f64,
    /// Large single-fill trades against resting orders.
    pub block_trades_per_day: f64,
    pub block_notional_median: f64,
    /// Short bursts of many tiny single fills.
    pub churn_bursts_per_day: f64,
    pub churn_trades: u32,
    /// Hour-scale rallies carried by limit-order flow.
    pub surges_per_day: f64,
    pub surge_minutes: f64,
    pub surge_rate_multiplier: f64,
    pub surge_price_gain: f64,
}

impl Default for Baseline {
    fn default() -> Self {
        Baseline {
            orders_per_minute: 4.0,
            price: 0.0001,
            notional_log_median: 0.02f64.ln(),
            notional_log_sigma: 1.0,
            market_order_fraction: 0.15,
            max_fills: 6,
            buy_fraction: 0.5,
            volatility: 0.0015,
            mean_reversion: 0.002,
            block_trades_per_day: 6.0,
            block_notional_median: 5.0,
            churn_bursts_per_day: 6.0,
            churn_trades: 80,
            surges_per_day: 1.5,
            surge_minutes: 60.0,
            surge_rate_multiplier: 6.0,
            surge_price_gain: 0.2,
        }
    }
}

/// One coordinated market-buy sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Burst {
    /// Seconds after the signal.
    pub offset_secs: f64,
    /// Quote volume of the sweep.
    pub notional: f64,
    pub fills: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrePump {
    pub lead_secs: f64,
    /// Quote volume accumulated through small buys before the signal.
    pub accumulation_notional: f64,
}

/// Anatomy of one pump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PumpShape {
    /// Tiered member sweeps; the defaults place the two dominant ones at
    /// +19 s and +21 s.
    pub bursts: Vec<Burst>,
    /// Stragglers: smaller market buys following the last burst.
    pub follow_on_orders: u32,
    pub follow_on_secs: f64,
    pub follow_on_notional_median: f64,
    /// Peak price as a multiple of the pre-signal price.
    pub price_ramp: f64,
    pub ramp_jitter: f64,
    /// Small sells at incrementally rising prices during the ramp.
    pub arbitrage_sells: u32,
    pub arbitrage_notional: f64,
    /// Sell-off back toward the pre-signal price.
    pub dump_decay_secs: f64,
    pub dump_orders: u32,
    pub dump_notional_median: f64,
    pub pre_pump: Option<PrePump>,
}

impl Default for PumpShape {
    fn default() -> Self {
        PumpShape {
            bursts: vec![
                Burst {
                    offset_secs: 19.0,
                    notional: 65.0,
                    fills: 40,
                },
                Burst {
                    offset_secs: 21.0,
                    notional: 26.0,
                    fills: 25,
                },
            ],
            follow_on_orders: 20,
            follow_on_secs: 90.0,
            follow_on_notional_median: 0.5,
            price_ramp: 1.4,
            ramp_jitter: 0.02,
            arbitrage_sells: 30,
            arbitrage_notional: 0.05,
            dump_decay_secs: 600.0,
            dump_orders: 15,
            dump_notional_median: 1.0,
            pre_pump: None,
        }
    }
}

impl PumpShape {
    /// Total quote volume bought by the pump itself.
    pub fn pump_notional(&self) -> f64 {
        self.bursts.iter().map(|b| b.notional).sum::<f64>()
            + self.follow_on_orders as f64 * self.follow_on_notional_median
    }

    /// The same shape with every buy volume multiplied by `k`.
    pub fn scaled(&self, k: f64) -> PumpShape {
        let mut s = self.clone();
        for b in &mut s.bursts {
            b.notional *= k;
        }
        s.follow_on_notional_median *= k;
        s.dump_notional_median *= k;
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrowdWaves {
    pub waves: u32,
    pub spacing_min_minutes: f64,
    pub spacing_max_minutes: f64,
    /// Market buys per wave, spread over `wave_secs`.
    pub orders_per_wave: u32,
    pub wave_secs: f64,
    pub order_notional_median: f64,
    /// Price gain per wave, compounding.
    pub wave_price_gain: f64,
}

impl Default for CrowdWaves {
    fn default() -> Self {
        CrowdWaves {
            waves: 6,
            spacing_min_minutes: 2.0,
            spacing_max_minutes: 5.0,
            orders_per_wave: 4,
            wave_secs: 60.0,
            order_notional_median: 2.2,
            wave_price_gain: 0.04,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PumpMode {
    #[default]
    Standard,
    Crowd(CrowdWaves),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSpec {
    pub injection_time: Millis,
    #[serde(default)]
    pub shape: PumpShape,
    #[serde(default)]
    pub mode: PumpMode,
}

/// A generated stream: background market plus an optional pump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpScenario {
    pub pair: String,
    #[serde(default = "default_exchange")]
    pub exchange: String,
    pub start: Millis,
    pub duration_secs: u64,
    #[serde(default)]
    pub baseline: Baseline,
    #[serde(default)]
    pub pump: Option<PumpSpec>,
}

fn default_exchange() -> String {
    "synthetic".to_string()
}

impl PumpScenario {
    pub fn end(&self) -> Millis {
        self.start + self.duration_secs as i64 * 1000
    }

    pub fn from_toml(text: &str) -> Result<Self, SynthError> {
        let s: PumpScenario = toml::from_str(text).map_err(|e| SynthError::InvalidScenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidScenario(m));
        let b = &self.baseline;
        if self.pair.is_empty() {
            return bad("pair is empty".into());
        }
        if self.duration_secs == 0 {
            return bad("duration must be positive".into());
        }
        let positive = [
            ("orders_per_minute", b.orders_per_minute),
            ("price", b.price),
            ("notional_log_sigma", b.notional_log_sigma),
            ("surge_minutes", b.surge_minutes),
            ("surge_rate_multiplier", b.surge_rate_multiplier),
            ("block_notional_median", b.block_notional_median),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("baseline.{name} must be positive, got {v}"));
            }
        }
        let non_negative = [
            ("volatility", b.volatility),
            ("mean_reversion", b.mean_reversion),
            ("block_trades_per_day", b.block_trades_per_day),
            ("churn_bursts_per_day", b.churn_bursts_per_day),
            ("surges_per_day", b.surges_per_day),
            ("surge_price_gain", b.surge_price_gain),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("baseline.{name} must be non-negative, got {v}"));
            }
        }
        for (name, v) in [("market_order_fraction", b.market_order_fraction), ("buy_fraction", b.buy_fraction)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("baseline.{name} must lie in [0, 1], got {v}"));
            }
        }
        if b.max_fills < 2 {
            return bad("baseline.max_fills must be at least 2".into());
        }
        let Some(p) = &self.pump else { return Ok(()) };
        if !(self.start..self.end()).contains(&p.injection_time) {
            return bad(format!("injection time {} lies outside the generated span", p.injection_time));
        }
        let s = &p.shape;
        if s.bursts.iter().any(|x| !(x.notional >= 0.0 && x.offset_secs >= 0.0) || x.fills < 2) {
            return bad("bursts need non-negative offset and volume and at least 2 fills".into());
        }
        let shape_values = [
            ("price_ramp", s.price_ramp - 1.0),
            ("ramp_jitter", s.ramp_jitter),
            ("follow_on_secs", s.follow_on_secs),
            ("follow_on_notional_median", s.follow_on_notional_median),
            ("arbitrage_notional", s.arbitrage_notional),
            ("dump_decay_secs", s.dump_decay_secs),
            ("dump_notional_median", s.dump_notional_median),
        ];
        for (name, v) in shape_values {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("pump.shape.{name} is out of range"));
            }
        }
        if let Some(pre) = &s.pre_pump {
            if !(pre.lead_secs > 0.0 && pre.accumulation_notional >= 0.0) {
                return bad("pre_pump needs a positive lead and non-negative volume".into());
            }
        }
        if let PumpMode::Crowd(c) = &p.mode {
            if c.waves == 0
                || !(c.spacing_min_minutes > 0.0 && c.spacing_min_minutes <= c.spacing_max_minutes)
                || !(c.order_notional_median >= 0.0 && c.wave_secs > 0.0 && c.wave_price_gain >= 0.0)
            {
                return bad("crowd waves need positive counts and an ordered spacing range".into());
            }
        }
        Ok(())
    }
}
