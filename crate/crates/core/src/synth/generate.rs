//! Seeded trade-stream generation.
//!
//! The background market and the pump draw from separate ChaCha8 streams of
//! the same seed, and the pump only acts on the background through a price
//! multiplier. A scenario whose pump buys nothing therefore reproduces the
//! pump-free stream exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal, Normal, Poisson};

use crate::decimal::Decimal;
use crate::evaluation::PumpEvent;
use crate::synth::{Baseline, PumpMode, PumpScenario, PumpShape, SynthError};
use crate::trade::{Millis, Pair, Side, TradeRecord};

/// Price step between consecutive fills of one sweep.
const FILL_TICK: f64 = 0.0005;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub trades: Vec<TradeRecord>,
    /// Ground truth: one event per injected pump.
    pub events: Vec<PumpEvent>,
}

/// An order before pricing: `step` offsets the fill price by whole ticks.
#[derive(Debug, Clone, Copy)]
struct Fill {
    t: Millis,
    notional: f64,
    side: Side,
    step: f64,
    /// Extra factor on top of the market price (pump ramp inside a sweep).
    lift: f64,
}

/// Background log-price path, sampled at each arrival.
struct PricePath {
    times: Vec<Millis>,
    log_price: Vec<f64>,
}

impl PricePath {
    fn at(&self, t: Millis) -> f64 {
        let i = self.times.partition_point(|&x| x <= t);
        if i == 0 {
            0.0
        } else {
            self.log_price[i - 1]
        }
    }
}

/// Multiplicative price impact of the pump over time.
#[derive(Debug, Clone, Default)]
struct Impact {
    /// (time, cumulative gain) steps.
    steps: Vec<(Millis, f64)>,
    decay_from: Millis,
    decay_ms: f64,
}

impl Impact {
    fn at(&self, t: Millis) -> f64 {
        let i = self.steps.partition_point(|s| s.0 <= t);
        if i == 0 {
            return 1.0;
        }
        let gain = self.steps[i - 1].1;
        let decay = if t > self.decay_from && self.decay_ms > 0.0 {
            (-((t - self.decay_from) as f64) / self.decay_ms).exp()
        } else {
            1.0
        };
        1.0 + gain * decay
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn lognormal(median: f64, sigma: f64) -> LogNormal<f64> {
    LogNormal::new(median.max(f64::MIN_POSITIVE).ln(), sigma).expect("valid log-normal")
}

fn random_side<R: Rng>(rng: &mut R, buy_fraction: f64) -> Side {
    if rng.random_bool(buy_fraction) {
        Side::Buy
    } else {
        Side::Sell
    }
}

/// Splits a sweep into `fills` same-millisecond fills walking the book.
fn sweep<R: Rng>(rng: &mut R, t: Millis, notional: f64, fills: u32, side: Side, lift: (f64, f64), out: &mut Vec<Fill>) {
    let weights: Vec<f64> = (0..fills).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for (j, w) in weights.iter().enumerate() {
        let frac = if fills > 1 { j as f64 / (fills - 1) as f64 } else { 0.0 };
        out.push(Fill {
            t,
            notional: notional * w / total,
            side,
            step: j as f64,
            lift: lift.0 + (lift.1 - lift.0) * frac,
        });
    }
}

/// Times of a Poisson process with `per_day` events over the span.
fn poisson_times<R: Rng>(rng: &mut R, per_day: f64, start: Millis, duration_ms: i64) -> Vec<Millis> {
    let mean = per_day * duration_ms as f64 / 86_400_000.0;
    let n = if mean > 0.0 {
        Poisson::new(mean).expect("positive mean").sample(rng) as usize
    } else {
        0
    };
    let mut v: Vec<Millis> = (0..n).map(|_| start + rng.random_range(0..duration_ms)).collect();
    v.sort_unstable();
    v
}

struct Surge {
    start: Millis,
    end: Millis,
    log_gain: f64,
    rate_multiplier: f64,
}

fn background(s: &PumpScenario, seed: u64) -> (Vec<Fill>, PricePath) {
    let b: &Baseline = &s.baseline;
    let mut rng = rng_for(seed, 0);
    let duration_ms = s.duration_secs as i64 * 1000;
    let surge_ms = (b.surge_minutes * 60_000.0) as i64;
    let surges: Vec<Surge> = poisson_times(&mut rng, b.surges_per_day, s.start, duration_ms)
        .into_iter()
        .map(|t| Surge {
            start: t,
            end: t + surge_ms,
            log_gain: (1.0 + b.surge_price_gain * rng.random_range(0.25..1.5)).ln(),
            rate_multiplier: 1.0 + (b.surge_rate_multiplier - 1.0) * rng.random_range(0.3..1.3),
        })
        .collect();
    let surge_at = |t: Millis| surges.iter().find(|x| (x.start..x.end).contains(&t));

    let size = lognormal(b.notional_log_median.exp(), b.notional_log_sigma);
    let noise = Normal::new(0.0, b.volatility).expect("valid volatility");
    let mut fills = Vec::new();
    let mut path = PricePath {
        times: Vec::new(),
        log_price: Vec::new(),
    };
    let mut y = 0.0f64;
    let mut t = s.start as f64;
    loop {
        let now = t as Millis;
        let surge = surge_at(now);
        let mult = surge.map_or(1.0, |x| x.rate_multiplier);
        let rate_per_ms = b.orders_per_minute * mult / 60_000.0;
        t += Exp::new(rate_per_ms).expect("positive rate").sample(&mut rng);
        let ts = t as Millis;
        if ts >= s.end() {
            break;
        }
        let target = surge_at(ts).map_or(0.0, |x| x.log_gain * (ts - x.start) as f64 / (x.end - x.start) as f64);
        y += b.mean_reversion * (target - y) + noise.sample(&mut rng);
        path.times.push(ts);
        path.log_price.push(y);
        let market = rng.random_bool((b.market_order_fraction / mult).min(1.0));
        let buy_fraction = if surge_at(ts).is_some() { 0.65 } else { b.buy_fraction };
        let side = random_side(&mut rng, buy_fraction);
        let notional = size.sample(&mut rng);
        if market {
            let n = rng.random_range(2..=b.max_fills);
            sweep(&mut rng, ts, notional, n, side, (1.0, 1.0), &mut fills);
        } else {
            fills.push(Fill {
                t: ts,
                notional,
                side,
                step: 0.0,
                lift: 1.0,
            });
        }
    }
    let block = lognormal(b.block_notional_median, 0.5);
    for ts in poisson_times(&mut rng, b.block_trades_per_day, s.start, duration_ms) {
        let side = random_side(&mut rng, 0.5);
        fills.push(Fill {
            t: ts,
            notional: block.sample(&mut rng),
            side,
            step: 0.0,
            lift: 1.0,
        });
    }
    let tiny = lognormal(b.notional_log_median.exp() / 4.0, 0.5);
    for ts in poisson_times(&mut rng, b.churn_bursts_per_day, s.start, duration_ms) {
        let mut offsets: Vec<i64> = (0..b.churn_trades).map(|_| rng.random_range(0..20_000)).collect();
        offsets.sort_unstable();
        offsets.dedup();
        for off in offsets {
            let side = random_side(&mut rng, 0.5);
            fills.push(Fill {
                t: ts + off,
                notional: tiny.sample(&mut rng),
                side,
                step: 0.0,
                lift: 1.0,
            });
        }
    }
    (fills, path)
}

fn secs(t0: Millis, s: f64) -> Millis {
    t0 + (s * 1000.0).round() as i64
}

fn standard_pump<R: Rng>(rng: &mut R, t0: Millis, shape: &PumpShape, fills: &mut Vec<Fill>) -> Impact {
    let total: f64 = shape.bursts.iter().map(|b| b.notional).sum();
    let gain = ((shape.price_ramp - 1.0) * (1.0 + shape.ramp_jitter * rng.random_range(-1.0..1.0))).max(0.0);
    let mut bursts = shape.bursts.clone();
    bursts.sort_by(|a, b| a.offset_secs.total_cmp(&b.offset_secs));
    let mut impact = Impact::default();
    let mut cum = 0.0;
    for b in &bursts {
        let t = secs(t0, b.offset_secs);
        let before = 1.0 + cum;
        cum += if total > 0.0 { gain * b.notional / total } else { 0.0 };
        // the sweep itself walks from the pre-burst price up to the new level
        sweep(rng, t, b.notional, b.fills, Side::Buy, (1.0, (1.0 + cum) / before), fills);
        impact.steps.push((t + 1, cum));
    }
    let first = bursts.first().map_or(t0, |b| secs(t0, b.offset_secs));
    let last = bursts.last().map_or(t0, |b| secs(t0, b.offset_secs));
    let follow = lognormal(shape.follow_on_notional_median, 0.7);
    for _ in 0..shape.follow_on_orders {
        let u: f64 = rng.random_range(0.0..1.0);
        let t = last + 1 + (u * u * shape.follow_on_secs * 1000.0) as i64;
        let n = rng.random_range(2..=8);
        let v = follow.sample(rng);
        sweep(rng, t, v, n, Side::Buy, (1.0, 1.0), fills);
    }
    let arb = lognormal(shape.arbitrage_notional, 0.5);
    for k in 0..shape.arbitrage_sells {
        let t = first + rng.random_range(0..40_000);
        fills.push(Fill {
            t,
            notional: arb.sample(rng),
            side: Side::Sell,
            step: 0.0,
            lift: 1.0 + 0.001 * k as f64,
        });
    }
    let hold_ms = (shape.follow_on_secs * 500.0) as i64;
    let dump = lognormal(shape.dump_notional_median, 0.7);
    for _ in 0..shape.dump_orders {
        let t = last + hold_ms + rng.random_range(0..(shape.dump_decay_secs * 1000.0).max(1.0) as i64);
        let n = rng.random_range(2..=5);
        let v = dump.sample(rng);
        sweep(rng, t, v, n, Side::Sell, (1.0, 1.0), fills);
    }
    impact.decay_from = last + hold_ms;
    impact.decay_ms = shape.dump_decay_secs * 1000.0 / 3.0;
    impact
}

fn crowd_pump<R: Rng>(rng: &mut R, t0: Millis, c: &crate::synth::CrowdWaves, fills: &mut Vec<Fill>) -> Impact {
    let mut impact = Impact::default();
    let size = lognormal(c.order_notional_median, 0.5);
    let mut wave_start = t0;
    let mut level = 1.0f64;
    for w in 0..c.waves {
        if w > 0 {
            let gap = rng.random_range(c.spacing_min_minutes..=c.spacing_max_minutes);
            wave_start += (gap * 60_000.0) as i64;
        }
        let mut times: Vec<Millis> = (0..c.orders_per_wave)
            .map(|_| wave_start + rng.random_range(0..(c.wave_secs * 1000.0) as i64))
            .collect();
        times.sort_unstable();
        for t in times {
            let n = rng.random_range(3..=8);
            let v = size.sample(rng);
            sweep(rng, t, v, n, Side::Buy, (1.0, 1.0), fills);
        }
        level *= 1.0 + c.wave_price_gain;
        impact.steps.push((wave_start, level - 1.0));
    }
    impact.decay_from = wave_start + 3_600_000;
    impact.decay_ms = 3.0 * 3_600_000.0;
    impact
}

fn pre_pump<R: Rng>(rng: &mut R, t0: Millis, shape: &PumpShape, fills: &mut Vec<Fill>) {
    let Some(pre) = &shape.pre_pump else { return };
    let k = 20;
    for _ in 0..k {
        let t = t0 - rng.random_range(1..=(pre.lead_secs * 1000.0) as i64);
        fills.push(Fill {
            t,
            notional: pre.accumulation_notional / k as f64,
            side: Side::Buy,
            step: 0.0,
            lift: 1.0,
        });
    }
}

/// Generates the scenario's trades (time-ordered, ingestion-ready) and its
/// ground-truth events.
pub fn generate(s: &PumpScenario, seed: u64) -> Result<SynthOutput, SynthError> {
    s.validate()?;
    let pair = Pair::new(&s.pair);
    let (mut fills, path) = background(s, seed);
    let mut impact = Impact::default();
    let mut events = Vec::new();
    if let Some(p) = &s.pump {
        let mut rng = rng_for(seed, 1);
        let buys = match &p.mode {
            PumpMode::Standard => p.shape.pump_notional(),
            PumpMode::Crowd(c) => c.order_notional_median * (c.waves * c.orders_per_wave) as f64,
        };
        if buys > 0.0 {
            pre_pump(&mut rng, p.injection_time, &p.shape, &mut fills);
            impact = match &p.mode {
                PumpMode::Standard => standard_pump(&mut rng, p.injection_time, &p.shape, &mut fills),
                PumpMode::Crowd(c) => crowd_pump(&mut rng, p.injection_time, c, &mut fills),
            };
        }
        events.push(PumpEvent::new(&pair, p.injection_time, &s.exchange));
    }
    fills.retain(|f| f.t >= s.start && f.t < s.end() && f.notional > 0.0);
    fills.sort_by_key(|f| f.t);
    let p0 = s.baseline.price;
    let mut trades = Vec::with_capacity(fills.len());
    for f in fills {
        let tick = match f.side {
            Side::Buy => 1.0 + FILL_TICK * f.step,
            Side::Sell => 1.0 - FILL_TICK * f.step,
        };
        let price = p0 * path.at(f.t).exp() * impact.at(f.t) * f.lift * tick.max(0.5);
        let price = Decimal::from_f64(price).filter(|d| d.is_positive()).unwrap_or(Decimal::from_raw(1));
        let qty = Decimal::from_f64(f.notional / price.to_f64())
            .filter(|d| d.is_positive())
            .unwrap_or(Decimal::from_raw(1));
        trades.push(TradeRecord::new(&pair, f.t, price, qty, f.side));
    }
    Ok(SynthOutput { trades, events })
}
