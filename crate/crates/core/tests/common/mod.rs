//! Brute-force oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::TAU;

use chrono::{DateTime, Timelike, Utc};
use pumpwatch::evaluation::{build_slices, Slice, SliceSpec, TradeSeries};
use pumpwatch::features::FeatureForm;
use pumpwatch::synth::{generate, PumpScenario};
use pumpwatch::{Decimal, Millis, Pair, Side, TradeRecord};
use rand::Rng;
use rayon::prelude::*;

pub const SCALE: f64 = 1e8;

/// Random trades over `n_chunks` chunks: bursty arrivals, frequent
/// same-millisecond fills on either side, and stretches of silence.
pub fn random_trades<R: Rng>(rng: &mut R, pair: &Pair, origin: Millis, chunk_ms: i64, n_chunks: usize) -> Vec<TradeRecord> {
    let mut out = Vec::new();
    let mut price: i128 = rng.random_range(1_000..10_000_000);
    let lead = rng.random_range(0..n_chunks / 10 + 1);
    for c in lead..n_chunks {
        let r: f64 = rng.random();
        let n = if r < 0.2 {
            0
        } else if r < 0.95 {
            rng.random_range(1..6)
        } else {
            rng.random_range(10..40)
        };
        let start = origin + c as i64 * chunk_ms;
        let mut ts: Vec<Millis> = (0..n).map(|_| start + rng.random_range(0..chunk_ms)).collect();
        ts.sort_unstable();
        for t in ts {
            let fills = if rng.random_bool(0.3) { rng.random_range(2..6) } else { 1 };
            let side = if rng.random_bool(0.6) { Side::Buy } else { Side::Sell };
            for _ in 0..fills {
                price = (price + rng.random_range(-price / 100..=price / 100)).max(1);
                let qty = rng.random_range(1..5_000_000_000i128);
                out.push(TradeRecord::new(pair, t, Decimal::from_raw(price), Decimal::from_raw(qty), side));
            }
        }
    }
    out
}

/// Per-chunk aggregates computed by direct bucketing.
#[derive(Debug, Clone, Default)]
pub struct OracleChunk {
    pub start: Millis,
    pub rush: i128,
    pub n_rush: u32,
    pub trades: i128,
    pub volume: i128,
    pub close: Option<i128>,
    pub high: Option<i128>,
    /// Time of the first trade, carried forward over empty chunks.
    pub stamp: Millis,
}

/// `(timestamp, side) -> (Σqty, fills, Σprice·qty as f64)` over all trades.
pub fn rush_groups(trades: &[TradeRecord]) -> HashMap<(Millis, Side), (i128, u32, f64)> {
    let mut g: HashMap<(Millis, Side), (i128, u32, f64)> = HashMap::new();
    for t in trades {
        let e = g.entry((t.timestamp, t.side)).or_default();
        e.0 += t.quantity.raw();
        e.1 += 1;
        e.2 += t.price.to_f64() * t.quantity.to_f64();
    }
    g
}

pub fn oracle_chunks(trades: &[TradeRecord], origin: Millis, chunk_ms: i64, n: usize) -> Vec<OracleChunk> {
    let mut chunks: Vec<OracleChunk> = (0..n)
        .map(|i| OracleChunk {
            start: origin + i as i64 * chunk_ms,
            ..Default::default()
        })
        .collect();
    let idx = |t: Millis| ((t - origin) / chunk_ms) as usize;
    let mut closes: Vec<Option<i128>> = vec![None; n];
    let mut firsts: Vec<Option<Millis>> = vec![None; n];
    for t in trades {
        firsts[idx(t.timestamp)].get_or_insert(t.timestamp);
        let c = &mut chunks[idx(t.timestamp)];
        c.trades += 1;
        c.volume += t.quantity.raw();
        c.high = Some(c.high.map_or(t.price.raw(), |h| h.max(t.price.raw())));
        closes[idx(t.timestamp)] = Some(t.price.raw());
    }
    for ((ts, side), (qty, fills, _)) in rush_groups(trades) {
        if side == Side::Buy && fills >= 2 {
            let c = &mut chunks[idx(ts)];
            c.rush += qty;
            c.n_rush += 1;
        }
    }
    let mut stamp = None;
    for (c, first) in chunks.iter_mut().zip(firsts) {
        stamp = first.or(stamp);
        c.stamp = stamp.unwrap_or(c.start);
    }
    let mut last = None;
    for (c, close) in chunks.iter_mut().zip(closes) {
        match close {
            Some(p) => {
                c.close = Some(p);
                last = Some(p);
            }
            None => {
                c.close = last;
                c.high = last;
            }
        }
    }
    chunks
}

/// Exact `(n, Σx, n·Σx² − (Σx)²)` of a window, from scratch.
fn moments(xs: &[i128]) -> (i128, i128, i128) {
    let n = xs.len() as i128;
    let s: i128 = xs.iter().sum();
    let q: i128 = xs.iter().map(|x| x * x).sum();
    (n, s, n * q - s * s)
}

fn level(m: (i128, i128, i128), scale: f64) -> (f64, f64) {
    let (n, s, num) = m;
    if n == 0 {
        return (0.0, 0.0);
    }
    (s as f64 / n as f64 / scale, (num as f64).sqrt() / n as f64 / scale)
}

fn change(cur: f64, prev: f64) -> f64 {
    match (prev == 0.0, cur == 0.0) {
        (true, true) => 0.0,
        (true, false) => 1e6,
        _ => cur / prev - 1.0,
    }
}

fn mean_change(c: (i128, i128, i128), p: (i128, i128, i128), scale: f64) -> f64 {
    if c.0 == p.0 && c.0 > 0 {
        match (p.1 == 0, c.1 == 0) {
            (true, true) => 0.0,
            (true, false) => 1e6,
            _ => (c.1 - p.1) as f64 / p.1 as f64,
        }
    } else {
        change(level(c, scale).0, level(p, scale).0)
    }
}

fn std_change(c: (i128, i128, i128), p: (i128, i128, i128), scale: f64) -> f64 {
    if c.0 == p.0 && c.0 > 0 {
        let (a, b) = (c.2, p.2);
        match (b == 0, a == 0) {
            (true, true) => 0.0,
            (true, false) => 1e6,
            _ => {
                let (ra, rb) = ((a as f64).sqrt(), (b as f64).sqrt());
                (a - b) as f64 / ((ra + rb) * rb)
            }
        }
    } else {
        change(level(c, scale).1, level(p, scale).1)
    }
}

/// Features of every chunk from a full recomputation of its window.
pub fn oracle_features(
    chunks: &[OracleChunk],
    window: usize,
    include_current: bool,
    form: FeatureForm,
) -> Vec<([f64; 12], bool)> {
    let win = |i: usize| -> std::ops::Range<usize> {
        let end = if include_current { i + 1 } else { i };
        end.saturating_sub(window)..end
    };
    let stats = |i: usize| -> [(i128, i128, i128); 5] {
        let w = &chunks[win(i)];
        [
            moments(&w.iter().map(|c| c.rush).collect::<Vec<_>>()),
            moments(&w.iter().map(|c| c.trades).collect::<Vec<_>>()),
            moments(&w.iter().map(|c| c.volume).collect::<Vec<_>>()),
            moments(&w.iter().filter_map(|c| c.close).collect::<Vec<_>>()),
            moments(&w.iter().filter_map(|c| c.high).collect::<Vec<_>>()),
        ]
    };
    let scales = [SCALE, 1.0, SCALE, SCALE, SCALE];
    (0..chunks.len())
        .map(|i| {
            let cur = stats(i);
            let mut f = [0.0; 12];
            match form {
                FeatureForm::Level => {
                    let l: Vec<(f64, f64)> = cur.iter().zip(scales).map(|(m, s)| level(*m, s)).collect();
                    f[..8].copy_from_slice(&[l[0].1, l[0].0, l[1].1, l[2].1, l[2].0, l[3].1, l[3].0, l[4].0]);
                }
                FeatureForm::Change if i > 0 => {
                    let p = stats(i - 1);
                    f[..8].copy_from_slice(&[
                        std_change(cur[0], p[0], scales[0]),
                        mean_change(cur[0], p[0], scales[0]),
                        std_change(cur[1], p[1], scales[1]),
                        std_change(cur[2], p[2], scales[2]),
                        mean_change(cur[2], p[2], scales[2]),
                        std_change(cur[3], p[3], scales[3]),
                        mean_change(cur[3], p[3], scales[3]),
                        mean_change(cur[4], p[4], scales[4]),
                    ]);
                }
                FeatureForm::Change => {}
            }
            let t = DateTime::<Utc>::from_timestamp_millis(chunks[i].stamp).unwrap();
            let (h, m) = (TAU * t.hour() as f64 / 24.0, TAU * t.minute() as f64 / 60.0);
            f[8..].copy_from_slice(&[h.sin(), h.cos(), m.sin(), m.cos()]);
            (f, i < window)
        })
        .collect()
}

pub fn close_rel(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Generates every scenario (seed `seed + i` for scenario `i`) and cuts
/// its evaluation slice.
pub fn scenario_slices(scenarios: &[PumpScenario], seed: u64, spec: SliceSpec) -> Vec<Slice> {
    let outs: Vec<_> = scenarios
        .par_iter()
        .enumerate()
        .map(|(i, s)| (s, generate(s, seed + i as u64).expect("valid scenario")))
        .collect();
    let mut data = BTreeMap::new();
    let mut events = Vec::new();
    for (s, o) in outs {
        data.insert(Pair::new(&s.pair), TradeSeries::with_coverage(o.trades, s.start, s.end()));
        events.extend(o.events);
    }
    build_slices(&events, &data, spec).expect("scenario covers its slice")
}

/// Slice layout for suite scenarios: all history before the pump plus the
/// three hours after it.
pub fn suite_slice_spec() -> SliceSpec {
    SliceSpec::Around {
        before_secs: 13 * 3600,
        after_secs: 3 * 3600,
    }
}

/// A random forest trained on the first `n` standard scenarios of suite
/// seed `seed`.
pub fn suite_model(
    seed: u64,
    n: u64,
    n_trees: usize,
    mask: pumpwatch::classifiers::FeatureMask,
) -> std::sync::Arc<pumpwatch::classifiers::ModelFile> {
    use pumpwatch::classifiers::ForestConfig;
    use pumpwatch::evaluation::{prepare, train_model, DetectorSpec};
    use pumpwatch::features::WindowConfig;
    let suite = pumpwatch::synth::SuiteConfig::default();
    let scenarios: Vec<_> = (0..n).map(|i| suite.standard(seed, i)).collect();
    let window = WindowConfig::best_f1();
    let series = prepare(&scenario_slices(&scenarios, seed * 1_000, suite_slice_spec()), &window).unwrap();
    let refs: Vec<_> = series.iter().collect();
    let spec = DetectorSpec::RandomForest {
        forest: ForestConfig {
            n_trees,
            ..Default::default()
        },
        mask,
        cooldown_secs: 1800,
    };
    std::sync::Arc::new(train_model(&spec, &refs, &window, seed).unwrap().unwrap())
}
