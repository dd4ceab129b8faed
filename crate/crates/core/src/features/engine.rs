//! Moving-window statistics over the chunk series.
//!
//! Every series feeding a feature is a fixed-point quantity, so the rolling
//! sums are kept as exact integers. Population variance is then
//! `(n·Σx² − (Σx)²) / n²`, evaluated exactly before the single conversion to
//! floating point; the result does not drift however long the stream runs.
//! If an accumulator would overflow `i128` the window falls back to a
//! two-pass floating-point computation.
//!
//! In [`FeatureForm::Change`] each statistic is reported as its relative
//! change from the previous chunk. When consecutive windows hold the same
//! number of samples the change is formed from the exact integer difference
//! of the two sums, so it keeps full relative precision even when tiny.

use std::collections::VecDeque;
use std::f64::consts::TAU;

use serde::Serialize;

use crate::decimal::SCALE;
use crate::features::{FeatureForm, WindowConfig};
use crate::trade::{Chunk, FeatureVector};

/// Reported change when a statistic grows from exactly zero.
pub const ZERO_BASE_CHANGE: f64 = 1e6;

/// A chunk together with its features.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChunkFeatures {
    pub chunk: Chunk,
    pub features: FeatureVector,
    /// Set for the first `window_chunks` chunks of a series, whose window is
    /// not yet full. These are excluded from training and detection.
    pub warm_up: bool,
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    rush: i128,
    trades: i128,
    volume: i128,
    close: Option<i128>,
    high: Option<i128>,
}

impl Sample {
    fn of(chunk: &Chunk) -> Self {
        Sample {
            rush: chunk.rush_order_volume.raw(),
            trades: chunk.n_trades as i128,
            volume: chunk.volume().raw(),
            close: chunk.ohlc.map(|o| o.close.raw()),
            high: chunk.ohlc.map(|o| o.high.raw()),
        }
    }
}

/// Exact running Σx and Σx² over a window of integer samples.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: i64,
    sum: i128,
    sum_sq: i128,
    overflowed: bool,
}

impl Moments {
    fn add(&mut self, x: i128) {
        self.n += 1;
        self.update(x, 1);
    }

    fn remove(&mut self, x: i128) {
        self.n -= 1;
        self.update(x, -1);
    }

    fn update(&mut self, x: i128, sign: i128) {
        if self.overflowed {
            return;
        }
        let next = x.checked_mul(x).and_then(|sq| {
            let sum = self.sum.checked_add(sign * x)?;
            let sum_sq = self.sum_sq.checked_add(sign * sq)?;
            Some((sum, sum_sq))
        });
        match next {
            Some((sum, sum_sq)) => {
                self.sum = sum;
                self.sum_sq = sum_sq;
            }
            None => self.overflowed = true,
        }
    }

    fn rebuild<I: Iterator<Item = i128>>(&mut self, values: I) {
        *self = Moments::default();
        for v in values {
            self.add(v);
        }
    }

    fn snapshot<I: Iterator<Item = i128> + Clone>(&self, values: I, scale: f64) -> Snapshot {
        if self.n == 0 {
            return Snapshot::default();
        }
        let n = self.n as f64;
        if !self.overflowed {
            let n_i = self.n as i128;
            let exact = n_i
                .checked_mul(self.sum_sq)
                .and_then(|a| self.sum.checked_mul(self.sum).and_then(|b| a.checked_sub(b)));
            if let Some(num) = exact {
                let num = num.max(0);
                return Snapshot {
                    n: self.n,
                    exact: Some((self.sum, num)),
                    mean: self.sum as f64 / n / scale,
                    std: (num as f64).sqrt() / n / scale,
                };
            }
        }
        let (mean, std) = two_pass(values, scale);
        Snapshot {
            n: self.n,
            exact: None,
            mean,
            std,
        }
    }
}

/// Window statistic at one chunk: sample count, the exact `Σx` and
/// `n·Σx² − (Σx)²` when representable, and the floating-point levels.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Snapshot {
    n: i64,
    exact: Option<(i128, i128)>,
    mean: f64,
    std: f64,
}

impl Snapshot {
    fn mean_change(&self, prev: &Snapshot) -> f64 {
        if let (Some((s1, _)), Some((s0, _)), true) = (self.exact, prev.exact, self.n == prev.n) {
            if s0 == 0 {
                return zero_base(s1 == 0);
            }
            if let Some(d) = s1.checked_sub(s0) {
                return d as f64 / s0 as f64;
            }
        }
        ratio_change(self.mean, prev.mean)
    }

    fn std_change(&self, prev: &Snapshot) -> f64 {
        if let (Some((_, a)), Some((_, b)), true) = (self.exact, prev.exact, self.n == prev.n) {
            if b == 0 {
                return zero_base(a == 0);
            }
            // sqrt(a)/sqrt(b) - 1 = (a - b) / ((sqrt(a) + sqrt(b)) * sqrt(b))
            let (ra, rb) = ((a as f64).sqrt(), (b as f64).sqrt());
            return (a - b) as f64 / ((ra + rb) * rb);
        }
        ratio_change(self.std, prev.std)
    }
}

fn zero_base(unchanged: bool) -> f64 {
    if unchanged {
        0.0
    } else {
        ZERO_BASE_CHANGE
    }
}

fn ratio_change(cur: f64, prev: f64) -> f64 {
    if prev == 0.0 {
        zero_base(cur == 0.0)
    } else {
        cur / prev - 1.0
    }
}

/// Mean and population std from squared deviations around the mean.
fn two_pass<I: Iterator<Item = i128> + Clone>(values: I, scale: f64) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.clone().map(|v| v as f64).sum::<f64>() / n as f64;
    let ss: f64 = values.map(|v| (v as f64 - mean).powi(2)).sum();
    (mean / scale, (ss / n as f64).sqrt() / scale)
}

#[derive(Debug, Clone, Default)]
struct Rolling {
    rush: Moments,
    trades: Moments,
    volume: Moments,
    close: Moments,
    high: Moments,
}

/// Window snapshots of rush volume, trade count, volume, close and high.
type Snapshots = [Snapshot; 5];

/// Streaming feature computation, one chunk at a time.
#[derive(Debug, Clone)]
pub struct FeatureEngine {
    cfg: WindowConfig,
    window: VecDeque<Sample>,
    rolling: Rolling,
    prev: Option<Snapshots>,
    index: usize,
}

impl FeatureEngine {
    pub fn new(cfg: WindowConfig) -> Self {
        FeatureEngine {
            window: VecDeque::with_capacity(cfg.window_chunks() + 1),
            cfg,
            rolling: Rolling::default(),
            prev: None,
            index: 0,
        }
    }

    pub fn config(&self) -> &WindowConfig {
        &self.cfg
    }

    fn admit(&mut self, s: Sample) {
        if self.window.len() == self.cfg.window_chunks() {
            let old = self.window.pop_front().expect("non-empty window");
            let r = &mut self.rolling;
            r.rush.remove(old.rush);
            r.trades.remove(old.trades);
            r.volume.remove(old.volume);
            if let Some(c) = old.close {
                r.close.remove(c);
            }
            if let Some(h) = old.high {
                r.high.remove(h);
            }
        }
        let r = &mut self.rolling;
        r.rush.add(s.rush);
        r.trades.add(s.trades);
        r.volume.add(s.volume);
        if let Some(c) = s.close {
            r.close.add(c);
        }
        if let Some(h) = s.high {
            r.high.add(h);
        }
        self.window.push_back(s);
        if self.index.is_multiple_of(REBUILD_EVERY) {
            self.rebuild_overflowed();
        }
    }

    fn rebuild_overflowed(&mut self) {
        let w = &self.window;
        let r = &mut self.rolling;
        if r.rush.overflowed {
            r.rush.rebuild(w.iter().map(|s| s.rush));
        }
        if r.volume.overflowed {
            r.volume.rebuild(w.iter().map(|s| s.volume));
        }
        if r.close.overflowed {
            r.close.rebuild(w.iter().filter_map(|s| s.close));
        }
        if r.high.overflowed {
            r.high.rebuild(w.iter().filter_map(|s| s.high));
        }
    }

    fn snapshots(&self) -> Snapshots {
        let w = &self.window;
        let r = &self.rolling;
        let scale = SCALE as f64;
        [
            r.rush.snapshot(w.iter().map(|s| s.rush), scale),
            r.trades.snapshot(w.iter().map(|s| s.trades), 1.0),
            r.volume.snapshot(w.iter().map(|s| s.volume), scale),
            r.close.snapshot(w.iter().filter_map(|s| s.close), scale),
            r.high.snapshot(w.iter().filter_map(|s| s.high), scale),
        ]
    }

    fn features(&self, cur: &Snapshots, chunk: &Chunk) -> FeatureVector {
        let [rush, trades, volume, close, high] = cur;
        let hour_angle = TAU * chunk.hour as f64 / 24.0;
        let minute_angle = TAU * chunk.minute as f64 / 60.0;
        let mut f = FeatureVector {
            hour_sin: hour_angle.sin(),
            hour_cos: hour_angle.cos(),
            minute_sin: minute_angle.sin(),
            minute_cos: minute_angle.cos(),
            ..Default::default()
        };
        let stats = match (self.cfg.form, &self.prev) {
            (FeatureForm::Level, _) => [
                rush.std, rush.mean, trades.std, volume.std, volume.mean, close.std, close.mean, high.mean,
            ],
            (FeatureForm::Change, None) => [0.0; 8],
            (FeatureForm::Change, Some([p_rush, p_trades, p_volume, p_close, p_high])) => [
                rush.std_change(p_rush),
                rush.mean_change(p_rush),
                trades.std_change(p_trades),
                volume.std_change(p_volume),
                volume.mean_change(p_volume),
                close.std_change(p_close),
                close.mean_change(p_close),
                high.mean_change(p_high),
            ],
        };
        [
            f.std_rush_orders,
            f.avg_rush_orders,
            f.std_trades,
            f.std_volumes,
            f.avg_volumes,
            f.std_price,
            f.avg_price,
            f.avg_price_max,
        ] = stats;
        f
    }

    pub fn push(&mut self, chunk: Chunk) -> ChunkFeatures {
        let sample = Sample::of(&chunk);
        if self.cfg.include_current {
            self.admit(sample);
        }
        let cur = self.snapshots();
        let features = self.features(&cur, &chunk);
        self.prev = Some(cur);
        if !self.cfg.include_current {
            self.admit(sample);
        }
        let warm_up = self.index < self.cfg.window_chunks();
        self.index += 1;
        ChunkFeatures {
            chunk,
            features,
            warm_up,
        }
    }
}

const REBUILD_EVERY: usize = 64;

/// Features for every chunk of a tiled series.
pub fn compute_features(chunks: &[Chunk], cfg: &WindowConfig) -> Vec<ChunkFeatures> {
    let mut engine = FeatureEngine::new(*cfg);
    chunks.iter().cloned().map(|c| engine.push(c)).collect()
}
