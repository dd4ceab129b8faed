use std::sync::Arc;

use crate::classifiers::{Model, ModelFile};
use crate::detectors::DetectorError;
use crate::features::{grid_floor, ChunkFeatures, FeaturePipeline, WindowConfig};
use crate::trade::{AlertEvent, DetectorKind, FeatureVector, Millis, Pair, TradeRecord};

pub const DEFAULT_COOLDOWN_SECS: u32 = 1800;
pub const DEFAULT_RUSH_THRESHOLD: f64 = 12.8;

/// Post-alert suppression. An alert at chunk start `s` blocks every chunk
/// starting before `s + cooldown`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cooldown {
    cooldown_ms: i64,
    until: Option<Millis>,
}

impl Cooldown {
    pub fn new(cooldown_secs: u32) -> Self {
        Cooldown {
            cooldown_ms: cooldown_secs as i64 * 1000,
            until: None,
        }
    }

    /// 0 while idle.
    pub fn cooldown_until(&self) -> Millis {
        self.until.unwrap_or(0)
    }

    pub fn is_paused(&self, now: Millis) -> bool {
        self.until.is_some_and(|u| now < u)
    }

    /// Records an alert at `now` unless paused; returns whether it fired.
    pub fn try_fire(&mut self, now: Millis) -> bool {
        if self.is_paused(now) {
            return false;
        }
        self.until = Some(now + self.cooldown_ms);
        true
    }
}

/// The per-chunk firing condition.
#[derive(Debug, Clone)]
pub enum ChunkRule {
    /// Fires at `score >= 0.5`.
    Model { model: Arc<ModelFile>, kind: DetectorKind },
    /// Fires at `std_rush_orders > threshold`, with score 1.
    RushThreshold(f64),
}

impl ChunkRule {
    pub fn model(model: Arc<ModelFile>) -> Self {
        let kind = match model.model {
            Model::RandomForest(_) => DetectorKind::RandomForest,
            Model::AdaBoost(_) => DetectorKind::AdaBoost,
        };
        ChunkRule::Model { model, kind }
    }

    pub fn crowd(model: Arc<ModelFile>) -> Self {
        ChunkRule::Model {
            model,
            kind: DetectorKind::CrowdPump,
        }
    }

    pub fn kind(&self) -> DetectorKind {
        match self {
            ChunkRule::Model { kind, .. } => *kind,
            ChunkRule::RushThreshold(_) => DetectorKind::Threshold,
        }
    }

    /// `Some(score)` when the chunk fires.
    pub fn evaluate(&self, f: &FeatureVector) -> Option<f64> {
        match self {
            ChunkRule::Model { model, .. } => {
                let s = model.predict(f);
                (s >= 0.5).then_some(s)
            }
            ChunkRule::RushThreshold(t) => (f.std_rush_orders > *t).then_some(1.0),
        }
    }
}

/// Detection state of one (pair, detector).
#[derive(Debug, Clone)]
pub struct DetectorState {
    pub pair: Pair,
    pub rule: ChunkRule,
    pub cooldown: Cooldown,
}

impl DetectorState {
    pub fn new(pair: Pair, rule: ChunkRule, cooldown_secs: u32) -> Self {
        DetectorState {
            pair,
            rule,
            cooldown: Cooldown::new(cooldown_secs),
        }
    }

    /// Warm-up chunks never fire, and neither does a chunk inside the
    /// cooldown of an earlier alert.
    pub fn observe(&mut self, cf: &ChunkFeatures) -> Option<AlertEvent> {
        if cf.warm_up || self.cooldown.is_paused(cf.chunk.start) {
            return None;
        }
        let score = self.rule.evaluate(&cf.features)?;
        self.cooldown.try_fire(cf.chunk.start);
        Some(AlertEvent {
            pair: self.pair.clone(),
            chunk_start: cf.chunk.start,
            detector: self.rule.kind(),
            score,
        })
    }

    pub fn run(&mut self, rows: &[ChunkFeatures]) -> Vec<AlertEvent> {
        rows.iter().filter_map(|cf| self.observe(cf)).collect()
    }
}

/// Ensemble detection over an already featurized chunk series.
pub fn detect_stream(pair: &Pair, rows: &[ChunkFeatures], model: Arc<ModelFile>, cooldown_secs: u32) -> Vec<AlertEvent> {
    DetectorState::new(pair.clone(), ChunkRule::model(model), cooldown_secs).run(rows)
}

/// Alerts when `std_rush_orders > threshold` (strictly).
pub fn detect_threshold(pair: &Pair, rows: &[ChunkFeatures], threshold: f64, cooldown_secs: u32) -> Vec<AlertEvent> {
    DetectorState::new(pair.clone(), ChunkRule::RushThreshold(threshold), cooldown_secs).run(rows)
}

/// Trades in, alerts out. The chunk grid is anchored at the first trade's
/// grid point unless an origin is given.
#[derive(Debug, Clone)]
pub struct StreamingDetector {
    cfg: WindowConfig,
    pipeline: Option<FeaturePipeline>,
    state: DetectorState,
    buf: Vec<ChunkFeatures>,
}

impl StreamingDetector {
    pub fn new(cfg: WindowConfig, origin: Option<Millis>, state: DetectorState) -> Result<Self, DetectorError> {
        cfg.validate()?;
        let pipeline = origin.map(|o| FeaturePipeline::new(cfg, o)).transpose()?;
        Ok(StreamingDetector {
            cfg,
            pipeline,
            state,
            buf: Vec::new(),
        })
    }

    pub fn state(&self) -> &DetectorState {
        &self.state
    }

    fn pipeline_for(&mut self, t: Millis) -> Result<&mut FeaturePipeline, DetectorError> {
        if self.pipeline.is_none() {
            let origin = grid_floor(t, self.cfg.chunk_ms());
            self.pipeline = Some(FeaturePipeline::new(self.cfg, origin)?);
        }
        Ok(self.pipeline.as_mut().expect("initialized above"))
    }

    fn emit(&mut self, out: &mut Vec<AlertEvent>) {
        for cf in self.buf.drain(..) {
            out.extend(self.state.observe(&cf));
        }
    }

    pub fn push(&mut self, trade: &TradeRecord, out: &mut Vec<AlertEvent>) -> Result<(), DetectorError> {
        let mut buf = std::mem::take(&mut self.buf);
        self.pipeline_for(trade.timestamp)?.push(trade, &mut buf)?;
        self.buf = buf;
        self.emit(out);
        Ok(())
    }

    pub fn push_batch(&mut self, trades: &[TradeRecord], out: &mut Vec<AlertEvent>) -> Result<(), DetectorError> {
        for t in trades {
            self.push(t, out)?;
        }
        Ok(())
    }

    /// Closes chunks ending at or before the wall-clock time `now`.
    pub fn advance_to(&mut self, now: Millis, out: &mut Vec<AlertEvent>) -> Result<(), DetectorError> {
        if let Some(p) = self.pipeline.as_mut() {
            p.advance_to(now, &mut self.buf)?;
        }
        self.emit(out);
        Ok(())
    }

    pub fn finish(mut self, end: Option<Millis>, out: &mut Vec<AlertEvent>) -> Result<DetectorState, DetectorError> {
        if let Some(p) = self.pipeline.take() {
            p.finish(end, &mut self.buf)?;
        }
        self.emit(out);
        Ok(self.state)
    }
}

/// Crowd-pump inference settings: wide chunks and a long pause.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrowdConfig {
    pub chunk_seconds: u32,
    pub cooldown_secs: u32,
}

impl Default for CrowdConfig {
    fn default() -> Self {
        CrowdConfig {
            chunk_seconds: 600,
            cooldown_secs: 21_600,
        }
    }
}

impl CrowdConfig {
    /// The model's training window re-chunked for inference, keeping the
    /// window length in hours.
    pub fn inference_window(&self, model: &ModelFile) -> Result<WindowConfig, DetectorError> {
        let trained = model.window.ok_or(DetectorError::MissingWindow)?;
        Ok(trained.with_chunk_seconds(self.chunk_seconds)?)
    }
}

/// Runs a (time-feature-free) model over 600 s chunks of a trade stream.
pub fn detect_crowd_pump(
    pair: &Pair,
    trades: &[TradeRecord],
    model: Arc<ModelFile>,
    cfg: CrowdConfig,
) -> Result<Vec<AlertEvent>, DetectorError> {
    let window = cfg.inference_window(&model)?;
    let state = DetectorState::new(pair.clone(), ChunkRule::crowd(model), cfg.cooldown_secs);
    let mut det = StreamingDetector::new(window, None, state)?;
    let mut out = Vec::new();
    det.push_batch(trades, &mut out)?;
    det.finish(None, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decimal::Decimal;
    use crate::trade::Chunk;

    fn row(i: i64, std_rush: f64, warm_up: bool) -> ChunkFeatures {
        let start = i * 25_000;
        ChunkFeatures {
            chunk: Chunk {
                start,
                duration_secs: 25,
                n_trades: 0,
                buy_volume: Decimal::ZERO,
                sell_volume: Decimal::ZERO,
                rush_order_volume: Decimal::ZERO,
                n_rush_orders: 0,
                ohlc: None,
                hour: 0,
                minute: 0,
            },
            features: FeatureVector {
                std_rush_orders: std_rush,
                ..Default::default()
            },
            warm_up,
        }
    }

    #[test]
    fn consecutive_positives_collapse() {
        let rows: Vec<_> = (0..10).map(|i| row(i, if (3..6).contains(&i) { 20.0 } else { 0.0 }, false)).collect();
        let a = detect_threshold(&Pair::new("X"), &rows, 12.8, 1800);
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].chunk_start, 75_000);
        assert_eq!(a[0].score, 1.0);
    }

    #[test]
    fn cooldown_expiry() {
        // 31 minutes = 74.4 chunks; chunk 75 starts 31.25 min later
        let mut rows: Vec<_> = (0..100).map(|i| row(i, 0.0, false)).collect();
        rows[0].features.std_rush_orders = 13.0;
        rows[75].features.std_rush_orders = 13.0;
        let a = detect_threshold(&Pair::new("X"), &rows, 12.8, 1800);
        assert_eq!(a.iter().map(|x| x.chunk_start).collect::<Vec<_>>(), [0, 75 * 25_000]);
    }

    #[test]
    fn cooldown_boundary_is_inclusive_of_expiry() {
        // chunk 72 starts exactly 1800 s after chunk 0
        let mut rows: Vec<_> = (0..80).map(|i| row(i, 0.0, false)).collect();
        rows[0].features.std_rush_orders = 13.0;
        rows[71].features.std_rush_orders = 13.0;
        rows[72].features.std_rush_orders = 13.0;
        let a = detect_threshold(&Pair::new("X"), &rows, 12.8, 1800);
        assert_eq!(a.iter().map(|x| x.chunk_start).collect::<Vec<_>>(), [0, 1_800_000]);
    }

    #[test]
    fn threshold_is_strict() {
        let rows = vec![row(0, 12.8, false)];
        assert!(detect_threshold(&Pair::new("X"), &rows, 12.8, 1800).is_empty());
        let rows = vec![row(0, 12.8f64.next_up(), false)];
        assert_eq!(detect_threshold(&Pair::new("X"), &rows, 12.8, 1800).len(), 1);
    }

    #[test]
    fn zero_stream_and_warm_up_are_silent() {
        let rows: Vec<_> = (0..50).map(|i| row(i, 0.0, false)).collect();
        assert!(detect_threshold(&Pair::new("X"), &rows, 12.8, 1800).is_empty());
        let rows = vec![row(0, 99.0, true)];
        assert!(detect_threshold(&Pair::new("X"), &rows, 12.8, 1800).is_empty());
    }

    #[test]
    fn cooldown_until_reporting() {
        let mut c = Cooldown::new(10);
        assert_eq!(c.cooldown_until(), 0);
        assert!(c.try_fire(5_000));
        assert_eq!(c.cooldown_until(), 15_000);
        assert!(!c.try_fire(14_999));
        assert!(c.try_fire(15_000));
    }
}
