use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::evaluation::{EvalError, PumpEvent};
use crate::features::{extract_features, grid_floor, ChunkFeatures, WindowConfig};
use crate::trade::{Millis, Pair, TradeRecord};

const DAY_MS: i64 = 86_400_000;

/// Span of trading data taken around each event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SliceSpec {
    /// Whole UTC days: the event's day plus `before` days before and
    /// `after` days after.
    CalendarDays { before: u32, after: u32 },
    /// A fixed span around the signal.
    Around { before_secs: u64, after_secs: u64 },
}

impl Default for SliceSpec {
    fn default() -> Self {
        SliceSpec::CalendarDays { before: 1, after: 1 }
    }
}

impl SliceSpec {
    pub fn span(&self, t: Millis) -> (Millis, Millis) {
        match *self {
            SliceSpec::CalendarDays { before, after } => {
                let day = grid_floor(t, DAY_MS);
                (day - before as i64 * DAY_MS, day + (after as i64 + 1) * DAY_MS)
            }
            SliceSpec::Around { before_secs, after_secs } => (t - before_secs as i64 * 1000, t + after_secs as i64 * 1000),
        }
    }
}

/// A pair's trades and the interval they are known to cover.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeSeries {
    pub trades: Vec<TradeRecord>,
    pub coverage: (Millis, Millis),
}

impl TradeSeries {
    /// Coverage taken as the whole UTC days spanned by the trades.
    pub fn from_trades(trades: Vec<TradeRecord>) -> Self {
        let coverage = match (trades.first(), trades.last()) {
            (Some(a), Some(b)) => (grid_floor(a.timestamp, DAY_MS), grid_floor(b.timestamp, DAY_MS) + DAY_MS),
            _ => (0, 0),
        };
        TradeSeries { trades, coverage }
    }

    pub fn with_coverage(trades: Vec<TradeRecord>, start: Millis, end: Millis) -> Self {
        TradeSeries {
            trades,
            coverage: (start, end),
        }
    }
}

/// Contiguous trading data of one pair holding one or more signals.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub pair: Pair,
    pub start: Millis,
    pub end: Millis,
    pub signals: Vec<Millis>,
    pub trades: Vec<TradeRecord>,
}

/// Cuts one slice per event; slices of one pair that overlap or touch are
/// merged, so no trading period appears twice.
pub fn build_slices(
    events: &[PumpEvent],
    data: &BTreeMap<Pair, TradeSeries>,
    spec: SliceSpec,
) -> Result<Vec<Slice>, EvalError> {
    let mut by_pair: BTreeMap<&Pair, Vec<&PumpEvent>> = BTreeMap::new();
    for e in events {
        by_pair.entry(&e.pair).or_default().push(e);
    }
    let mut out = Vec::new();
    for (pair, mut evs) in by_pair {
        evs.sort_by_key(|e| e.signal_timestamp);
        let series = data.get(pair);
        let mut spans: Vec<(Millis, Millis, Vec<Millis>)> = Vec::new();
        for e in evs {
            let (s, t) = spec.span(e.signal_timestamp);
            let covered = series.is_some_and(|d| d.coverage.0 <= s && t <= d.coverage.1);
            if !covered {
                return Err(EvalError::InsufficientCoverage {
                    pair: pair.to_string(),
                    signal_timestamp: e.signal_timestamp,
                });
            }
            match spans.last_mut() {
                Some(last) if s <= last.1 => {
                    last.1 = last.1.max(t);
                    last.2.push(e.signal_timestamp);
                }
                _ => spans.push((s, t, vec![e.signal_timestamp])),
            }
        }
        let trades = &series.expect("coverage checked").trades;
        for (start, end, signals) in spans {
            let lo = trades.partition_point(|t| t.timestamp < start);
            let hi = trades.partition_point(|t| t.timestamp < end);
            out.push(Slice {
                pair: pair.clone(),
                start,
                end,
                signals,
                trades: trades[lo..hi].to_vec(),
            });
        }
    }
    Ok(out)
}

/// A featurized slice with one label per chunk.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeries {
    pub pair: Pair,
    pub window: WindowConfig,
    pub rows: Vec<ChunkFeatures>,
    pub labels: Vec<bool>,
    pub signals: Vec<Millis>,
}

impl LabeledSeries {
    /// Chunk index holding `t`, if inside the series.
    pub fn index_of(&self, t: Millis) -> Option<usize> {
        let first = self.rows.first()?.chunk.start;
        let i = (t - first).div_euclid(self.window.chunk_ms());
        (0..self.rows.len() as i64).contains(&i).then_some(i as usize)
    }

    pub fn n_events(&self) -> usize {
        self.signals.len()
    }
}

/// Chunks and featurizes a slice on the grid of `cfg`, labeling each chunk
/// that contains a signal.
pub fn label_slice(slice: &Slice, cfg: &WindowConfig) -> Result<LabeledSeries, EvalError> {
    let chunk_ms = cfg.chunk_ms();
    let origin = grid_floor(slice.start, chunk_ms);
    let end = grid_floor(slice.end - 1, chunk_ms) + chunk_ms;
    let rows = extract_features(&slice.trades, cfg, origin, Some(end))?;
    let mut series = LabeledSeries {
        pair: slice.pair.clone(),
        window: *cfg,
        labels: vec![false; rows.len()],
        rows,
        signals: slice.signals.clone(),
    };
    for &s in &slice.signals {
        if let Some(i) = series.index_of(s) {
            series.labels[i] = true;
        }
    }
    Ok(series)
}
