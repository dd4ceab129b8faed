//! Core domain types shared by every stage of the pipeline.

use std::fmt;
use std::sync::Arc;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decimal::Decimal;

/// Milliseconds since the Unix epoch.
pub type Millis = i64;

/// Taker side of a fill.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Buy => "buy",
            Side::Sell => "sell",
        }
    }

    /// Case-insensitive parse of `buy` / `sell`.
    pub fn parse(s: &str) -> Option<Side> {
        if s.eq_ignore_ascii_case("buy") {
            Some(Side::Buy)
        } else if s.eq_ignore_ascii_case("sell") {
            Some(Side::Sell)
        } else {
            None
        }
    }
}

/// Trading-pair identifier such as `OAXBTC`. Cheap to clone.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pair(Arc<str>);

impl Pair {
    pub fn new(name: &str) -> Self {
        Pair(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Pair {
    fn from(s: &str) -> Self {
        Pair::new(s)
    }
}

/// One executed trade.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradeRecord {
    pub timestamp: Millis,
    pub price: Decimal,
    pub quantity: Decimal,
    pub side: Side,
    pub pair: Pair,
}

impl TradeRecord {
    pub fn new(pair: &Pair, timestamp: Millis, price: Decimal, quantity: Decimal, side: Side) -> Self {
        TradeRecord {
            timestamp,
            price,
            quantity,
            side,
            pair: pair.clone(),
        }
    }
}

/// Trades filled in the same millisecond on the same taker side, read as one
/// market order sweeping the book.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RushOrder {
    pub timestamp: Millis,
    pub side: Side,
    pub total_quantity: Decimal,
    pub trade_count: u32,
    /// Volume-weighted average fill price.
    pub vwap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ohlc {
    pub open: Decimal,
    pub high: Decimal,
    pub low: Decimal,
    pub close: Decimal,
}

impl Ohlc {
    pub fn flat(price: Decimal) -> Self {
        Ohlc {
            open: price,
            high: price,
            low: price,
            close: price,
        }
    }
}

/// Fixed-duration bucket of trades, `[start, start + duration)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chunk {
    pub start: Millis,
    pub duration_secs: u32,
    pub n_trades: u32,
    pub buy_volume: Decimal,
    pub sell_volume: Decimal,
    /// Buy-side rush-order quantity.
    pub rush_order_volume: Decimal,
    pub n_rush_orders: u32,
    /// `None` only for chunks that precede the first trade of the series.
    /// Empty chunks otherwise carry the previous close forward.
    pub ohlc: Option<Ohlc>,
    /// UTC hour of the first trade (carried forward when empty).
    pub hour: u8,
    pub minute: u8,
}

impl Chunk {
    pub fn end(&self) -> Millis {
        self.start + self.duration_secs as Millis * 1000
    }

    pub fn volume(&self) -> Decimal {
        self.buy_volume + self.sell_volume
    }

    pub fn contains(&self, t: Millis) -> bool {
        t >= self.start && t < self.end()
    }
}

pub const N_FEATURES: usize = 12;

/// Column order used by feature files and models.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "std_rush_orders",
    "avg_rush_orders",
    "std_trades",
    "std_volumes",
    "avg_volumes",
    "std_price",
    "avg_price",
    "avg_price_max",
    "hour_sin",
    "hour_cos",
    "minute_sin",
    "minute_cos",
];

/// Indices into [`FEATURE_NAMES`] of the time-of-day encodings.
pub const TIME_FEATURES: [usize; 4] = [8, 9, 10, 11];

/// The moving-window features of one chunk.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub std_rush_orders: f64,
    pub avg_rush_orders: f64,
    pub std_trades: f64,
    pub std_volumes: f64,
    pub avg_volumes: f64,
    pub std_price: f64,
    pub avg_price: f64,
    pub avg_price_max: f64,
    pub hour_sin: f64,
    pub hour_cos: f64,
    pub minute_sin: f64,
    pub minute_cos: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; N_FEATURES] {
        [
            self.std_rush_orders,
            self.avg_rush_orders,
            self.std_trades,
            self.std_volumes,
            self.avg_volumes,
            self.std_price,
            self.avg_price,
            self.avg_price_max,
            self.hour_sin,
            self.hour_cos,
            self.minute_sin,
            self.minute_cos,
        ]
    }

    pub fn from_array(a: [f64; N_FEATURES]) -> Self {
        FeatureVector {
            std_rush_orders: a[0],
            avg_rush_orders: a[1],
            std_trades: a[2],
            std_volumes: a[3],
            avg_volumes: a[4],
            std_price: a[5],
            avg_price: a[6],
            avg_price_max: a[7],
            hour_sin: a[8],
            hour_cos: a[9],
            minute_sin: a[10],
            minute_cos: a[11],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledChunk {
    pub features: FeatureVector,
    pub label: bool,
    pub pair: Pair,
    pub chunk_start: Millis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Threshold,
    RandomForest,
    AdaBoost,
    Kamps,
    CrowdPump,
}

impl DetectorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::Threshold => "threshold",
            DetectorKind::RandomForest => "random_forest",
            DetectorKind::AdaBoost => "ada_boost",
            DetectorKind::Kamps => "kamps",
            DetectorKind::CrowdPump => "crowd_pump",
        }
    }
}

/// A detector firing on one chunk.
#[derive(Debug, Clone, PartialEq)]
pub struct AlertEvent {
    pub pair: Pair,
    pub chunk_start: Millis,
    pub detector: DetectorKind,
    /// Vote fraction or normalized margin; 1.0 for threshold detectors.
    pub score: f64,
}

/// Wire form of [`AlertEvent`] for the JSON-lines alert stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertRecord {
    pub time: String,
    pub chunk_start_ms: Millis,
    pub pair: Pair,
    pub detector: DetectorKind,
    pub score: f64,
}

impl From<&AlertEvent> for AlertRecord {
    fn from(a: &AlertEvent) -> Self {
        AlertRecord {
            time: iso8601(a.chunk_start),
            chunk_start_ms: a.chunk_start,
            pair: a.pair.clone(),
            detector: a.detector,
            score: a.score,
        }
    }
}

impl From<AlertRecord> for AlertEvent {
    fn from(r: AlertRecord) -> Self {
        AlertEvent {
            pair: r.pair,
            chunk_start: r.chunk_start_ms,
            detector: r.detector,
            score: r.score,
        }
    }
}

/// Formats epoch milliseconds as ISO-8601 UTC (`2018-09-09T17:00:00Z`).
pub fn iso8601(ms: Millis) -> String {
    match DateTime::<Utc>::from_timestamp_millis(ms) {
        Some(t) if ms % 1000 == 0 => t.to_rfc3339_opts(SecondsFormat::Secs, true),
        Some(t) => t.to_rfc3339_opts(SecondsFormat::Millis, true),
        None => ms.to_string(),
    }
}

/// UTC (hour, minute) of an epoch-millisecond timestamp.
pub fn utc_hour_minute(ms: Millis) -> (u8, u8) {
    let secs_of_day = ms.div_euclid(1000).rem_euclid(86_400);
    ((secs_of_day / 3600) as u8, ((secs_of_day % 3600) / 60) as u8)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("timestamp decreases at record {index}")]
    NonMonotonicTimestamp { index: usize },
    #[error("record {index} has a non-positive {field}")]
    NonPositiveValue { index: usize, field: &'static str },
}

/// Checks the trade invariants: positive price, quantity and timestamp, and
/// non-decreasing timestamps.
pub fn validate_stream(trades: &[TradeRecord]) -> Result<&[TradeRecord], ValidationError> {
    let mut prev = Millis::MIN;
    for (index, t) in trades.iter().enumerate() {
        validate_record(index, t)?;
        if t.timestamp < prev {
            return Err(ValidationError::NonMonotonicTimestamp { index });
        }
        prev = t.timestamp;
    }
    Ok(trades)
}

pub(crate) fn validate_record(index: usize, t: &TradeRecord) -> Result<(), ValidationError> {
    let field = if t.timestamp <= 0 {
        "timestamp"
    } else if !t.price.is_positive() {
        "price"
    } else if !t.quantity.is_positive() {
        "quantity"
    } else {
        return Ok(());
    };
    Err(ValidationError::NonPositiveValue { index, field })
}
