//! Pump-and-dump detection on exchange trade ticks.
//!
//! The pipeline infers rush orders (same-millisecond multi-fill market buys)
//! from raw trades, buckets the stream into fixed-size chunks, computes
//! moving-window statistics per chunk and classifies each chunk with a tree
//! ensemble or a threshold rule. An hourly-candle adaptive-threshold
//! detector is included as a baseline, as is a synthetic market generator and
//! the cross-validation harness used to compare them.

pub mod classifiers;
pub mod decimal;
pub mod detectors;
pub mod evaluation;
pub mod features;
pub mod ingest;
pub mod synth;
pub mod trade;

pub use decimal::Decimal;
pub use trade::{
    validate_stream, AlertEvent, AlertRecord, Chunk, DetectorKind, FeatureVector, LabeledChunk, Millis, Ohlc, Pair,
    RushOrder, Side, TradeRecord, ValidationError, FEATURE_NAMES, N_FEATURES,
};
