//! Alerting runtimes over featurized chunk streams.

mod alerts;
mod kamps;
mod stream;

pub use alerts::{read_alerts, write_alerts};
pub use kamps::{candles_from_chunks, detect_kamps, Candle, KampsConfig, KampsPreset, KampsTable, Multipliers};
pub use stream::{
    detect_crowd_pump, detect_stream, detect_threshold, ChunkRule, Cooldown, CrowdConfig, DetectorState,
    StreamingDetector, DEFAULT_COOLDOWN_SECS, DEFAULT_RUSH_THRESHOLD,
};

#[derive(Debug, thiserror::Error)]
pub enum DetectorError {
    #[error(transparent)]
    Feature(#[from] crate::features::FeatureError),
    #[error("model was trained without a window configuration")]
    MissingWindow,
    #[error("invalid Kamps configuration: {0}")]
    InvalidKamps(String),
    #[error("malformed alert line {line}: {source}")]
    AlertParse { line: usize, source: serde_json::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
