//! Chunking and moving-window features.

mod chunker;
mod dump;
mod engine;
mod pipeline;
mod window;

use thiserror::Error;

use crate::trade::Millis;

pub use chunker::{chunk_stream, Chunker};
pub use dump::{read_feature_csv, write_feature_csv, FeatureRow};
pub use engine::{compute_features, ChunkFeatures, FeatureEngine, ZERO_BASE_CHANGE};
pub use pipeline::{extract_features, grid_floor, FeaturePipeline};
pub use window::{parse_duration_secs, FeatureForm, WindowConfig};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeatureError {
    #[error("origin {origin} is not a multiple of the {chunk_ms} ms chunk size")]
    MisalignedOrigin { origin: Millis, chunk_ms: i64 },
    #[error("timestamp {timestamp} precedes the open chunk starting at {chunk_start}")]
    OutOfOrder { timestamp: Millis, chunk_start: Millis },
    #[error("invalid window: {0}")]
    InvalidWindow(String),
}
