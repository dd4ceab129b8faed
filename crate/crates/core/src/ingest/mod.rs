//! Trade ingestion: file parsing, exchange download and rush-order inference.

mod fetch;
mod parse;
mod rush;

use thiserror::Error;

use crate::trade::ValidationError;

pub use fetch::{
    backoff_delay, fetch_historical, payload_checksum, ExchangeClient, ExchangeConfig, FetchError, FetchManifest,
    Source,
};
pub use parse::{parse_trades, write_trades_csv, TradeFormat, CSV_HEADER};
pub use rush::{infer_rush_orders, RushOrderAggregator};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("row {row}: {reason}")]
    Parse { row: usize, reason: String },
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
