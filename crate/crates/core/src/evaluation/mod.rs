//! Slicing, labeling, cross-validation and scoring.

mod dataset;
mod events;
mod harness;
mod metrics;
mod slices;
mod study;

pub use dataset::{load_dataset, load_trade_files, split_covered};
pub use events::{read_events_csv, write_events_csv, PumpEvent};
pub use harness::{
    evaluate_split, fingerprint, fold_assignment, kfold_evaluate, prepare, run_detector, train_model, training_set,
    Averaging, DetectorSpec, EvalOptions,
};
pub use metrics::{match_alerts, Confusion, EvalReport, FoldScore, MatchOutcome};
pub use slices::{build_slices, label_slice, LabeledSeries, Slice, SliceSpec, TradeSeries};
pub use study::{rush_scores, rush_threshold_study, ThresholdStudy};

use crate::classifiers::ClassifierError;
use crate::features::FeatureError;
use crate::ingest::IngestError;
use crate::trade::Millis;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("event manifest row {row}: {reason}")]
    Events { row: usize, reason: String },
    #[error("no trade data covers the slice around {pair} at {signal_timestamp}")]
    InsufficientCoverage { pair: String, signal_timestamp: Millis },
    #[error("need at least {needed} events, found {found}")]
    TooFewEvents { needed: usize, found: usize },
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
