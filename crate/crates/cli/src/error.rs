use std::path::{Path, PathBuf};

use pumpwatch::classifiers::ClassifierError;
use pumpwatch::detectors::DetectorError;
use pumpwatch::evaluation::EvalError;
use pumpwatch::features::FeatureError;
use pumpwatch::ingest::{FetchError, IngestError};
use pumpwatch::synth::SynthError;
use serde::Serialize;
use thiserror::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NETWORK: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{context}: {source}")]
    Ingest { context: String, source: IngestError },
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

impl CliError {
    pub fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn ingest(path: &Path) -> impl FnOnce(IngestError) -> CliError + '_ {
        move |source| CliError::Ingest {
            context: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => EXIT_USAGE,
            CliError::Fetch(FetchError::InvalidWindow { .. }) => EXIT_USAGE,
            CliError::Fetch(_) => EXIT_NETWORK,
            _ => EXIT_DATA,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config { .. } => "config",
            CliError::Io { .. } => "io",
            CliError::Data(_) | CliError::Ingest { .. } => "data",
            CliError::Fetch(FetchError::InvalidWindow { .. }) => "usage",
            CliError::Fetch(_) => "network",
            CliError::Feature(_) => "features",
            CliError::Classifier(_) => "model",
            CliError::Detector(_) => "detector",
            CliError::Eval(_) => "evaluation",
            CliError::Synth(_) => "synth",
        }
    }
}

#[derive(Serialize)]
pub struct ErrorReport<'a> {
    pub error: &'a str,
    pub message: String,
    pub exit_code: i32,
}

pub fn report(kind: &str, message: String, exit_code: i32) {
    let r = ErrorReport {
        error: kind,
        message,
        exit_code,
    };
    eprintln!("{}", serde_json::to_string(&r).expect("error report serializes"));
}
