//! Defaults shared by all subcommands, read from a TOML file. Flags given on
//! the command line take precedence.

use std::path::{Path, PathBuf};

use pumpwatch::classifiers::{BoostConfig, ForestConfig};
use pumpwatch::detectors::{CrowdConfig, DEFAULT_COOLDOWN_SECS, DEFAULT_RUSH_THRESHOLD};
use pumpwatch::evaluation::{Averaging, SliceSpec};
use pumpwatch::features::{parse_duration_secs, FeatureForm, WindowConfig};
use pumpwatch::ingest::ExchangeConfig;
use serde::Deserialize;

use crate::error::CliError;

pub const CONFIG_ENV: &str = "PUMPWATCH_CONFIG";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub exchange: ExchangeConfig,
    pub features: FeatureSettings,
    pub forest: ForestConfig,
    pub boost: BoostConfig,
    pub detect: DetectSettings,
    pub evaluate: EvalSettings,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureSettings {
    pub chunk_seconds: u32,
    /// Duration such as `7h`, `35m` or a number of seconds.
    pub window: String,
    pub form: FeatureForm,
    pub exclusive: bool,
}

impl Default for FeatureSettings {
    fn default() -> Self {
        FeatureSettings {
            chunk_seconds: 25,
            window: "7h".into(),
            form: FeatureForm::default(),
            exclusive: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectSettings {
    pub cooldown_secs: u32,
    pub rush_threshold: f64,
    pub crowd_chunk_seconds: u32,
    pub crowd_cooldown_secs: u32,
}

impl Default for DetectSettings {
    fn default() -> Self {
        let crowd = CrowdConfig::default();
        DetectSettings {
            cooldown_secs: DEFAULT_COOLDOWN_SECS,
            rush_threshold: DEFAULT_RUSH_THRESHOLD,
            crowd_chunk_seconds: crowd.chunk_seconds,
            crowd_cooldown_secs: crowd.cooldown_secs,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    pub folds: usize,
    pub tolerance_chunks: usize,
    pub seed: u64,
    pub averaging: Averaging,
    pub slice: SliceSpec,
    /// Preset table for the hourly-candle baseline.
    pub kamps_table: Option<PathBuf>,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            folds: 5,
            tolerance_chunks: 2,
            seed: 0,
            averaging: Averaging::default(),
            slice: SliceSpec::default(),
            kamps_table: None,
        }
    }
}

impl Config {
    /// `explicit` wins over the environment variable; with neither the
    /// built-in defaults apply.
    pub fn load(explicit: Option<&Path>) -> Result<Config, CliError> {
        let path = match explicit {
            Some(p) => p.to_path_buf(),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => PathBuf::from(p),
                _ => return Ok(Config::default()),
            },
        };
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::Config {
            path: path.clone(),
            message: e.to_string(),
        })?;
        toml::from_str(&text).map_err(|e| CliError::Config {
            path,
            message: e.to_string(),
        })
    }
}

/// Resolves a window from config defaults and optional flag overrides.
pub fn window_config(
    settings: &FeatureSettings,
    chunk: Option<u32>,
    window: Option<&str>,
    exclusive: bool,
) -> Result<WindowConfig, CliError> {
    let text = window.unwrap_or(&settings.window);
    let secs = parse_duration_secs(text).ok_or_else(|| CliError::Usage(format!("invalid window duration {text:?}")))?;
    let cfg = WindowConfig::new(chunk.unwrap_or(settings.chunk_seconds), secs)
        .map_err(|e| CliError::Usage(e.to_string()))?
        .with_form(settings.form);
    Ok(if exclusive || settings.exclusive { cfg.exclusive() } else { cfg })
}
