//! Synthetic trade streams with injected pumps and known ground truth.

mod generate;
mod scenario;
mod suite;

pub use generate::{generate, SynthOutput};
pub use scenario::{Baseline, Burst, CrowdWaves, PrePump, PumpMode, PumpScenario, PumpShape, PumpSpec};
pub use suite::{SuiteConfig, SUITE_EPOCH};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}
