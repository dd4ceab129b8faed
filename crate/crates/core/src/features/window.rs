use serde::{Deserialize, Serialize};

use crate::features::FeatureError;

/// Chunk size and moving-window length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub chunk_seconds: u32,
    pub window_seconds: u32,
    /// Whether the window for chunk `i` ends at `i` (inclusive) or `i - 1`.
    #[serde(default = "default_include_current")]
    pub include_current: bool,
    #[serde(default)]
    pub form: FeatureForm,
}

/// How each moving statistic is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureForm {
    /// The statistic itself.
    Level,
    /// Relative change of the statistic from the previous chunk,
    /// `S_i / S_{i-1} - 1`.
    #[default]
    Change,
}

fn default_include_current() -> bool {
    true
}

impl WindowConfig {
    pub fn new(chunk_seconds: u32, window_seconds: u32) -> Result<Self, FeatureError> {
        let cfg = WindowConfig {
            chunk_seconds,
            window_seconds,
            include_current: true,
            form: FeatureForm::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// 25 s chunks over a 7 h window.
    pub fn best_f1() -> Self {
        WindowConfig::new(25, 7 * 3600).expect("valid")
    }

    /// 5 s chunks over a 35 min window.
    pub fn best_speed() -> Self {
        WindowConfig::new(5, 35 * 60).expect("valid")
    }

    pub fn exclusive(mut self) -> Self {
        self.include_current = false;
        self
    }

    pub fn with_form(mut self, form: FeatureForm) -> Self {
        self.form = form;
        self
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        if self.chunk_seconds == 0 || self.window_seconds == 0 {
            return Err(FeatureError::InvalidWindow(format!(
                "chunk ({}s) and window ({}s) must be positive",
                self.chunk_seconds, self.window_seconds
            )));
        }
        if self.window_chunks() < 2 {
            return Err(FeatureError::InvalidWindow(format!(
                "window of {}s holds fewer than 2 chunks of {}s",
                self.window_seconds, self.chunk_seconds
            )));
        }
        Ok(())
    }

    pub fn window_chunks(&self) -> usize {
        (self.window_seconds / self.chunk_seconds.max(1)) as usize
    }

    pub fn window_hours(&self) -> f64 {
        self.window_seconds as f64 / 3600.0
    }

    pub fn chunk_ms(&self) -> i64 {
        self.chunk_seconds as i64 * 1000
    }

    /// Same window length in time, different chunk size.
    pub fn with_chunk_seconds(&self, chunk_seconds: u32) -> Result<Self, FeatureError> {
        let cfg = WindowConfig {
            chunk_seconds,
            ..*self
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig::best_f1()
    }
}

/// Parses a duration such as `7h`, `35m`, `35min`, `420s`, `1d`, or a bare
/// number of seconds, into whole seconds.
pub fn parse_duration_secs(text: &str) -> Option<u32> {
    let text = text.trim();
    let split = text.find(|c: char| !(c.is_ascii_digit() || c == '.')).unwrap_or(text.len());
    let (num, unit) = text.split_at(split);
    let value: f64 = num.parse().ok()?;
    let factor = match unit.trim() {
        "" | "s" | "sec" | "secs" => 1.0,
        "m" | "min" | "mins" => 60.0,
        "h" | "hr" | "hours" => 3600.0,
        "d" | "days" => 86_400.0,
        _ => return None,
    };
    let secs = (value * factor).round();
    if !(0.0..=u32::MAX as f64).contains(&secs) || (value * factor - secs).abs() > 1e-6 {
        return None;
    }
    Some(secs as u32)
}
