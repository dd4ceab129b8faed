//! Hourly-candle baseline with moving-average volume and price thresholds.

use std::collections::VecDeque;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detectors::DetectorError;
use crate::trade::{AlertEvent, Chunk, DetectorKind, Millis, Pair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KampsPreset {
    Initial,
    Balanced,
    Strict,
}

impl KampsPreset {
    pub const ALL: [KampsPreset; 3] = [KampsPreset::Initial, KampsPreset::Balanced, KampsPreset::Strict];

    pub fn as_str(self) -> &'static str {
        match self {
            KampsPreset::Initial => "initial",
            KampsPreset::Balanced => "balanced",
            KampsPreset::Strict => "strict",
        }
    }
}

impl FromStr for KampsPreset {
    type Err = DetectorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "initial" => Ok(KampsPreset::Initial),
            "balanced" => Ok(KampsPreset::Balanced),
            "strict" => Ok(KampsPreset::Strict),
            other => Err(DetectorError::InvalidKamps(format!("unknown preset {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Multipliers {
    pub volume_multiplier: f64,
    pub price_multiplier: f64,
}

/// All three presets as stored in `baselines/kamps.toml`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KampsTable {
    pub candle_seconds: u32,
    pub window_candles: usize,
    pub initial: Multipliers,
    pub balanced: Multipliers,
    pub strict: Multipliers,
}

impl Default for KampsTable {
    fn default() -> Self {
        KampsTable {
            candle_seconds: 3600,
            window_candles: 12,
            initial: Multipliers {
                volume_multiplier: 3.0,
                price_multiplier: 1.05,
            },
            balanced: Multipliers {
                volume_multiplier: 4.0,
                price_multiplier: 1.10,
            },
            strict: Multipliers {
                volume_multiplier: 5.0,
                price_multiplier: 1.15,
            },
        }
    }
}

impl KampsTable {
    pub fn from_toml(text: &str) -> Result<Self, DetectorError> {
        let t: KampsTable = toml::from_str(text).map_err(|e| DetectorError::InvalidKamps(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), DetectorError> {
        let m = [self.initial, self.balanced, self.strict];
        if m.iter().any(|m| !(m.volume_multiplier > 1.0 && m.price_multiplier > 1.0)) {
            return Err(DetectorError::InvalidKamps("multipliers must exceed 1".into()));
        }
        let ordered = |a: Multipliers, b: Multipliers| {
            a.volume_multiplier <= b.volume_multiplier && a.price_multiplier <= b.price_multiplier
        };
        if !(ordered(m[0], m[1]) && ordered(m[1], m[2])) {
            return Err(DetectorError::InvalidKamps("presets must tighten from initial to strict".into()));
        }
        if self.window_candles == 0 || self.candle_seconds == 0 {
            return Err(DetectorError::InvalidKamps("window and candle size must be positive".into()));
        }
        Ok(())
    }

    pub fn config(&self, preset: KampsPreset) -> KampsConfig {
        let m = match preset {
            KampsPreset::Initial => self.initial,
            KampsPreset::Balanced => self.balanced,
            KampsPreset::Strict => self.strict,
        };
        KampsConfig {
            preset,
            candle_seconds: self.candle_seconds,
            window_candles: self.window_candles,
            volume_multiplier: m.volume_multiplier,
            price_multiplier: m.price_multiplier,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KampsConfig {
    pub preset: KampsPreset,
    pub candle_seconds: u32,
    pub window_candles: usize,
    pub volume_multiplier: f64,
    pub price_multiplier: f64,
}

impl KampsConfig {
    pub fn preset(preset: KampsPreset) -> Self {
        KampsTable::default().config(preset)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candle {
    pub start: Millis,
    pub volume: f64,
    /// `None` until the first trade of the series.
    pub high: Option<f64>,
    pub close: Option<f64>,
}

/// Reads chunks of candle size as candles.
pub fn candles_from_chunks(chunks: &[Chunk]) -> Vec<Candle> {
    chunks
        .iter()
        .map(|c| Candle {
            start: c.start,
            volume: c.volume().to_f64(),
            high: c.ohlc.map(|o| o.high.to_f64()),
            close: c.ohlc.map(|o| o.close.to_f64()),
        })
        .collect()
}

/// Alerts on every candle whose volume and high both exceed their
/// multiples of the trailing-window means. The first `window_candles`
/// candles only fill the window.
pub fn detect_kamps(pair: &Pair, candles: &[Candle], cfg: &KampsConfig) -> Vec<AlertEvent> {
    let w = cfg.window_candles;
    let mut vols: VecDeque<f64> = VecDeque::with_capacity(w);
    let mut closes: VecDeque<Option<f64>> = VecDeque::with_capacity(w);
    let mut out = Vec::new();
    for c in candles {
        if vols.len() == w {
            let mean_vol = vols.iter().sum::<f64>() / w as f64;
            let priced: Vec<f64> = closes.iter().flatten().copied().collect();
            if let (Some(high), false) = (c.high, priced.is_empty()) {
                let mean_close = priced.iter().sum::<f64>() / priced.len() as f64;
                if c.volume > cfg.volume_multiplier * mean_vol && high > cfg.price_multiplier * mean_close {
                    out.push(AlertEvent {
                        pair: pair.clone(),
                        chunk_start: c.start,
                        detector: DetectorKind::Kamps,
                        score: 1.0,
                    });
                }
            }
            vols.pop_front();
            closes.pop_front();
        }
        vols.push_back(c.volume);
        closes.push_back(c.close);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(n: usize) -> Vec<Candle> {
        (0..n)
            .map(|i| Candle {
                start: i as i64 * 3_600_000,
                volume: 10.0,
                high: Some(1.0),
                close: Some(1.0),
            })
            .collect()
    }

    #[test]
    fn flat_candles_never_alert() {
        for p in KampsPreset::ALL {
            assert!(detect_kamps(&Pair::new("X"), &flat(100), &KampsConfig::preset(p)).is_empty());
        }
    }

    #[test]
    fn spike_after_warm_up() {
        let mut c = flat(30);
        c[20].volume = 100.0;
        c[20].high = Some(1.3);
        let a = detect_kamps(&Pair::new("X"), &c, &KampsConfig::preset(KampsPreset::Strict));
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].chunk_start, 20 * 3_600_000);
        // same spike inside the warm-up is ignored
        let mut c = flat(30);
        c[5].volume = 100.0;
        c[5].high = Some(1.3);
        assert!(detect_kamps(&Pair::new("X"), &c, &KampsConfig::preset(KampsPreset::Initial)).is_empty());
    }

    #[test]
    fn moderate_spike_separates_presets() {
        let mut c = flat(30);
        c[20].volume = 35.0;
        c[20].high = Some(1.07);
        let n = |p| detect_kamps(&Pair::new("X"), &c, &KampsConfig::preset(p)).len();
        assert_eq!((n(KampsPreset::Initial), n(KampsPreset::Balanced), n(KampsPreset::Strict)), (1, 0, 0));
    }

    #[test]
    fn shipped_table_matches_defaults() {
        let text = include_str!("../../../../baselines/kamps.toml");
        assert_eq!(KampsTable::from_toml(text).unwrap(), KampsTable::default());
    }

    #[test]
    fn rejects_loosening_presets() {
        let mut t = KampsTable::default();
        t.strict.price_multiplier = 1.01;
        assert!(t.validate().is_err());
        t = KampsTable::default();
        t.initial.volume_multiplier = 1.0;
        assert!(t.validate().is_err());
    }
}
