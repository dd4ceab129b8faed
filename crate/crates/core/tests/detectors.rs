mod common;

use std::sync::Arc;

use common::*;
use proptest::prelude::*;
use pumpwatch::classifiers::FeatureMask;
use pumpwatch::detectors::*;
use pumpwatch::features::{extract_features, grid_floor, WindowConfig};
use pumpwatch::synth::{generate, SuiteConfig};
use pumpwatch::{AlertEvent, Pair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn stream_in_batches(
    trades: &[pumpwatch::TradeRecord],
    window: WindowConfig,
    origin: i64,
    state: DetectorState,
    rng: &mut ChaCha8Rng,
    end: i64,
) -> Vec<AlertEvent> {
    let mut det = StreamingDetector::new(window, Some(origin), state).unwrap();
    let mut out = Vec::new();
    let mut i = 0;
    while i < trades.len() {
        let k = rng.random_range(1..=500).min(trades.len() - i);
        det.push_batch(&trades[i..i + k], &mut out).unwrap();
        i += k;
        if rng.random_bool(0.1) {
            det.advance_to(trades[i - 1].timestamp, &mut out).unwrap();
        }
    }
    det.finish(Some(end), &mut out).unwrap();
    out
}

#[test]
fn replay_is_independent_of_batch_sizes() {
    let suite = SuiteConfig::default();
    let s = suite.standard(31, 0);
    let out = generate(&s, 3).unwrap();
    let window = WindowConfig::best_f1();
    let origin = grid_floor(s.start, window.chunk_ms());
    let pair = Pair::new(&s.pair);
    let rows = extract_features(&out.trades, &window, origin, Some(s.end())).unwrap();
    let reference = detect_threshold(&pair, &rows, 5.0, 1800);
    assert!(!reference.is_empty());
    for seed in 0..4 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = DetectorState::new(pair.clone(), ChunkRule::RushThreshold(5.0), 1800);
        assert_eq!(stream_in_batches(&out.trades, window, origin, state, &mut rng, s.end()), reference);
    }
}

#[test]
fn alerts_respect_the_cooldown() {
    let pair = Pair::new("COOLBTC");
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let window = WindowConfig::new(5, 300).unwrap();
        let origin = 1_600_000_000_000;
        let trades = random_trades(&mut rng, &pair, origin, 5_000, 3_000);
        let rows = extract_features(&trades, &window, origin, None).unwrap();
        let cooldown = rng.random_range(0..900u32);
        let alerts = detect_threshold(&pair, &rows, 0.5, cooldown);
        for w in alerts.windows(2) {
            assert!(w[1].chunk_start - w[0].chunk_start >= cooldown as i64 * 1000);
        }
        if cooldown == 0 {
            continue;
        }
        assert!(alerts.len() > 1, "the stream should trip a 0.5 threshold repeatedly");
    }
}

#[test]
fn threshold_alert_lands_on_the_injection() {
    let suite = SuiteConfig::default();
    for i in 0..10 {
        let s = suite.standard(41, i);
        let out = generate(&s, 10 + i).unwrap();
        let t0 = out.events[0].signal_timestamp;
        let window = WindowConfig::best_f1();
        let rows = extract_features(&out.trades, &window, grid_floor(s.start, 25_000), Some(s.end())).unwrap();
        let alerts = detect_threshold(&Pair::new(&s.pair), &rows, DEFAULT_RUSH_THRESHOLD, DEFAULT_COOLDOWN_SECS);
        assert_eq!(alerts.len(), 1, "scenario {i}: {alerts:?}");
        let lag = (alerts[0].chunk_start - grid_floor(t0, 25_000)) / 25_000;
        assert!((0..=2).contains(&lag), "scenario {i}: lag {lag}");
    }
}

#[test]
fn model_detector_alerts_within_two_chunks() {
    let model = suite_model(51, 40, 30, FeatureMask::All);
    let suite = SuiteConfig::default();
    for i in 100..110 {
        let s = suite.standard(51, i);
        let out = generate(&s, i).unwrap();
        let t0 = out.events[0].signal_timestamp;
        let rows = extract_features(&out.trades, &WindowConfig::best_f1(), grid_floor(s.start, 25_000), Some(s.end())).unwrap();
        let alerts = detect_stream(&Pair::new(&s.pair), &rows, model.clone(), 1800);
        assert_eq!(alerts.len(), 1, "scenario {i}: {alerts:?}");
        assert!((0..=2).contains(&((alerts[0].chunk_start - grid_floor(t0, 25_000)) / 25_000)));
    }
}

#[test]
fn standard_pump_survives_wide_chunks() {
    let model = suite_model(52, 40, 30, FeatureMask::NoTime);
    let suite = SuiteConfig::default();
    for i in 100..105 {
        let s = suite.standard(52, i);
        let out = generate(&s, i).unwrap();
        let t0 = out.events[0].signal_timestamp;
        let alerts = detect_crowd_pump(&Pair::new(&s.pair), &out.trades, model.clone(), CrowdConfig::default()).unwrap();
        assert_eq!(alerts.len(), 1, "scenario {i}: {alerts:?}");
        assert_eq!(alerts[0].chunk_start, grid_floor(t0, 600_000));
        assert_eq!(alerts[0].detector, pumpwatch::DetectorKind::CrowdPump);
    }
}

#[test]
fn crowd_inference_needs_the_training_window() {
    let mut m = (*suite_model(53, 6, 5, FeatureMask::NoTime)).clone();
    m.window = None;
    assert!(matches!(
        detect_crowd_pump(&Pair::new("X"), &[], Arc::new(m), CrowdConfig::default()),
        Err(DetectorError::MissingWindow)
    ));
}

fn candles() -> impl Strategy<Value = Vec<Candle>> {
    prop::collection::vec((0.0f64..100.0, prop::option::of(0.5f64..2.0), 0.0f64..0.5), 13..80).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (volume, close, wick))| Candle {
                start: i as i64 * 3_600_000,
                volume,
                high: close.map(|c| c * (1.0 + wick)),
                close,
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn stricter_presets_alert_on_subsets(c in candles()) {
        let pair = Pair::new("K");
        let starts = |p: KampsPreset| -> Vec<i64> {
            detect_kamps(&pair, &c, &KampsConfig::preset(p)).into_iter().map(|a| a.chunk_start).collect()
        };
        let (ini, bal, st) = (starts(KampsPreset::Initial), starts(KampsPreset::Balanced), starts(KampsPreset::Strict));
        prop_assert!(st.iter().all(|t| bal.contains(t)));
        prop_assert!(bal.iter().all(|t| ini.contains(t)));
    }

    #[test]
    fn flat_candles_never_alert(v in 0.1f64..100.0, p in 0.1f64..10.0, n in 13usize..100) {
        let c: Vec<Candle> = (0..n)
            .map(|i| Candle { start: i as i64 * 3_600_000, volume: v, high: Some(p), close: Some(p) })
            .collect();
        for preset in KampsPreset::ALL {
            prop_assert!(detect_kamps(&Pair::new("K"), &c, &KampsConfig::preset(preset)).is_empty());
        }
    }
}
