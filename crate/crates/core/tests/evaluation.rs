mod common;

use std::collections::BTreeSet;

use common::*;
use pumpwatch::classifiers::{FeatureMask, ForestConfig, ThresholdPolicy};
use pumpwatch::evaluation::*;
use pumpwatch::features::WindowConfig;
use pumpwatch::synth::SuiteConfig;

fn suite_slices(n: u64) -> Vec<Slice> {
    let suite = SuiteConfig::default();
    let scenarios: Vec<_> = (0..n).map(|i| suite.standard(21, i)).collect();
    scenario_slices(&scenarios, 500, suite_slice_spec())
}

fn rule(threshold: f64) -> DetectorSpec {
    DetectorSpec::Threshold {
        threshold,
        cooldown_secs: 0,
    }
}

#[test]
fn always_alerting_detector_has_full_recall() {
    let slices = suite_slices(6);
    let opts = EvalOptions::default();
    let report = kfold_evaluate(&slices, &rule(f64::NEG_INFINITY), &opts).unwrap();
    let series = prepare(&slices, &opts.window).unwrap();
    let scored: usize = series.iter().map(|s| s.rows.iter().filter(|r| !r.warm_up).count()).sum();
    assert_eq!(report.recall(), 1.0);
    assert_eq!(report.total.confusion.tp, 6);
    assert!((report.precision() - 6.0 / scored as f64).abs() < 1e-15);
}

#[test]
fn silent_detector_scores_zero() {
    let report = kfold_evaluate(&suite_slices(4), &rule(f64::INFINITY), &EvalOptions::default()).unwrap();
    assert_eq!((report.precision(), report.recall(), report.f1()), (0.0, 0.0, 0.0));
    assert_eq!(report.total.confusion.fn_, 4);
}

#[test]
fn reported_f1_is_recomputable() {
    let report = kfold_evaluate(&suite_slices(8), &rule(12.8), &EvalOptions::default()).unwrap();
    for s in report.folds.iter().chain([&report.total]) {
        let c = s.confusion;
        let p = c.tp as f64 / (c.tp + c.fp).max(1) as f64;
        let r = c.tp as f64 / (c.tp + c.fn_).max(1) as f64;
        let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        assert!((s.f1 - f1).abs() < 1e-12);
    }
    let pooled: usize = report.folds.iter().map(|f| f.confusion.tp).sum();
    assert_eq!(pooled, report.total.confusion.tp);
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(json["averaging"], "micro");
    assert!(report.to_string().contains("all"));
}

#[test]
fn macro_averaging_is_the_mean_of_folds() {
    let opts = EvalOptions {
        averaging: Averaging::Macro,
        folds: 3,
        ..Default::default()
    };
    let report = kfold_evaluate(&suite_slices(6), &rule(20.0), &opts).unwrap();
    let mean = report.folds.iter().map(|f| f.recall).sum::<f64>() / 3.0;
    assert!((report.recall() - mean).abs() < 1e-15);
}

#[test]
fn folds_never_share_a_trading_day() {
    let slices = suite_slices(20);
    let days = |s: &Slice| -> BTreeSet<(String, i64)> {
        (s.start / 86_400_000..=(s.end - 1) / 86_400_000).map(|d| (s.pair.to_string(), d)).collect()
    };
    for seed in 0..5 {
        let assign = fold_assignment(slices.len(), 5, seed);
        for f in 0..5 {
            let test: BTreeSet<_> = slices.iter().zip(&assign).filter(|(_, &a)| a == f).flat_map(|(s, _)| days(s)).collect();
            let train: BTreeSet<_> = slices.iter().zip(&assign).filter(|(_, &a)| a != f).flat_map(|(s, _)| days(s)).collect();
            assert!(test.is_disjoint(&train));
        }
    }
}

#[test]
fn trained_detector_is_deterministic() {
    let slices = suite_slices(10);
    let spec = DetectorSpec::RandomForest {
        forest: ForestConfig {
            n_trees: 20,
            ..Default::default()
        },
        mask: FeatureMask::All,
        cooldown_secs: 1800,
    };
    let opts = EvalOptions {
        folds: 2,
        seed: 4,
        ..Default::default()
    };
    let a = kfold_evaluate(&slices, &spec, &opts).unwrap();
    let b = kfold_evaluate(&slices, &spec, &opts).unwrap();
    assert_eq!(a, b);
    assert!(a.recall() >= 0.9, "{a}");
    assert!(a.latencies.iter().all(|&l| l <= 2));
}

#[test]
fn too_few_events() {
    let slices = suite_slices(1);
    let spec = DetectorSpec::RandomForest {
        forest: ForestConfig::default(),
        mask: FeatureMask::All,
        cooldown_secs: 1800,
    };
    assert!(matches!(
        kfold_evaluate(&slices, &spec, &EvalOptions::default()),
        Err(EvalError::TooFewEvents { needed: 5, found: 1 })
    ));
    assert!(matches!(
        rush_threshold_study(&slices, ThresholdPolicy::MaxF1, 1800, &EvalOptions::default()),
        Err(EvalError::TooFewEvents { .. })
    ));
}

#[test]
fn separable_threshold_study_hits_the_corner() {
    let study = rush_threshold_study(&suite_slices(12), ThresholdPolicy::MaxF1, 1800, &EvalOptions::default()).unwrap();
    assert_eq!((study.selection.chosen.precision, study.selection.chosen.recall), (1.0, 1.0));
    assert_eq!((study.test.precision(), study.test.recall()), (1.0, 1.0));
    assert_eq!(study.train_events + study.test_events, 12);
    assert!((study.average_precision - 1.0).abs() < 1e-12);
}

#[test]
fn kamps_scores_on_hourly_candles() {
    use pumpwatch::detectors::{KampsConfig, KampsPreset};
    let spec = DetectorSpec::Kamps {
        kamps: KampsConfig::preset(KampsPreset::Initial),
    };
    let report = kfold_evaluate(&suite_slices(6), &spec, &EvalOptions::default()).unwrap();
    assert_eq!(report.chunk_seconds, 3600);
    assert_eq!(spec.chunking(&WindowConfig::best_f1()).unwrap().window_chunks(), 12);
}
