//! Shared inputs for the benchmarks.

use std::sync::Arc;

use pumpwatch::classifiers::{train_forest, Dataset, FeatureMask, ForestConfig, Model, ModelFile};
use pumpwatch::features::{extract_features, grid_floor, WindowConfig};
use pumpwatch::synth::{generate, SuiteConfig};
use pumpwatch::TradeRecord;

/// Trades of a few concatenated suite scenarios, in time order.
pub fn market(n_scenarios: u64) -> Vec<TradeRecord> {
    let suite = SuiteConfig::default();
    let mut trades = Vec::new();
    let mut offset = None;
    for i in 0..n_scenarios {
        let s = suite.standard(1, i);
        let out = generate(&s, i).expect("suite scenario is valid");
        let shift = offset.map_or(0, |o| o - s.start);
        trades.extend(out.trades.into_iter().map(|mut t| {
            t.timestamp += shift;
            t
        }));
        offset = Some(s.end() + shift);
    }
    trades
}

/// Feature rows and labels from suite scenarios for training benchmarks.
pub fn training_data(n_scenarios: u64, window: &WindowConfig) -> Dataset {
    let suite = SuiteConfig::default();
    let mask = FeatureMask::All;
    let mut data = Dataset::new(mask.names());
    for i in 0..n_scenarios {
        let s = suite.standard(2, i);
        let out = generate(&s, i).expect("suite scenario is valid");
        let signal = out.events[0].signal_timestamp;
        let rows = extract_features(&out.trades, window, grid_floor(s.start, window.chunk_ms()), Some(s.end()))
            .expect("aligned origin");
        for r in rows.iter().filter(|r| !r.warm_up) {
            data.push(&mask.select(&r.features), r.chunk.contains(signal)).expect("row width matches");
        }
    }
    data
}

pub fn model(data: &Dataset, n_trees: usize, window: WindowConfig) -> Arc<ModelFile> {
    let cfg = ForestConfig {
        n_trees,
        ..Default::default()
    };
    let forest = train_forest(data, &cfg, 0).expect("non-empty training set");
    Arc::new(ModelFile::new(Model::RandomForest(forest), FeatureMask::All, Some(window)).expect("mask matches"))
}
