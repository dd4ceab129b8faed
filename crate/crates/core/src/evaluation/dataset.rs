use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use crate::evaluation::{read_events_csv, EvalError, PumpEvent, SliceSpec, TradeSeries};
use crate::ingest::{parse_trades, TradeFormat};
use crate::trade::Pair;

/// Reads a dataset directory: `events.csv` plus one trade file per pair
/// under `trades/`.
pub fn load_dataset(dir: &Path) -> Result<(Vec<PumpEvent>, BTreeMap<Pair, TradeSeries>), EvalError> {
    let events = read_events_csv(BufReader::new(File::open(dir.join("events.csv"))?))?;
    let data = load_trade_files(&events, &dir.join("trades"))?;
    Ok((events, data))
}

/// Loads `<PAIR>.csv` or `<PAIR>.jsonl` from `dir` for every pair named by
/// `events`. Pairs without a trade file are left out of the map.
pub fn load_trade_files(events: &[PumpEvent], dir: &Path) -> Result<BTreeMap<Pair, TradeSeries>, EvalError> {
    let mut data = BTreeMap::new();
    for e in events {
        if data.contains_key(&e.pair) {
            continue;
        }
        for ext in ["csv", "jsonl"] {
            let path = dir.join(format!("{}.{ext}", e.pair));
            if path.exists() {
                let trades = parse_trades(BufReader::new(File::open(&path)?), TradeFormat::from_path(&path), &e.pair)?;
                data.insert(e.pair.clone(), TradeSeries::from_trades(trades));
                break;
            }
        }
    }
    Ok(data)
}

/// Splits events into those whose slice the data covers and the rest.
pub fn split_covered(
    events: &[PumpEvent],
    data: &BTreeMap<Pair, TradeSeries>,
    spec: SliceSpec,
) -> (Vec<PumpEvent>, Vec<PumpEvent>) {
    events.iter().cloned().partition(|e| {
        let (s, t) = spec.span(e.signal_timestamp);
        data.get(&e.pair).is_some_and(|d| d.coverage.0 <= s && t <= d.coverage.1)
    })
}
