use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::evaluation::EvalError;
use crate::trade::{Millis, Pair};

/// A known pump signal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PumpEvent {
    pub pair: Pair,
    #[serde(rename = "signal_timestamp_ms")]
    pub signal_timestamp: Millis,
    pub exchange: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

impl PumpEvent {
    pub fn new(pair: &Pair, signal_timestamp: Millis, exchange: &str) -> Self {
        PumpEvent {
            pair: pair.clone(),
            signal_timestamp,
            exchange: exchange.to_string(),
            group: None,
        }
    }
}

/// Reads `pair,signal_timestamp_ms,exchange[,group]` rows; the header line
/// is required.
pub fn read_events_csv<R: Read>(input: R) -> Result<Vec<PumpEvent>, EvalError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(input);
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<PumpEvent>().enumerate() {
        let ev = row.map_err(|e| EvalError::Events {
            row: i + 2,
            reason: e.to_string(),
        })?;
        if ev.signal_timestamp <= 0 {
            return Err(EvalError::Events {
                row: i + 2,
                reason: format!("signal timestamp {} is not positive", ev.signal_timestamp),
            });
        }
        out.push(ev);
    }
    Ok(out)
}

pub fn write_events_csv<W: Write>(events: &[PumpEvent], out: W) -> Result<(), EvalError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["pair", "signal_timestamp_ms", "exchange", "group"])?;
    for e in events {
        let ts = e.signal_timestamp.to_string();
        w.write_record([e.pair.as_str(), &ts, &e.exchange, e.group.as_deref().unwrap_or("")])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trip() {
        let mut events = vec![
            PumpEvent::new(&Pair::new("VIBBTC"), 1_536_512_400_000, "binance"),
            PumpEvent::new(&Pair::new("OAXBTC"), 1_536_512_400_123, "binance"),
        ];
        events[1].group = Some("bps".into());
        let mut buf = Vec::new();
        write_events_csv(&events, &mut buf).unwrap();
        assert_eq!(read_events_csv(buf.as_slice()).unwrap(), events);
    }

    #[test]
    fn three_column_manifest() {
        let text = "pair,signal_timestamp_ms,exchange\nVIBBTC,1536512400000,binance\n";
        let ev = read_events_csv(text.as_bytes()).unwrap();
        assert_eq!(ev, vec![PumpEvent::new(&Pair::new("VIBBTC"), 1_536_512_400_000, "binance")]);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(read_events_csv("pair,signal_timestamp_ms,exchange\nX,abc,binance\n".as_bytes()).is_err());
        assert!(read_events_csv("pair,signal_timestamp_ms,exchange\nX,0,binance\n".as_bytes()).is_err());
    }
}
