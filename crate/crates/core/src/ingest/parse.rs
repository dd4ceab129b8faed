//! Trade file readers and writers.
//!
//! CSV rows are `timestamp_ms,price,quantity,side[,pair]` with an optional
//! header line. JSON-lines rows are objects with keys `t`, `p`, `q`, `s` and
//! an optional `pair`.

use std::io::{BufRead, BufReader, Read, Write};

use serde::Deserialize;

use crate::decimal::Decimal;
use crate::ingest::IngestError;
use crate::trade::{validate_stream, Millis, Pair, Side, TradeRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TradeFormat {
    Csv,
    JsonLines,
}

impl TradeFormat {
    /// Guesses the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => TradeFormat::JsonLines,
            _ => TradeFormat::Csv,
        }
    }
}

/// Reads a whole trade file. Any malformed row rejects the file. Rows
/// without a pair column are attributed to `default_pair`.
pub fn parse_trades<R: Read>(
    input: R,
    format: TradeFormat,
    default_pair: &Pair,
) -> Result<Vec<TradeRecord>, IngestError> {
    let trades = match format {
        TradeFormat::Csv => parse_csv(input, default_pair)?,
        TradeFormat::JsonLines => parse_json_lines(input, default_pair)?,
    };
    validate_stream(&trades)?;
    Ok(trades)
}

fn parse_csv<R: Read>(input: R, default_pair: &Pair) -> Result<Vec<TradeRecord>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut trades = Vec::new();
    let mut record = csv::ByteRecord::new();
    let mut current_pair = default_pair.clone();
    let mut first = true;
    loop {
        let more = reader.read_byte_record(&mut record).map_err(|e| {
            let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
            IngestError::Parse {
                row,
                reason: e.to_string(),
            }
        })?;
        if !more {
            break;
        }
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if first {
            first = false;
            if is_header(&record) {
                continue;
            }
        }
        if record.len() < 4 {
            return Err(IngestError::Parse {
                row,
                reason: format!("expected 4+ fields, found {}", record.len()),
            });
        }
        let field = |i: usize| std::str::from_utf8(&record[i]).unwrap_or("");
        let timestamp: Millis = field(0).parse().map_err(|_| IngestError::Parse {
            row,
            reason: format!("invalid timestamp {:?}", field(0)),
        })?;
        let price: Decimal = field(1).parse().map_err(|e| IngestError::Parse {
            row,
            reason: format!("invalid price: {e}"),
        })?;
        let quantity: Decimal = field(2).parse().map_err(|e| IngestError::Parse {
            row,
            reason: format!("invalid quantity: {e}"),
        })?;
        let side = Side::parse(field(3)).ok_or_else(|| IngestError::Parse {
            row,
            reason: format!("invalid side {:?}", field(3)),
        })?;
        if record.len() >= 5 && !record[4].is_empty() && &record[4] != current_pair.as_str().as_bytes() {
            current_pair = Pair::new(field(4));
        }
        trades.push(TradeRecord {
            timestamp,
            price,
            quantity,
            side,
            pair: current_pair.clone(),
        });
    }
    Ok(trades)
}

fn is_header(record: &csv::ByteRecord) -> bool {
    record
        .get(0)
        .map(|f| !f.is_empty() && !f.iter().all(|b| b.is_ascii_digit() || *b == b'-'))
        .unwrap_or(false)
}

#[derive(Deserialize)]
struct JsonTrade {
    t: Millis,
    p: Decimal,
    q: Decimal,
    s: String,
    #[serde(default)]
    pair: Option<Pair>,
}

fn parse_json_lines<R: Read>(input: R, default_pair: &Pair) -> Result<Vec<TradeRecord>, IngestError> {
    let mut trades = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let row = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: JsonTrade = serde_json::from_str(&line).map_err(|e| IngestError::Parse {
            row,
            reason: e.to_string(),
        })?;
        let side = Side::parse(&raw.s).ok_or_else(|| IngestError::Parse {
            row,
            reason: format!("invalid side {:?}", raw.s),
        })?;
        trades.push(TradeRecord {
            timestamp: raw.t,
            price: raw.p,
            quantity: raw.q,
            side,
            pair: raw.pair.unwrap_or_else(|| default_pair.clone()),
        });
    }
    Ok(trades)
}

pub const CSV_HEADER: &str = "timestamp_ms,price,quantity,side,pair";

/// Writes trades in the CSV dialect read by [`parse_trades`], including the
/// pair column so the file round-trips losslessly.
pub fn write_trades_csv<W: Write>(trades: &[TradeRecord], mut out: W, header: bool) -> std::io::Result<()> {
    if header {
        writeln!(out, "{CSV_HEADER}")?;
    }
    for t in trades {
        writeln!(
            out,
            "{},{},{},{},{}",
            t.timestamp,
            t.price,
            t.quantity,
            t.side.as_str(),
            t.pair
        )?;
    }
    Ok(())
}
