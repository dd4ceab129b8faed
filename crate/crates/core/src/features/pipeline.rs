use crate::features::{ChunkFeatures, Chunker, FeatureEngine, FeatureError, WindowConfig};
use crate::ingest::RushOrderAggregator;
use crate::trade::{Chunk, Millis, RushOrder, TradeRecord};

/// Trades in, featurized chunks out: rush-order inference, chunking and the
/// moving window chained into one single-pass stage.
#[derive(Debug, Clone)]
pub struct FeaturePipeline {
    rush: RushOrderAggregator,
    chunker: Chunker,
    engine: FeatureEngine,
    rush_buf: Vec<RushOrder>,
    chunk_buf: Vec<Chunk>,
}

impl FeaturePipeline {
    pub fn new(cfg: WindowConfig, origin: Millis) -> Result<Self, FeatureError> {
        cfg.validate()?;
        Ok(FeaturePipeline {
            rush: RushOrderAggregator::new(),
            chunker: Chunker::new(&cfg, origin)?,
            engine: FeatureEngine::new(cfg),
            rush_buf: Vec::new(),
            chunk_buf: Vec::new(),
        })
    }

    pub fn config(&self) -> &WindowConfig {
        self.engine.config()
    }

    fn drain(&mut self, out: &mut Vec<ChunkFeatures>) {
        for chunk in self.chunk_buf.drain(..) {
            out.push(self.engine.push(chunk));
        }
    }

    fn route_rush(&mut self) -> Result<(), FeatureError> {
        for order in self.rush_buf.drain(..) {
            self.chunker.add_rush_order(&order, &mut self.chunk_buf)?;
        }
        Ok(())
    }

    pub fn push(&mut self, trade: &TradeRecord, out: &mut Vec<ChunkFeatures>) -> Result<(), FeatureError> {
        if trade.timestamp < self.chunker.current_start() {
            return Err(FeatureError::OutOfOrder {
                timestamp: trade.timestamp,
                chunk_start: self.chunker.current_start(),
            });
        }
        self.rush.push(trade, &mut self.rush_buf);
        self.route_rush()?;
        self.chunker.add_trade(trade, &mut self.chunk_buf)?;
        self.drain(out);
        Ok(())
    }

    /// Clock tick: closes every chunk that ends at or before `now`.
    pub fn advance_to(&mut self, now: Millis, out: &mut Vec<ChunkFeatures>) -> Result<(), FeatureError> {
        if self.rush.pending_timestamp().is_some_and(|p| p < now) {
            self.rush.flush(&mut self.rush_buf);
            self.route_rush()?;
        }
        self.chunker.advance_to(now, &mut self.chunk_buf);
        self.drain(out);
        Ok(())
    }

    /// Flushes the tail, extending the tiling to `end` when given.
    pub fn finish(mut self, end: Option<Millis>, out: &mut Vec<ChunkFeatures>) -> Result<(), FeatureError> {
        self.rush.flush(&mut self.rush_buf);
        self.route_rush()?;
        let mut tail = std::mem::take(&mut self.chunk_buf);
        self.chunker.finish(end, &mut tail);
        for chunk in tail {
            out.push(self.engine.push(chunk));
        }
        Ok(())
    }
}

/// Featurizes a complete trade stream over `[origin, end)`.
pub fn extract_features(
    trades: &[TradeRecord],
    cfg: &WindowConfig,
    origin: Millis,
    end: Option<Millis>,
) -> Result<Vec<ChunkFeatures>, FeatureError> {
    let mut pipeline = FeaturePipeline::new(*cfg, origin)?;
    let mut out = Vec::new();
    if trades.is_empty() && end.is_none_or(|e| e <= origin) {
        return Ok(out);
    }
    for t in trades {
        pipeline.push(t, &mut out)?;
    }
    pipeline.finish(end, &mut out)?;
    Ok(out)
}

/// The chunk-grid point at or before `t`.
pub fn grid_floor(t: Millis, chunk_ms: i64) -> Millis {
    t - t.rem_euclid(chunk_ms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decimal::Decimal;
    use crate::features::{chunk_stream, compute_features};
    use crate::ingest::infer_rush_orders;
    use crate::trade::{Pair, Side};

    #[test]
    fn matches_batch_stages() {
        let pair = Pair::new("X");
        let trades: Vec<TradeRecord> = (0..500)
            .map(|i| {
                TradeRecord::new(
                    &pair,
                    1_000 + (i / 3) * 7_919,
                    Decimal::from_int(10 + i % 5),
                    Decimal::from_int(1 + i % 4),
                    if i % 7 < 4 { Side::Buy } else { Side::Sell },
                )
            })
            .collect();
        let cfg = WindowConfig::new(25, 250).unwrap();
        let streamed = extract_features(&trades, &cfg, 0, Some(2_000_000)).unwrap();
        let rush = infer_rush_orders(&trades);
        let chunks = chunk_stream(&trades, &rush, &cfg, 0, Some(2_000_000)).unwrap();
        assert_eq!(streamed, compute_features(&chunks, &cfg));
    }
}
