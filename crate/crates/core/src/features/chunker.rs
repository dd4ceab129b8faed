use crate::decimal::Decimal;
use crate::features::{FeatureError, WindowConfig};
use crate::trade::{utc_hour_minute, Chunk, Millis, Ohlc, RushOrder, Side, TradeRecord};

/// Streaming bucketer producing the gap-free chunk tiling of a trade stream.
#[derive(Debug, Clone)]
pub struct Chunker {
    duration_secs: u32,
    duration_ms: i64,
    current: Chunk,
    last_close: Option<Decimal>,
    last_hour_minute: Option<(u8, u8)>,
}

impl Chunker {
    /// `origin` must sit on the chunk grid (`origin % (s * 1000) == 0`).
    pub fn new(cfg: &WindowConfig, origin: Millis) -> Result<Self, FeatureError> {
        let duration_ms = cfg.chunk_ms();
        if duration_ms <= 0 {
            return Err(FeatureError::InvalidWindow("chunk size must be positive".into()));
        }
        if origin.rem_euclid(duration_ms) != 0 {
            return Err(FeatureError::MisalignedOrigin { origin, chunk_ms: duration_ms });
        }
        let mut chunker = Chunker {
            duration_secs: cfg.chunk_seconds,
            duration_ms,
            current: empty_chunk(origin, cfg.chunk_seconds),
            last_close: None,
            last_hour_minute: None,
        };
        chunker.reset_current(origin);
        Ok(chunker)
    }

    pub fn current_start(&self) -> Millis {
        self.current.start
    }

    fn reset_current(&mut self, start: Millis) {
        let mut c = empty_chunk(start, self.duration_secs);
        c.ohlc = self.last_close.map(Ohlc::flat);
        let (h, m) = self.last_hour_minute.unwrap_or_else(|| utc_hour_minute(start));
        c.hour = h;
        c.minute = m;
        self.current = c;
    }

    fn close_current(&mut self, out: &mut Vec<Chunk>) {
        let next = self.current.start + self.duration_ms;
        if let Some(ohlc) = self.current.ohlc {
            self.last_close = Some(ohlc.close);
        }
        let done = std::mem::replace(&mut self.current, empty_chunk(next, self.duration_secs));
        out.push(done);
        self.reset_current(next);
    }

    /// Emits every chunk whose interval ends at or before `t`.
    pub fn advance_to(&mut self, t: Millis, out: &mut Vec<Chunk>) {
        while t >= self.current.start + self.duration_ms {
            self.close_current(out);
        }
    }

    pub fn add_trade(&mut self, trade: &TradeRecord, out: &mut Vec<Chunk>) -> Result<(), FeatureError> {
        if trade.timestamp < self.current.start {
            return Err(FeatureError::OutOfOrder {
                timestamp: trade.timestamp,
                chunk_start: self.current.start,
            });
        }
        self.advance_to(trade.timestamp, out);
        let c = &mut self.current;
        if c.n_trades == 0 {
            let (h, m) = utc_hour_minute(trade.timestamp);
            c.hour = h;
            c.minute = m;
            self.last_hour_minute = Some((h, m));
            c.ohlc = Some(Ohlc::flat(trade.price));
        } else if let Some(ohlc) = c.ohlc.as_mut() {
            ohlc.high = ohlc.high.max(trade.price);
            ohlc.low = ohlc.low.min(trade.price);
            ohlc.close = trade.price;
        }
        c.n_trades += 1;
        match trade.side {
            Side::Buy => c.buy_volume += trade.quantity,
            Side::Sell => c.sell_volume += trade.quantity,
        }
        Ok(())
    }

    /// Buy-side rush orders add to the chunk holding their timestamp; sell-side
    /// orders are ignored.
    pub fn add_rush_order(&mut self, order: &RushOrder, out: &mut Vec<Chunk>) -> Result<(), FeatureError> {
        if order.timestamp < self.current.start {
            return Err(FeatureError::OutOfOrder {
                timestamp: order.timestamp,
                chunk_start: self.current.start,
            });
        }
        if order.side != Side::Buy {
            return Ok(());
        }
        self.advance_to(order.timestamp, out);
        self.current.rush_order_volume += order.total_quantity;
        self.current.n_rush_orders += 1;
        Ok(())
    }

    /// Closes the open chunk, then keeps emitting until the tiling reaches
    /// `end` (exclusive).
    pub fn finish(mut self, end: Option<Millis>, out: &mut Vec<Chunk>) {
        self.close_current(out);
        if let Some(end) = end {
            while self.current.start < end {
                self.close_current(out);
            }
        }
    }
}

fn empty_chunk(start: Millis, duration_secs: u32) -> Chunk {
    Chunk {
        start,
        duration_secs,
        n_trades: 0,
        buy_volume: Decimal::ZERO,
        sell_volume: Decimal::ZERO,
        rush_order_volume: Decimal::ZERO,
        n_rush_orders: 0,
        ohlc: None,
        hour: 0,
        minute: 0,
    }
}

/// Tiles `[origin, end)` (extended to cover the last trade) with chunks and
/// fills in raw per-chunk aggregates. Both inputs must be time-ordered.
pub fn chunk_stream(
    trades: &[TradeRecord],
    rush: &[RushOrder],
    cfg: &WindowConfig,
    origin: Millis,
    end: Option<Millis>,
) -> Result<Vec<Chunk>, FeatureError> {
    let mut chunker = Chunker::new(cfg, origin)?;
    let mut out = Vec::new();
    let mut rush_iter = rush.iter().peekable();
    for t in trades {
        while let Some(r) = rush_iter.next_if(|r| r.timestamp <= t.timestamp) {
            chunker.add_rush_order(r, &mut out)?;
        }
        chunker.add_trade(t, &mut out)?;
    }
    for r in rush_iter {
        chunker.add_rush_order(r, &mut out)?;
    }
    if trades.is_empty() && rush.is_empty() && end.is_none_or(|e| e <= origin) {
        return Ok(out);
    }
    chunker.finish(end, &mut out);
    Ok(out)
}
