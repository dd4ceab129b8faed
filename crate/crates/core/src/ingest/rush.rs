//! Rush-order inference.
//!
//! Exchanges report fills, not orders. A market order that sweeps several
//! asks shows up as several fills stamped with the same millisecond, so fills
//! sharing `(timestamp, side)` are merged back into one order. Single fills are
//! indistinguishable from limit-order fills and are dropped.

use crate::decimal::Decimal;
use crate::trade::{Millis, RushOrder, Side, TradeRecord};

#[derive(Debug, Clone, Copy, Default)]
struct SideGroup {
    quantity: i128,
    notional: Option<i128>,
    notional_f64: f64,
    count: u32,
}

impl SideGroup {
    fn add(&mut self, t: &TradeRecord) {
        let (p, q) = (t.price.raw(), t.quantity.raw());
        self.quantity += q;
        self.notional = match (self.count, self.notional) {
            (0, _) => p.checked_mul(q),
            (_, Some(n)) => p.checked_mul(q).and_then(|pq| n.checked_add(pq)),
            (_, None) => None,
        };
        self.notional_f64 += t.price.to_f64() * t.quantity.to_f64();
        self.count += 1;
    }

    fn finish(&self, timestamp: Millis, side: Side) -> Option<RushOrder> {
        if self.count < 2 {
            return None;
        }
        let vwap = match self.notional {
            Some(n) => n as f64 / self.quantity as f64 / crate::decimal::SCALE as f64,
            None => self.notional_f64 / Decimal::from_raw(self.quantity).to_f64(),
        };
        Some(RushOrder {
            timestamp,
            side,
            total_quantity: Decimal::from_raw(self.quantity),
            trade_count: self.count,
            vwap,
        })
    }
}

/// Incremental rush-order builder. Feed trades in timestamp order; orders for
/// a millisecond are released once a later millisecond arrives or on
/// [`flush`](Self::flush).
#[derive(Debug, Clone, Default)]
pub struct RushOrderAggregator {
    timestamp: Option<Millis>,
    buy: SideGroup,
    sell: SideGroup,
    first_side: Option<Side>,
}

impl RushOrderAggregator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one trade, appending any completed rush orders to `out`.
    pub fn push(&mut self, trade: &TradeRecord, out: &mut Vec<RushOrder>) {
        if self.timestamp != Some(trade.timestamp) {
            self.flush(out);
            self.timestamp = Some(trade.timestamp);
        }
        if self.first_side.is_none() {
            self.first_side = Some(trade.side);
        }
        match trade.side {
            Side::Buy => self.buy.add(trade),
            Side::Sell => self.sell.add(trade),
        }
    }

    /// Releases the pending millisecond, if any.
    pub fn flush(&mut self, out: &mut Vec<RushOrder>) {
        let Some(ts) = self.timestamp.take() else {
            return;
        };
        let order = match self.first_side {
            Some(Side::Sell) => [Side::Sell, Side::Buy],
            _ => [Side::Buy, Side::Sell],
        };
        for side in order {
            let group = match side {
                Side::Buy => &self.buy,
                Side::Sell => &self.sell,
            };
            out.extend(group.finish(ts, side));
        }
        self.buy = SideGroup::default();
        self.sell = SideGroup::default();
        self.first_side = None;
    }

    /// The millisecond currently being accumulated.
    pub fn pending_timestamp(&self) -> Option<Millis> {
        self.timestamp
    }
}

/// Groups fills by `(timestamp, side)` and keeps groups of two or more.
/// Within one millisecond the side seen first is emitted first.
pub fn infer_rush_orders(trades: &[TradeRecord]) -> Vec<RushOrder> {
    let mut agg = RushOrderAggregator::new();
    let mut out = Vec::new();
    for t in trades {
        agg.push(t, &mut out);
    }
    agg.flush(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trade::Pair;

    fn trade(t: Millis, side: Side, q: i64, p: i64) -> TradeRecord {
        TradeRecord::new(&Pair::new("X"), t, Decimal::from_int(p), Decimal::from_int(q), side)
    }

    #[test]
    fn same_millisecond_fills_merge() {
        let orders = infer_rush_orders(&[trade(100, Side::Buy, 1, 10), trade(100, Side::Buy, 2, 11)]);
        assert_eq!(orders.len(), 1);
        let o = &orders[0];
        assert_eq!((o.timestamp, o.side, o.trade_count), (100, Side::Buy, 2));
        assert_eq!(o.total_quantity, Decimal::from_int(3));
        assert!((o.vwap - 32.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn different_milliseconds_never_merge() {
        assert!(infer_rush_orders(&[trade(100, Side::Buy, 1, 10), trade(101, Side::Buy, 1, 10)]).is_empty());
    }

    #[test]
    fn sides_are_kept_apart() {
        let orders = infer_rush_orders(&[
            trade(100, Side::Sell, 1, 10),
            trade(100, Side::Buy, 1, 10),
            trade(100, Side::Sell, 1, 9),
            trade(100, Side::Buy, 4, 11),
        ]);
        assert_eq!(orders.len(), 2);
        assert_eq!(orders[0].side, Side::Sell);
        assert_eq!(orders[1].side, Side::Buy);
        assert_eq!(orders[1].total_quantity, Decimal::from_int(5));
    }

    #[test]
    fn streaming_release() {
        let mut agg = RushOrderAggregator::new();
        let mut out = Vec::new();
        agg.push(&trade(5, Side::Buy, 1, 1), &mut out);
        agg.push(&trade(5, Side::Buy, 1, 1), &mut out);
        assert!(out.is_empty());
        agg.push(&trade(6, Side::Buy, 1, 1), &mut out);
        assert_eq!(out.len(), 1);
        agg.flush(&mut out);
        assert_eq!(out.len(), 1);
    }
}
