//! Fixed-point decimal used for exchange prices and quantities.
//!
//! Values are stored as a scaled `i128` with eight fractional digits, the
//! precision exchanges quote in. Sums of quantities are therefore exact.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Number of fractional digits carried by [`Decimal`].
pub const FRACTION_DIGITS: u32 = 8;
/// `10^FRACTION_DIGITS`.
pub const SCALE: i128 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecimalError {
    #[error("empty number")]
    Empty,
    #[error("invalid character in number {0:?}")]
    InvalidCharacter(String),
    #[error("{0:?} has more than 8 significant fractional digits")]
    TooPrecise(String),
    #[error("{0:?} is out of range")]
    Overflow(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Decimal(i128);

impl Decimal {
    pub const ZERO: Decimal = Decimal(0);
    pub const ONE: Decimal = Decimal(SCALE);

    pub const fn from_raw(raw: i128) -> Self {
        Decimal(raw)
    }

    /// The scaled integer representation (`value * 10^8`).
    pub const fn raw(self) -> i128 {
        self.0
    }

    pub fn from_int(v: i64) -> Self {
        Decimal(v as i128 * SCALE)
    }

    /// Rounds `v` to the nearest representable decimal. Returns `None` for
    /// non-finite input.
    pub fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        let scaled = (v * SCALE as f64).round();
        if scaled.abs() >= i128::MAX as f64 {
            return None;
        }
        Some(Decimal(scaled as i128))
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn checked_add(self, other: Decimal) -> Option<Decimal> {
        self.0.checked_add(other.0).map(Decimal)
    }
}

impl Add for Decimal {
    type Output = Decimal;
    fn add(self, rhs: Decimal) -> Decimal {
        Decimal(self.0 + rhs.0)
    }
}

impl AddAssign for Decimal {
    fn add_assign(&mut self, rhs: Decimal) {
        self.0 += rhs.0;
    }
}

impl Sub for Decimal {
    type Output = Decimal;
    fn sub(self, rhs: Decimal) -> Decimal {
        Decimal(self.0 - rhs.0)
    }
}

impl Sum for Decimal {
    fn sum<I: Iterator<Item = Decimal>>(iter: I) -> Decimal {
        iter.fold(Decimal::ZERO, |a, b| a + b)
    }
}

impl<'a> Sum<&'a Decimal> for Decimal {
    fn sum<I: Iterator<Item = &'a Decimal>>(iter: I) -> Decimal {
        iter.fold(Decimal::ZERO, |a, b| a + *b)
    }
}

impl FromStr for Decimal {
    type Err = DecimalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(DecimalError::Empty);
        }
        let (negative, body) = match s.as_bytes()[0] {
            b'-' => (true, &s[1..]),
            b'+' => (false, &s[1..]),
            _ => (false, s),
        };
        let (int_part, frac_part) = match body.find('.') {
            Some(pos) => (&body[..pos], &body[pos + 1..]),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(DecimalError::InvalidCharacter(s.to_string()));
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(DecimalError::InvalidCharacter(s.to_string()));
        }
        let frac_trimmed = frac_part.trim_end_matches('0');
        if frac_trimmed.len() > FRACTION_DIGITS as usize {
            return Err(DecimalError::TooPrecise(s.to_string()));
        }
        let overflow = || DecimalError::Overflow(s.to_string());
        let mut raw: i128 = 0;
        for b in int_part.bytes() {
            raw = raw
                .checked_mul(10)
                .and_then(|r| r.checked_add((b - b'0') as i128))
                .ok_or_else(overflow)?;
        }
        raw = raw.checked_mul(SCALE).ok_or_else(overflow)?;
        let mut frac: i128 = 0;
        for b in frac_trimmed.bytes() {
            frac = frac * 10 + (b - b'0') as i128;
        }
        frac *= 10i128.pow(FRACTION_DIGITS - frac_trimmed.len() as u32);
        raw = raw.checked_add(frac).ok_or_else(overflow)?;
        Ok(Decimal(if negative { -raw } else { raw }))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let int = abs / SCALE as u128;
        let frac = abs % SCALE as u128;
        if frac == 0 {
            return write!(f, "{sign}{int}");
        }
        let digits = format!("{frac:08}");
        write!(f, "{sign}{int}.{}", digits.trim_end_matches('0'))
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct Visitor;
        impl serde::de::Visitor<'_> for Visitor {
            type Value = Decimal;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a decimal number or numeric string")
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Decimal, E> {
                v.parse().map_err(E::custom)
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<Decimal, E> {
                Ok(Decimal::from_int(v))
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Decimal, E> {
                i64::try_from(v)
                    .map(Decimal::from_int)
                    .map_err(|_| E::custom("integer out of range"))
            }
            fn visit_f64<E: serde::de::Error>(self, v: f64) -> Result<Decimal, E> {
                // Go through the shortest round-trip text form so 0.1 stays 0.1.
                v.to_string().parse().map_err(E::custom)
            }
        }
        deserializer.deserialize_any(Visitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_exchange_style_numbers() {
        assert_eq!("0.00012".parse::<Decimal>().unwrap().raw(), 12_000);
        assert_eq!("350.0".parse::<Decimal>().unwrap(), Decimal::from_int(350));
        assert_eq!("-1.5".parse::<Decimal>().unwrap().raw(), -150_000_000);
        assert_eq!(".5".parse::<Decimal>().unwrap().raw(), 50_000_000);
        assert_eq!("1.2345678900".parse::<Decimal>().unwrap().raw(), 123_456_789);
    }

    #[test]
    fn rejects_malformed_numbers() {
        assert_eq!("".parse::<Decimal>(), Err(DecimalError::Empty));
        assert!(matches!("1,000".parse::<Decimal>(), Err(DecimalError::InvalidCharacter(_))));
        assert!(matches!("1e5".parse::<Decimal>(), Err(DecimalError::InvalidCharacter(_))));
        assert!(matches!(".".parse::<Decimal>(), Err(DecimalError::InvalidCharacter(_))));
        assert!(matches!("0.000000001".parse::<Decimal>(), Err(DecimalError::TooPrecise(_))));
    }

    #[test]
    fn display_is_minimal() {
        assert_eq!(Decimal::from_int(350).to_string(), "350");
        assert_eq!(Decimal::from_raw(12_000).to_string(), "0.00012");
        assert_eq!(Decimal::from_raw(-150_000_000).to_string(), "-1.5");
    }

    #[test]
    fn json_accepts_numbers_and_strings() {
        let d: Decimal = serde_json::from_str("\"0.1\"").unwrap();
        let e: Decimal = serde_json::from_str("0.1").unwrap();
        assert_eq!(d, e);
        assert_eq!(serde_json::to_string(&d).unwrap(), "\"0.1\"");
    }

    proptest! {
        #[test]
        fn text_round_trip(raw in any::<i64>()) {
            let d = Decimal::from_raw(raw as i128);
            prop_assert_eq!(d.to_string().parse::<Decimal>().unwrap(), d);
        }
    }
}
