//! Historical trade download over an exchange REST API.
//!
//! The protocol follows Binance's public endpoints: a locate call finds the
//! first trade id at or after the window start (aggregate trades carry the
//! id of their first fill in field `f`), then trades are paged forward by id
//! cursor until the window end. Endpoint paths are templates so any exchange
//! exposing the same shape, or a local mock, can be targeted.

use std::io::Read;
use std::thread;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::decimal::Decimal;
use crate::ingest::parse::write_trades_csv;
use crate::trade::{Millis, Pair, Side, TradeRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExchangeConfig {
    pub base_url: String,
    /// Placeholders: `{pair}`, `{from_id}`, `{limit}`.
    pub trades_path: String,
    /// Placeholders: `{pair}`, `{start}`, `{end}`.
    pub locate_path: String,
    /// Field of a locate-response element holding the first trade id.
    pub locate_id_field: String,
    /// Longest span the locate endpoint accepts per call.
    pub locate_span_ms: i64,
    pub api_key_header: String,
    pub api_key: Option<String>,
    /// Environment variable to read the API key from when `api_key` is unset.
    pub api_key_env: Option<String>,
    pub page_size: u32,
    pub requests_per_minute: u32,
    pub max_retries: u32,
    pub backoff_base_ms: u64,
    pub backoff_cap_ms: u64,
    /// How many 429/418 responses in a row are tolerated before giving up.
    pub max_throttle_waits: u32,
    pub timeout_secs: u64,
}

impl Default for ExchangeConfig {
    fn default() -> Self {
        ExchangeConfig {
            base_url: "https://api.binance.com".into(),
            trades_path: "/api/v3/historicalTrades?symbol={pair}&fromId={from_id}&limit={limit}".into(),
            locate_path: "/api/v3/aggTrades?symbol={pair}&startTime={start}&endTime={end}&limit=1".into(),
            locate_id_field: "f".into(),
            locate_span_ms: 3_600_000,
            api_key_header: "X-MBX-APIKEY".into(),
            api_key: None,
            api_key_env: Some("BINANCE_API_KEY".into()),
            page_size: 1000,
            requests_per_minute: 1200,
            max_retries: 5,
            backoff_base_ms: 250,
            backoff_cap_ms: 30_000,
            max_throttle_waits: 20,
            timeout_secs: 30,
        }
    }
}

impl ExchangeConfig {
    /// Parses either a bare config or one nested under an `[exchange]` table.
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        #[derive(Deserialize)]
        struct Nested {
            exchange: ExchangeConfig,
        }
        match toml::from_str::<Nested>(text) {
            Ok(n) => Ok(n.exchange),
            Err(_) => toml::from_str(text),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    File,
    ExchangeApi,
}

/// Provenance of a fetched trade window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchManifest {
    pub pair: Pair,
    pub window_start: Millis,
    pub window_end: Millis,
    pub source: Source,
    /// SHA-256 of the trades rendered as header-less CSV.
    pub checksum: String,
}

impl FetchManifest {
    pub fn for_trades(pair: &Pair, window_start: Millis, window_end: Millis, source: Source, trades: &[TradeRecord]) -> Self {
        FetchManifest {
            pair: pair.clone(),
            window_start,
            window_end,
            source,
            checksum: payload_checksum(trades),
        }
    }
}

pub fn payload_checksum(trades: &[TradeRecord]) -> String {
    let mut buf = Vec::with_capacity(trades.len() * 40);
    write_trades_csv(trades, &mut buf, false).expect("writing to a Vec cannot fail");
    hex::encode(Sha256::digest(&buf))
}

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("window end {end} must be after start {start}")]
    InvalidWindow { start: Millis, end: Millis },
    #[error("network error after {attempts} attempts: {message}")]
    Network { attempts: u32, message: String },
    #[error("rate limited by the exchange; last retry-after {retry_after_secs}s")]
    RateLimited { retry_after_secs: u64 },
    #[error("pagination gap: expected trade id {expected}, got {found}")]
    GapDetected { expected: u64, found: u64 },
    #[error("unexpected response from {url}: {message}")]
    Protocol { url: String, message: String },
}

impl FetchError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, FetchError::Network { .. } | FetchError::RateLimited { .. })
    }
}

/// Delay before retry number `attempt` (0-based): `base * 2^attempt` capped
/// at `cap`, with the upper half jittered uniformly.
pub fn backoff_delay<R: Rng>(attempt: u32, base_ms: u64, cap_ms: u64, rng: &mut R) -> Duration {
    let exp = base_ms.saturating_mul(1u64 << attempt.min(32));
    let ceiling = exp.min(cap_ms);
    let half = ceiling / 2;
    Duration::from_millis(half + rng.random_range(0..=ceiling - half))
}

#[derive(Deserialize)]
struct ApiTrade {
    id: u64,
    price: Decimal,
    qty: Decimal,
    time: Millis,
    #[serde(rename = "isBuyerMaker")]
    is_buyer_maker: bool,
}

pub struct ExchangeClient {
    config: ExchangeConfig,
    agent: ureq::Agent,
    api_key: Option<String>,
    last_request: Option<Instant>,
}

impl ExchangeClient {
    pub fn new(config: ExchangeConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(config.timeout_secs.max(1))))
            .build()
            .into();
        let api_key = config
            .api_key
            .clone()
            .or_else(|| config.api_key_env.as_ref().and_then(|v| std::env::var(v).ok()));
        ExchangeClient {
            config,
            agent,
            api_key,
            last_request: None,
        }
    }

    pub fn config(&self) -> &ExchangeConfig {
        &self.config
    }

    fn pace(&mut self) {
        if self.config.requests_per_minute > 0 {
            let interval = Duration::from_secs_f64(60.0 / self.config.requests_per_minute as f64);
            if let Some(last) = self.last_request {
                let elapsed = last.elapsed();
                if elapsed < interval {
                    thread::sleep(interval - elapsed);
                }
            }
        }
        self.last_request = Some(Instant::now());
    }

    /// GET with retry: transport failures and 5xx back off exponentially,
    /// 429/418 wait for the server's `Retry-After`.
    fn get(&mut self, path: &str) -> Result<String, FetchError> {
        let url = format!("{}{}", self.config.base_url.trim_end_matches('/'), path);
        let mut rng = rand::rng();
        let mut failures = 0u32;
        let mut throttles = 0u32;
        loop {
            self.pace();
            let mut req = self.agent.get(&url);
            if let Some(key) = &self.api_key {
                req = req.header(self.config.api_key_header.as_str(), key.as_str());
            }
            let outcome = req.call();
            let retry_message = match outcome {
                Ok(mut resp) => {
                    let status = resp.status().as_u16();
                    if (200..300).contains(&status) {
                        let mut body = String::new();
                        resp.body_mut()
                            .as_reader()
                            .read_to_string(&mut body)
                            .map_err(|e| FetchError::Network {
                                attempts: failures + 1,
                                message: e.to_string(),
                            })?;
                        return Ok(body);
                    }
                    if status == 429 || status == 418 {
                        let wait = resp
                            .headers()
                            .get("retry-after")
                            .and_then(|v| v.to_str().ok())
                            .and_then(|v| v.trim().parse::<u64>().ok());
                        throttles += 1;
                        if throttles > self.config.max_throttle_waits {
                            return Err(FetchError::RateLimited {
                                retry_after_secs: wait.unwrap_or(0),
                            });
                        }
                        let delay = match wait {
                            Some(secs) => Duration::from_secs(secs),
                            None => backoff_delay(throttles - 1, self.config.backoff_base_ms, self.config.backoff_cap_ms, &mut rng),
                        };
                        thread::sleep(delay);
                        continue;
                    }
                    if status >= 500 {
                        format!("HTTP {status}")
                    } else {
                        let mut body = String::new();
                        let _ = resp.body_mut().as_reader().read_to_string(&mut body);
                        return Err(FetchError::Protocol {
                            url,
                            message: format!("HTTP {status}: {body}"),
                        });
                    }
                }
                Err(e) => e.to_string(),
            };
            failures += 1;
            if failures > self.config.max_retries {
                return Err(FetchError::Network {
                    attempts: failures,
                    message: retry_message,
                });
            }
            thread::sleep(backoff_delay(failures - 1, self.config.backoff_base_ms, self.config.backoff_cap_ms, &mut rng));
        }
    }

    fn locate_first_id(&mut self, pair: &Pair, start: Millis, end: Millis) -> Result<Option<u64>, FetchError> {
        let span = self.config.locate_span_ms.max(1);
        let mut from = start;
        while from < end {
            let to = (from + span).min(end);
            let path = self
                .config
                .locate_path
                .replace("{pair}", pair.as_str())
                .replace("{start}", &from.to_string())
                // the locate endpoint treats endTime as inclusive
                .replace("{end}", &(to - 1).to_string());
            let body = self.get(&path)?;
            let rows: Vec<serde_json::Value> = serde_json::from_str(&body).map_err(|e| FetchError::Protocol {
                url: path.clone(),
                message: e.to_string(),
            })?;
            if let Some(first) = rows.first() {
                let id = first
                    .get(&self.config.locate_id_field)
                    .and_then(|v| v.as_u64())
                    .ok_or_else(|| FetchError::Protocol {
                        url: path.clone(),
                        message: format!("missing numeric field {:?}", self.config.locate_id_field),
                    })?;
                return Ok(Some(id));
            }
            from = to;
        }
        Ok(None)
    }

    fn page(&mut self, pair: &Pair, from_id: u64) -> Result<Vec<ApiTrade>, FetchError> {
        let path = self
            .config
            .trades_path
            .replace("{pair}", pair.as_str())
            .replace("{from_id}", &from_id.to_string())
            .replace("{limit}", &self.config.page_size.to_string());
        let body = self.get(&path)?;
        serde_json::from_str(&body).map_err(|e| FetchError::Protocol {
            url: path,
            message: e.to_string(),
        })
    }
}

/// Downloads every trade of `pair` in `[start, end)`, in exchange order.
pub fn fetch_historical(
    pair: &Pair,
    start: Millis,
    end: Millis,
    client: &mut ExchangeClient,
) -> Result<(Vec<TradeRecord>, FetchManifest), FetchError> {
    if end <= start {
        return Err(FetchError::InvalidWindow { start, end });
    }
    let mut trades = Vec::new();
    if let Some(mut cursor) = client.locate_first_id(pair, start, end)? {
        let page_size = client.config.page_size as usize;
        'pages: loop {
            let page = client.page(pair, cursor)?;
            if page.is_empty() {
                break;
            }
            for t in &page {
                if t.id != cursor {
                    return Err(FetchError::GapDetected {
                        expected: cursor,
                        found: t.id,
                    });
                }
                cursor += 1;
                if t.time >= end {
                    break 'pages;
                }
                if t.time < start {
                    continue;
                }
                let side = if t.is_buyer_maker { Side::Sell } else { Side::Buy };
                trades.push(TradeRecord::new(pair, t.time, t.price, t.qty, side));
            }
            if page.len() < page_size {
                break;
            }
        }
    }
    let manifest = FetchManifest::for_trades(pair, start, end, Source::ExchangeApi, &trades);
    Ok((trades, manifest))
}
