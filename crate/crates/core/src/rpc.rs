//! JSON-RPC 2.0 client for `eth_getCode`, with a disk cache keyed by
//! (address, block tag), client-side rate limiting and exponential
//! backoff on transport failures.

use std::path::PathBuf;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Deserialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::disasm::decode_hex;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RpcConfig {
    pub endpoint: String,
    pub cache_dir: Option<PathBuf>,
    /// Requests per second ceiling.
    pub rate_limit: f64,
    pub max_attempts: u32,
    pub initial_backoff: Duration,
    pub timeout: Duration,
}

impl RpcConfig {
    pub fn new(endpoint: impl Into<String>) -> RpcConfig {
        RpcConfig {
            endpoint: endpoint.into(),
            cache_dir: None,
            rate_limit: 5.0,
            max_attempts: 5,
            initial_backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(30),
        }
    }

    pub fn with_cache_dir(mut self, dir: impl Into<PathBuf>) -> RpcConfig {
        self.cache_dir = Some(dir.into());
        self
    }

    pub fn with_rate_limit(mut self, per_second: f64) -> RpcConfig {
        self.rate_limit = per_second;
        self
    }
}

pub struct RpcClient {
    config: RpcConfig,
    agent: ureq::Agent,
    last_request: Mutex<Option<Instant>>,
}

#[derive(Deserialize)]
struct RpcResponse {
    result: Option<String>,
    error: Option<RpcErrorObject>,
}

#[derive(Deserialize)]
struct RpcErrorObject {
    code: i64,
    message: String,
}

impl RpcClient {
    pub fn new(config: RpcConfig) -> RpcClient {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .build()
            .into();
        RpcClient {
            config,
            agent,
            last_request: Mutex::new(None),
        }
    }

    /// Deployed bytecode of `address` at `block_tag` via `eth_getCode`.
    ///
    /// Returns decoded bytes; an externally owned account yields an
    /// empty vector (the RPC result "0x"). Responses are cached on disk
    /// when a cache directory is configured; a cache hit performs no
    /// network request.
    pub fn fetch_bytecode(&self, address: &str, block_tag: &str) -> Result<Vec<u8>> {
        validate_address(address)?;
        let cache_path = self.cache_path(address, block_tag);
        if let Some(path) = &cache_path {
            if let Ok(cached) = std::fs::read_to_string(path) {
                return decode_hex(cached.trim());
            }
        }

        let hex_result = self.call_with_retries(address, block_tag)?;
        if let Some(path) = &cache_path {
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir)?;
            }
            // write-then-rename keeps concurrent readers off partial files
            let tmp = path.with_extension(format!("tmp{}", std::process::id()));
            std::fs::write(&tmp, &hex_result)?;
            std::fs::rename(&tmp, path)?;
        }
        decode_hex(&hex_result)
    }

    fn call_with_retries(&self, address: &str, block_tag: &str) -> Result<String> {
        let mut backoff = self.config.initial_backoff;
        let mut last_err = None;
        for attempt in 0..self.config.max_attempts.max(1) {
            if attempt > 0 {
                std::thread::sleep(backoff);
                backoff *= 2;
            }
            self.throttle();
            match self.call_once(address, block_tag) {
                Ok(result) => return Ok(result),
                // remote JSON-RPC errors are authoritative, not retried
                Err(e @ Error::RpcRemote { .. }) => return Err(e),
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.unwrap_or_else(|| Error::RpcTransport("no attempts made".into())))
    }

    fn call_once(&self, address: &str, block_tag: &str) -> Result<String> {
        let body = json!({
            "jsonrpc": "2.0",
            "id": 1,
            "method": "eth_getCode",
            "params": [address, block_tag],
        });
        let mut response = self
            .agent
            .post(&self.config.endpoint)
            .send_json(&body)
            .map_err(|e| Error::RpcTransport(e.to_string()))?;
        let parsed: RpcResponse = response
            .body_mut()
            .read_json()
            .map_err(|e| Error::RpcTransport(format!("bad response body: {e}")))?;
        if let Some(err) = parsed.error {
            return Err(Error::RpcRemote {
                code: err.code,
                message: err.message,
            });
        }
        parsed
            .result
            .ok_or_else(|| Error::RpcTransport("response has neither result nor error".into()))
    }

    fn throttle(&self) {
        if self.config.rate_limit <= 0.0 {
            return;
        }
        let min_interval = Duration::from_secs_f64(1.0 / self.config.rate_limit);
        let mut last = self.last_request.lock().unwrap();
        if let Some(prev) = *last {
            let elapsed = prev.elapsed();
            if elapsed < min_interval {
                std::thread::sleep(min_interval - elapsed);
            }
        }
        *last = Some(Instant::now());
    }

    fn cache_path(&self, address: &str, block_tag: &str) -> Option<PathBuf> {
        let dir = self.config.cache_dir.as_ref()?;
        let key = Sha256::digest(format!("{}:{}", address.to_lowercase(), block_tag));
        Some(dir.join(format!("{}.hex", hex::encode(key))))
    }
}

fn validate_address(address: &str) -> Result<()> {
    let stripped = address
        .strip_prefix("0x")
        .ok_or_else(|| Error::Validation(format!("address {address:?} lacks 0x prefix")))?;
    if stripped.len() != 40 || !stripped.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(Error::Validation(format!(
            "address {address:?} is not 20 bytes of hex"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn address_validation() {
        assert!(validate_address("0x0000000000000000000000000000000000000000").is_ok());
        assert!(validate_address("0x1234").is_err());
        assert!(validate_address("no-prefix").is_err());
        assert!(validate_address("0xzz00000000000000000000000000000000000000").is_err());
    }

    #[test]
    fn cache_key_is_tag_sensitive() {
        let client = RpcClient::new(
            RpcConfig::new("http://localhost:1").with_cache_dir("/tmp/cache"),
        );
        let a = client.cache_path("0xAB", "latest");
        let b = client.cache_path("0xab", "latest");
        let c = client.cache_path("0xab", "0x1000");
        assert_eq!(a, b); // case-insensitive on address
        assert_ne!(b, c);
    }
}
