//! One completion interface over a live chat-completions endpoint, a scripted
//! stub and a record/replay store.
//!
//! Every exchange is keyed by [`LlmRequest::key`], a sha256 over the model id,
//! the messages and the decoding parameters. Nothing else (prompt kind, chain
//! step, configuration layout) enters the key.

mod http;
mod limit;
mod store;
mod stub;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::prompts::{Decoding, Message, PromptBundle};

pub use http::{AuthStyle, HttpBackend, HttpConfig};
pub use limit::Throttle;
pub use store::{FixtureStore, StoreRecord};
pub use stub::{approx_tokens, StubBackend, StubRule};

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("no recorded fixture for request {key} (model {model})")]
    FixtureMissing { key: String, model: String },
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("quota exhausted: {0}")]
    Quota(String),
    #[error("prompt exceeds the model context: {0}")]
    ContextOverflow(String),
    #[error("transient failure: {0}")]
    Transient(String),
    #[error("gave up after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: String },
    #[error("endpoint returned {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed endpoint response: {0}")]
    Malformed(String),
    #[error("policy {0:?} needs a backend and none is configured")]
    NoBackend(Policy),
    #[error("policy {0:?} needs a fixture store and none is configured")]
    NoStore(Policy),
    #[error("fixture store: {0}")]
    Store(String),
    #[error("model `{0}` has no entry in the price table")]
    UnknownModel(String),
    #[error("price table: {0}")]
    Prices(String),
}

impl LlmError {
    pub fn category(&self) -> &'static str {
        match self {
            LlmError::FixtureMissing { .. } => "fixture_missing",
            LlmError::Auth(_) => "auth",
            LlmError::Quota(_) => "quota",
            LlmError::ContextOverflow(_) => "context_overflow",
            LlmError::Transient(_) | LlmError::RetriesExhausted { .. } => "transport",
            LlmError::Http { .. } | LlmError::Malformed(_) => "endpoint",
            LlmError::NoBackend(_) | LlmError::NoStore(_) => "config",
            LlmError::Store(_) => "store",
            LlmError::UnknownModel(_) | LlmError::Prices(_) => "prices",
        }
    }

    fn is_transient(&self) -> bool {
        matches!(self, LlmError::Transient(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    CacheFirst,
    LiveOnly,
    ReplayOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Live,
    Cache,
    Replay,
    Stub,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmRequest {
    pub model_id: String,
    pub bundle: PromptBundle,
}

#[derive(Serialize)]
struct KeyMaterial<'a> {
    model: &'a str,
    messages: &'a [Message],
    decoding: &'a Decoding,
}

impl LlmRequest {
    pub fn new(model_id: impl Into<String>, bundle: PromptBundle) -> Self {
        LlmRequest {
            model_id: model_id.into(),
            bundle,
        }
    }

    pub fn decoding(&self) -> &Decoding {
        &self.bundle.decoding
    }

    pub fn key(&self) -> String {
        let material = KeyMaterial {
            model: &self.model_id,
            messages: &self.bundle.messages,
            decoding: &self.bundle.decoding,
        };
        sha256_json(&material)
    }

    /// Digest of the whole request including prompt kind and step, kept next
    /// to the key in the store as a cross-check.
    pub fn digest(&self) -> String {
        sha256_json(self)
    }
}

pub(crate) fn sha256_json<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("request types always serialize");
    hex::encode(Sha256::digest(&bytes))
}

/// What a backend returns for one call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

pub trait Backend: Send + Sync {
    fn complete(&self, request: &LlmRequest) -> Result<Completion, LlmError>;

    /// Source tag for fresh results from this backend.
    fn source(&self) -> Source {
        Source::Live
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmExchange {
    pub request: LlmRequest,
    pub key: String,
    pub response_text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub latency_ms: u64,
    pub source: Source,
    /// Milliseconds since the Unix epoch at which the response was produced.
    pub timestamp: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 5,
            base_delay_ms: 500,
            max_delay_ms: 30_000,
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `attempt` (1-based): base * 2^(attempt-1), capped.
    pub fn delay(&self, attempt: u32) -> Duration {
        let factor = 1u64.checked_shl(attempt.saturating_sub(1)).unwrap_or(u64::MAX);
        Duration::from_millis(self.base_delay_ms.saturating_mul(factor).min(self.max_delay_ms))
    }
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallCounts {
    pub live_calls: u64,
    pub cache_hits: u64,
    pub replay_hits: u64,
    pub retries: u64,
}

#[derive(Default)]
struct Counters {
    live: AtomicU64,
    cache: AtomicU64,
    replay: AtomicU64,
    retries: AtomicU64,
}

/// Thread-safe entry point for all model calls.
pub struct LlmClient {
    backend: Option<Arc<dyn Backend>>,
    store: Option<Arc<FixtureStore>>,
    policy: Policy,
    retry: RetryPolicy,
    throttle: Throttle,
    counters: Counters,
}

impl LlmClient {
    pub fn new(policy: Policy) -> Self {
        LlmClient {
            backend: None,
            store: None,
            policy,
            retry: RetryPolicy::default(),
            throttle: Throttle::unlimited(),
            counters: Counters::default(),
        }
    }

    pub fn with_backend(mut self, backend: Arc<dyn Backend>) -> Self {
        self.backend = Some(backend);
        self
    }

    pub fn with_store(mut self, store: Arc<FixtureStore>) -> Self {
        self.store = Some(store);
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_throttle(mut self, throttle: Throttle) -> Self {
        self.throttle = throttle;
        self
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn store(&self) -> Option<&Arc<FixtureStore>> {
        self.store.as_ref()
    }

    pub fn counts(&self) -> CallCounts {
        CallCounts {
            live_calls: self.counters.live.load(Ordering::Relaxed),
            cache_hits: self.counters.cache.load(Ordering::Relaxed),
            replay_hits: self.counters.replay.load(Ordering::Relaxed),
            retries: self.counters.retries.load(Ordering::Relaxed),
        }
    }

    pub fn complete(&self, request: &LlmRequest) -> Result<LlmExchange, LlmError> {
        self.complete_with(request, self.policy)
    }

    pub fn complete_with(&self, request: &LlmRequest, policy: Policy) -> Result<LlmExchange, LlmError> {
        let key = request.key();
        match policy {
            Policy::ReplayOnly => {
                let store = self.store.as_ref().ok_or(LlmError::NoStore(policy))?;
                let rec = store.get(request, &key).ok_or_else(|| LlmError::FixtureMissing {
                    key: key.clone(),
                    model: request.model_id.clone(),
                })?;
                self.counters.replay.fetch_add(1, Ordering::Relaxed);
                Ok(from_record(request, key, rec, Source::Replay))
            }
            Policy::CacheFirst => {
                if let Some(rec) = self.store.as_ref().and_then(|s| s.get(request, &key)) {
                    self.counters.cache.fetch_add(1, Ordering::Relaxed);
                    return Ok(from_record(request, key, rec, Source::Cache));
                }
                self.fresh(request, key, policy)
            }
            Policy::LiveOnly => self.fresh(request, key, policy),
        }
    }

    fn fresh(&self, request: &LlmRequest, key: String, policy: Policy) -> Result<LlmExchange, LlmError> {
        let backend = self.backend.as_ref().ok_or(LlmError::NoBackend(policy))?;
        let started = Instant::now();
        let completion = self.call_with_retry(backend.as_ref(), request)?;
        let latency_ms = started.elapsed().as_millis() as u64;
        self.counters.live.fetch_add(1, Ordering::Relaxed);
        let source = backend.source();
        let timestamp = if source == Source::Stub { 0 } else { now_ms() };
        let latency_ms = if source == Source::Stub { 0 } else { latency_ms };
        let exchange = LlmExchange {
            request: request.clone(),
            key,
            response_text: completion.text,
            prompt_tokens: completion.prompt_tokens,
            completion_tokens: completion.completion_tokens,
            latency_ms,
            source,
            timestamp,
        };
        if let Some(store) = &self.store {
            store.insert(&exchange)?;
        }
        Ok(exchange)
    }

    fn call_with_retry(&self, backend: &dyn Backend, request: &LlmRequest) -> Result<Completion, LlmError> {
        let mut attempt = 0;
        loop {
            attempt += 1;
            let result = {
                let _permit = self.throttle.acquire();
                backend.complete(request)
            };
            match result {
                Err(e) if e.is_transient() => {
                    if attempt >= self.retry.max_attempts {
                        return Err(LlmError::RetriesExhausted {
                            attempts: attempt,
                            last: e.to_string(),
                        });
                    }
                    self.counters.retries.fetch_add(1, Ordering::Relaxed);
                    tracing::warn!(attempt, error = %e, "retrying model call");
                    std::thread::sleep(self.retry.delay(attempt));
                }
                other => return other,
            }
        }
    }
}

fn from_record(request: &LlmRequest, key: String, rec: StoreRecord, source: Source) -> LlmExchange {
    LlmExchange {
        request: request.clone(),
        key,
        response_text: rec.response_text,
        prompt_tokens: rec.prompt_tokens,
        completion_tokens: rec.completion_tokens,
        latency_ms: rec.latency_ms,
        source,
        timestamp: rec.timestamp,
    }
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Per-model rates in currency per 1000 tokens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Price {
    pub prompt_per_1k: f64,
    pub completion_per_1k: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PriceTable {
    #[serde(flatten)]
    pub models: std::collections::BTreeMap<String, Price>,
}

impl PriceTable {
    pub fn new(models: impl IntoIterator<Item = (String, Price)>) -> Result<Self, LlmError> {
        let t = PriceTable {
            models: models.into_iter().collect(),
        };
        t.validate()?;
        Ok(t)
    }

    /// Parses a TOML table of `[model] prompt_per_1k = .. completion_per_1k = ..`.
    pub fn from_toml(text: &str) -> Result<Self, LlmError> {
        let t: PriceTable = toml::from_str(text).map_err(|e| LlmError::Prices(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        for (m, p) in &self.models {
            let ok = |x: f64| x.is_finite() && x >= 0.0;
            if !ok(p.prompt_per_1k) || !ok(p.completion_per_1k) {
                return Err(LlmError::Prices(format!("negative or non-finite rate for `{m}`")));
            }
        }
        Ok(())
    }

    pub fn cost(&self, model: &str, prompt_tokens: u64, completion_tokens: u64) -> Result<f64, LlmError> {
        let p = self
            .models
            .get(model)
            .ok_or_else(|| LlmError::UnknownModel(model.to_string()))?;
        Ok(prompt_tokens as f64 / 1000.0 * p.prompt_per_1k
            + completion_tokens as f64 / 1000.0 * p.completion_per_1k)
    }
}

/// Total cost of `exchanges`, cached and replayed ones included: the figure is
/// what the calls cost when they were made.
pub fn estimate_cost(exchanges: &[LlmExchange], prices: &PriceTable) -> Result<f64, LlmError> {
    exchanges.iter().try_fold(0.0, |acc, e| {
        Ok(acc + prices.cost(&e.request.model_id, e.prompt_tokens, e.completion_tokens)?)
    })
}
