use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Backend, Completion, LlmError, LlmRequest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuthStyle {
    /// `Authorization: Bearer <key>`
    #[default]
    Bearer,
    /// `api-key: <key>` as used by Azure deployments.
    ApiKey,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpConfig {
    /// Full chat-completions URL.
    pub endpoint: String,
    #[serde(default)]
    pub auth: AuthStyle,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_timeout() -> u64 {
    120
}

/// Chat-completions client. The credential never leaves memory: it is not
/// part of any request key, record or manifest.
pub struct HttpBackend {
    config: HttpConfig,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(config: HttpConfig, api_key: Option<String>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        HttpBackend {
            config,
            api_key,
            agent,
        }
    }
}

/// Request body sent for `request`.
pub fn wire_body(request: &LlmRequest) -> Value {
    let d = request.decoding();
    let mut body = json!({
        "model": request.model_id,
        "messages": request.bundle.messages,
        "temperature": d.temperature,
        "max_tokens": d.max_tokens,
    });
    if let Some(stop) = &d.stop {
        body["stop"] = json!(stop);
    }
    body
}

/// Maps an endpoint reply to a completion or a categorized error.
pub fn classify(status: u16, body: &str) -> Result<Completion, LlmError> {
    let lower = body.to_ascii_lowercase();
    match status {
        200..=299 => parse_success(body),
        401 | 403 => Err(LlmError::Auth(body.to_string())),
        429 if lower.contains("insufficient_quota") || lower.contains("quota exceeded") => {
            Err(LlmError::Quota(body.to_string()))
        }
        408 | 429 | 500..=599 => Err(LlmError::Transient(format!("HTTP {status}: {body}"))),
        400 | 413 | 422
            if lower.contains("context_length_exceeded")
                || lower.contains("maximum context length")
                || lower.contains("too many tokens") =>
        {
            Err(LlmError::ContextOverflow(body.to_string()))
        }
        _ => Err(LlmError::Http {
            status,
            body: body.to_string(),
        }),
    }
}

fn parse_success(body: &str) -> Result<Completion, LlmError> {
    let v: Value = serde_json::from_str(body).map_err(|e| LlmError::Malformed(e.to_string()))?;
    let text = v["choices"][0]["message"]["content"]
        .as_str()
        .ok_or_else(|| LlmError::Malformed("no choices[0].message.content".into()))?
        .to_string();
    let usage = &v["usage"];
    Ok(Completion {
        text,
        prompt_tokens: usage["prompt_tokens"].as_u64().unwrap_or(0),
        completion_tokens: usage["completion_tokens"].as_u64().unwrap_or(0),
    })
}

impl Backend for HttpBackend {
    fn complete(&self, request: &LlmRequest) -> Result<Completion, LlmError> {
        let mut req = self
            .agent
            .post(&self.config.endpoint)
            .header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = match self.config.auth {
                AuthStyle::Bearer => req.header("Authorization", &format!("Bearer {key}")),
                AuthStyle::ApiKey => req.header("api-key", key),
            };
        }
        let mut resp = match req.send_json(wire_body(request)) {
            Ok(r) => r,
            Err(ureq::Error::BadUri(u)) => return Err(LlmError::Http { status: 0, body: format!("bad endpoint url {u}") }),
            Err(e) => return Err(LlmError::Transient(e.to_string())),
        };
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| LlmError::Transient(e.to_string()))?;
        classify(status, &body)
    }
}
