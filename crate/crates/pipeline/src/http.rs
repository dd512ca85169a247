//! Blocking client for OpenAI-compatible chat-completion endpoints.

use std::time::Duration;

use serde_json::{json, Value};

use crate::client::{sha256_hex, LlmClient, LlmError, LlmRequest, LlmResponse};
use crate::config::EndpointConfig;

pub struct HttpClient {
    config: EndpointConfig,
    api_key: String,
    agent: ureq::Agent,
}

enum Failure {
    Retry { status: Option<u16>, timeout: bool, message: String },
    Fatal(LlmError),
}

impl HttpClient {
    pub fn new(config: EndpointConfig, api_key: String) -> HttpClient {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        HttpClient { config, api_key, agent }
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn parameters(&self) -> Value {
        let mut p = serde_json::Map::new();
        if let Some(t) = self.config.temperature {
            p.insert("temperature".into(), json!(t));
        }
        if let Some(m) = self.config.max_tokens {
            p.insert("max_tokens".into(), json!(m));
        }
        Value::Object(p)
    }

    /// Delay before retry number `attempt` (1-based): doubling, capped.
    pub fn backoff(&self, attempt: u32) -> Duration {
        let ms = self
            .config
            .initial_backoff_ms
            .saturating_mul(1u64 << (attempt - 1).min(20))
            .min(self.config.max_backoff_ms);
        Duration::from_millis(ms)
    }

    fn attempt(&self, body: &Value) -> Result<String, Failure> {
        let result = self
            .agent
            .post(&self.url())
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(body);
        let mut response = match result {
            Ok(r) => r,
            Err(ureq::Error::Timeout(t)) => {
                return Err(Failure::Retry {
                    status: None,
                    timeout: true,
                    message: t.to_string(),
                })
            }
            Err(ureq::Error::Io(e)) if e.kind() == std::io::ErrorKind::TimedOut => {
                return Err(Failure::Retry {
                    status: None,
                    timeout: true,
                    message: e.to_string(),
                })
            }
            Err(e) => {
                return Err(Failure::Retry {
                    status: None,
                    timeout: false,
                    message: e.to_string(),
                })
            }
        };
        let status = response.status().as_u16();
        let text = response.body_mut().read_to_string().unwrap_or_default();
        match status {
            200..=299 => {
                let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Fatal(LlmError::Malformed(e.to_string())))?;
                v.pointer("/choices/0/message/content")
                    .and_then(Value::as_str)
                    .map(str::to_string)
                    .ok_or_else(|| Failure::Fatal(LlmError::Malformed("no choices[0].message.content".into())))
            }
            401 | 403 => Err(Failure::Fatal(LlmError::Auth { status })),
            429 | 500..=599 => Err(Failure::Retry {
                status: Some(status),
                timeout: false,
                message: text,
            }),
            _ => Err(Failure::Fatal(LlmError::Http {
                status,
                attempts: 1,
                body: text,
            })),
        }
    }
}

impl LlmClient for HttpClient {
    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, LlmError> {
        let parameters = self.parameters();
        let mut body = json!({
            "model": request.model_id,
            "messages": [{"role": "user", "content": request.prompt}],
        });
        if let (Value::Object(b), Value::Object(p)) = (&mut body, &parameters) {
            b.extend(p.clone());
        }
        log::info!("{}: request sha256={}", request.task_id, sha256_hex(&request.prompt));
        let max = self.config.max_attempts.max(1);
        let mut attempts = 0;
        loop {
            attempts += 1;
            match self.attempt(&body) {
                Ok(text) => {
                    log::info!("{}: response sha256={} attempts={attempts}", request.task_id, sha256_hex(&text));
                    return Ok(LlmResponse {
                        text,
                        attempts,
                        parameters,
                    });
                }
                Err(Failure::Fatal(LlmError::Http { status, body, .. })) => {
                    return Err(LlmError::Http { status, attempts, body })
                }
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retry { status, timeout, message }) => {
                    log::warn!("{}: attempt {attempts} failed: {}", request.task_id, status.map_or(message.clone(), |s| format!("HTTP {s}")));
                    if attempts >= max {
                        return Err(match (status, timeout) {
                            (Some(429), _) => LlmError::RateLimited { attempts },
                            (Some(s), _) => LlmError::Http { status: s, attempts, body: message },
                            (None, true) => LlmError::Timeout { attempts },
                            (None, false) => LlmError::Transport { attempts, message },
                        });
                    }
                    std::thread::sleep(self.backoff(attempts));
                }
            }
        }
    }
}
