//! The model endpoint seen by the pipeline.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmRequest {
    pub task_id: String,
    pub model_id: String,
    pub prompt: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmResponse {
    pub text: String,
    pub attempts: u32,
    /// Request parameters beyond the prompt, as sent.
    #[serde(default)]
    pub parameters: serde_json::Value,
}

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("authentication failed (HTTP {status})")]
    Auth { status: u16 },
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("timed out after {attempts} attempts")]
    Timeout { attempts: u32 },
    #[error("HTTP {status} after {attempts} attempts: {body}")]
    Http { status: u16, attempts: u32, body: String },
    #[error("transport error after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("no stored response for {0}")]
    NoResponse(String),
}

impl LlmError {
    /// Short stable label for summaries.
    pub fn kind(&self) -> &'static str {
        match self {
            LlmError::Auth { .. } => "auth",
            LlmError::RateLimited { .. } => "rate-limited",
            LlmError::Timeout { .. } => "timeout",
            LlmError::Http { .. } => "http",
            LlmError::Transport { .. } => "transport",
            LlmError::Malformed(_) => "malformed",
            LlmError::NoResponse(_) => "no-response",
        }
    }
}

pub trait LlmClient: Send + Sync {
    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, LlmError>;
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Serves stored responses by task id.
#[derive(Clone, Debug, Default)]
pub struct ReplayClient {
    responses: HashMap<String, String>,
}

impl ReplayClient {
    pub fn new(responses: HashMap<String, String>) -> ReplayClient {
        ReplayClient { responses }
    }

    /// Load `<task_id>.txt` files, or the responses recorded in a
    /// `dataset.jsonl` when the directory holds one.
    pub fn from_dir(dir: &Path) -> std::io::Result<ReplayClient> {
        let dataset = dir.join(crate::run::DATASET_FILE);
        let mut responses = HashMap::new();
        if dataset.is_file() {
            for record in crate::run::read_dataset(&dataset)? {
                responses.insert(record.run.task_id, record.run.response);
            }
        } else {
            for entry in std::fs::read_dir(dir)? {
                let path = entry?.path();
                if path.extension().is_some_and(|e| e == "txt") {
                    let id = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                    responses.insert(id, std::fs::read_to_string(&path)?);
                }
            }
        }
        Ok(ReplayClient { responses })
    }

    pub fn task_ids(&self) -> impl Iterator<Item = &str> {
        self.responses.keys().map(String::as_str)
    }
}

impl LlmClient for ReplayClient {
    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, LlmError> {
        let text = self
            .responses
            .get(&request.task_id)
            .cloned()
            .ok_or_else(|| LlmError::NoResponse(request.task_id.clone()))?;
        Ok(LlmResponse {
            text,
            attempts: 1,
            parameters: serde_json::Value::Null,
        })
    }
}
