//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::prompt::PromptSpec;

pub const DEFAULT_KEY_ENV: &str = "ARCDSL_API_KEY";

fn default_key_env() -> String {
    DEFAULT_KEY_ENV.into()
}
fn default_attempts() -> u32 {
    5
}
fn default_initial_backoff() -> u64 {
    500
}
fn default_max_backoff() -> u64 {
    16_000
}
fn default_timeout() -> u64 {
    120
}
fn default_concurrency() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    /// OpenAI-compatible base URL; requests go to `{base_url}/chat/completions`.
    pub base_url: String,
    pub model_id: String,
    /// Environment variable holding the API key.
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    #[serde(default = "default_initial_backoff")]
    pub initial_backoff_ms: u64,
    #[serde(default = "default_max_backoff")]
    pub max_backoff_ms: u64,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
}

impl EndpointConfig {
    pub fn new(base_url: &str, model_id: &str) -> EndpointConfig {
        EndpointConfig {
            base_url: base_url.into(),
            model_id: model_id.into(),
            api_key_env: default_key_env(),
            max_attempts: default_attempts(),
            initial_backoff_ms: default_initial_backoff(),
            max_backoff_ms: default_max_backoff(),
            timeout_secs: default_timeout(),
            temperature: None,
            max_tokens: None,
        }
    }

    /// The API key from the configured environment variable.
    pub fn api_key(&self) -> Result<String, ConfigError> {
        match std::env::var(&self.api_key_env) {
            Ok(k) if !k.trim().is_empty() => Ok(k),
            _ => Err(ConfigError::MissingCredential(self.api_key_env.clone())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub tasks_dir: PathBuf,
    pub solvers_dir: PathBuf,
    pub out_dir: PathBuf,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    /// Estimated prompt tokens (bytes / 4) allowed per minute across workers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens_per_minute: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptConfig {
    #[serde(default)]
    pub include_interim_values: bool,
    #[serde(default)]
    pub parts: Option<Vec<u8>>,
    #[serde(default)]
    pub template_version: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub endpoint: EndpointConfig,
    pub run: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<PromptConfig>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("credential missing: set the {0} environment variable")]
    MissingCredential(String),
}

impl PipelineConfig {
    /// Parse a config file. Relative paths are taken from the file's directory.
    pub fn load(path: &Path) -> Result<PipelineConfig, ConfigError> {
        let err = |message: String| ConfigError::Read {
            path: path.to_path_buf(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let mut config: PipelineConfig = toml::from_str(&text).map_err(|e| err(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut config.run.tasks_dir, &mut config.run.solvers_dir, &mut config.run.out_dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn prompt_spec(&self) -> PromptSpec {
        let mut spec = PromptSpec::new(&self.endpoint.model_id);
        if let Some(p) = &self.prompt {
            spec.include_interim_values = p.include_interim_values;
            if let Some(parts) = &p.parts {
                spec.parts_requested = parts.clone();
            }
            if let Some(v) = &p.template_version {
                spec.template_version = v.clone();
            }
        }
        spec
    }
}
