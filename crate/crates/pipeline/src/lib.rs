//! Building prompts, calling a model endpoint, gating the responses and
//! writing the annotation dataset.

pub mod client;
pub mod config;
pub mod http;
pub mod prompt;
pub mod run;

pub use client::{sha256_hex, LlmClient, LlmError, LlmRequest, LlmResponse, ReplayClient};
pub use config::{ConfigError, EndpointConfig, PipelineConfig, PromptConfig, RunConfig};
pub use http::HttpClient;
pub use prompt::{build_prompt, Prompt, PromptError, PromptSpec, Section, Templates};
pub use run::{
    read_dataset, run_pipeline, sanity_gate, DatasetRecord, Job, RunError, RunOptions, RunRecord, RunSummary,
    DATASET_FILE,
};
