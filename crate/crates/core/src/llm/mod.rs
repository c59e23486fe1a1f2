//! Chat-model access, prompt templates, output cleaning and transcripts.

mod clean;
mod client;
mod template;
mod transcript;

pub use clean::clean_query_output;
pub(crate) use clean::strip_reasoning;
pub use client::{
    complete, connect, ChatModel, LocalModel, ModelRef, Provider, RecordingModel, RemoteModel,
    ReplayModel, DEFAULT_TIMEOUT,
};
pub use template::{render, render_prompt, PromptTemplate, TemplateKind};
pub use transcript::{append_exchange, fingerprint, Exchange, Transcript};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("missing template slot `{0}`")]
    MissingSlot(String),
    #[error("template for {kind} has placeholders {found:?}")]
    TemplateMismatch { kind: String, found: Vec<String> },
    #[error("provider error{}: {message}", status.map(|s| format!(" (status {s})")).unwrap_or_default())]
    Provider { status: Option<u16>, message: String },
    #[error("no recorded response for prompt fingerprint {fingerprint}")]
    ReplayMiss { fingerprint: String },
    #[error("nothing query-like remains after cleaning the model output")]
    EmptyAfterCleaning,
    #[error("transcript: {0}")]
    Transcript(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
