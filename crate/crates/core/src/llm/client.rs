use super::transcript::{append_exchange, Exchange, Transcript};
use super::LlmError;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provider {
    /// OpenAI-compatible chat-completion API.
    Remote,
    /// Local Ollama server.
    Local,
    Replay,
}

impl std::str::FromStr for Provider {
    type Err = LlmError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "remote" => Ok(Provider::Remote),
            "local" => Ok(Provider::Local),
            "replay" => Ok(Provider::Replay),
            other => Err(LlmError::Config(format!("unknown provider `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRef {
    pub provider: Provider,
    pub model_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<PathBuf>,
}

impl ModelRef {
    pub fn replay(model_name: &str, transcript: impl Into<PathBuf>) -> Self {
        ModelRef {
            provider: Provider::Replay,
            model_name: model_name.to_string(),
            temperature: None,
            max_tokens: None,
            transcript: Some(transcript.into()),
        }
    }

    pub fn remote(model_name: &str) -> Self {
        ModelRef {
            provider: Provider::Remote,
            model_name: model_name.to_string(),
            temperature: None,
            max_tokens: None,
            transcript: None,
        }
    }

    pub fn check(&self) -> Result<(), LlmError> {
        if self.provider == Provider::Replay && self.transcript.is_none() {
            return Err(LlmError::Config("replay requires a transcript path".into()));
        }
        Ok(())
    }
}

/// A chat model answering single-turn prompts.
pub trait ChatModel: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, LlmError>;
    fn model_name(&self) -> &str;
}

fn http_client(timeout: Duration) -> Result<reqwest::blocking::Client, LlmError> {
    reqwest::blocking::Client::builder()
        .timeout(timeout)
        .build()
        .map_err(|e| LlmError::Provider {
            status: None,
            message: e.to_string(),
        })
}

fn post_json(
    client: &reqwest::blocking::Client,
    url: &str,
    key: Option<&str>,
    body: &serde_json::Value,
) -> Result<serde_json::Value, LlmError> {
    let mut req = client.post(url).json(body);
    if let Some(k) = key {
        req = req.bearer_auth(k);
    }
    let resp = req.send().map_err(|e| LlmError::Provider {
        status: None,
        message: e.to_string(),
    })?;
    let status = resp.status();
    let text = resp.text().map_err(|e| LlmError::Provider {
        status: Some(status.as_u16()),
        message: e.to_string(),
    })?;
    if !status.is_success() {
        return Err(LlmError::Provider {
            status: Some(status.as_u16()),
            message: text,
        });
    }
    serde_json::from_str(&text).map_err(|e| LlmError::Provider {
        status: Some(status.as_u16()),
        message: format!("invalid JSON body: {e}"),
    })
}

/// OpenAI-compatible `/chat/completions` client.
pub struct RemoteModel {
    pub base_url: String,
    pub api_key: Option<String>,
    pub model: ModelRef,
    client: reqwest::blocking::Client,
}

impl RemoteModel {
    pub fn new(base_url: &str, api_key: Option<String>, model: ModelRef) -> Result<Self, LlmError> {
        Ok(RemoteModel {
            base_url: base_url.trim_end_matches('/').to_string(),
            api_key,
            model,
            client: http_client(DEFAULT_TIMEOUT)?,
        })
    }

    /// Base URL from `GRAPHTALK_LLM_URL` (default `https://api.openai.com/v1`)
    /// and key from `GRAPHTALK_LLM_KEY`.
    pub fn from_env(model: ModelRef) -> Result<Self, LlmError> {
        let url = std::env::var("GRAPHTALK_LLM_URL")
            .unwrap_or_else(|_| "https://api.openai.com/v1".to_string());
        Self::new(&url, std::env::var("GRAPHTALK_LLM_KEY").ok(), model)
    }
}

impl ChatModel for RemoteModel {
    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        let mut body = json!({
            "model": self.model.model_name,
            "messages": [{"role": "user", "content": prompt}],
        });
        if let Some(t) = self.model.temperature {
            body["temperature"] = json!(t);
        }
        if let Some(m) = self.model.max_tokens {
            body["max_tokens"] = json!(m);
        }
        let url = format!("{}/chat/completions", self.base_url);
        let v = post_json(&self.client, &url, self.api_key.as_deref(), &body)?;
        v["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| LlmError::Provider {
                status: None,
                message: "response has no choices[0].message.content".into(),
            })
    }

    fn model_name(&self) -> &str {
        &self.model.model_name
    }
}

/// Ollama `/api/chat` client.
pub struct LocalModel {
    pub base_url: String,
    pub model: ModelRef,
    client: reqwest::blocking::Client,
}

impl LocalModel {
    pub fn new(base_url: &str, model: ModelRef) -> Result<Self, LlmError> {
        Ok(LocalModel {
            base_url: base_url.trim_end_matches('/').to_string(),
            model,
            client: http_client(DEFAULT_TIMEOUT)?,
        })
    }

    /// Server from `GRAPHTALK_OLLAMA_URL` (default `http://localhost:11434`).
    pub fn from_env(model: ModelRef) -> Result<Self, LlmError> {
        let url = std::env::var("GRAPHTALK_OLLAMA_URL")
            .unwrap_or_else(|_| "http://localhost:11434".to_string());
        Self::new(&url, model)
    }
}

impl ChatModel for LocalModel {
    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        let mut options = serde_json::Map::new();
        if let Some(t) = self.model.temperature {
            options.insert("temperature".into(), json!(t));
        }
        if let Some(m) = self.model.max_tokens {
            options.insert("num_predict".into(), json!(m));
        }
        let body = json!({
            "model": self.model.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "stream": false,
            "options": options,
        });
        let url = format!("{}/api/chat", self.base_url);
        let v = post_json(&self.client, &url, None, &body)?;
        v["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| LlmError::Provider {
                status: None,
                message: "response has no message.content".into(),
            })
    }

    fn model_name(&self) -> &str {
        &self.model.model_name
    }
}

/// Answers from a frozen transcript; unseen prompts are an error.
pub struct ReplayModel {
    name: String,
    transcript: Transcript,
}

impl ReplayModel {
    pub fn new(name: &str, transcript: Transcript) -> Self {
        ReplayModel {
            name: name.to_string(),
            transcript,
        }
    }

    pub fn open(name: &str, path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(LlmError::Transcript(format!("{} does not exist", path.display())));
        }
        Ok(Self::new(name, Transcript::load(path)?))
    }
}

impl ChatModel for ReplayModel {
    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        self.transcript
            .lookup(prompt)
            .map(|e| e.response.clone())
            .ok_or_else(|| LlmError::ReplayMiss {
                fingerprint: super::transcript::fingerprint(prompt),
            })
    }

    fn model_name(&self) -> &str {
        &self.name
    }
}

/// Wraps a live model and appends every new exchange to a transcript file.
pub struct RecordingModel<M: ChatModel> {
    inner: M,
    path: PathBuf,
    state: Mutex<Transcript>,
}

impl<M: ChatModel> RecordingModel<M> {
    pub fn new(inner: M, path: impl Into<PathBuf>) -> Result<Self, LlmError> {
        let path = path.into();
        let state = Mutex::new(Transcript::load(&path)?);
        Ok(RecordingModel { inner, path, state })
    }
}

impl<M: ChatModel> ChatModel for RecordingModel<M> {
    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        let response = self.inner.complete(prompt)?;
        let mut t = self.state.lock().expect("transcript lock");
        if !t.contains(prompt) {
            let ex = Exchange::new(
                prompt,
                &response,
                self.inner.model_name(),
                &chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            );
            append_exchange(&self.path, &ex)?;
            t.push(ex)?;
        }
        Ok(response)
    }

    fn model_name(&self) -> &str {
        self.inner.model_name()
    }
}

impl ChatModel for Box<dyn ChatModel> {
    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        (**self).complete(prompt)
    }

    fn model_name(&self) -> &str {
        (**self).model_name()
    }
}

/// Builds the client for a model reference. `record` wraps live providers
/// in a transcript recorder.
pub fn connect(model: &ModelRef, record: Option<&Path>) -> Result<Box<dyn ChatModel>, LlmError> {
    model.check()?;
    let live: Box<dyn ChatModel> = match model.provider {
        Provider::Replay => {
            let path = model.transcript.as_ref().expect("checked above");
            return Ok(Box::new(ReplayModel::open(&model.model_name, path)?));
        }
        Provider::Remote => Box::new(RemoteModel::from_env(model.clone())?),
        Provider::Local => Box::new(LocalModel::from_env(model.clone())?),
    };
    match record {
        Some(path) => Ok(Box::new(RecordingModel::new(live, path)?)),
        None => Ok(live),
    }
}

/// Calls `complete` on any model.
pub fn complete(model: &dyn ChatModel, prompt: &str) -> Result<String, LlmError> {
    model.complete(prompt)
}
