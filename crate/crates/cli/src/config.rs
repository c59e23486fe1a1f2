//! Service configuration: a line-oriented `key: value` file, overridden by
//! `GRAPHTALK_*` environment variables, overridden by command-line flags.

use graphtalk::dialogue::{ExplainMode, DEFAULT_AMENDMENT_BUDGET};
use graphtalk::engine::{fixture, load_graph, PropertyGraph};
use graphtalk::llm::{ModelRef, Provider};
use graphtalk::schema::{load_schema, preset, GraphSchema, PRESETS};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const DEFAULT_LISTEN: &str = "127.0.0.1:8080";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {message}")]
    Value { key: String, message: String },
    #[error("replay mode forbids {0} providers")]
    ReplayWithLiveProvider(String),
    #[error("cannot load {what}: {message}")]
    Load { what: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum TranscriptMode {
    #[default]
    Off,
    Record(PathBuf),
    Replay(PathBuf),
}

impl std::str::FromStr for TranscriptMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            _ if s == "off" => Ok(TranscriptMode::Off),
            Some(("record", p)) if !p.is_empty() => Ok(TranscriptMode::Record(p.into())),
            Some(("replay", p)) if !p.is_empty() => Ok(TranscriptMode::Replay(p.into())),
            _ => Err(format!("expected off, record:PATH or replay:PATH, got `{s}`")),
        }
    }
}

pub const KEYS: &[&str] = &[
    "listen",
    "schema",
    "graph",
    "provider",
    "model",
    "temperature",
    "max_tokens",
    "budget",
    "transcript",
    "data_dir",
    "explain",
];

/// Raw settings by key; later layers overwrite earlier ones.
pub type Settings = BTreeMap<String, String>;

pub fn parse_config_text(text: &str) -> Result<Settings, ConfigError> {
    let mut out = Settings::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once(':').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            message: "expected `key: value`".into(),
        })?;
        let key = k.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

/// Settings taken from `GRAPHTALK_<KEY>` variables.
pub fn env_settings(lookup: impl Fn(&str) -> Option<String>) -> Settings {
    KEYS.iter()
        .filter_map(|k| {
            let var = format!("GRAPHTALK_{}", k.to_ascii_uppercase());
            lookup(&var).map(|v| (k.to_string(), v))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub listen: String,
    /// Preset name or path to a schema file.
    pub schema: String,
    /// Bundled fixture name or path to a graph file; defaults to the fixture
    /// of the schema preset.
    pub graph: Option<String>,
    pub model: ModelRef,
    pub amendment_budget: u32,
    pub transcript: TranscriptMode,
    pub data_dir: PathBuf,
    pub explain: ExplainMode,
}

fn value_err(key: &str, message: impl ToString) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        message: message.to_string(),
    }
}

fn parse_num<T: std::str::FromStr>(s: &Settings, key: &str) -> Result<Option<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    s.get(key)
        .map(|v| v.parse::<T>().map_err(|e| value_err(key, e)))
        .transpose()
}

impl ServiceConfig {
    /// Merges the layers, lowest precedence first.
    pub fn resolve(layers: &[Settings]) -> Result<Self, ConfigError> {
        let mut s = Settings::new();
        for layer in layers {
            s.extend(layer.iter().map(|(k, v)| (k.clone(), v.clone())));
        }
        Self::from_settings(&s)
    }

    pub fn from_settings(s: &Settings) -> Result<Self, ConfigError> {
        let transcript: TranscriptMode = match s.get("transcript") {
            Some(v) => v.parse().map_err(|e| value_err("transcript", e))?,
            None => TranscriptMode::Off,
        };
        let provider = match s.get("provider") {
            Some(p) => Some(p.parse::<Provider>().map_err(|e| value_err("provider", e))?),
            None => None,
        };
        let model_name = s.get("model").cloned().unwrap_or_else(|| "default".to_string());
        let mut model = match (&transcript, provider) {
            (TranscriptMode::Replay(path), None | Some(Provider::Replay)) => ModelRef::replay(&model_name, path),
            (TranscriptMode::Replay(_), Some(p)) => {
                let name = serde_json::to_value(p).ok().and_then(|v| v.as_str().map(str::to_string));
                return Err(ConfigError::ReplayWithLiveProvider(name.unwrap_or_default()));
            }
            (_, Some(Provider::Replay)) => {
                return Err(value_err("provider", "replay needs `transcript: replay:PATH`"))
            }
            (_, p) => ModelRef {
                provider: p.unwrap_or(Provider::Remote),
                ..ModelRef::remote(&model_name)
            },
        };
        model.temperature = parse_num(s, "temperature")?;
        model.max_tokens = parse_num(s, "max_tokens")?;
        let explain = match s.get("explain").map(String::as_str) {
            None | Some("model") => ExplainMode::Model,
            Some("deterministic") => ExplainMode::Deterministic,
            Some("off") => ExplainMode::Off,
            Some(other) => return Err(value_err("explain", format!("expected model, deterministic or off, got `{other}`"))),
        };
        Ok(ServiceConfig {
            listen: s.get("listen").cloned().unwrap_or_else(|| DEFAULT_LISTEN.to_string()),
            schema: s.get("schema").cloned().unwrap_or_else(|| "movie".to_string()),
            graph: s.get("graph").cloned(),
            model,
            amendment_budget: parse_num(s, "budget")?.unwrap_or(DEFAULT_AMENDMENT_BUDGET),
            transcript,
            data_dir: s.get("data_dir").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("sessions")),
            explain,
        })
    }

    pub fn record_path(&self) -> Option<&Path> {
        match &self.transcript {
            TranscriptMode::Record(p) => Some(p),
            _ => None,
        }
    }

    pub fn graph_ref(&self) -> &str {
        self.graph.as_deref().unwrap_or(&self.schema)
    }

    pub fn load_schema(&self) -> Result<GraphSchema, ConfigError> {
        load_schema_ref(&self.schema)
    }

    pub fn load_graph(&self) -> Result<PropertyGraph, ConfigError> {
        load_graph_ref(self.graph_ref())
    }
}

/// A preset name or a schema file path.
pub fn load_schema_ref(r: &str) -> Result<GraphSchema, ConfigError> {
    let loaded = if PRESETS.contains(&r) { preset(r) } else { load_schema(r) };
    loaded.map_err(|e| ConfigError::Load {
        what: format!("schema `{r}`"),
        message: e.to_string(),
    })
}

/// A bundled fixture name or a graph file path.
pub fn load_graph_ref(r: &str) -> Result<PropertyGraph, ConfigError> {
    if let Some(g) = fixture(r) {
        return Ok(g);
    }
    load_graph(r).map_err(|e| ConfigError::Load {
        what: format!("graph `{r}`"),
        message: e.to_string(),
    })
}
