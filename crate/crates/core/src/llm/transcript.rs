use super::LlmError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

/// Lowercase hex SHA-256 of the rendered prompt.
pub fn fingerprint(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub fingerprint: String,
    pub prompt: String,
    pub response: String,
    pub timestamp: String,
    pub model: String,
}

impl Exchange {
    pub fn new(prompt: &str, response: &str, model: &str, timestamp: &str) -> Self {
        Exchange {
            fingerprint: fingerprint(prompt),
            prompt: prompt.to_string(),
            response: response.to_string(),
            timestamp: timestamp.to_string(),
            model: model.to_string(),
        }
    }
}

/// Ordered exchanges, looked up by prompt fingerprint.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Transcript {
    exchanges: Vec<Exchange>,
    index: HashMap<String, usize>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn exchanges(&self) -> &[Exchange] {
        &self.exchanges
    }

    pub fn len(&self) -> usize {
        self.exchanges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exchanges.is_empty()
    }

    pub fn push(&mut self, ex: Exchange) -> Result<(), LlmError> {
        if ex.fingerprint != fingerprint(&ex.prompt) {
            return Err(LlmError::Transcript(format!(
                "fingerprint {} does not match its prompt",
                ex.fingerprint
            )));
        }
        if self.index.contains_key(&ex.fingerprint) {
            return Err(LlmError::Transcript(format!(
                "duplicate fingerprint {}",
                ex.fingerprint
            )));
        }
        self.index.insert(ex.fingerprint.clone(), self.exchanges.len());
        self.exchanges.push(ex);
        Ok(())
    }

    pub fn lookup(&self, prompt: &str) -> Option<&Exchange> {
        self.index.get(&fingerprint(prompt)).map(|&i| &self.exchanges[i])
    }

    pub fn contains(&self, prompt: &str) -> bool {
        self.lookup(prompt).is_some()
    }

    pub fn parse(text: &str) -> Result<Self, LlmError> {
        let mut t = Transcript::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let ex: Exchange = serde_json::from_str(line)
                .map_err(|e| LlmError::Transcript(format!("line {}: {e}", i + 1)))?;
            t.push(ex)?;
        }
        Ok(t)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let path = path.as_ref();
        if !path.exists() {
            return Ok(Transcript::new());
        }
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_jsonl(&self) -> String {
        self.exchanges
            .iter()
            .map(|e| serde_json::to_string(e).expect("exchange serializes") + "\n")
            .collect()
    }
}

/// Appends one record to a transcript file, creating it if needed.
pub fn append_exchange(path: impl AsRef<Path>, ex: &Exchange) -> Result<(), LlmError> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    let line = serde_json::to_string(ex).expect("exchange serializes");
    writeln!(f, "{line}")?;
    Ok(())
}
