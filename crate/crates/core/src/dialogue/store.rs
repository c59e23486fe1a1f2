use super::session::{ExplainMode, Session, SessionTurn};
use super::DialogueError;
use crate::llm::ModelRef;
use serde::{Deserialize, Serialize};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Everything about a session except its turns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub id: String,
    pub schema_ref: String,
    pub graph_ref: String,
    pub model: ModelRef,
    pub amendment_budget: u32,
    pub explain: ExplainMode,
}

impl SessionHeader {
    pub fn of(s: &Session) -> Self {
        SessionHeader {
            id: s.id.clone(),
            schema_ref: s.schema_ref.clone(),
            graph_ref: s.graph_ref.clone(),
            model: s.model.clone(),
            amendment_budget: s.amendment_budget,
            explain: s.explain,
        }
    }
}

/// Append-only session files: `<id>.session.json` holds the header and
/// `<id>.turns.jsonl` one serialized turn per line.
#[derive(Debug, Clone)]
pub struct SessionStore {
    dir: PathBuf,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl SessionStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, DialogueError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(SessionStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn header_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.session.json"))
    }

    fn turns_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.turns.jsonl"))
    }

    pub fn exists(&self, id: &str) -> bool {
        valid_id(id) && self.header_path(id).exists()
    }

    pub fn create(&self, session: &Session) -> Result<(), DialogueError> {
        if !valid_id(&session.id) {
            return Err(DialogueError::Store(format!("invalid session id `{}`", session.id)));
        }
        let path = self.header_path(&session.id);
        let mut f = OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
            .map_err(|e| DialogueError::Store(format!("{}: {e}", path.display())))?;
        let text = serde_json::to_string(&SessionHeader::of(session))
            .map_err(|e| DialogueError::Store(e.to_string()))?;
        writeln!(f, "{text}")?;
        for t in &session.turns {
            self.append_turn(&session.id, t)?;
        }
        Ok(())
    }

    /// Appends a turn and returns the exact line written (without newline).
    pub fn append_turn(&self, id: &str, turn: &SessionTurn) -> Result<String, DialogueError> {
        if !self.exists(id) {
            return Err(DialogueError::UnknownSession(id.to_string()));
        }
        let line = serde_json::to_string(turn).map_err(|e| DialogueError::Store(e.to_string()))?;
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.turns_path(id))?;
        writeln!(f, "{line}")?;
        Ok(line)
    }

    pub fn load(&self, id: &str) -> Result<Session, DialogueError> {
        if !self.exists(id) {
            return Err(DialogueError::UnknownSession(id.to_string()));
        }
        let text = std::fs::read_to_string(self.header_path(id))?;
        let h: SessionHeader =
            serde_json::from_str(text.trim()).map_err(|e| DialogueError::Store(e.to_string()))?;
        let mut turns = Vec::new();
        let tp = self.turns_path(id);
        if tp.exists() {
            for (i, line) in std::fs::read_to_string(tp)?.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let t: SessionTurn = serde_json::from_str(line)
                    .map_err(|e| DialogueError::Store(format!("turn line {}: {e}", i + 1)))?;
                turns.push(t);
            }
        }
        Ok(Session {
            id: h.id,
            schema_ref: h.schema_ref,
            graph_ref: h.graph_ref,
            model: h.model,
            amendment_budget: h.amendment_budget,
            explain: h.explain,
            turns,
        })
    }

    /// Session ids present in the store, sorted.
    pub fn ids(&self) -> Result<Vec<String>, DialogueError> {
        let mut ids = Vec::new();
        for entry in std::fs::read_dir(&self.dir)? {
            let name = entry?.file_name().to_string_lossy().into_owned();
            if let Some(id) = name.strip_suffix(".session.json") {
                ids.push(id.to_string());
            }
        }
        ids.sort();
        Ok(ids)
    }
}
