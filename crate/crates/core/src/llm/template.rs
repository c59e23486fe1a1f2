use super::LlmError;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateKind {
    Generation,
    Explanation,
    Amendment,
    HyenaGeneration,
}

impl TemplateKind {
    pub const ALL: [TemplateKind; 4] = [
        TemplateKind::Generation,
        TemplateKind::Explanation,
        TemplateKind::Amendment,
        TemplateKind::HyenaGeneration,
    ];

    pub fn placeholders(self) -> &'static [&'static str] {
        match self {
            TemplateKind::Generation | TemplateKind::HyenaGeneration => &["schema", "question"],
            TemplateKind::Explanation => &["query"],
            TemplateKind::Amendment => &["question", "current_query", "schema", "amendment"],
        }
    }

    pub fn file_stem(self) -> &'static str {
        match self {
            TemplateKind::Generation => "generation",
            TemplateKind::Explanation => "explanation",
            TemplateKind::Amendment => "amendment",
            TemplateKind::HyenaGeneration => "hyena_generation",
        }
    }
}

impl fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.file_stem())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub kind: TemplateKind,
    pub text: String,
}

const NAMES: [&str; 5] = ["schema", "question", "query", "current_query", "amendment"];

/// `{name}` occurrences of the known placeholder names, as (byte range, name).
fn scan(text: &str) -> Vec<(usize, usize, &'static str)> {
    let mut out = Vec::new();
    let mut i = 0;
    while let Some(off) = text[i..].find('{') {
        let start = i + off;
        let rest = &text[start + 1..];
        match NAMES.iter().find(|n| rest.starts_with(**n) && rest[n.len()..].starts_with('}')) {
            Some(name) => {
                let end = start + name.len() + 2;
                out.push((start, end, *name));
                i = end;
            }
            None => i = start + 1,
        }
    }
    out
}

impl PromptTemplate {
    /// Bundled template text.
    pub fn builtin(kind: TemplateKind) -> Self {
        let text = crate::presets::prompt_text(kind.file_stem());
        PromptTemplate {
            kind,
            text: text.to_string(),
        }
    }

    /// Builds a template, checking that its placeholder set matches the kind.
    pub fn new(kind: TemplateKind, text: &str) -> Result<Self, LlmError> {
        let found: BTreeSet<&str> = scan(text).into_iter().map(|(_, _, n)| n).collect();
        let expected: BTreeSet<&str> = kind.placeholders().iter().copied().collect();
        if found != expected {
            return Err(LlmError::TemplateMismatch {
                kind: kind.to_string(),
                found: found.into_iter().map(str::to_string).collect(),
            });
        }
        Ok(PromptTemplate {
            kind,
            text: text.to_string(),
        })
    }

    pub fn placeholders(&self) -> BTreeSet<&'static str> {
        scan(&self.text).into_iter().map(|(_, _, n)| n).collect()
    }
}

/// Substitutes every placeholder in one pass; inserted values are never
/// re-scanned.
pub fn render_prompt(
    template: &PromptTemplate,
    slots: &BTreeMap<String, String>,
) -> Result<String, LlmError> {
    let text = &template.text;
    let mut out = String::with_capacity(text.len() + slots.values().map(String::len).sum::<usize>());
    let mut last = 0;
    for (start, end, name) in scan(text) {
        let value = slots
            .get(name)
            .ok_or_else(|| LlmError::MissingSlot(name.to_string()))?;
        out.push_str(&text[last..start]);
        out.push_str(value);
        last = end;
    }
    out.push_str(&text[last..]);
    Ok(out)
}

/// Convenience wrapper taking `(name, value)` pairs.
pub fn render(kind: TemplateKind, slots: &[(&str, &str)]) -> Result<String, LlmError> {
    let map = slots
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    render_prompt(&PromptTemplate::builtin(kind), &map)
}
