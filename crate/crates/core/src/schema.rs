//! Graph schema model, schema file loader and the prompt-ready schema block.

use regex::Regex;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::sync::LazyLock;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PropType {
    String,
    Integer,
    Float,
    Boolean,
}

impl PropType {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "String" => Some(PropType::String),
            "Integer" => Some(PropType::Integer),
            "Float" => Some(PropType::Float),
            "Boolean" => Some(PropType::Boolean),
            _ => None,
        }
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, PropType::Integer | PropType::Float)
    }
}

impl fmt::Display for PropType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PropType::String => "STRING",
            PropType::Integer => "INTEGER",
            PropType::Float => "FLOAT",
            PropType::Boolean => "BOOLEAN",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelDef {
    pub label: String,
    pub properties: BTreeMap<String, PropType>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelDef {
    pub rel_type: String,
    pub from_label: String,
    pub to_label: String,
    pub properties: BTreeMap<String, PropType>,
}

/// Plausible value range registered for a property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Range { min: f64, max: f64 },
    NonNumeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSchema {
    pub name: String,
    pub node_labels: BTreeMap<String, LabelDef>,
    pub rel_types: Vec<RelDef>,
    /// Keyed by (label, property).
    pub domains: BTreeMap<(String, String), Domain>,
}

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("schema invariant violated: {0}")]
    InvariantViolation(String),
    #[error("cannot read schema file: {0}")]
    Io(#[from] std::io::Error),
    #[error("unknown schema preset `{0}`")]
    UnknownPreset(String),
}

pub const PRESETS: &[&str] = &["movie", "mardi", "hyena"];

impl GraphSchema {
    pub fn empty(name: &str) -> Self {
        GraphSchema {
            name: name.to_string(),
            node_labels: BTreeMap::new(),
            rel_types: Vec::new(),
            domains: BTreeMap::new(),
        }
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.node_labels.contains_key(label)
    }

    pub fn has_rel_type(&self, rel_type: &str) -> bool {
        self.rel_types.iter().any(|r| r.rel_type == rel_type)
    }

    /// Legal (from, to) endpoint pairs of a relationship type. Case-sensitive.
    pub fn rel_lookup(&self, rel_type: &str) -> BTreeSet<(String, String)> {
        self.rel_types
            .iter()
            .filter(|r| r.rel_type == rel_type)
            .map(|r| (r.from_label.clone(), r.to_label.clone()))
            .collect()
    }

    pub fn property_type(&self, label: &str, key: &str) -> Option<PropType> {
        self.node_labels.get(label)?.properties.get(key).copied()
    }

    pub fn domain(&self, label: &str, key: &str) -> Option<&Domain> {
        self.domains.get(&(label.to_string(), key.to_string()))
    }

    /// Prompt-ready text: node labels with their properties, relationship
    /// properties, then one `(:From)-[:REL]->(:To)` line per relationship,
    /// each section sorted lexicographically.
    pub fn prompt_block(&self) -> String {
        if self.node_labels.is_empty() && self.rel_types.is_empty() {
            return String::new();
        }
        let props = |m: &BTreeMap<String, PropType>| {
            m.iter()
                .map(|(k, t)| format!("{k}: {t}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut out = String::from("Node properties:\n");
        for def in self.node_labels.values() {
            out.push_str(&format!("{} {{{}}}\n", def.label, props(&def.properties)));
        }
        let mut rel_props: Vec<String> = self
            .rel_types
            .iter()
            .filter(|r| !r.properties.is_empty())
            .map(|r| {
                format!(
                    "(:{})-[:{}]->(:{}) {{{}}}",
                    r.from_label,
                    r.rel_type,
                    r.to_label,
                    props(&r.properties)
                )
            })
            .collect();
        rel_props.sort();
        if !rel_props.is_empty() {
            out.push_str("Relationship properties:\n");
            for line in rel_props {
                out.push_str(&line);
                out.push('\n');
            }
        }
        let mut rels: Vec<String> = self
            .rel_types
            .iter()
            .map(|r| format!("(:{})-[:{}]->(:{})", r.from_label, r.rel_type, r.to_label))
            .collect();
        rels.sort();
        out.push_str("The relationships:\n");
        for line in rels {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    /// Checks endpoint existence and triple uniqueness.
    pub fn check(&self) -> Result<(), SchemaError> {
        let mut seen = BTreeSet::new();
        for r in &self.rel_types {
            for end in [&r.from_label, &r.to_label] {
                if !self.has_label(end) {
                    return Err(SchemaError::InvariantViolation(format!(
                        "relationship {} refers to unknown label {end}",
                        r.rel_type
                    )));
                }
            }
            if !seen.insert((&r.rel_type, &r.from_label, &r.to_label)) {
                return Err(SchemaError::InvariantViolation(format!(
                    "duplicate relationship {} ({} -> {})",
                    r.rel_type, r.from_label, r.to_label
                )));
            }
        }
        for (label, key) in self.domains.keys() {
            if self.property_type(label, key).is_none() {
                return Err(SchemaError::InvariantViolation(format!(
                    "domain declared for unknown property {label}.{key}"
                )));
            }
        }
        Ok(())
    }
}

pub fn schema_prompt_block(schema: &GraphSchema) -> String {
    schema.prompt_block()
}

pub fn rel_lookup(schema: &GraphSchema, rel_type: &str) -> BTreeSet<(String, String)> {
    schema.rel_lookup(rel_type)
}

pub fn load_schema(path: impl AsRef<Path>) -> Result<GraphSchema, SchemaError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("schema")
        .to_string();
    parse_schema(&name, &text)
}

/// One of the bundled presets: `movie`, `mardi` or `hyena`.
pub fn preset(name: &str) -> Result<GraphSchema, SchemaError> {
    let text = crate::presets::schema_text(name)
        .ok_or_else(|| SchemaError::UnknownPreset(name.to_string()))?;
    parse_schema(name, text)
}

static LABEL_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^label\s+(\w+)\s*\{(.*)\}$").unwrap());
static REL_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^rel\s+(\w+)\s*\(\s*(\w+)\s*->\s*(\w+)\s*\)\s*(?:\{(.*)\})?$").unwrap()
});
static DOMAIN_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^domain\s+(\w+)\.(\w+)\s*\[\s*(-?[0-9.]+)\s*,\s*(-?[0-9.]+)\s*\]$").unwrap()
});
static NON_NUMERIC_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^non_numeric\s+(\w+)\.(\w+)$").unwrap());

fn parse_props(body: &str, line: usize) -> Result<BTreeMap<String, PropType>, SchemaError> {
    let mut props = BTreeMap::new();
    for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, t) = item.split_once(':').ok_or_else(|| SchemaError::Parse {
            line,
            message: format!("expected `name: Type`, found `{item}`"),
        })?;
        let (k, t) = (k.trim(), t.trim());
        let ty = PropType::parse(t).ok_or_else(|| SchemaError::Parse {
            line,
            message: format!("unknown property type `{t}`"),
        })?;
        if props.insert(k.to_string(), ty).is_some() {
            return Err(SchemaError::InvariantViolation(format!(
                "duplicate property {k} on line {line}"
            )));
        }
    }
    Ok(props)
}

pub fn parse_schema(name: &str, text: &str) -> Result<GraphSchema, SchemaError> {
    let mut schema = GraphSchema::empty(name);
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = LABEL_RE.captures(line) {
            let label = c[1].to_string();
            let properties = parse_props(&c[2], line_no)?;
            if schema.node_labels.contains_key(&label) {
                return Err(SchemaError::InvariantViolation(format!(
                    "duplicate label {label}"
                )));
            }
            schema
                .node_labels
                .insert(label.clone(), LabelDef { label, properties });
        } else if let Some(c) = REL_RE.captures(line) {
            let properties = match c.get(4) {
                Some(m) => parse_props(m.as_str(), line_no)?,
                None => BTreeMap::new(),
            };
            schema.rel_types.push(RelDef {
                rel_type: c[1].to_string(),
                from_label: c[2].to_string(),
                to_label: c[3].to_string(),
                properties,
            });
        } else if let Some(c) = DOMAIN_RE.captures(line) {
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| SchemaError::Parse {
                    line: line_no,
                    message: format!("invalid bound `{s}`"),
                })
            };
            let (min, max) = (parse(&c[3])?, parse(&c[4])?);
            if min > max {
                return Err(SchemaError::Parse {
                    line: line_no,
                    message: "empty domain".into(),
                });
            }
            schema
                .domains
                .insert((c[1].to_string(), c[2].to_string()), Domain::Range { min, max });
        } else if let Some(c) = NON_NUMERIC_RE.captures(line) {
            schema
                .domains
                .insert((c[1].to_string(), c[2].to_string()), Domain::NonNumeric);
        } else {
            return Err(SchemaError::Parse {
                line: line_no,
                message: format!("unrecognised line `{line}`"),
            });
        }
    }
    schema.check()?;
    Ok(schema)
}
