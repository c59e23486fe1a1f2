//! Line-oriented graph fixture format.
//!
//! ```text
//! schema: movie
//! node p1 :Person {name: "Alice", born: 1970}
//! edge e1 p1 -[:ACTED_IN]-> m1
//! ```

use super::graph::{GraphError, PropertyGraph};
use super::value::Value;
use crate::schema::{self, GraphSchema};
use crate::syntax::parse_literal_map;
use regex::Regex;
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::LazyLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("schema violation on line {line}: {message}")]
    SchemaViolation { line: usize, message: String },
    #[error("cannot read fixture: {0}")]
    Io(#[from] std::io::Error),
}

static HEADER_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^schema:\s*(\w+)$").unwrap());
static NODE_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^node\s+(\S+)\s+((?::\w+)+)\s*(\{.*\})?$").unwrap());
static EDGE_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^edge\s+(\S+)\s+(\S+)\s+-\[:(\w+)\s*(\{.*\})?\]->\s+(\S+)$").unwrap()
});

pub fn load_graph(path: impl AsRef<Path>) -> Result<PropertyGraph, FixtureError> {
    parse_graph(&std::fs::read_to_string(path)?)
}

/// Bundled fixture graph for a schema preset.
pub fn fixture(name: &str) -> Option<PropertyGraph> {
    let text = crate::presets::fixture_text(name)?;
    Some(parse_graph(text).expect("bundled fixture is valid"))
}

fn props(text: Option<regex::Match<'_>>, line: usize) -> Result<BTreeMap<String, Value>, FixtureError> {
    let Some(m) = text else {
        return Ok(BTreeMap::new());
    };
    let map = parse_literal_map(m.as_str()).map_err(|e| FixtureError::Parse {
        line,
        message: e.to_string(),
    })?;
    Ok(map.iter().map(|(k, v)| (k.clone(), Value::from(v))).collect())
}

pub fn parse_graph(text: &str) -> Result<PropertyGraph, FixtureError> {
    let mut graph = PropertyGraph::new();
    let mut schema: Option<GraphSchema> = None;
    let mut seen_body = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| FixtureError::Parse { line, message };
        let violation = |message: String| FixtureError::SchemaViolation { line, message };
        if let Some(c) = HEADER_RE.captures(trimmed) {
            if seen_body || schema.is_some() {
                return Err(parse_err("schema header must come first".into()));
            }
            let s = schema::preset(&c[1]).map_err(|e| parse_err(e.to_string()))?;
            graph.schema = Some(s.name.clone());
            schema = Some(s);
            continue;
        }
        seen_body = true;
        if let Some(c) = NODE_RE.captures(trimmed) {
            let labels: Vec<&str> = c[2].split(':').filter(|l| !l.is_empty()).collect();
            let properties = props(c.get(3), line)?;
            if let Some(s) = &schema {
                for l in &labels {
                    let Some(def) = s.node_labels.get(*l) else {
                        return Err(violation(format!("unknown label {l}")));
                    };
                    if let Some(k) = properties.keys().find(|k| !def.properties.contains_key(*k)) {
                        return Err(violation(format!("label {l} has no property {k}")));
                    }
                }
            }
            graph
                .add_node(&c[1], labels, properties)
                .map_err(|e| parse_err(e.to_string()))?;
        } else if let Some(c) = EDGE_RE.captures(trimmed) {
            let properties = props(c.get(4), line)?;
            let idx = graph
                .add_edge(&c[1], &c[2], &c[3], &c[5], properties)
                .map_err(|e| match e {
                    GraphError::MissingEndpoint { .. } | GraphError::DuplicateEdge(_) => {
                        parse_err(e.to_string())
                    }
                    GraphError::DuplicateNode(_) => unreachable!(),
                })?;
            if let Some(s) = &schema {
                let e = graph.edge(idx);
                let (from, to) = (graph.node(e.from), graph.node(e.to));
                let def = s.rel_types.iter().find(|r| {
                    r.rel_type == e.rel_type
                        && from.labels.contains(&r.from_label)
                        && to.labels.contains(&r.to_label)
                });
                let Some(def) = def else {
                    return Err(violation(format!(
                        "edge {} of type {} does not connect legal endpoints",
                        e.id, e.rel_type
                    )));
                };
                if let Some(k) = e.properties.keys().find(|k| !def.properties.contains_key(*k)) {
                    return Err(violation(format!("relationship {} has no property {k}", e.rel_type)));
                }
            }
        } else {
            return Err(parse_err(format!("unrecognised line `{trimmed}`")));
        }
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_body_is_empty_graph() {
        let g = parse_graph("schema: movie\n\n# nothing\n").unwrap();
        assert!(g.nodes().is_empty());
        assert_eq!(g.schema.as_deref(), Some("movie"));
    }

    #[test]
    fn missing_endpoint_is_parse_error() {
        let err = parse_graph("node a :X\nedge e a -[:R]-> b\n").unwrap_err();
        assert!(matches!(err, FixtureError::Parse { line: 2, .. }));
    }

    #[test]
    fn illegal_edge_is_schema_violation() {
        let text = "schema: movie\nnode a :Person {name: \"A\"}\nnode m :Movie {title: \"M\"}\nedge e m -[:ACTED_IN]-> a\n";
        assert!(matches!(
            parse_graph(text),
            Err(FixtureError::SchemaViolation { line: 4, .. })
        ));
    }

    #[test]
    fn properties_and_multiple_labels() {
        let g = parse_graph("node a :X:Y {k: 1, s: 'two'}\nedge e a -[:R {w: 0.5}]-> a\n").unwrap();
        assert_eq!(g.node(0).labels.len(), 2);
        assert_eq!(g.node(0).properties["s"], Value::Str("two".into()));
        assert_eq!(g.edge(0).properties["w"], Value::Float(0.5));
    }
}
