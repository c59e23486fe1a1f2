use super::value::Value;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Node {
    pub id: String,
    pub labels: BTreeSet<String>,
    pub properties: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Edge {
    pub id: String,
    pub rel_type: String,
    pub from: usize,
    pub to: usize,
    pub properties: BTreeMap<String, Value>,
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
    #[error("edge `{edge}` refers to missing node `{node}`")]
    MissingEndpoint { edge: String, node: String },
}

/// In-memory property graph. Nodes and edges are addressed by dense indices;
/// the fixture ids are kept for display and lookup.
#[derive(Debug, Clone, Default, Serialize)]
pub struct PropertyGraph {
    /// Schema preset named in the fixture header, if any.
    pub schema: Option<String>,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    #[serde(skip)]
    out_adj: Vec<Vec<usize>>,
    #[serde(skip)]
    in_adj: Vec<Vec<usize>>,
    #[serde(skip)]
    node_index: HashMap<String, usize>,
    #[serde(skip)]
    edge_ids: HashMap<String, usize>,
}

impl PropertyGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node<I, S>(
        &mut self,
        id: &str,
        labels: I,
        properties: BTreeMap<String, Value>,
    ) -> Result<usize, GraphError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if self.node_index.contains_key(id) {
            return Err(GraphError::DuplicateNode(id.to_string()));
        }
        let idx = self.nodes.len();
        self.nodes.push(Node {
            id: id.to_string(),
            labels: labels.into_iter().map(Into::into).collect(),
            properties,
        });
        self.out_adj.push(Vec::new());
        self.in_adj.push(Vec::new());
        self.node_index.insert(id.to_string(), idx);
        Ok(idx)
    }

    pub fn add_edge(
        &mut self,
        id: &str,
        from: &str,
        rel_type: &str,
        to: &str,
        properties: BTreeMap<String, Value>,
    ) -> Result<usize, GraphError> {
        if self.edge_ids.contains_key(id) {
            return Err(GraphError::DuplicateEdge(id.to_string()));
        }
        let lookup = |n: &str| {
            self.node_index
                .get(n)
                .copied()
                .ok_or_else(|| GraphError::MissingEndpoint {
                    edge: id.to_string(),
                    node: n.to_string(),
                })
        };
        let (f, t) = (lookup(from)?, lookup(to)?);
        let idx = self.edges.len();
        self.edges.push(Edge {
            id: id.to_string(),
            rel_type: rel_type.to_string(),
            from: f,
            to: t,
            properties,
        });
        self.out_adj[f].push(idx);
        self.in_adj[t].push(idx);
        self.edge_ids.insert(id.to_string(), idx);
        Ok(idx)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, idx: usize) -> &Node {
        &self.nodes[idx]
    }

    pub fn edge(&self, idx: usize) -> &Edge {
        &self.edges[idx]
    }

    pub fn node_by_id(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn outgoing(&self, node: usize) -> &[usize] {
        &self.out_adj[node]
    }

    pub fn incoming(&self, node: usize) -> &[usize] {
        &self.in_adj[node]
    }

    pub fn count_label(&self, label: &str) -> usize {
        self.nodes.iter().filter(|n| n.labels.contains(label)).count()
    }

    /// Interface rendering of a value: nodes as `(:Label {k: v})`, edges as
    /// `[:TYPE {k: v}]`, everything else as JSON.
    pub fn render(&self, value: &Value) -> serde_json::Value {
        use serde_json::Value as J;
        match value {
            Value::Null => J::Null,
            Value::Bool(b) => J::Bool(*b),
            Value::Int(i) => J::from(*i),
            Value::Float(f) => serde_json::Number::from_f64(*f).map_or(J::Null, J::Number),
            Value::Str(s) => J::String(s.clone()),
            Value::Node(i) => J::String(self.render_node(*i)),
            Value::Edge(i) => {
                let e = &self.edges[*i];
                J::String(format!("[:{}{}]", e.rel_type, render_props(&e.properties)))
            }
            Value::List(items) => J::Array(items.iter().map(|v| self.render(v)).collect()),
            Value::Map(m) => J::Object(m.iter().map(|(k, v)| (k.clone(), self.render(v))).collect()),
        }
    }

    pub fn render_node(&self, idx: usize) -> String {
        let n = &self.nodes[idx];
        let labels: String = n.labels.iter().map(|l| format!(":{l}")).collect();
        format!("({labels}{})", render_props(&n.properties))
    }

    /// Plain-text rendering used in tables and prompts.
    pub fn render_text(&self, value: &Value) -> String {
        match value {
            Value::Node(i) => self.render_node(*i),
            Value::Str(s) => s.clone(),
            Value::Null => "null".into(),
            other => match self.render(other) {
                serde_json::Value::String(s) => s,
                j => j.to_string(),
            },
        }
    }
}

fn render_props(props: &BTreeMap<String, Value>) -> String {
    if props.is_empty() {
        return String::new();
    }
    let body: Vec<String> = props
        .iter()
        .map(|(k, v)| match v {
            Value::Str(s) => format!("{k}: {s:?}"),
            other => format!("{k}: {other}"),
        })
        .collect();
    format!(" {{{}}}", body.join(", "))
}
