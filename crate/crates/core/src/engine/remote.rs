//! Adapter for a remote graph database speaking the HTTP transactional
//! query API (`POST {url}/db/{database}/tx/commit`).

use super::exec::ResultTable;
use super::value::Value;
use serde_json::json;
use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalEndpoint {
    pub url: String,
    pub database: String,
    pub user: Option<String>,
    pub password: Option<String>,
    pub timeout: Duration,
}

#[derive(Debug, Error)]
pub enum RemoteError {
    #[error("cannot reach graph database: {0}")]
    ConnectionError(String),
    #[error("graph database rejected the query: {code}: {message}")]
    RemoteQueryError { code: String, message: String },
    #[error("unexpected response from graph database: {0}")]
    Protocol(String),
}

impl ExternalEndpoint {
    pub fn new(url: &str) -> Self {
        ExternalEndpoint {
            url: url.trim_end_matches('/').to_string(),
            database: "neo4j".into(),
            user: None,
            password: None,
            timeout: Duration::from_secs(30),
        }
    }

    /// Reads `GRAPHTALK_GRAPH_URL`, `GRAPHTALK_GRAPH_DATABASE`,
    /// `GRAPHTALK_GRAPH_USER` and `GRAPHTALK_GRAPH_PASSWORD`.
    pub fn from_env() -> Option<Self> {
        let url = std::env::var("GRAPHTALK_GRAPH_URL").ok()?;
        let mut ep = ExternalEndpoint::new(&url);
        if let Ok(db) = std::env::var("GRAPHTALK_GRAPH_DATABASE") {
            ep.database = db;
        }
        ep.user = std::env::var("GRAPHTALK_GRAPH_USER").ok();
        ep.password = std::env::var("GRAPHTALK_GRAPH_PASSWORD").ok();
        Some(ep)
    }
}

pub fn execute_remote(query_text: &str, endpoint: &ExternalEndpoint) -> Result<ResultTable, RemoteError> {
    let client = reqwest::blocking::Client::builder()
        .timeout(endpoint.timeout)
        .connect_timeout(endpoint.timeout)
        .build()
        .map_err(|e| RemoteError::ConnectionError(e.to_string()))?;
    let url = format!("{}/db/{}/tx/commit", endpoint.url, endpoint.database);
    let mut req = client
        .post(url)
        .header("Accept", "application/json")
        .json(&json!({ "statements": [{ "statement": query_text }] }));
    if let Some(user) = &endpoint.user {
        req = req.basic_auth(user, endpoint.password.as_ref());
    }
    let resp = req
        .send()
        .map_err(|e| RemoteError::ConnectionError(e.to_string()))?;
    let status = resp.status();
    let body: serde_json::Value = resp
        .json()
        .map_err(|e| RemoteError::Protocol(format!("status {status}: {e}")))?;
    parse_response(&body)
}

fn parse_response(body: &serde_json::Value) -> Result<ResultTable, RemoteError> {
    if let Some(err) = body["errors"].as_array().and_then(|e| e.first()) {
        return Err(RemoteError::RemoteQueryError {
            code: err["code"].as_str().unwrap_or("unknown").to_string(),
            message: err["message"].as_str().unwrap_or("").to_string(),
        });
    }
    let result = body["results"]
        .get(0)
        .ok_or_else(|| RemoteError::Protocol("missing results".into()))?;
    let columns: Vec<String> = result["columns"]
        .as_array()
        .ok_or_else(|| RemoteError::Protocol("missing columns".into()))?
        .iter()
        .map(|c| c.as_str().unwrap_or_default().to_string())
        .collect();
    let mut rows = Vec::new();
    for record in result["data"].as_array().into_iter().flatten() {
        let row: Vec<Value> = record["row"]
            .as_array()
            .ok_or_else(|| RemoteError::Protocol("record without row".into()))?
            .iter()
            .map(from_json)
            .collect();
        if row.len() != columns.len() {
            return Err(RemoteError::Protocol("row arity differs from columns".into()));
        }
        rows.push(row);
    }
    Ok(ResultTable { columns, rows })
}

fn from_json(v: &serde_json::Value) -> Value {
    use serde_json::Value as J;
    match v {
        J::Null => Value::Null,
        J::Bool(b) => Value::Bool(*b),
        J::Number(n) => match n.as_i64() {
            Some(i) => Value::Int(i),
            None => Value::Float(n.as_f64().unwrap_or(f64::NAN)),
        },
        J::String(s) => Value::Str(s.clone()),
        J::Array(items) => Value::List(items.iter().map(from_json).collect()),
        J::Object(m) => Value::Map(m.iter().map(|(k, v)| (k.clone(), from_json(v))).collect()),
    }
}
