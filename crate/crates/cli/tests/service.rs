use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use graphtalk::dialogue::{Execution, Session, SessionTurn};
use graphtalk::llm::{ChatModel, LlmError};
use graphtalk_cli::config::{ServiceConfig, Settings};
use graphtalk_cli::service::{router, AppState};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use tower::ServiceExt;

fn transcript(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../transcripts")
        .join(format!("{name}.jsonl"))
}

fn settings(pairs: &[(&str, &str)]) -> Settings {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn replay_config(data: &Path, name: &str) -> ServiceConfig {
    ServiceConfig::from_settings(&settings(&[
        ("schema", "mardi"),
        ("model", "authored"),
        ("transcript", &format!("replay:{}", transcript(name).display())),
        ("data_dir", data.to_str().unwrap()),
    ]))
    .unwrap()
}

fn replay_app(data: &Path, name: &str) -> Router {
    router(Arc::new(AppState::new(replay_config(data, name)).unwrap()))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<&str>) -> (StatusCode, String) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

fn rows(body: &str) -> Vec<Vec<Value>> {
    let turn: SessionTurn = serde_json::from_str(body).unwrap();
    match turn.execution {
        Some(Execution::Table { rows, .. }) => rows,
        other => panic!("no table: {other:?}"),
    }
}

fn stored_lines(data: &Path, id: &str) -> Vec<String> {
    std::fs::read_to_string(data.join(format!("{id}.turns.jsonl")))
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect()
}

/// The graphclust dialogue followed by amendments past the budget.
async fn graphclust_run(data: &Path) -> Vec<(StatusCode, String)> {
    let app = replay_app(data, "graphclust");
    let mut out = Vec::new();
    let (s, body) = call(&app, "POST", "/sessions", None).await;
    let id: String = serde_json::from_str::<Value>(&body).unwrap()["id"].as_str().unwrap().to_string();
    out.push((s, body));
    let base = format!("/sessions/{id}");
    out.push(call(&app, "POST", &format!("{base}/ask"), Some(r#"{"question":"Which authors does graphclust have?"}"#)).await);
    out.push(call(&app, "POST", &format!("{base}/amend"), Some(r#"{"instruction":"Actually, I meant the software package, not the publication."}"#)).await);
    out.push(call(&app, "POST", &format!("{base}/amend"), Some(r#"{"instruction":"Also give their ids"}"#)).await);
    out.push(call(&app, "POST", &format!("{base}/amend"), Some(r#"{"instruction":"Sort them"}"#)).await);
    out.push(call(&app, "GET", &base, None).await);
    out
}

#[tokio::test(flavor = "multi_thread")]
async fn graphclust_dialogue_over_http() {
    let dir = tempfile::tempdir().unwrap();
    let out = graphclust_run(dir.path()).await;
    assert_eq!(out[0], (StatusCode::CREATED, r#"{"id":"session-0001"}"#.to_string()));

    let (s, t1) = &out[1];
    assert_eq!(*s, StatusCode::OK);
    assert!(rows(t1).is_empty());
    let turn: SessionTurn = serde_json::from_str(t1).unwrap();
    let e = turn.explanation.unwrap();
    assert_eq!(e.summary, "List all authors associated with the publication graphclust.");
    assert!(serde_json::from_str::<Value>(t1).unwrap()["explanation"]["flags"].is_array());

    let (s, t2) = &out[2];
    assert_eq!(*s, StatusCode::OK);
    assert_eq!(rows(t2), vec![vec![json!("Tabea Rebafka")]]);

    // The second amendment is not in the transcript: the provider failure
    // comes back as a 502 carrying the turn record.
    let (s, t3) = &out[3];
    assert_eq!(*s, StatusCode::BAD_GATEWAY);
    let turn: SessionTurn = serde_json::from_str(t3).unwrap();
    assert!(turn.provider_failure().is_some());

    let (s, body) = &out[4];
    assert_eq!(*s, StatusCode::CONFLICT);
    assert!(body.contains("budget"), "{body}");

    // Responses are the stored lines, byte for byte.
    let lines = stored_lines(dir.path(), "session-0001");
    assert_eq!(lines, vec![t1.clone(), t2.clone(), t3.clone()]);

    let (s, full) = &out[5];
    assert_eq!(*s, StatusCode::OK);
    let session: Session = serde_json::from_str(full).unwrap();
    assert_eq!(session.turns.len(), 3);
    for (t, line) in session.turns.iter().zip(&lines) {
        assert_eq!(&serde_json::to_string(t).unwrap(), line);
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn replay_service_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(graphclust_run(a.path()).await, graphclust_run(b.path()).await);
}

#[tokio::test(flavor = "multi_thread")]
async fn mardi_amendment_over_http() {
    let dir = tempfile::tempdir().unwrap();
    let app = replay_app(dir.path(), "mardi_amendment");
    call(&app, "POST", "/sessions", None).await;
    let (s, t1) = call(
        &app,
        "POST",
        "/sessions/session-0001/ask",
        Some(r#"{"question":"Which are the ten authors that created the most software packages?"}"#),
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    let turn: SessionTurn = serde_json::from_str(&t1).unwrap();
    assert!(!turn.diagnostics.is_empty());
    let (s, t2) = call(
        &app,
        "POST",
        "/sessions/session-0001/amend",
        Some(r#"{"instruction":"The has_author relationship is the wrong way around."}"#),
    )
    .await;
    assert_eq!(s, StatusCode::OK, "{t2}");
    assert_eq!(rows(&t2).len(), 10);
}

#[tokio::test(flavor = "multi_thread")]
async fn error_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let app = replay_app(dir.path(), "graphclust");
    assert_eq!(call(&app, "GET", "/health", None).await, (StatusCode::OK, r#"{"status":"ok"}"#.into()));
    assert_eq!(call(&app, "GET", "/sessions/nope", None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(
        call(&app, "POST", "/sessions/nope/ask", Some(r#"{"question":"x"}"#)).await.0,
        StatusCode::NOT_FOUND
    );
    call(&app, "POST", "/sessions", None).await;
    for bad in [r#"{"q":"x"}"#, "not json", r#"{"question":"  "}"#, r#"{"question":3}"#] {
        assert_eq!(
            call(&app, "POST", "/sessions/session-0001/ask", Some(bad)).await.0,
            StatusCode::UNPROCESSABLE_ENTITY,
            "{bad}"
        );
    }
    assert_eq!(
        call(&app, "POST", "/sessions/session-0001/amend", Some(r#"{"question":"x"}"#)).await.0,
        StatusCode::UNPROCESSABLE_ENTITY
    );
    // Nothing to amend before the first question.
    assert_eq!(
        call(&app, "POST", "/sessions/session-0001/amend", Some(r#"{"instruction":"x"}"#)).await.0,
        StatusCode::CONFLICT
    );
    let (s, body) = call(&app, "GET", "/schemas/mardi", None).await;
    assert_eq!(s, StatusCode::OK);
    let v: Value = serde_json::from_str(&body).unwrap();
    assert!(v["block"].as_str().unwrap().contains("SoftwarePackage"));
    assert!(call(&app, "GET", "/schemas/movie", None).await.1.contains("Person"));
    assert_eq!(call(&app, "GET", "/schemas/nope", None).await.0, StatusCode::NOT_FOUND);
}

#[tokio::test(flavor = "multi_thread")]
async fn sessions_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    let first = graphclust_run(dir.path()).await;
    let app = replay_app(dir.path(), "graphclust");
    let (_, full) = call(&app, "GET", "/sessions/session-0001", None).await;
    assert_eq!(full, first[5].1);
    let (_, body) = call(&app, "POST", "/sessions", None).await;
    assert_eq!(body, r#"{"id":"session-0002"}"#);
}

/// Answers generation prompts with one query and explanation prompts with
/// a fixed text.
struct Fixed;

impl ChatModel for Fixed {
    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        std::thread::sleep(std::time::Duration::from_millis(5));
        if prompt.contains("explain") || prompt.contains("Explain") {
            Ok("1. Finds movies.\n\nOverall, it lists movie titles.".into())
        } else {
            Ok("MATCH (m:Movie) RETURN m.title".into())
        }
    }

    fn model_name(&self) -> &str {
        "fixed"
    }
}

fn fixed_app(data: &Path) -> Router {
    let config = ServiceConfig::from_settings(&settings(&[
        ("schema", "movie"),
        ("provider", "local"),
        ("model", "fixed"),
        ("data_dir", data.to_str().unwrap()),
    ]))
    .unwrap();
    router(Arc::new(AppState::with_model(config, Box::new(Fixed)).unwrap()))
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_amendments_respect_budget() {
    let dir = tempfile::tempdir().unwrap();
    let app = fixed_app(dir.path());
    call(&app, "POST", "/sessions", None).await;
    let (s, _) = call(&app, "POST", "/sessions/session-0001/ask", Some(r#"{"question":"Movie titles?"}"#)).await;
    assert_eq!(s, StatusCode::OK);
    let tasks: Vec<_> = (0..6)
        .map(|i| {
            let app = app.clone();
            tokio::spawn(async move {
                let body = format!(r#"{{"instruction":"variant {i}"}}"#);
                call(&app, "POST", "/sessions/session-0001/amend", Some(&body)).await.0
            })
        })
        .collect();
    let mut statuses = Vec::new();
    for t in tasks {
        statuses.push(t.await.unwrap());
    }
    assert_eq!(statuses.iter().filter(|s| **s == StatusCode::OK).count(), 2);
    assert_eq!(statuses.iter().filter(|s| **s == StatusCode::CONFLICT).count(), 4);
    assert_eq!(stored_lines(dir.path(), "session-0001").len(), 3);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_sessions_are_independent() {
    let dir = tempfile::tempdir().unwrap();
    let app = fixed_app(dir.path());
    let tasks: Vec<_> = (0..8)
        .map(|_| {
            let app = app.clone();
            tokio::spawn(async move {
                let (_, body) = call(&app, "POST", "/sessions", None).await;
                let id = serde_json::from_str::<Value>(&body).unwrap()["id"].as_str().unwrap().to_string();
                let (s, turn) = call(&app, "POST", &format!("/sessions/{id}/ask"), Some(r#"{"question":"Titles?"}"#)).await;
                (id, s, turn)
            })
        })
        .collect();
    let mut ids = Vec::new();
    for t in tasks {
        let (id, s, turn) = t.await.unwrap();
        assert_eq!(s, StatusCode::OK);
        assert_eq!(stored_lines(dir.path(), &id), vec![turn]);
        ids.push(id);
    }
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), 8);
}
