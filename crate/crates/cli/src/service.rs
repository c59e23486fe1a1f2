//! HTTP API over dialogue sessions.

use crate::config::{ConfigError, ServiceConfig};
use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use graphtalk::dialogue::{Context, DialogueError, Session, SessionStore};
use graphtalk::engine::PropertyGraph;
use graphtalk::llm::{connect, ChatModel};
use graphtalk::schema::{preset, GraphSchema, PRESETS};
use serde::Deserialize;
use serde_json::json;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

pub struct AppState {
    pub config: ServiceConfig,
    schema: GraphSchema,
    graph: PropertyGraph,
    model: Box<dyn ChatModel>,
    store: SessionStore,
    sessions: Mutex<Registry>,
}

#[derive(Default)]
struct Registry {
    open: HashMap<String, Arc<Mutex<Session>>>,
    next_id: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dialogue(#[from] DialogueError),
    #[error(transparent)]
    Llm(#[from] graphtalk::llm::LlmError),
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Result<Self, ServiceError> {
        let model = connect(&config.model, config.record_path())?;
        Self::with_model(config, model)
    }

    pub fn with_model(config: ServiceConfig, model: Box<dyn ChatModel>) -> Result<Self, ServiceError> {
        let schema = config.load_schema()?;
        let graph = config.load_graph()?;
        let store = SessionStore::open(&config.data_dir)?;
        let next_id = store
            .ids()?
            .iter()
            .filter_map(|id| id.strip_prefix("session-")?.parse::<u64>().ok())
            .max()
            .unwrap_or(0)
            + 1;
        Ok(AppState {
            config,
            schema,
            graph,
            model,
            store,
            sessions: Mutex::new(Registry {
                open: HashMap::new(),
                next_id,
            }),
        })
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, DialogueError> {
        let mut reg = self.sessions.lock().unwrap();
        if let Some(s) = reg.open.get(id) {
            return Ok(s.clone());
        }
        let s = Arc::new(Mutex::new(self.store.load(id)?));
        reg.open.insert(id.to_string(), s.clone());
        Ok(s)
    }

    pub fn create_session(&self) -> Result<String, DialogueError> {
        let mut reg = self.sessions.lock().unwrap();
        let mut id = format!("session-{:04}", reg.next_id);
        while self.store.exists(&id) {
            reg.next_id += 1;
            id = format!("session-{:04}", reg.next_id);
        }
        reg.next_id += 1;
        let mut s = Session::new(&id, &self.config.schema, self.config.graph_ref(), self.config.model.clone());
        s.amendment_budget = self.config.amendment_budget;
        s.explain = self.config.explain;
        self.store.create(&s)?;
        reg.open.insert(id.clone(), Arc::new(Mutex::new(s)));
        Ok(id)
    }

    /// Runs one ask or amend step under the session lock and persists the
    /// turn. Returns the stored line and whether a provider failed.
    pub fn step(&self, id: &str, action: &Action) -> Result<(String, bool), DialogueError> {
        let handle = self.session(id)?;
        let mut session = handle.lock().unwrap();
        let ctx = Context {
            schema: &self.schema,
            graph: &self.graph,
            model: self.model.as_ref(),
        };
        let turn = match action {
            Action::Ask(q) => session.ask(&ctx, q)?,
            Action::Amend(i) => session.amend(&ctx, i)?,
        };
        let failed = turn.provider_failure().is_some();
        let turn = turn.clone();
        match self.store.append_turn(id, &turn) {
            Ok(line) => Ok((line, failed)),
            Err(e) => {
                session.turns.pop();
                Err(e)
            }
        }
    }
}

pub enum Action {
    Ask(String),
    Amend(String),
}

#[derive(Deserialize)]
struct AskBody {
    question: String,
}

#[derive(Deserialize)]
struct AmendBody {
    instruction: String,
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error(status: StatusCode, message: impl std::fmt::Display) -> Response {
    json_response(status, json!({ "error": message.to_string() }).to_string())
}

fn dialogue_error(e: DialogueError) -> Response {
    let status = match &e {
        DialogueError::UnknownSession(_) => StatusCode::NOT_FOUND,
        DialogueError::BudgetExhausted { .. } | DialogueError::NothingToAmend => StatusCode::CONFLICT,
        DialogueError::Llm(_) => StatusCode::BAD_GATEWAY,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    };
    error(status, e)
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, Response> {
    serde_json::from_slice(body).map_err(|e| error(StatusCode::UNPROCESSABLE_ENTITY, format!("invalid body: {e}")))
}

async fn run_step(state: Arc<AppState>, id: String, action: Action) -> Response {
    let result = tokio::task::spawn_blocking(move || state.step(&id, &action)).await;
    match result {
        Ok(Ok((line, failed))) => {
            let status = if failed { StatusCode::BAD_GATEWAY } else { StatusCode::OK };
            json_response(status, line)
        }
        Ok(Err(e)) => dialogue_error(e),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e),
    }
}

async fn create_session(State(state): State<Arc<AppState>>) -> Response {
    match state.create_session() {
        Ok(id) => json_response(StatusCode::CREATED, json!({ "id": id }).to_string()),
        Err(e) => dialogue_error(e),
    }
}

async fn ask(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> Response {
    let body: AskBody = match parse_body(&body) {
        Ok(b) => b,
        Err(r) => return r,
    };
    if body.question.trim().is_empty() {
        return error(StatusCode::UNPROCESSABLE_ENTITY, "question must not be empty");
    }
    run_step(state, id, Action::Ask(body.question)).await
}

async fn amend(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> Response {
    let body: AmendBody = match parse_body(&body) {
        Ok(b) => b,
        Err(r) => return r,
    };
    if body.instruction.trim().is_empty() {
        return error(StatusCode::UNPROCESSABLE_ENTITY, "instruction must not be empty");
    }
    run_step(state, id, Action::Amend(body.instruction)).await
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let result = tokio::task::spawn_blocking(move || {
        let handle = state.session(&id)?;
        let session = handle.lock().unwrap();
        serde_json::to_string(&*session).map_err(|e| DialogueError::Store(e.to_string()))
    })
    .await;
    match result {
        Ok(Ok(body)) => json_response(StatusCode::OK, body),
        Ok(Err(e)) => dialogue_error(e),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e),
    }
}

async fn get_schema(State(state): State<Arc<AppState>>, Path(name): Path<String>) -> Response {
    let schema = if name == state.schema.name {
        Ok(state.schema.clone())
    } else if PRESETS.contains(&name.as_str()) {
        preset(&name)
    } else {
        return error(StatusCode::NOT_FOUND, format!("unknown schema `{name}`"));
    };
    match schema {
        Ok(s) => json_response(
            StatusCode::OK,
            json!({ "name": s.name, "block": s.prompt_block() }).to_string(),
        ),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e),
    }
}

async fn health() -> Response {
    json_response(StatusCode::OK, json!({ "status": "ok" }).to_string())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/ask", post(ask))
        .route("/sessions/{id}/amend", post(amend))
        .route("/schemas/{name}", get(get_schema))
        .with_state(state)
}

/// Binds the configured address and serves until the process is stopped.
pub fn serve(state: AppState) -> anyhow::Result<()> {
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    let listen = state.config.listen.clone();
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&listen).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router(Arc::new(state))).await?;
        Ok(())
    })
}
