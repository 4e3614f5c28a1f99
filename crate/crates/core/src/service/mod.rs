//! HTTP service for live sessions played by people.
//!
//! Bodies are JSON. Routes:
//!
//! | method | path                     | body                                              |
//! |--------|--------------------------|---------------------------------------------------|
//! | POST   | `/sessions`              | `{"experiment":1,"condition":"dense","subject":"p01"}` |
//! | POST   | `/sessions/{id}/actions` | `{"action":"forward"}`                            |
//! | POST   | `/sessions/{id}/advance` | none                                              |
//! | GET    | `/sessions/{id}`         | none                                              |
//! | GET    | `/sessions/{id}/export`  | none                                              |
//! | GET    | `/mazes/{id}`            | none                                              |
//!
//! Errors come back as `{"error": "..."}` with status 404 (unknown session
//! or maze), 400 (malformed request) or 409 (wrong session status).

mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::TrajectoryRecord;
use crate::maze::Heading;
use crate::protocol::{builtin_maze, Condition, ProtocolError, SessionLog};

pub use store::{LiveSession, SessionStore};

/// Milliseconds since the Unix epoch. Injected so tests control time.
pub trait Clock: Send + Sync {
    fn now_ms(&self) -> u64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
    }
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Internal(String),
}

impl From<ProtocolError> for ServiceError {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::UnknownExperiment(_) | ProtocolError::UnknownCondition(_) | ProtocolError::BadCondition { .. } => {
                ServiceError::BadRequest(e.to_string())
            }
            other => ServiceError::Internal(other.to_string()),
        }
    }
}

impl From<std::io::Error> for ServiceError {
    fn from(e: std::io::Error) -> Self {
        ServiceError::Internal(e.to_string())
    }
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Conflict(_) => StatusCode::CONFLICT,
            ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        (self.status(), Json(serde_json::json!({ "error": self.to_string() }))).into_response()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Active,
    PhaseComplete,
    Finished,
}

impl SessionStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SessionStatus::Active => "active",
            SessionStatus::PhaseComplete => "phase_complete",
            SessionStatus::Finished => "finished",
        }
    }
}

/// What the player may see: the line-of-sight cells from the current pose,
/// never the whole layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub status: SessionStatus,
    pub experiment: u8,
    pub condition: Condition,
    pub phase: String,
    pub phase_index: usize,
    pub phase_count: usize,
    pub goal_active: bool,
    pub maze_width: usize,
    pub maze_height: usize,
    /// Latest trajectory record.
    pub pose: TrajectoryRecord,
    pub visible_cells: Vec<[i32; 2]>,
    pub open_directions: Vec<Heading>,
    pub goal_visible: Option<[i32; 2]>,
    pub apples_visible: Vec<[i32; 2]>,
    pub on_goal: bool,
    pub transitions: usize,
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepView {
    #[serde(flatten)]
    pub view: SessionView,
    pub entered_cell: Option<[i32; 2]>,
    pub apples_consumed: Vec<[i32; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CreateRequest {
    pub experiment: u8,
    #[serde(default)]
    pub condition: Option<String>,
    #[serde(default = "anonymous")]
    pub subject: String,
}

fn anonymous() -> String {
    "anonymous".to_string()
}

#[derive(Debug, Clone, Deserialize)]
pub struct ActionRequest {
    pub action: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MazeDocument {
    pub id: String,
    pub width: usize,
    pub height: usize,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub listen: SocketAddr,
}

pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/actions", post(submit_action))
        .route("/sessions/{id}/advance", post(advance_phase))
        .route("/sessions/{id}/export", get(export_session))
        .route("/mazes/{id}", get(get_maze))
        .with_state(store)
}

type Store = State<Arc<SessionStore>>;

fn parse_json<T: serde::de::DeserializeOwned>(body: &str) -> Result<T, ServiceError> {
    serde_json::from_str(body).map_err(|e| ServiceError::BadRequest(format!("malformed body: {e}")))
}

async fn create_session(State(store): Store, body: String) -> Result<(StatusCode, Json<SessionView>), ServiceError> {
    let req: CreateRequest = parse_json(&body)?;
    let view = store.create(req.experiment, req.condition.as_deref(), &req.subject)?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn submit_action(State(store): Store, Path(id): Path<String>, body: String) -> Result<Json<StepView>, ServiceError> {
    let req: ActionRequest = parse_json(&body)?;
    store.submit(&id, &req.action).map(Json)
}

async fn advance_phase(State(store): Store, Path(id): Path<String>) -> Result<Json<SessionView>, ServiceError> {
    store.advance(&id).map(Json)
}

async fn get_session(State(store): Store, Path(id): Path<String>) -> Result<Json<SessionView>, ServiceError> {
    store.view(&id).map(Json)
}

async fn export_session(State(store): Store, Path(id): Path<String>) -> Result<Json<SessionLog>, ServiceError> {
    store.export(&id).map(Json)
}

async fn get_maze(Path(id): Path<String>) -> Result<Json<MazeDocument>, ServiceError> {
    let design = builtin_maze(&id).ok_or_else(|| ServiceError::NotFound(format!("no maze {id}")))?;
    let maze = design.parse()?;
    Ok(Json(MazeDocument { id: design.id, width: maze.width(), height: maze.height(), text: design.text }))
}

/// Binds `config.listen` and serves until ctrl-c.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let (store, skipped) = SessionStore::open(&config.data_dir, Arc::new(SystemClock))?;
    for e in skipped {
        eprintln!("skipping session: {e}");
    }
    eprintln!("{} session(s) restored from {}", store.len(), config.data_dir.display());
    let listener = tokio::net::TcpListener::bind(config.listen).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(store)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
