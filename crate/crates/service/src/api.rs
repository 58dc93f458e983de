//! HTTP routes.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use change_core::trace::EventRecord;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

use crate::session::{self, CreateRequest, Session, SessionError, StateView};
use crate::settings::Settings;
use crate::store::{Store, StoreError};

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
    pub details: Vec<String>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>, details: Vec<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                code,
                message: message.into(),
                details,
            },
        }
    }

    fn not_found(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no session `{id}`"), vec![])
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::Invalid { message, details } => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid", message, details)
            }
            SessionError::Conflict(m) => ApiError::new(StatusCode::CONFLICT, "conflict", m, vec![]),
            SessionError::Corrupt(m) => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "corrupt", m, vec![])
            }
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        tracing::error!("storage failure: {e}");
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage", e.to_string(), vec![])
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| {
        ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid",
            "malformed request body",
            vec![e.to_string()],
        )
    })
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

fn new_id() -> String {
    format!("{:032x}", rand::random::<u128>())
}

/// Shared service state: the store plus one lock per session, so commands on
/// a session are serialized while distinct sessions proceed in parallel.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    settings: Settings,
    store: Store,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("session {id}: {source}")]
    Replay {
        id: String,
        #[source]
        source: SessionError,
    },
}

impl AppState {
    /// Opens the data directory and replays every stored session.
    pub fn open(settings: Settings) -> Result<Self, StartupError> {
        let store = Store::open(&settings.data_dir)?;
        let mut sessions = HashMap::new();
        for id in store.ids()? {
            let trace = store.load(&id)?;
            let s = Session::replay(&id, trace.events()).map_err(|source| StartupError::Replay {
                id: id.clone(),
                source,
            })?;
            sessions.insert(id, Arc::new(Mutex::new(s)));
        }
        Ok(AppState {
            inner: Arc::new(Inner {
                settings,
                store,
                sessions: RwLock::new(sessions),
            }),
        })
    }

    pub fn store(&self) -> &Store {
        &self.inner.store
    }

    fn session(&self, id: &str) -> ApiResult<Arc<Mutex<Session>>> {
        self.inner
            .sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    /// Runs a command under the session lock on a blocking thread, persists
    /// its events, and only then publishes the new state.
    async fn command<T, F>(&self, id: &str, f: F) -> ApiResult<T>
    where
        T: Send + 'static,
        F: FnOnce(&Session, u64) -> Result<(Session, Vec<EventRecord>, T), SessionError> + Send + 'static,
    {
        let entry = self.session(id)?;
        let mut guard = entry.lock_owned().await;
        let store = self.inner.store.clone();
        let id = id.to_string();
        tokio::task::spawn_blocking(move || {
            let (next, records, out) = f(&guard, now_ms())?;
            store.append(&id, &records)?;
            *guard = next;
            Ok(out)
        })
        .await
        .map_err(|e| {
            ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string(), vec![])
        })?
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_state))
        .route("/sessions/{id}/next-query", get(next_query))
        .route("/sessions/{id}/query-result", post(query_result))
        .route("/sessions/{id}/plan-stage", post(plan_stage))
        .route("/sessions/{id}/attendance", post(attendance))
        .with_state(state)
}

async fn create_session(State(app): State<AppState>, body: Bytes) -> ApiResult<(StatusCode, Json<StateView>)> {
    let req: CreateRequest = parse_body(&body)?;
    let (roster, config) = session::resolve_config(&req, &app.inner.settings.budgets)?;
    let id = new_id();
    let (s, rec) = Session::create(&id, now_ms(), &roster, &config)?;
    let store = app.inner.store.clone();
    let sid = id.clone();
    tokio::task::spawn_blocking(move || store.create(&sid, &[rec]))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string(), vec![]))??;
    let view = s.view();
    app.inner
        .sessions
        .write()
        .expect("session map lock")
        .insert(id, Arc::new(Mutex::new(s)));
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_state(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<StateView>> {
    let entry = app.session(&id)?;
    let view = entry.lock().await.view();
    Ok(Json(view))
}

async fn next_query(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<session::NextQuery>> {
    app.command(&id, |s, ts| s.next_query(ts)).await.map(Json)
}

#[derive(Debug, Deserialize)]
struct QueryResultBody {
    respondent: String,
    #[serde(default)]
    contacts: Vec<String>,
}

async fn query_result(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<session::AnswerView>> {
    let b: QueryResultBody = parse_body(&body)?;
    app.command(&id, move |s, ts| s.post_query_result(ts, &b.respondent, &b.contacts))
        .await
        .map(Json)
}

async fn plan_stage(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<session::PlanView>> {
    app.command(&id, |s, ts| s.plan_next_stage(ts)).await.map(Json)
}

#[derive(Debug, Deserialize)]
struct AttendanceBody {
    attended: Vec<String>,
}

async fn attendance(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<StateView>> {
    let b: AttendanceBody = parse_body(&body)?;
    app.command(&id, move |s, ts| s.post_attendance(ts, &b.attended))
        .await
        .map(Json)
}
