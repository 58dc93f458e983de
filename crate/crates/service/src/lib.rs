//! HTTP service for running an intervention live.
//!
//! A coordinator creates a session from a roster of opaque tokens, asks whom
//! to interview next, reports each respondent's contacts, then alternates
//! between planning a stage and reporting who attended. Every accepted
//! command is appended to the session's event file and synced before the
//! response goes out; on startup each file is replayed to rebuild state.
//!
//! | method | path | effect |
//! |---|---|---|
//! | `POST` | `/sessions` | create from `{roster, config}` |
//! | `GET` | `/sessions/{id}` | state snapshot |
//! | `GET` | `/sessions/{id}/next-query` | next interview target |
//! | `POST` | `/sessions/{id}/query-result` | `{respondent, contacts}` |
//! | `POST` | `/sessions/{id}/plan-stage` | invitations for the current stage |
//! | `POST` | `/sessions/{id}/attendance` | `{attended}` |
//!
//! Errors are `{code, message, details}` with 404, 409 (wrong status) or 422
//! (invalid input).

pub mod api;
pub mod session;
pub mod settings;
pub mod store;

pub use api::{router, AppState};
pub use settings::Settings;

/// Binds and serves until the listener fails.
pub async fn serve(settings: Settings) -> std::io::Result<()> {
    let bind = settings.bind;
    let state = AppState::open(settings).map_err(std::io::Error::other)?;
    let listener = tokio::net::TcpListener::bind(bind).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
