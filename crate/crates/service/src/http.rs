//! HTTP/JSON front end.
//!
//! | method | path                       | body                    |
//! |--------|----------------------------|-------------------------|
//! | POST   | `/sessions`                | `SessionConfig` JSON    |
//! | GET    | `/sessions/{id}`           |                         |
//! | POST   | `/sessions/{id}/moves`     | `{"cell": 1-9}`         |
//! | POST   | `/sessions/{id}/images`    | PGM (P5) or PPM (P6)    |
//! | GET    | `/sessions/{id}/telemetry` | `?from=N` cursor, NDJSON|
//!
//! Errors come back as `{"error": "<code>", "detail": "..."}`.

use std::convert::Infallible;
use std::sync::Arc;
use std::time::Duration;

use axum::body::{Body, Bytes};
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream};
use serde::Deserialize;
use swarmplay_core::sim::{TelemetryRecord, TICK_SECONDS};
use swarmplay_core::vision::VisionError;
use swarmplay_core::Cell;

use crate::error::ServiceError;
use crate::session::{MoveOutcome, SessionConfig, SessionView};
use crate::store::{SessionHandle, SessionStore};

pub type AppState = Arc<SessionStore>;

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ServiceError::OccupiedCell(_) | ServiceError::OutOfTurn(_) | ServiceError::GameOver => {
                StatusCode::CONFLICT
            }
            ServiceError::Vision(VisionError::InvalidImage(_) | VisionError::InvalidConfig(_)) => {
                StatusCode::BAD_REQUEST
            }
            ServiceError::Vision(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Flight(_) | ServiceError::Strategy(_) | ServiceError::Internal(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
            _ => StatusCode::BAD_REQUEST,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({ "error": self.code(), "detail": self.to_string() });
        (self.status(), Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ServiceError>;

fn json_body<T>(body: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    body.map(|Json(v)| v).map_err(|e| ServiceError::BadRequest(e.body_text()))
}

async fn create_session(
    State(store): State<AppState>,
    body: Result<Json<SessionConfig>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionView>), ServiceError> {
    let cfg = json_body(body)?;
    Ok((StatusCode::CREATED, Json(store.create(cfg)?)))
}

async fn get_session(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<SessionView> {
    Ok(Json(store.view(&id)?))
}

#[derive(Deserialize)]
struct MoveRequest {
    cell: i64,
}

async fn post_move(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<MoveRequest>, JsonRejection>,
) -> ApiResult<MoveOutcome> {
    let req = json_body(body)?;
    let cell = Cell::new(req.cell).map_err(|_| ServiceError::InvalidCell(req.cell))?;
    Ok(Json(store.submit_move(&id, cell)?))
}

async fn post_image(State(store): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<MoveOutcome> {
    Ok(Json(store.submit_image(&id, &body)?))
}

#[derive(Deserialize)]
struct Cursor {
    #[serde(default)]
    from: usize,
}

fn ndjson_line(rec: &TelemetryRecord) -> Bytes {
    let mut line = serde_json::to_vec(rec).expect("telemetry always serializes");
    line.push(b'\n');
    Bytes::from(line)
}

/// Backlog from the cursor, then live records until the session closes.
fn telemetry_stream(handle: Arc<SessionHandle>, from: usize) -> impl Stream<Item = Result<Bytes, Infallible>> {
    let pace = handle.realtime().then(|| Duration::from_secs_f64(TICK_SECONDS));
    let progress = handle.subscribe();
    let state = (handle, progress, from, Vec::<TelemetryRecord>::new().into_iter(), false);
    stream::unfold(state, move |(handle, mut progress, mut cursor, mut pending, mut closed)| async move {
        loop {
            if let Some(rec) = pending.next() {
                if let Some(d) = pace {
                    tokio::time::sleep(d).await;
                }
                return Some((Ok(ndjson_line(&rec)), (handle, progress, cursor, pending, closed)));
            }
            if closed {
                return None;
            }
            progress.borrow_and_update();
            let (records, done) = handle.telemetry_since(cursor);
            cursor += records.len();
            pending = records.into_iter();
            closed = done;
            if pending.len() == 0 && !closed && progress.changed().await.is_err() {
                return None;
            }
        }
    })
}

async fn get_telemetry(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Query(cursor): Query<Cursor>,
) -> Result<Response, ServiceError> {
    let handle = store.handle(&id)?;
    let body = Body::from_stream(telemetry_stream(handle, cursor.from));
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response())
}

async fn health() -> &'static str {
    "ok"
}

pub fn router(store: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/moves", post(post_move))
        .route("/sessions/{id}/images", post(post_image))
        .route("/sessions/{id}/telemetry", get(get_telemetry))
        .with_state(store)
}
