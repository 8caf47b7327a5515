//! HTTP face of the oracle queue for the review UI.

use std::path::Path;

use axum::extract::{Path as UrlPath, State};
use axum::http::{header, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cyberrel::oracle::{Answer, OracleError, OracleQueue};
use serde::Deserialize;
use tower_http::cors::{Any, CorsLayer};
use tower_http::services::ServeDir;

#[derive(Debug, Deserialize)]
struct AnswerBody {
    answer: Answer,
}

fn error(status: StatusCode, message: String) -> Response {
    (status, Json(serde_json::json!({ "error": message }))).into_response()
}

async fn pending(State(queue): State<OracleQueue>) -> Response {
    Json(queue.pending()).into_response()
}

async fn answer(State(queue): State<OracleQueue>, UrlPath(id): UrlPath<String>, Json(body): Json<AnswerBody>) -> Response {
    match queue.answer(&id, body.answer) {
        Ok(()) => Json(queue.get(&id)).into_response(),
        Err(e @ (OracleError::UnknownId(_) | OracleError::NotPending(_))) => error(StatusCode::NOT_FOUND, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn state(State(queue): State<OracleQueue>) -> Response {
    Json(queue.snapshot()).into_response()
}

/// Routes of the review service. Static UI assets are served under `/ui`
/// when a directory is given.
pub fn router(queue: OracleQueue, ui_dir: Option<&Path>) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    let mut app = Router::new()
        .route("/api/queries/pending", get(pending))
        .route("/api/queries/{id}/answer", post(answer))
        .route("/api/state", get(state))
        .with_state(queue);
    if let Some(dir) = ui_dir {
        app = app.nest_service("/ui", ServeDir::new(dir));
    }
    app.layer(cors)
}
