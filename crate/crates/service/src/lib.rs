//! What-if prediction service over trained artifacts.
//!
//! Endpoints:
//! - `POST /api/v1/predict/hindex` future h-index of an author profile
//! - `POST /api/v1/predict/paper` probability that a paper raises its
//!   primary author's h-index
//! - `GET /api/v1/health` loaded artifact versions; 503 while incomplete
//!
//! Anything else is served from the static UI directory when one is given.

pub mod api;
pub mod artifacts;
mod error;

use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use tower_http::services::ServeDir;

pub use api::{
    health, predict_hindex, predict_paper, AuthorDescriptor, HIndexQuery, HIndexResponse, HealthResponse,
    ManualProfile, PaperQuery, PaperResponse, PrimaryAuthor, VenueDescriptor,
};
pub use artifacts::{Artifacts, Classifier, LoadedModel, ModelVersions, ServeConfig, MAX_HORIZON};
pub use error::ApiError;

type Shared = Arc<Artifacts>;

async fn hindex_handler(State(a): State<Shared>, body: Bytes) -> Result<Json<HIndexResponse>, ApiError> {
    let q = HIndexQuery::from_json(&body)?;
    predict_hindex(&a, &q).map(Json)
}

async fn paper_handler(State(a): State<Shared>, body: Bytes) -> Result<Json<PaperResponse>, ApiError> {
    let q = PaperQuery::from_json(&body)?;
    tokio::task::spawn_blocking(move || predict_paper(&a, &q))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map(Json)
}

async fn health_handler(State(a): State<Shared>) -> Response {
    let body = health(&a);
    let status = if a.is_complete() {
        StatusCode::OK
    } else {
        StatusCode::SERVICE_UNAVAILABLE
    };
    (status, Json(body)).into_response()
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route")
}

pub fn router(artifacts: Shared, static_dir: Option<&Path>) -> Router {
    let app = Router::new()
        .route("/api/v1/predict/hindex", post(hindex_handler))
        .route("/api/v1/predict/paper", post(paper_handler))
        .route("/api/v1/health", get(health_handler))
        .with_state(artifacts);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.fallback(not_found),
    }
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(artifacts: Artifacts, addr: SocketAddr, static_dir: Option<&Path>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(artifacts), static_dir)).await
}
