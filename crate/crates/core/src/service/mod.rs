//! Local HTTP service backing interactive threshold calibration.
//!
//! | method | path | body | response |
//! |---|---|---|---|
//! | GET | `/api/images` | | JSON list of `{id, name, width, height}` |
//! | GET | `/api/images/{id}` | | PNG of the stored image |
//! | POST | `/api/mask` | `{image_id, ranges, ssr, fusion}` | `image/png` pre-clustering mask |
//! | POST | `/api/analyze` | pipeline config + `image_id` | report JSON |
//! | GET/PUT | `/api/config` | pipeline config | session config JSON |
//!
//! Everything else is served from the static UI directory, if one is given.

mod state;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use tower_http::services::ServeDir;

pub use state::{
    image_id, AnalyzeRequest, CalibState, ImageSummary, MaskRequest, ServiceError, StoredImage,
};

use crate::imaging::encode_rgb_png;
use crate::pipeline::ConfigError;

const PLACEHOLDER_INDEX: &str = "<!doctype html>
<html><head><meta charset=\"utf-8\"><title>corroscan calibration</title></head>
<body>
<h1>corroscan calibration service</h1>
<p>No UI bundle is being served. Start with <code>--static-dir</code> pointing at a built UI,
or use the JSON API under <code>/api</code>.</p>
</body></html>
";

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        match self {
            ServiceError::NotFound(id) => (
                StatusCode::NOT_FOUND,
                Json(serde_json::json!({ "error": format!("unknown image id `{id}`") })),
            )
                .into_response(),
            ServiceError::BadRequest(err) => (
                StatusCode::BAD_REQUEST,
                Json(serde_json::json!({ "error": err.to_string(), "issues": err.issues })),
            )
                .into_response(),
            ServiceError::Internal(msg) => (
                StatusCode::INTERNAL_SERVER_ERROR,
                Json(serde_json::json!({ "error": msg })),
            )
                .into_response(),
        }
    }
}

fn parse_body<T: DeserializeOwned>(body: &[u8]) -> Result<T, ServiceError> {
    serde_json::from_slice(body)
        .map_err(|e| ServiceError::BadRequest(ConfigError::single("<json>", e.to_string())))
}

fn png(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "image/png")], bytes).into_response()
}

fn json_text(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn list_images(State(state): State<Arc<CalibState>>) -> Json<Vec<ImageSummary>> {
    Json(state.list_images())
}

async fn get_image(
    State(state): State<Arc<CalibState>>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    let stored = state.image(&id)?;
    Ok(png(encode_rgb_png(&stored.image)))
}

async fn post_mask(State(state): State<Arc<CalibState>>, body: Bytes) -> Result<Response, ServiceError> {
    let req: MaskRequest = parse_body(&body)?;
    let bytes = tokio::task::spawn_blocking(move || state.preview_mask(&req))
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))??;
    Ok(png(bytes))
}

async fn post_analyze(State(state): State<Arc<CalibState>>, body: Bytes) -> Result<Response, ServiceError> {
    let req: AnalyzeRequest = parse_body(&body)?;
    let report = tokio::task::spawn_blocking(move || state.analyze_now(&req.image_id, &req.config))
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))??;
    Ok(json_text(report.to_json()))
}

async fn get_config(State(state): State<Arc<CalibState>>) -> Response {
    json_text(state.export_config())
}

async fn put_config(State(state): State<Arc<CalibState>>, body: Bytes) -> Result<Response, ServiceError> {
    let text = std::str::from_utf8(&body)
        .map_err(|e| ServiceError::BadRequest(ConfigError::single("<body>", e.to_string())))?;
    let cfg = state.import_config(text)?;
    Ok(json_text(cfg.to_json()))
}

/// Builds the application router.
pub fn router(state: Arc<CalibState>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/images", get(list_images))
        .route("/api/images/{id}", get(get_image))
        .route("/api/mask", post(post_mask))
        .route("/api/analyze", post(post_analyze))
        .route("/api/config", get(get_config).put(put_config))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(PLACEHOLDER_INDEX) })),
    }
}

/// Serves until the process is interrupted.
pub async fn serve(state: Arc<CalibState>, addr: SocketAddr, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("calibration service listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state, static_dir)).await
}
