//! HTTP reward service.
//!
//! `POST /v1/score` scores a batch of raw responses against records held
//! server-side; `GET /v1/health` reports the loaded dataset. Responses are a
//! pure function of the request body and the dataset.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};
use timt_core::{RewardBreakdown, RewardMode, TaskLayout};

use crate::score::{score_one, ScoreError};
use crate::Dataset;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreItem {
    pub record_id: String,
    pub raw_response: String,
}

/// Layout and mode arrive as strings so that unknown names can be reported
/// as 422 naming the field rather than as a JSON error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRequest {
    pub records: Vec<ScoreItem>,
    pub layout: String,
    pub reward_mode: String,
    pub dataset_ref: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub dataset: String,
    pub records: usize,
    pub version: String,
}

#[derive(Debug)]
pub struct AppState {
    dataset: Dataset,
    failures: AtomicU64,
}

impl AppState {
    pub fn new(dataset: Dataset) -> Arc<Self> {
        Arc::new(AppState {
            dataset,
            failures: AtomicU64::new(0),
        })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/v1/score", post(score))
        .route("/v1/health", get(health))
        .with_state(state)
}

fn json(status: StatusCode, body: Vec<u8>) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error(status: StatusCode, body: ErrorBody) -> Response {
    json(
        status,
        serde_json::to_vec(&body).expect("error body serializes"),
    )
}

fn unprocessable(field: impl Into<String>, message: impl Into<String>) -> Response {
    error(
        StatusCode::UNPROCESSABLE_ENTITY,
        ErrorBody {
            error: message.into(),
            field: Some(field.into()),
            id: None,
        },
    )
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    let body = Health {
        status: "ok".into(),
        dataset: state.dataset.name.clone(),
        records: state.dataset.len(),
        version: env!("CARGO_PKG_VERSION").into(),
    };
    json(
        StatusCode::OK,
        serde_json::to_vec(&body).expect("health serializes"),
    )
}

async fn score(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let request: ScoreRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => {
            return error(
                StatusCode::BAD_REQUEST,
                ErrorBody {
                    error: format!("malformed request: {e}"),
                    field: None,
                    id: None,
                },
            )
        }
    };
    let layout: TaskLayout = match request.layout.parse() {
        Ok(l) => l,
        Err(_) => return unprocessable("layout", format!("unknown layout `{}`", request.layout)),
    };
    let mode: RewardMode = match request.reward_mode.parse() {
        Ok(m) => m,
        Err(_) => {
            return unprocessable(
                "reward_mode",
                format!("unknown reward mode `{}`", request.reward_mode),
            )
        }
    };
    if request.dataset_ref != state.dataset.name {
        return unprocessable(
            "dataset_ref",
            format!("unknown dataset `{}`", request.dataset_ref),
        );
    }
    if let Some((i, item)) = request
        .records
        .iter()
        .enumerate()
        .find(|(_, item)| state.dataset.get(&item.record_id).is_none())
    {
        return unprocessable(
            format!("records[{i}].record_id"),
            format!("unknown record_id `{}`", item.record_id),
        );
    }

    let scored: Result<Vec<RewardBreakdown>, ScoreError> = request
        .records
        .iter()
        .enumerate()
        .map(|(i, item)| {
            score_one(
                &state.dataset,
                i,
                &item.record_id,
                &item.raw_response,
                layout,
                &mode,
            )
        })
        .collect();
    match scored
        .map_err(|e| e.to_string())
        .and_then(|b| serde_json::to_vec(&b).map_err(|e| e.to_string()))
    {
        Ok(body) => json(StatusCode::OK, body),
        Err(detail) => {
            let id = format!(
                "score-{:08x}",
                state.failures.fetch_add(1, Ordering::Relaxed)
            );
            tracing::error!(%id, %detail, "scoring failed");
            error(
                StatusCode::INTERNAL_SERVER_ERROR,
                ErrorBody {
                    error: "internal scoring failure".into(),
                    field: None,
                    id: Some(id),
                },
            )
        }
    }
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(dataset: Dataset, addr: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, dataset = %dataset.name, records = dataset.len(), "serving");
    axum::serve(listener, router(AppState::new(dataset))).await
}
