//! HTTP evaluation service. The model and resources are loaded once and
//! shared read-only between requests.

use std::sync::{Arc, OnceLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use sopcheck_core::features::FeatureResources;
use sopcheck_core::model::TrainedModel;

/// Longest accepted essay, in characters.
pub const MAX_TEXT_CHARS: usize = 100_000;

/// Request bodies above this many bytes are refused before parsing. Four
/// bytes per character plus room for the JSON envelope.
const MAX_BODY_BYTES: usize = 4 * MAX_TEXT_CHARS + 4096;

pub struct Loaded {
    pub model: TrainedModel,
    pub resources: FeatureResources,
}

/// Outcome of startup loading.
pub enum Readiness {
    Ready(Box<Loaded>),
    Failed(String),
}

/// Shared service state; empty until loading finishes.
#[derive(Clone, Default)]
pub struct AppState {
    slot: Arc<OnceLock<Readiness>>,
}

impl AppState {
    pub fn loading() -> Self {
        AppState::default()
    }

    pub fn ready(model: TrainedModel, resources: FeatureResources) -> Self {
        let state = AppState::default();
        state.finish(Readiness::Ready(Box::new(Loaded { model, resources })));
        state
    }

    /// Records the loading outcome. Later calls are ignored.
    pub fn finish(&self, outcome: Readiness) {
        let _ = self.slot.set(outcome);
    }

    fn readiness(&self) -> Option<&Readiness> {
        self.slot.get()
    }
}

#[derive(Debug, Deserialize)]
pub struct EvaluateRequest {
    pub text: String,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct Health {
    pub status: String,
    pub model_id: Option<String>,
    pub feature_config_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(serde_json::json!({ "error": message.into() }))).into_response()
}

async fn health(State(state): State<AppState>) -> Json<Health> {
    let h = match state.readiness() {
        None => Health {
            status: "loading".into(),
            model_id: None,
            feature_config_hash: None,
            error: None,
        },
        Some(Readiness::Ready(l)) => Health {
            status: "ok".into(),
            model_id: Some(l.model.model_id.clone()),
            feature_config_hash: Some(l.model.config_hash.clone()),
            error: None,
        },
        Some(Readiness::Failed(e)) => Health {
            status: "error".into(),
            model_id: None,
            feature_config_hash: None,
            error: Some(e.clone()),
        },
    };
    Json(h)
}

/// Checks a request body. Errors carry the status to answer with.
pub fn validate_request(
    body: Result<EvaluateRequest, (StatusCode, String)>,
) -> Result<String, (StatusCode, String)> {
    let req = body?;
    if req.text.trim().is_empty() {
        return Err((StatusCode::UNPROCESSABLE_ENTITY, "text must not be empty".into()));
    }
    let chars = req.text.chars().count();
    if chars > MAX_TEXT_CHARS {
        return Err((
            StatusCode::PAYLOAD_TOO_LARGE,
            format!("text has {chars} characters; the limit is {MAX_TEXT_CHARS}"),
        ));
    }
    Ok(req.text)
}

fn rejection_status(r: &JsonRejection) -> StatusCode {
    match r {
        JsonRejection::BytesRejection(_) => StatusCode::PAYLOAD_TOO_LARGE,
        JsonRejection::MissingJsonContentType(_) => StatusCode::UNSUPPORTED_MEDIA_TYPE,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

async fn evaluate(State(state): State<AppState>, body: Result<Json<EvaluateRequest>, JsonRejection>) -> Response {
    let body = body.map(|Json(b)| b).map_err(|r| (rejection_status(&r), r.body_text()));
    let loaded = match state.readiness() {
        Some(Readiness::Ready(_)) => state.clone(),
        Some(Readiness::Failed(e)) => return error(StatusCode::SERVICE_UNAVAILABLE, format!("model failed to load: {e}")),
        None => return error(StatusCode::SERVICE_UNAVAILABLE, "model is loading"),
    };
    let text = match validate_request(body) {
        Ok(t) => t,
        Err((status, m)) => return error(status, m),
    };
    // Feature extraction is CPU-bound; keep it off the async workers.
    let result = tokio::task::spawn_blocking(move || match loaded.readiness() {
        Some(Readiness::Ready(l)) => l.model.evaluate(&text, &l.resources),
        _ => unreachable!("readiness never goes back"),
    })
    .await;
    match result {
        Ok(Ok(response)) => Json(response).into_response(),
        Ok(Err(e)) => error(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, format!("evaluation task failed: {e}")),
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/evaluate", post(evaluate))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(state)
}

/// Binds, then loads the model in the background so health answers
/// `loading` meanwhile.
pub async fn serve(
    addr: &str,
    load: impl FnOnce() -> Result<Loaded, String> + Send + 'static,
) -> std::io::Result<()> {
    let state = AppState::loading();
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    let loader = state.clone();
    tokio::task::spawn_blocking(move || {
        let outcome = match load() {
            Ok(l) => {
                log::info!("model {} ready", l.model.model_id);
                Readiness::Ready(Box::new(l))
            }
            Err(e) => {
                log::error!("model failed to load: {e}");
                Readiness::Failed(e)
            }
        };
        loader.finish(outcome);
    });
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
