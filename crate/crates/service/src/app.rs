//! Routes and shared state.

use std::sync::{Arc, RwLock};
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderValue, Method as HttpMethod, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use log::{error, info};
use meshsuggest_core::embeddings::EncodeError;
use meshsuggest_core::http::Transport;
use meshsuggest_core::pubmed::{PubmedClient, SystemClock};
use meshsuggest_core::suggest::{LoadError, MethodRegistry, SuggestError, SuggestionRequest};
use meshsuggest_core::Resources;
use serde_json::json;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::config::ServiceConfig;
use crate::log::EventLog;
use crate::wire::{method_for, ApiGroup, ApiSuggestionRequest, InteractionEvent, MAX_TERMS};

/// Fused candidates kept per keyword before the per-group cut.
pub const INTERPOLATION_DEPTH: usize = 20;

const NEURAL_TYPES: [&str; 3] = ["Semantic", "Atomic", "Fragment"];
const LEXICAL_TYPES: [&str; 3] = ["ATM", "MetaMap", "UMLS"];

enum Loaded {
    Pending,
    Ready(Arc<Resources>),
    Failed(String),
}

pub struct AppState {
    config: ServiceConfig,
    transport: Arc<dyn Transport>,
    registry: MethodRegistry,
    resources: RwLock<Loaded>,
    log: EventLog,
}

impl AppState {
    /// Opens the interaction log; resources stay unloaded until
    /// [`AppState::load`].
    pub fn new(config: ServiceConfig, transport: Arc<dyn Transport>) -> std::io::Result<Arc<Self>> {
        let log = EventLog::open(&config.log_path)?;
        Ok(Arc::new(Self {
            config,
            transport,
            registry: MethodRegistry::new(),
            resources: RwLock::new(Loaded::Pending),
            log,
        }))
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    /// Loads (or reloads) every configured resource. Blocks; on failure the
    /// previous resources stay in service.
    pub fn load(&self) -> Result<(), LoadError> {
        let result = self.config.resources.load(self.transport.clone());
        let mut slot = self.resources.write().unwrap_or_else(|p| p.into_inner());
        match result {
            Ok(mut res) => {
                if let (true, Some(email)) = (self.config.lexical_types, &self.config.email) {
                    let client = PubmedClient::from_env(
                        self.transport.clone(),
                        Arc::new(SystemClock::new()),
                    );
                    res = res.with_pubmed(Arc::new(client), email);
                }
                info!("loaded {} MeSH terms", res.vocab().len());
                *slot = Loaded::Ready(Arc::new(res));
                Ok(())
            }
            Err(e) => {
                error!("loading resources: {e}");
                if !matches!(*slot, Loaded::Ready(_)) {
                    *slot = Loaded::Failed(e.to_string());
                }
                Err(e)
            }
        }
    }

    fn current(&self) -> Result<Arc<Resources>, String> {
        match &*self.resources.read().unwrap_or_else(|p| p.into_inner()) {
            Loaded::Ready(r) => Ok(r.clone()),
            Loaded::Pending => Err("resources are still loading".into()),
            Loaded::Failed(e) => Err(format!("resources failed to load: {e}")),
        }
    }

    fn types(&self) -> Vec<&'static str> {
        let mut t = NEURAL_TYPES.to_vec();
        if self.config.lexical_types {
            t.extend(LEXICAL_TYPES);
        }
        t
    }
}

fn fail(status: StatusCode, msg: impl Into<String>) -> Response {
    (status, Json(json!({ "error": msg.into() }))).into_response()
}

fn status_for(e: &SuggestError) -> StatusCode {
    match e {
        SuggestError::EmptyKeywords
        | SuggestError::BlankKeyword(_)
        | SuggestError::Encode(EncodeError::UnknownKeyword(_)) => StatusCode::UNPROCESSABLE_ENTITY,
        SuggestError::Encode(EncodeError::EncoderUnavailable(_))
        | SuggestError::UpstreamUnavailable(_)
        | SuggestError::MissingResource(_) => StatusCode::SERVICE_UNAVAILABLE,
        SuggestError::Encode(EncodeError::EncoderBadResponse(_)) => StatusCode::BAD_GATEWAY,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

async fn suggest(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let req: ApiSuggestionRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return fail(StatusCode::BAD_REQUEST, format!("malformed request: {e}")),
    };
    let Some(method) = method_for(&req.kind, state.config.lexical_types) else {
        return fail(
            StatusCode::BAD_REQUEST,
            format!(
                "unknown Type {:?}; expected one of {}",
                req.kind,
                state.types().join(", ")
            ),
        );
    };
    let resources = match state.current() {
        Ok(r) => r,
        Err(msg) => return fail(StatusCode::SERVICE_UNAVAILABLE, msg),
    };
    let kind = req.kind;
    let request =
        SuggestionRequest::new(req.keywords, method).with_depths(MAX_TERMS, INTERPOLATION_DEPTH);
    let worker = state.clone();
    let result =
        tokio::task::spawn_blocking(move || worker.registry.dispatch(&request, &resources)).await;
    match result {
        Ok(Ok(groups)) => {
            let body: Vec<ApiGroup> = groups
                .iter()
                .map(|g| ApiGroup::from_group(g, &kind))
                .collect();
            Json(body).into_response()
        }
        Ok(Err(e)) => fail(status_for(&e), e.to_string()),
        Err(e) => fail(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn log_event(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let event: InteractionEvent = match serde_json::from_slice(&body) {
        Ok(e) => e,
        Err(e) => return fail(StatusCode::BAD_REQUEST, format!("malformed event: {e}")),
    };
    let worker = state.clone();
    match tokio::task::spawn_blocking(move || worker.log.append(&event)).await {
        Ok(Ok(_)) => StatusCode::NO_CONTENT.into_response(),
        Ok(Err(e)) => fail(
            StatusCode::INTERNAL_SERVER_ERROR,
            format!("writing log: {e}"),
        ),
        Err(e) => fail(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

fn health_body(state: &AppState) -> Response {
    match state.current() {
        Ok(r) => Json(json!({
            "status": "ok",
            "vocab_size": r.vocab().len(),
            "mesh_edition": r.vocab().edition(),
            "embedding_dim": r.mesh_encoding().map(|s| s.dim()),
            "encoder": r.encoder().map(|e| e.kind()),
            "types": state.types(),
        }))
        .into_response(),
        Err(msg) => (
            StatusCode::SERVICE_UNAVAILABLE,
            Json(json!({ "status": "unavailable", "error": msg })),
        )
            .into_response(),
    }
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    health_body(&state)
}

async fn reload(State(state): State<Arc<AppState>>) -> Response {
    let worker = state.clone();
    match tokio::task::spawn_blocking(move || worker.load()).await {
        Ok(Ok(())) => health_body(&state),
        Ok(Err(e)) => fail(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        Err(e) => fail(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

fn cors(origins: &[String]) -> CorsLayer {
    let allow = if origins.iter().any(|o| o == "*") {
        AllowOrigin::any()
    } else {
        AllowOrigin::list(origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()))
    };
    CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([HttpMethod::GET, HttpMethod::POST])
        .allow_headers([header::CONTENT_TYPE])
        .max_age(Duration::from_secs(3600))
}

pub fn router(state: Arc<AppState>) -> Router {
    let layer = cors(&state.config.cors_origins);
    Router::new()
        .route("/suggest", post(suggest))
        .route("/log", post(log_event))
        .route("/health", get(health))
        .route("/reload", post(reload))
        .layer(layer)
        .with_state(state)
}
