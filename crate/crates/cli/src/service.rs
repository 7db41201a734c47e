//! HTTP search service: a thin axum front over [`SearchIndex`].
//!
//! Endpoints:
//! - `GET  /health` — liveness probe.
//! - `GET  /stats`  — index counters (503 until an index is available).
//! - `POST /search` — JSON `{"code": hex, "k"?: n, "mode"?: name}`.
//! - `POST /index`  — codes-file text body; appends documents in memory.
//!
//! Configuration is resolved in three layers: config file, then
//! `HAMSEARCH_*` environment variables, then command-line flags.

use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parking_lot::RwLock;
use serde::Deserialize;
use serde_json::{json, Value};

use hamsearch::codes_file::{parse_codes_file, to_documents};
use hamsearch::persist::load_index;
use hamsearch::{
    parse_code_hex, Error, IndexConfig, ParsedCode, SearchIndex, SearchMode, ShortCodeExtractor,
};

use crate::args::ServeArgs;

pub const DEFAULT_LISTEN: &str = "127.0.0.1:7700";
pub const DEFAULT_K: usize = 10;

/// Resolved service configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ServiceConfig {
    pub listen: String,
    pub index_path: Option<PathBuf>,
    pub extractor_path: Option<PathBuf>,
    /// Coarse-filter radius when starting from an extractor.
    pub radius: u32,
    /// Overrides the index's own default mode when set.
    pub default_mode: Option<SearchMode>,
    pub default_k: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen: DEFAULT_LISTEN.to_string(),
            index_path: None,
            extractor_path: None,
            radius: 2,
            default_mode: None,
            default_k: DEFAULT_K,
        }
    }
}

impl ServiceConfig {
    /// Applies `key=value` lines. Blank lines and `#` comments are
    /// ignored; unknown keys and unparsable values are errors.
    pub fn apply_file(&mut self, text: &str) -> hamsearch::Result<()> {
        for (number, raw) in text.lines().enumerate() {
            let line = number + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected key=value, got {trimmed:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            self.set(key, value).map_err(|message| Error::Config { line, message })?;
        }
        Ok(())
    }

    /// Applies `HAMSEARCH_*` environment overrides. `lookup` abstracts
    /// `std::env::var` so the layer is testable.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> hamsearch::Result<()> {
        for (variable, key) in [
            ("HAMSEARCH_LISTEN", "listen"),
            ("HAMSEARCH_INDEX", "index"),
            ("HAMSEARCH_EXTRACTOR", "extractor"),
            ("HAMSEARCH_RADIUS", "radius"),
            ("HAMSEARCH_MODE", "mode"),
            ("HAMSEARCH_K", "k"),
        ] {
            if let Some(value) = lookup(variable) {
                self.set(key, &value).map_err(|message| Error::Config {
                    line: 0,
                    message: format!("{variable}: {message}"),
                })?;
            }
        }
        Ok(())
    }

    /// Applies command-line flags (the highest-precedence layer).
    pub fn apply_flags(&mut self, args: &ServeArgs) {
        if let Some(listen) = &args.listen {
            self.listen = listen.clone();
        }
        if let Some(index) = &args.index {
            self.index_path = Some(index.clone());
        }
        if let Some(extractor) = &args.extractor {
            self.extractor_path = Some(extractor.clone());
        }
        if let Some(radius) = args.radius {
            self.radius = radius;
        }
        if let Some(mode) = args.mode {
            self.default_mode = Some(mode);
        }
        if let Some(k) = args.k {
            self.default_k = k;
        }
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "listen" => self.listen = value.to_string(),
            "index" => self.index_path = Some(PathBuf::from(value)),
            "extractor" => self.extractor_path = Some(PathBuf::from(value)),
            "radius" => {
                self.radius = value.parse().map_err(|e| format!("radius {value:?}: {e}"))?;
            }
            "mode" => {
                self.default_mode =
                    Some(value.parse().map_err(|e| format!("mode {value:?}: {e}"))?);
            }
            "k" => self.default_k = value.parse().map_err(|e| format!("k {value:?}: {e}"))?,
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    /// Loads `args.config` if given, then environment, then flags.
    pub fn resolve(args: &ServeArgs) -> anyhow::Result<Self> {
        let mut config = Self::default();
        if let Some(path) = &args.config {
            let text = std::fs::read_to_string(path)
                .map_err(Error::from)
                .with_context(|| format!("reading {}", path.display()))?;
            config
                .apply_file(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
        }
        config.apply_env(|name| std::env::var(name).ok())?;
        config.apply_flags(args);
        Ok(config)
    }
}

/// Shared service state: the (optional) index plus request defaults.
pub struct AppState {
    pub index: RwLock<Option<SearchIndex>>,
    pub default_mode: Option<SearchMode>,
    pub default_k: usize,
}

/// Builds the state per the resolved config. Returns the state and a
/// human-readable description of where the index came from.
pub fn build_state(config: &ServiceConfig) -> anyhow::Result<(AppState, String)> {
    let (index, origin) = match (&config.index_path, &config.extractor_path) {
        (Some(path), _) => {
            let index =
                load_index(path).with_context(|| format!("loading {}", path.display()))?;
            let origin = format!("serving {} documents from {}", index.len(), path.display());
            (Some(index), origin)
        }
        (None, Some(path)) => {
            let extractor = ShortCodeExtractor::load(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let mut index_config = IndexConfig::new(config.radius, extractor)?;
            if let Some(mode) = config.default_mode {
                index_config = index_config.with_default_mode(mode);
            }
            let index = SearchIndex::new(index_config)?;
            let origin = format!("serving an empty index with extractor {}", path.display());
            (Some(index), origin)
        }
        (None, None) => (None, "no index configured; search returns 503".to_string()),
    };
    Ok((
        AppState {
            index: RwLock::new(index),
            default_mode: config.default_mode,
            default_k: config.default_k,
        },
        origin,
    ))
}

/// A JSON error response with a definite status code.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }

    fn no_index() -> Self {
        Self::new(StatusCode::SERVICE_UNAVAILABLE, "no index is loaded")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        let status = match err {
            // The request itself is wrong.
            Error::BadHexLength { .. }
            | Error::BadCodeLength { .. }
            | Error::BadHexChar { .. }
            | Error::InvalidK
            | Error::InvalidTopN
            | Error::CodesFile { .. } => StatusCode::BAD_REQUEST,
            // The request is well-formed but conflicts with index state.
            Error::DuplicateDocId(_)
            | Error::ShortCodeMismatch(_)
            | Error::LongPostingsUnavailable
            | Error::TooManyDocuments => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, err.to_string())
    }
}

#[derive(Debug, Deserialize)]
struct SearchRequest {
    code: String,
    k: Option<usize>,
    mode: Option<String>,
}

pub fn build_router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/stats", get(stats))
        .route("/search", post(search))
        .route("/index", post(ingest))
        .with_state(state)
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

async fn stats(State(state): State<Arc<AppState>>) -> Result<Json<Value>, ApiError> {
    let guard = state.index.read();
    let index = guard.as_ref().ok_or_else(ApiError::no_index)?;
    Ok(Json(serde_json::to_value(index.stats()).expect("stats always serialize")))
}

async fn search(
    State(state): State<Arc<AppState>>,
    Json(request): Json<SearchRequest>,
) -> Result<Json<Value>, ApiError> {
    let outcome = tokio::task::spawn_blocking(move || blocking_search(&state, request))
        .await
        .map_err(|_| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "search task failed"))?;
    outcome.map(Json)
}

fn blocking_search(state: &AppState, request: SearchRequest) -> Result<Value, ApiError> {
    let mode_override = request
        .mode
        .as_deref()
        .map(|name| {
            name.parse::<SearchMode>()
                .map_err(|err| ApiError::new(StatusCode::BAD_REQUEST, err.to_string()))
        })
        .transpose()?;
    let guard = state.index.read();
    let index = guard.as_ref().ok_or_else(ApiError::no_index)?;
    let mode = mode_override
        .or(state.default_mode)
        .unwrap_or(index.config().default_mode);
    let k = request.k.unwrap_or(state.default_k);
    let results = match parse_code_hex(&request.code)? {
        ParsedCode::Long(code) => index.search(&code, k, mode)?,
        ParsedCode::Short(short) => {
            if mode != SearchMode::Short {
                return Err(ApiError::new(
                    StatusCode::BAD_REQUEST,
                    format!(
                        "a 16-char hex code carries only the 64-bit short code and cannot be \
                         searched in {mode} mode"
                    ),
                ));
            }
            index.search_short(&short, k)?
        }
    };
    let rows: Vec<Value> = results
        .iter()
        .map(|result| {
            json!({
                "id": result.id,
                "distance": result.distance,
                "score": result.score,
                "labels": index.get(result.id).map(|r| r.labels.clone()).unwrap_or_default(),
            })
        })
        .collect();
    Ok(json!({ "mode": mode, "k": k, "count": rows.len(), "results": rows }))
}

async fn ingest(
    State(state): State<Arc<AppState>>,
    body: String,
) -> Result<Json<Value>, ApiError> {
    let outcome = tokio::task::spawn_blocking(move || blocking_ingest(&state, &body))
        .await
        .map_err(|_| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "ingest task failed"))?;
    outcome.map(Json)
}

fn blocking_ingest(state: &AppState, body: &str) -> Result<Value, ApiError> {
    let mut guard = state.index.write();
    let index = guard.as_mut().ok_or_else(ApiError::no_index)?;
    let records = parse_codes_file(body)?;
    let documents = to_documents(&records, &index.config().extractor);
    let indexed = index.index_documents(documents)?;
    Ok(json!({ "indexed": indexed, "total": index.len() }))
}


/// Runs the service until ctrl-c. Prints the bound address (which matters
/// when the configured port is 0).
pub fn run_serve(config: ServiceConfig) -> anyhow::Result<()> {
    let (state, origin) = build_state(&config)?;
    let state = Arc::new(state);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .context("starting async runtime")?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&config.listen)
            .await
            .with_context(|| format!("binding {}", config.listen))?;
        let addr = listener.local_addr().context("resolving bound address")?;
        println!("{origin}");
        println!("listening on http://{addr}");
        axum::serve(listener, build_router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .context("serving")
    })
}
