//! Read-only HTTP API over a network snapshot.
//!
//! Handlers clone the current `Arc` under a short read lock, so a reload
//! swaps the snapshot without blocking queries already in flight.

use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pdnet_core::discovery::{query_datasets, similar_datasets, Clause, Predicate, QueryFilter, RwrError, RwrParams};
use pdnet_core::store::{compute_stats, load_network, NetworkStats};
use pdnet_core::{DatasetDescription, DatasetEntity, Execution, PaperDatasetNetwork};
use serde::{Deserialize, Serialize};
use serde_json::json;

/// An immutable network plus its precomputed statistics.
#[derive(Debug)]
pub struct Snapshot {
    pub network: PaperDatasetNetwork,
    pub stats: NetworkStats,
}

impl Snapshot {
    pub fn new(network: PaperDatasetNetwork) -> Self {
        let stats = compute_stats(&network, &[]);
        Self { network, stats }
    }
}

pub struct AppState {
    snapshot: RwLock<Arc<Snapshot>>,
    /// Where `/admin/reload` reads from; `None` disables reloading.
    source: Option<PathBuf>,
    exec: Execution,
}

impl AppState {
    pub fn new(network: PaperDatasetNetwork, source: Option<PathBuf>, exec: Execution) -> Self {
        Self { snapshot: RwLock::new(Arc::new(Snapshot::new(network))), source, exec }
    }

    pub fn load(source: PathBuf, exec: Execution) -> Result<Self, pdnet_core::store::StoreError> {
        let network = load_network(&source)?;
        Ok(Self::new(network, Some(source), exec))
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().expect("snapshot lock poisoned").clone()
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/datasets", get(list_datasets))
        .route("/datasets/{id}", get(get_dataset))
        .route("/datasets/{id}/similar", get(similar))
        .route("/papers/{id}/datasets", get(paper_datasets))
        .route("/stats", get(stats))
        .route("/admin/reload", post(reload))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self { status: StatusCode::BAD_REQUEST, message: message.into() }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self { status: StatusCode::NOT_FOUND, message: message.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// `FIELD=VALUE` pairs plus an optional `predicate` applied to all of
/// them. No field pairs lists every description.
async fn list_datasets(
    State(state): State<Arc<AppState>>,
    Query(params): Query<Vec<(String, String)>>,
) -> ApiResult<Vec<DatasetDescription>> {
    let mut predicate = Predicate::Contains;
    let mut pairs = Vec::new();
    for (k, v) in params {
        if k == "predicate" {
            predicate = v.parse().map_err(ApiError::bad_request)?;
        } else {
            pairs.push((k, v));
        }
    }
    let snap = state.snapshot();
    if pairs.is_empty() {
        let mut all: Vec<DatasetDescription> = snap.network.descriptions().values().cloned().collect();
        all.sort_by(|a, b| (&a.paper_id, &a.description_id).cmp(&(&b.paper_id, &b.description_id)));
        return Ok(Json(all));
    }
    let clauses = pairs
        .iter()
        .map(|(k, v)| Clause::new(k, predicate, v))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    let filter = QueryFilter::new(clauses).map_err(|e| ApiError::bad_request(e.to_string()))?;
    Ok(Json(query_datasets(&snap.network, &filter).into_iter().cloned().collect()))
}

#[derive(Serialize)]
struct DatasetDetail {
    #[serde(flatten)]
    entity: DatasetEntity,
    papers: Vec<String>,
    descriptions: Vec<String>,
}

async fn get_dataset(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<DatasetDetail> {
    let snap = state.snapshot();
    let entity = snap.network.entity(&id).ok_or_else(|| ApiError::not_found(format!("unknown dataset {id}")))?;
    let papers = snap.network.papers_of_entity(&id).into_iter().map(|p| p.paper_id.clone()).collect();
    let descriptions = snap
        .network
        .edges()
        .iter()
        .filter(|e| e.entity_id == id)
        .map(|e| e.description_id.clone())
        .collect();
    Ok(Json(DatasetDetail { entity: entity.clone(), papers, descriptions }))
}

#[derive(Deserialize)]
struct SimilarParams {
    k: Option<usize>,
    c: Option<f64>,
}

#[derive(Serialize)]
struct ScoredDataset {
    entity_id: String,
    canonical_name: String,
    score: f64,
}

async fn similar(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<SimilarParams>,
) -> ApiResult<Vec<ScoredDataset>> {
    let defaults = RwrParams::default();
    let params = RwrParams {
        top_k: q.k.unwrap_or(defaults.top_k),
        restart_prob: q.c.unwrap_or(defaults.restart_prob),
        ..defaults
    };
    params.validate().map_err(|e| ApiError::bad_request(e.to_string()))?;
    let snap = state.snapshot();
    let exec = state.exec;
    let ranked = tokio::task::spawn_blocking(move || similar_datasets(&snap.network, &id, &params, exec))
        .await
        .map_err(|e| ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, message: e.to_string() })?
        .map_err(|e| match e {
            RwrError::NotFound(_) => ApiError::not_found(e.to_string()),
            RwrError::InvalidParams(_) => ApiError::bad_request(e.to_string()),
        })?;
    Ok(Json(
        ranked
            .into_iter()
            .map(|s| ScoredDataset { entity_id: s.entity_id, canonical_name: s.canonical_name, score: s.score })
            .collect(),
    ))
}

async fn paper_datasets(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Vec<DatasetEntity>> {
    let snap = state.snapshot();
    if snap.network.paper(&id).is_none() {
        return Err(ApiError::not_found(format!("unknown paper {id}")));
    }
    Ok(Json(snap.network.entities_of_paper(&id).into_iter().cloned().collect()))
}

async fn stats(State(state): State<Arc<AppState>>) -> Json<NetworkStats> {
    Json(state.snapshot().stats.clone())
}

async fn reload(State(state): State<Arc<AppState>>) -> ApiResult<NetworkStats> {
    let source = state
        .source
        .clone()
        .ok_or_else(|| ApiError::bad_request("this server was not started from a network file"))?;
    let network = tokio::task::spawn_blocking(move || load_network(&source))
        .await
        .map_err(|e| ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, message: e.to_string() })?
        .map_err(|e| ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, message: e.to_string() })?;
    let fresh = Arc::new(Snapshot::new(network));
    let stats = fresh.stats.clone();
    *state.snapshot.write().expect("snapshot lock poisoned") = fresh;
    tracing::info!("snapshot reloaded");
    Ok(Json(stats))
}
