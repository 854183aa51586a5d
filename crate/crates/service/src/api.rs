//! Request and response bodies plus the route handlers.

use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use hue_rank_core::query::{execute_features, QuerySpec};
use hue_rank_core::{FeatureVector, IndexStore, Method, Scope};
use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::ApiError;
use crate::thumbs::{ThumbError, ThumbnailCache};

/// Characters left unescaped in path segments.
const SEGMENT: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'_').remove(b'.').remove(b'~');

pub const DEFAULT_TOP: usize = 8;

/// Shared, read-only service state.
#[derive(Debug, Clone)]
pub struct AppState {
    pub store: Arc<IndexStore>,
    pub images_dir: Arc<std::path::PathBuf>,
    pub thumbnails: ThumbnailCache,
}

pub fn thumbnail_url(name: &str) -> String {
    format!("/api/images/{}/thumbnail", utf8_percent_encode(name, SEGMENT))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ImageSummary {
    pub name: String,
    pub width: u32,
    pub height: u32,
    pub threshold: u64,
    pub thumbnail_url: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ApiQueryRequest {
    pub query_name: String,
    pub method: String,
    pub channels: String,
    pub df: f64,
    #[serde(default)]
    pub scope: Option<String>,
    #[serde(default)]
    pub top: Option<usize>,
}

impl ApiQueryRequest {
    pub fn spec(&self) -> Result<QuerySpec, hue_rank_core::Error> {
        let method: Method = self.method.parse()?;
        let scope = match &self.scope {
            Some(s) => s.parse()?,
            None => Scope::default(),
        };
        QuerySpec::new(method, self.channels.parse()?, self.df, scope)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct QueryInfo {
    pub name: String,
    pub features: FeatureVector,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ApiResult {
    pub name: String,
    pub score: f64,
    pub rank: usize,
    pub thumbnail_url: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ApiQueryResponse {
    pub query: QueryInfo,
    pub results: Vec<ApiResult>,
    pub excluded_count: usize,
}

/// Runs a request against the store. Shared by the HTTP handler and
/// anything else that wants the exact API semantics.
pub fn run_query(store: &IndexStore, req: &ApiQueryRequest) -> Result<ApiQueryResponse, ApiError> {
    let spec = req.spec()?;
    let top = req.top.unwrap_or(DEFAULT_TOP);
    if top == 0 {
        return Err(ApiError::bad_request("top must be at least 1"));
    }
    let fv = store.require(&req.query_name)?;
    let mut list = execute_features(store, fv, true, &spec)?;
    list.truncate(top);
    Ok(ApiQueryResponse {
        query: QueryInfo {
            name: fv.name.clone(),
            features: fv.clone(),
        },
        results: list
            .results
            .into_iter()
            .map(|r| ApiResult {
                thumbnail_url: thumbnail_url(&r.name),
                name: r.name,
                score: r.score,
                rank: r.rank,
            })
            .collect(),
        excluded_count: list.excluded,
    })
}

pub async fn list_images(
    State(state): State<AppState>,
    Query(params): Query<HashMap<String, String>>,
) -> Result<Json<Vec<ImageSummary>>, ApiError> {
    let group = match params.get("group") {
        Some(g) => Some(
            g.parse::<u64>()
                .map_err(|_| ApiError::bad_request(format!("group must be an integer, got {g:?}")))?,
        ),
        None => None,
    };
    let images = state
        .store
        .entries()
        .filter(|fv| group.is_none_or(|g| fv.threshold == g))
        .map(|fv| ImageSummary {
            name: fv.name.clone(),
            width: fv.width,
            height: fv.height,
            threshold: fv.threshold,
            thumbnail_url: thumbnail_url(&fv.name),
        })
        .collect();
    Ok(Json(images))
}

pub async fn image_features(
    State(state): State<AppState>,
    Path(name): Path<String>,
) -> Result<Json<FeatureVector>, ApiError> {
    Ok(Json(state.store.require(&name)?.clone()))
}

pub async fn image_thumbnail(
    State(state): State<AppState>,
    Path(name): Path<String>,
) -> Result<Response, ApiError> {
    state.store.require(&name)?;
    let source = state.images_dir.join(&name);
    let cache = state.thumbnails.clone();
    let bytes = tokio::task::spawn_blocking(move || cache.get(&name, &source))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(|e| match e {
            ThumbError::SourceMissing(_) | ThumbError::Render { .. } => {
                ApiError::new(StatusCode::BAD_GATEWAY, e.to_string())
            }
            ThumbError::Cache(_) => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        })?;
    Ok(([(header::CONTENT_TYPE, "image/jpeg")], bytes).into_response())
}

pub async fn query(State(state): State<AppState>, body: Bytes) -> Result<Json<ApiQueryResponse>, ApiError> {
    let req: ApiQueryRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))?;
    Ok(Json(run_query(&state.store, &req)?))
}

pub async fn healthz(State(state): State<AppState>) -> Json<serde_json::Value> {
    Json(json!({ "status": "ok", "images": state.store.len() }))
}

pub async fn not_found() -> ApiError {
    ApiError::not_found("no such route")
}
