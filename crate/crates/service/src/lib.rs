//! HTTP facade over a loaded feature index.
//!
//! | route | |
//! |---|---|
//! | `GET /api/images[?group=N]` | indexed images, sorted by name |
//! | `GET /api/images/{name}/features` | one feature vector |
//! | `GET /api/images/{name}/thumbnail` | JPEG, longest side ≤ 256 px |
//! | `POST /api/query` | ranked retrieval |
//! | `GET /healthz` | liveness and image count |
//!
//! Everything else is served from the optional webroot, or answered with a
//! JSON 404.

pub mod api;
pub mod error;
pub mod thumbs;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use axum::extract::Request;
use axum::handler::HandlerWithoutStateExt;
use axum::middleware::{self, Next};
use axum::response::Response;
use axum::routing::{get, post};
use axum::Router;
use hue_rank_core::IndexStore;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

pub use api::{run_query, ApiQueryRequest, ApiQueryResponse, ApiResult, AppState, ImageSummary};
pub use error::{ApiError, ServeError};
pub use thumbs::ThumbnailCache;

impl AppState {
    pub fn new(store: IndexStore, images_dir: impl Into<PathBuf>, thumbnail_dir: impl Into<PathBuf>) -> Self {
        AppState {
            store: Arc::new(store),
            images_dir: Arc::new(images_dir.into()),
            thumbnails: ThumbnailCache::new(thumbnail_dir),
        }
    }
}

/// Thumbnail cache directory for an index file: `<index>.thumbs`.
pub fn thumbnail_dir_for(index_path: &Path) -> PathBuf {
    let mut s = index_path.as_os_str().to_owned();
    s.push(".thumbs");
    PathBuf::from(s)
}

pub fn router(state: AppState, webroot: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/images", get(api::list_images))
        .route("/api/images/{name}/features", get(api::image_features))
        .route("/api/images/{name}/thumbnail", get(api::image_thumbnail))
        .route("/api/query", post(api::query))
        .route("/api/{*rest}", get(api::not_found).post(api::not_found))
        .route("/healthz", get(api::healthz))
        .with_state(state);

    let app = match webroot {
        Some(root) => api.fallback_service(
            ServeDir::new(root).not_found_service(api::not_found.into_service()),
        ),
        None => api.fallback(api::not_found),
    };
    app.layer(middleware::from_fn(log_request))
        .layer(CorsLayer::permissive())
}

async fn log_request(req: Request, next: Next) -> Response {
    let method = req.method().clone();
    let path = req.uri().path().to_owned();
    let start = Instant::now();
    let resp = next.run(req).await;
    tracing::info!(
        "{method} {path} {} {:.1}ms",
        resp.status().as_u16(),
        start.elapsed().as_secs_f64() * 1e3
    );
    resp
}

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub index: PathBuf,
    pub images: PathBuf,
    pub addr: SocketAddr,
    pub webroot: Option<PathBuf>,
}

/// Loads the index and serves until Ctrl-C.
pub async fn serve(config: ServeConfig) -> Result<(), ServeError> {
    let store = hue_rank_core::load(&config.index)?;
    if !config.images.is_dir() {
        return Err(ServeError::MissingImages(config.images));
    }
    if let Some(root) = &config.webroot {
        if !root.is_dir() {
            return Err(ServeError::MissingWebroot(root.clone()));
        }
    }
    let count = store.len();
    let state = AppState::new(store, &config.images, thumbnail_dir_for(&config.index));
    let app = router(state, config.webroot.as_deref());

    let listener = tokio::net::TcpListener::bind(config.addr)
        .await
        .map_err(|source| ServeError::Bind {
            addr: config.addr,
            source,
        })?;
    tracing::info!("serving {count} images on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
