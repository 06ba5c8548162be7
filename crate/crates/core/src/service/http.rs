use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::assets::{full_image_path, thumbnail_path};
use super::engine::{SearchEngine, SearchRequest, DEFAULT_PAGE_SIZE, DEFAULT_SIMILAR_K};
use super::favorites::{FavoritesStore, FAVORITES_FILE};
use super::ServiceError;
use crate::index::load_index;
use crate::model::ScreenType;

const DEFAULT_SUGGEST_LIMIT: usize = 10;
const MAX_LIST_LIMIT: usize = 100;

#[derive(Clone)]
pub struct AppState {
    pub engine: Arc<SearchEngine>,
    pub favorites: Arc<FavoritesStore>,
    pub index_dir: PathBuf,
}

/// Loads the index in `index_dir` and the favorites file next to it.
pub fn open_state(index_dir: &Path) -> Result<AppState, ServiceError> {
    let index = load_index(index_dir)?;
    let favorites = FavoritesStore::open(index_dir.join(FAVORITES_FILE))?;
    Ok(AppState {
        engine: Arc::new(SearchEngine::new(index)),
        favorites: Arc::new(favorites),
        index_dir: index_dir.to_path_buf(),
    })
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/search", get(search))
        .route("/api/screens/{*rest}", get(screen))
        .route("/api/suggest", get(suggest))
        .route(
            "/api/favorites",
            get(list_favorites).post(add_favorite_body),
        )
        .route(
            "/api/favorites/{*doc_id}",
            axum::routing::post(add_favorite_path).delete(remove_favorite),
        )
        .route("/static/thumbs/{*file}", get(thumbnail))
        .route("/static/full/{*file}", get(full_image))
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .with_state(state)
}

struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    offset: Option<usize>,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            code: "InvalidRequest",
            message: message.into(),
            offset: None,
        }
    }

    fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            code,
            message: message.into(),
            offset: None,
        }
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let status = match &e {
            ServiceError::UnknownDoc(_) => StatusCode::NOT_FOUND,
            e if e.is_user_error() => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status.is_server_error() {
            tracing::error!(error = %e, "request failed");
        }
        Self {
            status,
            code: e.code(),
            message: e.to_string(),
            offset: e.offset(),
        }
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut error = json!({ "code": self.code, "message": self.message });
        if let Some(offset) = self.offset {
            error["offset"] = json!(offset);
        }
        (self.status, Json(json!({ "error": error }))).into_response()
    }
}

type Params = Vec<(String, String)>;

fn values<'a>(params: &'a Params, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
    params
        .iter()
        .filter(move |(k, _)| k == key)
        .map(|(_, v)| v.as_str())
}

fn single<'a>(params: &'a Params, key: &str) -> Option<&'a str> {
    params
        .iter()
        .rev()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
}

/// Repeated keys and comma-separated values both contribute.
fn list(params: &Params, key: &str) -> Vec<String> {
    values(params, key)
        .flat_map(|v| v.split(','))
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(String::from)
        .collect()
}

fn number<T: FromStr>(params: &Params, key: &str) -> Result<Option<T>, ApiError> {
    match single(params, key).map(str::trim).filter(|v| !v.is_empty()) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| ApiError::bad_request(format!("`{key}` must be a number, got `{v}`"))),
    }
}

fn search_request(params: &Params) -> Result<SearchRequest, ApiError> {
    let screen_type_filter = list(params, "screen_type")
        .iter()
        .map(|s| ScreenType::from_str(s).map_err(ApiError::bad_request))
        .collect::<Result<_, _>>()?;
    Ok(SearchRequest {
        q: single(params, "q").unwrap_or_default().to_string(),
        color: single(params, "color").map(String::from),
        tolerance: number(params, "tol")?,
        ui_filter: list(params, "ui"),
        screen_type_filter,
        page: number(params, "page")?.unwrap_or(0),
        page_size: number(params, "page_size")?.unwrap_or(DEFAULT_PAGE_SIZE),
    })
}

async fn search(
    State(state): State<AppState>,
    params: Result<Query<Params>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(params) = params?;
    let req = search_request(&params)?;
    let page = state.engine.search(&req)?;
    Ok(Json(page).into_response())
}

async fn screen(
    State(state): State<AppState>,
    UrlPath(rest): UrlPath<String>,
    params: Result<Query<Params>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(params) = params?;
    let engine = &state.engine;
    if let Some(doc_id) = rest.strip_suffix("/similar") {
        if engine.index().doc(doc_id).is_some() {
            let k = number(&params, "k")?.unwrap_or(DEFAULT_SIMILAR_K);
            if k > MAX_LIST_LIMIT {
                return Err(ApiError::bad_request(format!(
                    "`k` must be at most {MAX_LIST_LIMIT}"
                )));
            }
            let similar = engine.similar_screens(doc_id, k)?;
            return Ok(Json(json!({ "doc_id": doc_id, "similar": similar })).into_response());
        }
    }
    Ok(Json(engine.screen_detail(&rest)?).into_response())
}

async fn suggest(
    State(state): State<AppState>,
    params: Result<Query<Params>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(params) = params?;
    let limit = number(&params, "limit")?.unwrap_or(DEFAULT_SUGGEST_LIMIT);
    if !(1..=MAX_LIST_LIMIT).contains(&limit) {
        return Err(ApiError::bad_request(format!(
            "`limit` must be between 1 and {MAX_LIST_LIMIT}"
        )));
    }
    let prefix = single(&params, "prefix").unwrap_or_default();
    Ok(Json(json!({ "suggestions": state.engine.suggest(prefix, limit) })).into_response())
}

#[derive(Serialize)]
struct FavoriteView {
    doc_id: String,
    added_at: u64,
    app_name: String,
    thumbnail: String,
}

/// Favorites whose doc is no longer indexed stay on disk but are not listed.
async fn list_favorites(State(state): State<AppState>) -> Response {
    let favorites: Vec<FavoriteView> = state
        .favorites
        .list()
        .into_iter()
        .filter_map(|f| {
            let doc = state.engine.index().doc(&f.doc_id)?;
            Some(FavoriteView {
                app_name: doc.app.app_name.clone(),
                thumbnail: format!("/static/thumbs/{}.png", f.doc_id),
                doc_id: f.doc_id,
                added_at: f.added_at,
            })
        })
        .collect();
    Json(json!({ "favorites": favorites })).into_response()
}

#[derive(Deserialize)]
struct FavoriteBody {
    doc_id: String,
}

async fn add_favorite_body(
    State(state): State<AppState>,
    body: Result<Json<FavoriteBody>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(body) = body?;
    add_favorite(state, body.doc_id).await
}

async fn add_favorite_path(
    State(state): State<AppState>,
    UrlPath(doc_id): UrlPath<String>,
) -> Result<Response, ApiError> {
    add_favorite(state, doc_id).await
}

async fn add_favorite(state: AppState, doc_id: String) -> Result<Response, ApiError> {
    if state.engine.index().doc(&doc_id).is_none() {
        return Err(ServiceError::UnknownDoc(doc_id).into());
    }
    let store = state.favorites.clone();
    let id = doc_id.clone();
    let added = tokio::task::spawn_blocking(move || store.add(&id))
        .await
        .map_err(|e| ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            code: "Internal",
            message: e.to_string(),
            offset: None,
        })??;
    let status = if added {
        StatusCode::CREATED
    } else {
        StatusCode::OK
    };
    Ok((status, Json(json!({ "doc_id": doc_id, "added": added }))).into_response())
}

async fn remove_favorite(
    State(state): State<AppState>,
    UrlPath(doc_id): UrlPath<String>,
) -> Result<Response, ApiError> {
    let store = state.favorites.clone();
    let id = doc_id.clone();
    let removed = tokio::task::spawn_blocking(move || store.remove(&id))
        .await
        .map_err(|e| ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            code: "Internal",
            message: e.to_string(),
            offset: None,
        })??;
    Ok(Json(json!({ "doc_id": doc_id, "removed": removed })).into_response())
}

/// Only files belonging to an indexed doc are served, which also rules out
/// path traversal.
async fn serve_png(
    state: &AppState,
    file: &str,
    locate: fn(&Path, &str) -> PathBuf,
) -> Result<Response, ApiError> {
    let doc_id = file
        .strip_suffix(".png")
        .filter(|id| state.engine.index().doc(id).is_some())
        .ok_or_else(|| ApiError::not_found("NotFound", format!("no asset `{file}`")))?;
    let path = locate(&state.index_dir, doc_id);
    match tokio::fs::read(&path).await {
        Ok(bytes) => Ok(([(header::CONTENT_TYPE, "image/png")], bytes).into_response()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(ApiError::not_found(
            "AssetMissing",
            format!("asset for `{doc_id}` was not generated"),
        )),
        Err(e) => Err(ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            code: "Internal",
            message: e.to_string(),
            offset: None,
        }),
    }
}

async fn thumbnail(
    State(state): State<AppState>,
    UrlPath(file): UrlPath<String>,
) -> Result<Response, ApiError> {
    serve_png(&state, &file, thumbnail_path).await
}

async fn full_image(
    State(state): State<AppState>,
    UrlPath(file): UrlPath<String>,
) -> Result<Response, ApiError> {
    serve_png(&state, &file, full_image_path).await
}

async fn not_found() -> ApiError {
    ApiError::not_found("NotFound", "no such endpoint")
}

async fn method_not_allowed() -> ApiError {
    ApiError {
        status: StatusCode::METHOD_NOT_ALLOWED,
        code: "MethodNotAllowed",
        message: "method not allowed on this endpoint".into(),
        offset: None,
    }
}
