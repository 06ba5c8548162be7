//! User-facing operations over a loaded index and their HTTP binding.

mod assets;
mod engine;
mod favorites;
mod http;

use std::path::PathBuf;

use thiserror::Error;

use crate::index::IndexError;
use crate::ingest::IngestError;
use crate::query::QueryError;

pub use assets::{full_image_path, thumbnail_path, thumbnail_size, write_assets, THUMB_MAX_DIM};
pub use engine::{
    jaccard, DetailColor, ScreenDetail, SearchEngine, SearchHit, SearchPage, SearchRequest,
    SimilarScreen, DEFAULT_PAGE_SIZE, DEFAULT_SIMILAR_K, MAX_PAGE_SIZE,
};
pub use favorites::{Favorite, FavoritesStore, FAVORITES_FILE};
pub use http::{open_state, router, AppState};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("unknown document `{0}`")]
    UnknownDoc(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("favorites store {path}: {message}")]
    Favorites { path: PathBuf, message: String },
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Query(e) => e.code(),
            ServiceError::UnknownDoc(_) => "UnknownDoc",
            ServiceError::InvalidRequest(_) => "InvalidRequest",
            ServiceError::Index(_) => "IndexError",
            ServiceError::Ingest(_) => "IngestError",
            ServiceError::Favorites { .. } => "FavoritesError",
        }
    }

    pub fn offset(&self) -> Option<usize> {
        match self {
            ServiceError::Query(e) => e.offset(),
            _ => None,
        }
    }

    /// Whether the caller is at fault, as opposed to the server.
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            ServiceError::Query(_) | ServiceError::UnknownDoc(_) | ServiceError::InvalidRequest(_)
        )
    }
}
