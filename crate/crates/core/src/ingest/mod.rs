//! Corpus ingestion: hierarchy parsing, quality filters, frequent-screen
//! selection and record emission.

mod corpus;
mod filters;
mod hierarchy;
mod screen_type;
mod select;
mod store;

use std::path::PathBuf;

use thiserror::Error;

pub use corpus::{
    build_corpus, load_rgb_image, AppManifest, CaptureEntry, CorpusManifest, FilterReport,
    IngestConfig, MANIFEST_FILE, TOP_SCREENS_PER_APP,
};
pub use filters::{
    default_container_classes, detect_overlay, hierarchy_has_launcher, is_container_only,
    is_launcher_screen, OverlayParams,
};
pub use hierarchy::{parse_bounds, parse_hierarchy, real_nodes, SYNTHETIC_ROOT_CLASS};
pub use screen_type::{ScreenTypeRule, ScreenTypeRules};
pub use select::{fingerprint_screen, select_top_screens};
pub use store::{resolve_store_metadata, LocalStoreResolver, StoreMetadataResolver, STORE_FILE};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed hierarchy xml: {0}")]
    MalformedXml(String),
    #[error("malformed bounds `{0}`")]
    MalformedBounds(String),
    #[error("image {width}x{height} too small for a border frame")]
    ImageTooSmall { width: u32, height: u32 },
    #[error("unsupported or unreadable image: {0}")]
    Image(String),
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error("store metadata lookup failed: {0}")]
    ResolverFailure(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
