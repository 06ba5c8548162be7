use std::fs;
use std::io::ErrorKind;
use std::path::PathBuf;

use serde::Deserialize;

use super::IngestError;
use crate::model::AppMeta;

/// Source of store listing metadata. `Ok(None)` means the listing is gone and
/// the app must be dropped; `Err` is a lookup failure.
pub trait StoreMetadataResolver: Send + Sync {
    fn resolve(&self, package_id: &str) -> Result<Option<AppMeta>, IngestError>;
}

/// Reads `<root>/<package_id>/store.json`.
#[derive(Debug, Clone)]
pub struct LocalStoreResolver {
    root: PathBuf,
}

#[derive(Deserialize)]
struct StoreFile {
    app_name: String,
    #[serde(default)]
    store_url: Option<String>,
    #[serde(default)]
    description: Option<String>,
}

pub const STORE_FILE: &str = "store.json";

impl LocalStoreResolver {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }
}

impl StoreMetadataResolver for LocalStoreResolver {
    fn resolve(&self, package_id: &str) -> Result<Option<AppMeta>, IngestError> {
        let path = self.root.join(package_id).join(STORE_FILE);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == ErrorKind::NotFound => return Ok(None),
            Err(e) => {
                return Err(IngestError::ResolverFailure(format!(
                    "{}: {e}",
                    path.display()
                )))
            }
        };
        let file: StoreFile = serde_json::from_slice(&bytes)
            .map_err(|e| IngestError::ResolverFailure(format!("{}: {e}", path.display())))?;
        if file.app_name.trim().is_empty() {
            return Err(IngestError::ResolverFailure(format!(
                "{}: empty app_name",
                path.display()
            )));
        }
        Ok(Some(AppMeta {
            package_id: package_id.to_string(),
            app_name: file.app_name,
            store_url: file.store_url.unwrap_or_else(|| {
                format!("https://play.google.com/store/apps/details?id={package_id}")
            }),
            description: file.description,
        }))
    }
}

pub fn resolve_store_metadata(
    package_id: &str,
    resolver: &dyn StoreMetadataResolver,
) -> Result<Option<AppMeta>, IngestError> {
    resolver.resolve(package_id)
}
