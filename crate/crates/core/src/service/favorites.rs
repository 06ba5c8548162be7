use std::fs;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::sync::RwLock;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::ServiceError;

pub const FAVORITES_FILE: &str = "favorites.json";
const FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Favorite {
    pub doc_id: String,
    /// Milliseconds since the Unix epoch.
    pub added_at: u64,
    /// Insertion counter; breaks `added_at` ties.
    pub seq: u64,
}

#[derive(Serialize, Deserialize)]
struct FileContents {
    version: u32,
    favorites: Vec<Favorite>,
}

/// Global favorites set persisted as one JSON file. Every mutation rewrites
/// the file through a temporary sibling and an atomic rename before it
/// returns, so a crash leaves either the old or the new set on disk.
#[derive(Debug)]
pub struct FavoritesStore {
    path: PathBuf,
    entries: RwLock<Vec<Favorite>>,
}

impl FavoritesStore {
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, ServiceError> {
        let path = path.into();
        let entries = match fs::read(&path) {
            Ok(bytes) => {
                let contents: FileContents =
                    serde_json::from_slice(&bytes).map_err(|e| fail(&path, e))?;
                if contents.version != FORMAT {
                    return Err(fail(
                        &path,
                        format!("unsupported version {}", contents.version),
                    ));
                }
                contents.favorites
            }
            Err(e) if e.kind() == ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(fail(&path, e)),
        };
        Ok(Self {
            path,
            entries: RwLock::new(entries),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Newest first.
    pub fn list(&self) -> Vec<Favorite> {
        let mut out = self
            .entries
            .read()
            .expect("favorites lock poisoned")
            .clone();
        out.sort_by(|a, b| b.added_at.cmp(&a.added_at).then(b.seq.cmp(&a.seq)));
        out
    }

    pub fn contains(&self, doc_id: &str) -> bool {
        self.entries
            .read()
            .expect("favorites lock poisoned")
            .iter()
            .any(|f| f.doc_id == doc_id)
    }

    /// Returns false when the doc was already a favorite.
    pub fn add(&self, doc_id: &str) -> Result<bool, ServiceError> {
        let mut entries = self.entries.write().expect("favorites lock poisoned");
        if entries.iter().any(|f| f.doc_id == doc_id) {
            return Ok(false);
        }
        let added_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        let seq = entries.iter().map(|f| f.seq + 1).max().unwrap_or(0);
        let mut next = entries.clone();
        next.push(Favorite {
            doc_id: doc_id.to_string(),
            added_at,
            seq,
        });
        self.persist(&next)?;
        *entries = next;
        Ok(true)
    }

    /// Returns false when the doc was not a favorite.
    pub fn remove(&self, doc_id: &str) -> Result<bool, ServiceError> {
        let mut entries = self.entries.write().expect("favorites lock poisoned");
        if !entries.iter().any(|f| f.doc_id == doc_id) {
            return Ok(false);
        }
        let next: Vec<Favorite> = entries
            .iter()
            .filter(|f| f.doc_id != doc_id)
            .cloned()
            .collect();
        self.persist(&next)?;
        *entries = next;
        Ok(true)
    }

    fn persist(&self, entries: &[Favorite]) -> Result<(), ServiceError> {
        let dir = match self.path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        fs::create_dir_all(dir).map_err(|e| fail(&self.path, e))?;
        let body = serde_json::to_vec_pretty(&FileContents {
            version: FORMAT,
            favorites: entries.to_vec(),
        })
        .map_err(|e| fail(&self.path, e))?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| fail(&self.path, e))?;
        tmp.write_all(&body).map_err(|e| fail(&self.path, e))?;
        tmp.as_file().sync_all().map_err(|e| fail(&self.path, e))?;
        tmp.persist(&self.path)
            .map_err(|e| fail(&self.path, e.error))?;
        Ok(())
    }
}

fn fail(path: &Path, e: impl ToString) -> ServiceError {
    ServiceError::Favorites {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}
