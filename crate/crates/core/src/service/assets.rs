use std::fs;
use std::path::{Path, PathBuf};

use image::imageops::{self, FilterType};
use rayon::prelude::*;

use super::ServiceError;
use crate::ingest::{load_rgb_image, IngestError};
use crate::model::ScreenRecord;

pub const THUMB_MAX_DIM: u32 = 360;

pub fn thumbnail_path(index_dir: &Path, doc_id: &str) -> PathBuf {
    index_dir
        .join("static")
        .join("thumbs")
        .join(format!("{doc_id}.png"))
}

pub fn full_image_path(index_dir: &Path, doc_id: &str) -> PathBuf {
    index_dir
        .join("static")
        .join("full")
        .join(format!("{doc_id}.png"))
}

/// Scales `(w, h)` so the longer side is at most `max_dim`, keeping the
/// aspect ratio. Never upscales and never returns a zero side.
pub fn thumbnail_size(width: u32, height: u32, max_dim: u32) -> (u32, u32) {
    let longest = width.max(height);
    if longest <= max_dim {
        return (width, height);
    }
    let scale = |side: u32| {
        ((side as u64 * max_dim as u64 + longest as u64 / 2) / longest as u64).max(1) as u32
    };
    (scale(width), scale(height))
}

/// Writes the full image and a thumbnail for every record under
/// `index_dir/static`. Images are read from `corpus_root/<image_path>`.
pub fn write_assets(
    records: &[ScreenRecord],
    corpus_root: &Path,
    index_dir: &Path,
) -> Result<(), ServiceError> {
    records.par_iter().try_for_each(|record| {
        let img = load_rgb_image(&corpus_root.join(&record.image_path))?;
        let (w, h) = thumbnail_size(img.width(), img.height(), THUMB_MAX_DIM);
        let thumb = if (w, h) == img.dimensions() {
            img.clone()
        } else {
            imageops::resize(&img, w, h, FilterType::Triangle)
        };
        for (path, pixels) in [
            (full_image_path(index_dir, &record.doc_id), &img),
            (thumbnail_path(index_dir, &record.doc_id), &thumb),
        ] {
            let parent = path.parent().expect("asset paths have a parent");
            fs::create_dir_all(parent).map_err(|source| IngestError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
            pixels
                .save(&path)
                .map_err(|e| IngestError::Image(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    })
}
