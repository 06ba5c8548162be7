//! On-disk index layout.
//!
//! ```text
//! <dir>/VERSION          "screensearch-index <version>"
//! <dir>/postings.json    per-field postings and field lengths
//! <dir>/docs.json        document store
//! <dir>/colors.json      palette table
//! <dir>/webcolors.json   color-name table used for suggestions
//! ```
//!
//! Every data file starts with one header line
//! `SSIDX/<version> sha256:<hex> bytes:<len>` followed by a JSON payload.
//! The format is private and may change between versions.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{ColorCell, FieldIndex, Index, IndexError, Posting};
use crate::color::names::WEB_COLORS;
use crate::model::ScreenRecord;

pub const FORMAT_VERSION: u32 = 1;

const VERSION_FILE: &str = "VERSION";
const POSTINGS_FILE: &str = "postings.json";
const DOCS_FILE: &str = "docs.json";
const COLORS_FILE: &str = "colors.json";
const WEBCOLORS_FILE: &str = "webcolors.json";

#[derive(Serialize)]
struct FieldOut<'a> {
    postings: BTreeMap<&'a String, &'a Vec<Posting>>,
    lengths: &'a [u32],
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn io_err(path: &Path, source: std::io::Error) -> IndexError {
    IndexError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_section<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), IndexError> {
    let payload = serde_json::to_vec(value).map_err(|e| IndexError::CorruptIndex(e.to_string()))?;
    let digest = hex(&Sha256::digest(&payload));
    let mut out = format!(
        "SSIDX/{FORMAT_VERSION} sha256:{digest} bytes:{}\n",
        payload.len()
    )
    .into_bytes();
    out.extend_from_slice(&payload);
    let path = dir.join(name);
    fs::write(&path, out).map_err(|e| io_err(&path, e))
}

fn read_section<T: DeserializeOwned>(dir: &Path, name: &str) -> Result<T, IndexError> {
    let path = dir.join(name);
    let bytes = fs::read(&path).map_err(|e| io_err(&path, e))?;
    let corrupt = |msg: String| IndexError::CorruptIndex(format!("{name}: {msg}"));
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| corrupt("missing header".into()))?;
    let header =
        std::str::from_utf8(&bytes[..newline]).map_err(|_| corrupt("unreadable header".into()))?;
    let payload = &bytes[newline + 1..];

    let mut parts = header.split(' ');
    let version = parts
        .next()
        .and_then(|p| p.strip_prefix("SSIDX/"))
        .ok_or_else(|| corrupt("bad header magic".into()))?;
    if version != FORMAT_VERSION.to_string() {
        return Err(corrupt(format!(
            "format version {version} is not supported (expected {FORMAT_VERSION})"
        )));
    }
    let digest = parts
        .next()
        .and_then(|p| p.strip_prefix("sha256:"))
        .ok_or_else(|| corrupt("missing checksum".into()))?;
    let len: usize = parts
        .next()
        .and_then(|p| p.strip_prefix("bytes:"))
        .and_then(|p| p.parse().ok())
        .ok_or_else(|| corrupt("missing length".into()))?;
    if payload.len() != len {
        return Err(corrupt(format!(
            "expected {len} bytes, found {} (truncated?)",
            payload.len()
        )));
    }
    if hex(&Sha256::digest(payload)) != digest {
        return Err(corrupt("checksum mismatch".into()));
    }
    serde_json::from_slice(payload).map_err(|e| corrupt(e.to_string()))
}

pub fn save_index(index: &Index, dir: &Path) -> Result<(), IndexError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let version_path = dir.join(VERSION_FILE);
    fs::write(
        &version_path,
        format!("screensearch-index {FORMAT_VERSION}\n"),
    )
    .map_err(|e| io_err(&version_path, e))?;

    let fields: Vec<FieldOut<'_>> = index
        .fields
        .iter()
        .map(|f| FieldOut {
            postings: f.postings.iter().collect(),
            lengths: &f.lengths,
        })
        .collect();
    write_section(dir, POSTINGS_FILE, &fields)?;
    write_section(dir, DOCS_FILE, &index.docs)?;
    write_section(dir, COLORS_FILE, &index.colors)?;
    let webcolors: BTreeMap<&str, String> = WEB_COLORS
        .iter()
        .map(|(n, c)| (*n, format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])))
        .collect();
    write_section(dir, WEBCOLORS_FILE, &webcolors)
}

pub fn load_index(dir: &Path) -> Result<Index, IndexError> {
    let version_path = dir.join(VERSION_FILE);
    let version = fs::read_to_string(&version_path).map_err(|e| io_err(&version_path, e))?;
    let found = version
        .trim()
        .strip_prefix("screensearch-index ")
        .unwrap_or("?");
    if found != FORMAT_VERSION.to_string() {
        return Err(IndexError::CorruptIndex(format!(
            "index format version {found} is not supported (expected {FORMAT_VERSION})"
        )));
    }
    let fields: Vec<FieldIndex> = read_section(dir, POSTINGS_FILE)?;
    let docs: Vec<ScreenRecord> = read_section(dir, DOCS_FILE)?;
    let colors: Vec<Vec<ColorCell>> = read_section(dir, COLORS_FILE)?;
    let _: BTreeMap<String, String> = read_section(dir, WEBCOLORS_FILE)?;
    let index = Index::from_parts(docs, fields, colors);
    index.check_consistency()?;
    Ok(index)
}
