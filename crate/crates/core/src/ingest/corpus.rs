use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use image::{ColorType, ImageReader, Rgb, RgbImage};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::filters::{
    default_container_classes, detect_overlay, hierarchy_has_launcher, is_container_only,
};
use super::hierarchy::{parse_hierarchy, real_nodes};
use super::screen_type::ScreenTypeRules;
use super::select::{fingerprint_screen, rank_groups};
use super::store::StoreMetadataResolver;
use super::{IngestError, OverlayParams};
use crate::color::{extract_palette_with, PaletteConfig};
use crate::model::{AppMeta, ScreenCapture, ScreenRecord};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TOP_SCREENS_PER_APP: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureEntry {
    pub capture_id: String,
    /// Relative to the app directory; defaults to `screens/<capture_id>.png`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    /// Defaults to `screens/<capture_id>.xml`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xml: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activity_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visit_count: Option<u32>,
}

impl CaptureEntry {
    pub fn image_rel(&self) -> String {
        self.image
            .clone()
            .unwrap_or_else(|| format!("screens/{}.png", self.capture_id))
    }

    pub fn xml_rel(&self) -> String {
        self.xml
            .clone()
            .unwrap_or_else(|| format!("screens/{}.xml", self.capture_id))
    }

    fn meta_rel(&self) -> String {
        format!("screens/{}.meta.json", self.capture_id)
    }
}

/// Contents of `<corpus>/<package_id>/manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppManifest {
    #[serde(default)]
    pub package_id: String,
    /// Display name fallback, store metadata takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub app_name: Option<String>,
    pub captures: Vec<CaptureEntry>,
    /// Directory name under the corpus root.
    #[serde(skip)]
    pub dir: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorpusManifest {
    pub root: PathBuf,
    /// Sorted by package id.
    pub apps: Vec<AppManifest>,
}

impl CorpusManifest {
    /// Reads every `<root>/*/manifest.json`.
    pub fn load(root: &Path) -> Result<Self, IngestError> {
        let io = |path: &Path, source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut apps = Vec::new();
        for entry in fs::read_dir(root).map_err(|e| io(root, e))? {
            let entry = entry.map_err(|e| io(root, e))?;
            let manifest_path = entry.path().join(MANIFEST_FILE);
            if !entry.path().is_dir() || !manifest_path.is_file() {
                continue;
            }
            let bytes = fs::read(&manifest_path).map_err(|e| io(&manifest_path, e))?;
            let mut app: AppManifest = serde_json::from_slice(&bytes)
                .map_err(|e| IngestError::Manifest(format!("{}: {e}", manifest_path.display())))?;
            app.dir = entry.file_name().to_string_lossy().into_owned();
            if app.package_id.is_empty() {
                app.package_id = app.dir.clone();
            }
            apps.push(app);
        }
        Self::new(root.to_path_buf(), apps)
    }

    pub fn new(root: PathBuf, mut apps: Vec<AppManifest>) -> Result<Self, IngestError> {
        let mut packages = HashSet::new();
        for app in &apps {
            if !packages.insert(app.package_id.clone()) {
                return Err(IngestError::Manifest(format!(
                    "package {} listed twice",
                    app.package_id
                )));
            }
            let mut ids = HashSet::new();
            for c in &app.captures {
                if c.capture_id.is_empty() || c.capture_id.contains(['/', '\\']) {
                    return Err(IngestError::Manifest(format!(
                        "{}: invalid capture id `{}`",
                        app.package_id, c.capture_id
                    )));
                }
                if !ids.insert(c.capture_id.as_str()) {
                    return Err(IngestError::Manifest(format!(
                        "{}: duplicate capture id {}",
                        app.package_id, c.capture_id
                    )));
                }
            }
        }
        apps.sort_by(|a, b| a.package_id.cmp(&b.package_id));
        Ok(Self { root, apps })
    }

    pub fn capture_count(&self) -> usize {
        self.apps.iter().map(|a| a.captures.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestConfig {
    pub container_classes: BTreeSet<String>,
    pub overlay: OverlayParams,
    /// Distinct screens kept per app.
    pub top_k: usize,
    pub palette: PaletteConfig,
    pub screen_types: ScreenTypeRules,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            container_classes: default_container_classes(),
            overlay: OverlayParams::default(),
            top_k: TOP_SCREENS_PER_APP,
            palette: PaletteConfig::default(),
            screen_types: ScreenTypeRules::default(),
        }
    }
}

/// Per-reason drop counts. `dropped() + kept == input` always holds.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub input: usize,
    pub kept: usize,
    pub launcher: usize,
    pub overlay: usize,
    pub container_only: usize,
    pub no_store_meta: usize,
    /// Same fingerprint as a selected screen.
    pub duplicate: usize,
    /// Distinct screen outside the app's most visited ones.
    pub below_top_k: usize,
    /// Unreadable hierarchy, image or metadata.
    pub invalid: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

impl FilterReport {
    pub fn dropped(&self) -> usize {
        self.launcher
            + self.overlay
            + self.container_only
            + self.no_store_meta
            + self.duplicate
            + self.below_top_k
            + self.invalid
    }

    fn merge(&mut self, other: FilterReport) {
        self.input += other.input;
        self.kept += other.kept;
        self.launcher += other.launcher;
        self.overlay += other.overlay;
        self.container_only += other.container_only;
        self.no_store_meta += other.no_store_meta;
        self.duplicate += other.duplicate;
        self.below_top_k += other.below_top_k;
        self.invalid += other.invalid;
        self.errors.extend(other.errors);
    }
}

/// Decodes an 8-bit RGB or RGBA PNG, compositing alpha over white.
pub fn load_rgb_image(path: &Path) -> Result<RgbImage, IngestError> {
    let img = ImageReader::open(path)
        .map_err(|e| IngestError::Io {
            path: path.to_path_buf(),
            source: e,
        })?
        .with_guessed_format()
        .map_err(|e| IngestError::Image(format!("{}: {e}", path.display())))?
        .decode()
        .map_err(|e| IngestError::Image(format!("{}: {e}", path.display())))?;
    match img.color() {
        ColorType::Rgb8 => Ok(img.into_rgb8()),
        ColorType::Rgba8 => {
            let rgba = img.into_rgba8();
            Ok(RgbImage::from_fn(rgba.width(), rgba.height(), |x, y| {
                let p = rgba.get_pixel(x, y);
                let a = p[3] as u32;
                let blend = |c: u8| ((c as u32 * a + 255 * (255 - a) + 127) / 255) as u8;
                Rgb([blend(p[0]), blend(p[1]), blend(p[2])])
            }))
        }
        other => Err(IngestError::Image(format!(
            "{}: unsupported color type {other:?} (need 8-bit RGB/RGBA)",
            path.display()
        ))),
    }
}

enum Outcome {
    Survivor(Box<ScreenCapture>),
    Launcher,
    Overlay,
    ContainerOnly,
    Invalid(String),
}

#[derive(Deserialize, Default)]
struct CaptureMeta {
    #[serde(default)]
    activity_name: Option<String>,
    #[serde(default)]
    visit_count: Option<u32>,
}

fn load_capture(
    app_dir: &Path,
    app: &AppMeta,
    entry: &CaptureEntry,
    config: &IngestConfig,
) -> Outcome {
    let fail =
        |e: IngestError| Outcome::Invalid(format!("{}/{}: {e}", app.package_id, entry.capture_id));
    let xml_path = app_dir.join(entry.xml_rel());
    let xml = match fs::read(&xml_path) {
        Ok(x) => x,
        Err(source) => {
            return fail(IngestError::Io {
                path: xml_path,
                source,
            })
        }
    };
    let hierarchy = match parse_hierarchy(&xml) {
        Ok(h) => h,
        Err(e) => return fail(e),
    };
    if hierarchy_has_launcher(&hierarchy) {
        return Outcome::Launcher;
    }
    let image = match load_rgb_image(&app_dir.join(entry.image_rel())) {
        Ok(i) => i,
        Err(e) => return fail(e),
    };
    match detect_overlay(&image, &config.overlay) {
        Ok(true) => return Outcome::Overlay,
        Ok(false) => {}
        Err(e) => return fail(e),
    }
    if is_container_only(&hierarchy, &config.container_classes) {
        return Outcome::ContainerOnly;
    }

    let meta_path = app_dir.join(entry.meta_rel());
    let meta = if meta_path.is_file() {
        match fs::read(&meta_path)
            .map_err(|e| e.to_string())
            .and_then(|b| serde_json::from_slice::<CaptureMeta>(&b).map_err(|e| e.to_string()))
        {
            Ok(m) => m,
            Err(e) => {
                return fail(IngestError::Manifest(format!(
                    "{}: {e}",
                    meta_path.display()
                )))
            }
        }
    } else {
        CaptureMeta::default()
    };

    Outcome::Survivor(Box::new(ScreenCapture {
        app: app.clone(),
        capture_id: entry.capture_id.clone(),
        image,
        hierarchy,
        activity_name: meta.activity_name.or_else(|| entry.activity_name.clone()),
        visit_count: meta.visit_count.or(entry.visit_count).unwrap_or(1).max(1),
    }))
}

fn to_record(
    capture: &ScreenCapture,
    image_path: String,
    config: &IngestConfig,
) -> Result<ScreenRecord, IngestError> {
    let nodes: Vec<_> = real_nodes(&capture.hierarchy).collect();
    let component_classes: Vec<String> = nodes.iter().map(|n| n.class_name.clone()).collect();
    let component_texts: Vec<String> = nodes
        .iter()
        .map(|n| n.text.trim())
        .filter(|t| !t.is_empty())
        .map(String::from)
        .collect();
    let activity_name = capture.activity_name.clone().unwrap_or_default();
    let palette = extract_palette_with(&capture.image, &config.palette)
        .map_err(|e| IngestError::Image(e.to_string()))?;
    let screen_type =
        config
            .screen_types
            .classify(&activity_name, &component_texts, &component_classes);
    Ok(ScreenRecord {
        doc_id: ScreenRecord::make_doc_id(&capture.app.package_id, &capture.capture_id),
        app: capture.app.clone(),
        activity_name,
        component_classes,
        component_texts,
        palette,
        image_path,
        screen_type,
    })
}

fn process_app(
    root: &Path,
    manifest: &AppManifest,
    resolver: &dyn StoreMetadataResolver,
    config: &IngestConfig,
) -> (Vec<ScreenRecord>, FilterReport) {
    let n = manifest.captures.len();
    let mut report = FilterReport {
        input: n,
        ..Default::default()
    };
    let app = match resolver.resolve(&manifest.package_id) {
        Ok(Some(mut meta)) => {
            meta.package_id = manifest.package_id.clone();
            meta
        }
        Ok(None) => {
            report.no_store_meta = n;
            return (Vec::new(), report);
        }
        Err(e) => {
            report.invalid = n;
            report.errors.push(format!("{}: {e}", manifest.package_id));
            return (Vec::new(), report);
        }
    };

    let app_dir = root.join(&manifest.dir);
    let outcomes: Vec<Outcome> = manifest
        .captures
        .par_iter()
        .map(|entry| load_capture(&app_dir, &app, entry, config))
        .collect();

    let mut survivors = Vec::new();
    for outcome in outcomes {
        match outcome {
            Outcome::Survivor(c) => survivors.push(*c),
            Outcome::Launcher => report.launcher += 1,
            Outcome::Overlay => report.overlay += 1,
            Outcome::ContainerOnly => report.container_only += 1,
            Outcome::Invalid(msg) => {
                report.invalid += 1;
                report.errors.push(msg);
            }
        }
    }

    let items: Vec<(String, u32, &str)> = survivors
        .iter()
        .map(|c| {
            (
                fingerprint_screen(&c.hierarchy),
                c.visit_count,
                c.capture_id.as_str(),
            )
        })
        .collect();
    let groups = rank_groups(&items);
    let mut selected = Vec::new();
    for (rank, group) in groups.iter().enumerate() {
        if rank < config.top_k {
            selected.push(group.representative);
            report.duplicate += group.members.len() - 1;
        } else {
            report.below_top_k += group.members.len();
        }
    }

    let entries: std::collections::HashMap<&str, &CaptureEntry> = manifest
        .captures
        .iter()
        .map(|c| (c.capture_id.as_str(), c))
        .collect();
    let built: Vec<Result<ScreenRecord, String>> = selected
        .par_iter()
        .map(|&i| {
            let capture = &survivors[i];
            let image_path = format!(
                "{}/{}",
                manifest.dir,
                entries[capture.capture_id.as_str()].image_rel()
            );
            to_record(capture, image_path, config)
                .map_err(|e| format!("{}/{}: {e}", app.package_id, capture.capture_id))
        })
        .collect();
    let mut records = Vec::new();
    for r in built {
        match r {
            Ok(rec) => records.push(rec),
            Err(msg) => {
                report.invalid += 1;
                report.errors.push(msg);
            }
        }
    }
    records.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    report.kept = records.len();
    (records, report)
}

/// Runs the whole ingestion pipeline. A bad capture is counted and skipped,
/// never fatal. Records come out ordered by `(package_id, capture_id)`.
pub fn build_corpus(
    manifest: &CorpusManifest,
    resolver: &dyn StoreMetadataResolver,
    config: &IngestConfig,
) -> (Vec<ScreenRecord>, FilterReport) {
    let mut records = Vec::new();
    let mut report = FilterReport::default();
    for app in &manifest.apps {
        let (r, rep) = process_app(&manifest.root, app, resolver, config);
        records.extend(r);
        report.merge(rep);
    }
    debug_assert_eq!(report.dropped() + report.kept, report.input);
    (records, report)
}
