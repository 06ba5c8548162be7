//! Immutable multi-field inverted index over screen records.

mod analyze;
mod exec;
mod persist;
mod scan;

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::Hsl;
use crate::model::{class_short_name, ScreenRecord};
use crate::query::Vocabulary;

pub use analyze::analyze;
pub use exec::{execute, Bm25, Hit, PredefinedFilters, QueryFilters, BM25};
pub use persist::{load_index, save_index, FORMAT_VERSION};
pub use scan::scan_match;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("duplicate doc id `{0}`")]
    DuplicateDocId(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt index: {0}")]
    CorruptIndex(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldName {
    AppName,
    Text,
    Ui,
    ScreenType,
}

impl FieldName {
    pub const ALL: [FieldName; 4] = [
        FieldName::AppName,
        FieldName::Text,
        FieldName::Ui,
        FieldName::ScreenType,
    ];

    fn slot(self) -> usize {
        self as usize
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            FieldName::AppName => "appname",
            FieldName::Text => "text",
            FieldName::Ui => "ui",
            FieldName::ScreenType => "screen_type",
        }
    }
}

impl fmt::Display for FieldName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Terms a record contributes to each field, in field order.
pub(crate) fn field_terms(record: &ScreenRecord, field: FieldName) -> Vec<String> {
    match field {
        FieldName::AppName => analyze(&record.app.app_name),
        FieldName::Text => analyze(&record.component_texts.join(" ")),
        FieldName::Ui => record
            .component_classes
            .iter()
            .flat_map(|c| analyze(&class_short_name(c)))
            .collect(),
        FieldName::ScreenType => vec![record.screen_type.as_str().to_string()],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorCell {
    pub hsl: Hsl,
    pub proportion: f64,
}

pub(crate) fn color_row(record: &ScreenRecord) -> Vec<ColorCell> {
    record
        .palette
        .entries()
        .iter()
        .map(|e| ColorCell {
            hsl: e.hsl,
            proportion: e.proportion,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub(crate) struct FieldIndex {
    pub(crate) postings: HashMap<String, Vec<Posting>>,
    /// Term count per document.
    pub(crate) lengths: Vec<u32>,
}

impl FieldIndex {
    pub(crate) fn avg_len(&self) -> f64 {
        if self.lengths.is_empty() {
            return 0.0;
        }
        self.lengths.iter().map(|&l| l as f64).sum::<f64>() / self.lengths.len() as f64
    }
}

/// Built once from a record list; read-only afterwards. Documents are
/// numbered in ascending `doc_id` order.
#[derive(Debug, Clone, PartialEq)]
pub struct Index {
    pub(crate) docs: Vec<ScreenRecord>,
    pub(crate) fields: Vec<FieldIndex>,
    /// Palette HSL values and proportions per document.
    pub(crate) colors: Vec<Vec<ColorCell>>,
    pub(crate) lookup: HashMap<String, u32>,
}

pub fn build_index(records: Vec<ScreenRecord>) -> Result<Index, IndexError> {
    let mut docs = records;
    docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    if let Some(w) = docs.windows(2).find(|w| w[0].doc_id == w[1].doc_id) {
        return Err(IndexError::DuplicateDocId(w[0].doc_id.clone()));
    }

    let mut fields: Vec<FieldIndex> = FieldName::ALL
        .iter()
        .map(|_| FieldIndex::default())
        .collect();
    for (docnum, record) in docs.iter().enumerate() {
        for field in FieldName::ALL {
            let terms = field_terms(record, field);
            let fi = &mut fields[field.slot()];
            fi.lengths.push(terms.len() as u32);
            let mut counts: HashMap<String, u32> = HashMap::new();
            for t in terms {
                *counts.entry(t).or_default() += 1;
            }
            for (term, tf) in counts {
                fi.postings.entry(term).or_default().push(Posting {
                    doc: docnum as u32,
                    tf,
                });
            }
        }
    }
    let colors = docs.iter().map(color_row).collect();
    Ok(Index::from_parts(docs, fields, colors))
}

impl Index {
    pub(crate) fn from_parts(
        docs: Vec<ScreenRecord>,
        fields: Vec<FieldIndex>,
        colors: Vec<Vec<ColorCell>>,
    ) -> Self {
        let lookup = docs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.doc_id.clone(), i as u32))
            .collect();
        Self {
            docs,
            fields,
            colors,
            lookup,
        }
    }

    pub fn empty() -> Self {
        Self::from_parts(
            Vec::new(),
            FieldName::ALL
                .iter()
                .map(|_| FieldIndex::default())
                .collect(),
            Vec::new(),
        )
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn docs(&self) -> &[ScreenRecord] {
        &self.docs
    }

    pub fn doc(&self, doc_id: &str) -> Option<&ScreenRecord> {
        self.lookup.get(doc_id).map(|&i| &self.docs[i as usize])
    }

    pub(crate) fn field(&self, field: FieldName) -> &FieldIndex {
        &self.fields[field.slot()]
    }

    pub fn postings(&self, field: FieldName, term: &str) -> &[Posting] {
        self.field(field)
            .postings
            .get(term)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// All terms of a field, sorted.
    pub fn terms(&self, field: FieldName) -> Vec<&str> {
        let mut terms: Vec<&str> = self
            .field(field)
            .postings
            .keys()
            .map(String::as_str)
            .collect();
        terms.sort_unstable();
        terms
    }

    /// Query vocabulary drawn from this index: component types and app-name
    /// terms that actually occur.
    pub fn vocabulary(&self) -> Vocabulary {
        Vocabulary::new(self.terms(FieldName::Ui), self.terms(FieldName::AppName))
    }

    pub fn colors(&self, doc_id: &str) -> Option<&[ColorCell]> {
        self.lookup
            .get(doc_id)
            .map(|&i| self.colors[i as usize].as_slice())
    }

    pub fn avg_field_len(&self, field: FieldName) -> f64 {
        self.field(field).avg_len()
    }

    /// Structural consistency: postings sorted, every posting refers to a
    /// stored document, per-field lengths cover every document.
    pub fn check_consistency(&self) -> Result<(), IndexError> {
        let n = self.docs.len();
        if self.fields.len() != FieldName::ALL.len() {
            return Err(IndexError::CorruptIndex(format!(
                "expected 4 fields, found {}",
                self.fields.len()
            )));
        }
        for (field, fi) in FieldName::ALL.iter().zip(&self.fields) {
            if fi.lengths.len() != n {
                return Err(IndexError::CorruptIndex(format!(
                    "field {field} has {} lengths for {n} documents",
                    fi.lengths.len()
                )));
            }
            for (term, list) in &fi.postings {
                if list.is_empty()
                    || list.windows(2).any(|w| w[0].doc >= w[1].doc)
                    || list.iter().any(|p| p.doc as usize >= n || p.tf == 0)
                {
                    return Err(IndexError::CorruptIndex(format!(
                        "bad postings for {field}:{term}"
                    )));
                }
            }
        }
        if self.colors.len() != n
            || self
                .docs
                .iter()
                .zip(&self.colors)
                .any(|(d, c)| color_row(d) != *c)
        {
            return Err(IndexError::CorruptIndex(
                "color table disagrees with document store".into(),
            ));
        }
        if self.docs.windows(2).any(|w| w[0].doc_id >= w[1].doc_id) {
            return Err(IndexError::CorruptIndex(
                "document store not sorted by doc id".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AppMeta, Palette, ScreenType};

    fn record(doc_id: &str, app: &str, texts: &[&str], classes: &[&str]) -> ScreenRecord {
        ScreenRecord {
            doc_id: doc_id.into(),
            app: AppMeta {
                package_id: doc_id.split('/').next().unwrap().into(),
                app_name: app.into(),
                store_url: String::new(),
                description: None,
            },
            activity_name: String::new(),
            component_classes: classes.iter().map(|s| s.to_string()).collect(),
            component_texts: texts.iter().map(|s| s.to_string()).collect(),
            palette: Palette::solid([255, 255, 255]),
            image_path: String::new(),
            screen_type: ScreenType::Other,
        }
    }

    #[test]
    fn hand_computed_postings() {
        let idx = build_index(vec![record(
            "p/1",
            "Pizza Go",
            &["Order now"],
            &["android.widget.EditText"],
        )])
        .unwrap();
        assert_eq!(idx.terms(FieldName::AppName), ["go", "pizza"]);
        assert_eq!(idx.terms(FieldName::Text), ["now", "order"]);
        assert_eq!(idx.terms(FieldName::Ui), ["edittext"]);
        assert_eq!(idx.terms(FieldName::ScreenType), ["other"]);
        assert_eq!(
            idx.postings(FieldName::Ui, "edittext"),
            [Posting { doc: 0, tf: 1 }]
        );
        assert!(idx.check_consistency().is_ok());
    }

    #[test]
    fn term_frequencies_and_lengths() {
        let idx = build_index(vec![
            record("b/1", "x", &["ok ok", "cancel"], &["a.Button", "a.Button"]),
            record("a/1", "y", &[], &["a.View"]),
        ])
        .unwrap();
        // sorted by doc id: a/1 is doc 0
        assert_eq!(idx.docs()[0].doc_id, "a/1");
        assert_eq!(
            idx.postings(FieldName::Text, "ok"),
            [Posting { doc: 1, tf: 2 }]
        );
        assert_eq!(
            idx.postings(FieldName::Ui, "button"),
            [Posting { doc: 1, tf: 2 }]
        );
        assert_eq!(idx.field(FieldName::Text).lengths, [0, 3]);
        assert_eq!(idx.avg_field_len(FieldName::Text), 1.5);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = build_index(vec![
            record("a/1", "x", &[], &["a.B"]),
            record("a/1", "y", &[], &["a.B"]),
        ]);
        assert!(matches!(err, Err(IndexError::DuplicateDocId(id)) if id == "a/1"));
    }

    #[test]
    fn empty_index() {
        let idx = build_index(Vec::new()).unwrap();
        assert!(idx.is_empty());
        assert_eq!(idx, Index::empty());
    }
}
