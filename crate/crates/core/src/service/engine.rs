use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ServiceError;
use crate::color::{parse_color_token, ColorTolerance};
use crate::index::{analyze, execute, Index, PredefinedFilters, QueryFilters};
use crate::model::{canonical_query_string, Category, ScreenRecord, ScreenType};
use crate::query::{parse, suggest, QueryError, Suggestion, Vocabulary};

pub const DEFAULT_PAGE_SIZE: usize = 10;
pub const MAX_PAGE_SIZE: usize = 50;
pub const DEFAULT_SIMILAR_K: usize = 5;
const SNIPPET_TEXTS: usize = 3;
const SNIPPET_CHARS: usize = 160;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRequest {
    pub q: String,
    /// Color picker value, hex or web color name.
    #[serde(default)]
    pub color: Option<String>,
    /// Slider position in `[0, 1]`; absent means the default tolerance.
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub ui_filter: Vec<String>,
    #[serde(default)]
    pub screen_type_filter: Vec<ScreenType>,
    #[serde(default)]
    pub page: usize,
    #[serde(default = "default_page_size")]
    pub page_size: usize,
}

fn default_page_size() -> usize {
    DEFAULT_PAGE_SIZE
}

impl SearchRequest {
    pub fn new(q: impl Into<String>) -> Self {
        Self {
            q: q.into(),
            color: None,
            tolerance: None,
            ui_filter: Vec::new(),
            screen_type_filter: Vec::new(),
            page: 0,
            page_size: DEFAULT_PAGE_SIZE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchHit {
    pub doc_id: String,
    pub score: f64,
    pub app_name: String,
    pub thumbnail: String,
    pub snippet: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchPage {
    /// Canonical form of the parsed query.
    pub query: String,
    pub total: usize,
    pub page: usize,
    pub page_size: usize,
    pub hits: Vec<SearchHit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarScreen {
    pub doc_id: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetailColor {
    pub hex: String,
    pub rgb: [u8; 3],
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreenDetail {
    #[serde(flatten)]
    pub record: ScreenRecord,
    /// Palette order, largest share first.
    pub colors: Vec<DetailColor>,
    /// Distinct component short names, sorted.
    pub component_types: Vec<String>,
    pub store_url: String,
    pub thumbnail: String,
    pub full_image: String,
    pub similar: Vec<SimilarScreen>,
    pub same_app: Vec<String>,
}

/// Jaccard index of two sorted, deduplicated slices. Two empty sets share
/// nothing and score 0.
pub fn jaccard<T: Ord>(a: &[T], b: &[T]) -> f64 {
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

fn thumb_url(doc_id: &str) -> String {
    format!("/static/thumbs/{doc_id}.png")
}

fn full_url(doc_id: &str) -> String {
    format!("/static/full/{doc_id}.png")
}

/// Read-only search facade over one index; cheap to share across threads.
#[derive(Debug)]
pub struct SearchEngine {
    index: Arc<Index>,
    vocab: Vocabulary,
    /// Sorted component short names per doc, in index order.
    short_names: Vec<Vec<String>>,
    /// Doc positions per package id.
    by_app: BTreeMap<String, Vec<usize>>,
}

impl SearchEngine {
    pub fn new(index: Index) -> Self {
        let vocab = index.vocabulary();
        let short_names = index
            .docs()
            .iter()
            .map(ScreenRecord::component_short_names)
            .collect();
        let mut by_app: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, doc) in index.docs().iter().enumerate() {
            by_app
                .entry(doc.app.package_id.clone())
                .or_default()
                .push(i);
        }
        Self {
            index: Arc::new(index),
            vocab,
            short_names,
            by_app,
        }
    }

    pub fn index(&self) -> &Index {
        &self.index
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn filters_for(&self, req: &SearchRequest) -> Result<QueryFilters, ServiceError> {
        let tolerance = match req.tolerance {
            Some(t) => ColorTolerance::from_slider(t)
                .map_err(|e| ServiceError::InvalidRequest(e.to_string()))?,
            None => ColorTolerance::DEFAULT,
        };
        let color = match req
            .color
            .as_deref()
            .map(str::trim)
            .filter(|c| !c.is_empty())
        {
            Some(c) => Some((
                parse_color_token(c).map_err(|_| QueryError::InvalidColorValue {
                    value: c.to_string(),
                    offset: 0,
                })?,
                tolerance,
            )),
            None => None,
        };
        Ok(QueryFilters {
            color,
            predefined: PredefinedFilters {
                ui_types: req
                    .ui_filter
                    .iter()
                    .map(|u| u.trim().to_lowercase())
                    .filter(|u| !u.is_empty())
                    .collect(),
                screen_types: req.screen_type_filter.clone(),
            },
            color_tolerance: tolerance,
        })
    }

    pub fn search(&self, req: &SearchRequest) -> Result<SearchPage, ServiceError> {
        if !(1..=MAX_PAGE_SIZE).contains(&req.page_size) {
            return Err(ServiceError::InvalidRequest(format!(
                "page_size must be between 1 and {MAX_PAGE_SIZE}, got {}",
                req.page_size
            )));
        }
        let ast = parse(&req.q, &self.vocab)?;
        let filters = self.filters_for(req)?;
        let hits = execute(&self.index, &ast, &filters, usize::MAX);
        let total = hits.len();

        let query_terms: HashSet<String> = ast
            .atoms()
            .into_iter()
            .filter(|a| matches!(a.category, Category::Text | Category::AppName))
            .flat_map(|a| analyze(&a.value))
            .collect();
        let start = req.page.saturating_mul(req.page_size).min(total);
        let end = start.saturating_add(req.page_size).min(total);
        let hits = hits[start..end]
            .iter()
            .map(|h| {
                let doc = self
                    .index
                    .doc(&h.doc_id)
                    .expect("hits refer to indexed docs");
                SearchHit {
                    doc_id: h.doc_id.clone(),
                    score: h.score,
                    app_name: doc.app.app_name.clone(),
                    thumbnail: thumb_url(&h.doc_id),
                    snippet: snippet(doc, &query_terms),
                }
            })
            .collect();
        Ok(SearchPage {
            query: canonical_query_string(&ast),
            total,
            page: req.page,
            page_size: req.page_size,
            hits,
        })
    }

    fn position(&self, doc_id: &str) -> Result<usize, ServiceError> {
        let doc = self
            .index
            .doc(doc_id)
            .ok_or_else(|| ServiceError::UnknownDoc(doc_id.to_string()))?;
        Ok(self
            .index
            .docs()
            .binary_search_by(|d| d.doc_id.as_str().cmp(&doc.doc_id))
            .expect("docs are sorted by id"))
    }

    /// Most similar screens of other apps by component-type overlap; ties go
    /// to the smaller doc id.
    pub fn similar_screens(
        &self,
        doc_id: &str,
        k: usize,
    ) -> Result<Vec<SimilarScreen>, ServiceError> {
        let me = self.position(doc_id)?;
        let package = &self.index.docs()[me].app.package_id;
        let mine = &self.short_names[me];
        let mut scored: Vec<(usize, f64)> = self
            .index
            .docs()
            .iter()
            .enumerate()
            .filter(|(_, d)| &d.app.package_id != package)
            .map(|(i, _)| (i, jaccard(mine, &self.short_names[i])))
            .collect();
        // Docs are in id order, so a stable sort keeps ties by id.
        scored.sort_by(|a, b| b.1.total_cmp(&a.1));
        Ok(scored
            .into_iter()
            .take(k)
            .map(|(i, similarity)| SimilarScreen {
                doc_id: self.index.docs()[i].doc_id.clone(),
                similarity,
            })
            .collect())
    }

    pub fn screen_detail(&self, doc_id: &str) -> Result<ScreenDetail, ServiceError> {
        let me = self.position(doc_id)?;
        let record = self.index.docs()[me].clone();
        let same_app = self.by_app[&record.app.package_id]
            .iter()
            .filter(|&&i| i != me)
            .map(|&i| self.index.docs()[i].doc_id.clone())
            .collect();
        Ok(ScreenDetail {
            colors: record
                .palette
                .entries()
                .iter()
                .map(|e| DetailColor {
                    hex: e.hex(),
                    rgb: e.rgb,
                    proportion: e.proportion,
                })
                .collect(),
            component_types: self.short_names[me].clone(),
            store_url: record.app.store_url.clone(),
            thumbnail: thumb_url(&record.doc_id),
            full_image: full_url(&record.doc_id),
            similar: self.similar_screens(doc_id, DEFAULT_SIMILAR_K)?,
            same_app,
            record,
        })
    }

    pub fn suggest(&self, prefix: &str, limit: usize) -> Vec<Suggestion> {
        suggest(prefix, &self.vocab, limit)
    }
}

/// Up to three component texts, preferring ones that contain a query term.
fn snippet(doc: &ScreenRecord, query_terms: &HashSet<String>) -> String {
    let matching = |t: &&String| analyze(t).iter().any(|term| query_terms.contains(term));
    let mut picked: Vec<&String> = doc
        .component_texts
        .iter()
        .filter(matching)
        .take(SNIPPET_TEXTS)
        .collect();
    if picked.len() < SNIPPET_TEXTS {
        let rest: Vec<&String> = doc
            .component_texts
            .iter()
            .filter(|t| !picked.contains(t))
            .take(SNIPPET_TEXTS - picked.len())
            .collect();
        picked.extend(rest);
    }
    let joined = picked
        .iter()
        .map(|s| s.as_str())
        .collect::<Vec<_>>()
        .join(" | ");
    if joined.chars().count() <= SNIPPET_CHARS {
        joined
    } else {
        let mut cut: String = joined.chars().take(SNIPPET_CHARS - 3).collect();
        cut.push_str("...");
        cut
    }
}
