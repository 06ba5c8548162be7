use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{analyze, FieldName, Index};
use crate::color::{color_matches, parse_color_token, ColorSpec, ColorTolerance};
use crate::model::{Atom, Category, QueryAst, ScreenType};

/// BM25 free parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25 {
    pub k1: f64,
    pub b: f64,
}

pub const BM25: Bm25 = Bm25 { k1: 1.2, b: 0.75 };

impl Bm25 {
    /// Never negative: `ln(1 + (N - df + 0.5) / (df + 0.5))`.
    pub fn idf(&self, doc_count: usize, doc_freq: usize) -> f64 {
        let n = doc_count as f64;
        let df = doc_freq as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    pub fn term_score(&self, idf: f64, tf: u32, doc_len: u32, avg_len: f64) -> f64 {
        let tf = tf as f64;
        let norm = if avg_len > 0.0 {
            1.0 - self.b + self.b * doc_len as f64 / avg_len
        } else {
            1.0
        };
        idf * tf * (self.k1 + 1.0) / (tf + self.k1 * norm)
    }
}

/// Filters layered on top of the parsed query.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PredefinedFilters {
    /// Every listed component type must be present.
    #[serde(default)]
    pub ui_types: Vec<String>,
    /// The screen's type must be one of these (ignored when empty).
    #[serde(default)]
    pub screen_types: Vec<ScreenType>,
}

impl PredefinedFilters {
    pub fn is_empty(&self) -> bool {
        self.ui_types.is_empty() && self.screen_types.is_empty()
    }
}

/// Everything besides the query tree that restricts the result set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QueryFilters {
    /// Color-picker filter.
    pub color: Option<(ColorSpec, ColorTolerance)>,
    pub predefined: PredefinedFilters,
    /// Tolerance applied to `color:` atoms inside the query.
    pub color_tolerance: ColorTolerance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hit {
    pub doc_id: String,
    pub score: f64,
}

pub(crate) fn category_field(category: Category) -> Option<FieldName> {
    match category {
        Category::AppName => Some(FieldName::AppName),
        Category::Text => Some(FieldName::Text),
        Category::Ui => Some(FieldName::Ui),
        Category::Color => None,
    }
}

/// Documents matched by one atom, ascending, with the atom's BM25 score.
struct AtomHits {
    docs: Vec<u32>,
    scores: Vec<f64>,
}

impl AtomHits {
    fn score_of(&self, doc: u32) -> Option<f64> {
        self.docs.binary_search(&doc).ok().map(|i| self.scores[i])
    }
}

fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn union(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl Index {
    /// Docs whose field holds every term, scored by summed BM25.
    fn term_conjunction(&self, field: FieldName, terms: &[String]) -> AtomHits {
        if terms.is_empty() {
            return AtomHits {
                docs: Vec::new(),
                scores: Vec::new(),
            };
        }
        let fi = self.field(field);
        let mut lists: Vec<&[super::Posting]> =
            terms.iter().map(|t| self.postings(field, t)).collect();
        lists.sort_by_key(|l| l.len());
        let mut docs: Vec<u32> = lists[0].iter().map(|p| p.doc).collect();
        for list in &lists[1..] {
            let other: Vec<u32> = list.iter().map(|p| p.doc).collect();
            docs = intersect(&docs, &other);
        }
        let avg = fi.avg_len();
        let n = self.len();
        let mut scores = vec![0.0; docs.len()];
        for term in terms {
            let list = self.postings(field, term);
            let idf = BM25.idf(n, list.len());
            for (slot, doc) in docs.iter().enumerate() {
                let i = list
                    .binary_search_by_key(doc, |p| p.doc)
                    .expect("doc is in every list");
                scores[slot] += BM25.term_score(idf, list[i].tf, fi.lengths[*doc as usize], avg);
            }
        }
        AtomHits { docs, scores }
    }

    pub(crate) fn docs_with_color(&self, spec: &ColorSpec, tol: &ColorTolerance) -> Vec<u32> {
        self.colors
            .iter()
            .enumerate()
            .filter(|(_, row)| row.iter().any(|c| color_matches(c.hsl, spec, tol)))
            .map(|(i, _)| i as u32)
            .collect()
    }

    fn atom_hits(&self, atom: &Atom, filters: &QueryFilters) -> AtomHits {
        match category_field(atom.category) {
            Some(field) => self.term_conjunction(field, &analyze(&atom.value)),
            None => {
                let docs = parse_color_token(&atom.value)
                    .map(|spec| self.docs_with_color(&spec, &filters.color_tolerance))
                    .unwrap_or_default();
                let scores = vec![0.0; docs.len()];
                AtomHits { docs, scores }
            }
        }
    }

    fn eval(&self, node: &QueryAst, hits: &mut std::slice::Iter<'_, AtomHits>) -> Vec<u32> {
        match node {
            QueryAst::Atom(_) => hits.next().expect("one hit list per atom").docs.clone(),
            QueryAst::And(children) => {
                let mut acc: Option<Vec<u32>> = None;
                for child in children {
                    let docs = self.eval(child, hits);
                    acc = Some(match acc {
                        None => docs,
                        Some(prev) => intersect(&prev, &docs),
                    });
                }
                acc.unwrap_or_default()
            }
            QueryAst::Or(children) => children.iter().fold(Vec::new(), |acc, child| {
                union(&acc, &self.eval(child, hits))
            }),
        }
    }

    fn apply_filters(&self, mut docs: Vec<u32>, filters: &QueryFilters) -> Vec<u32> {
        for ui in &filters.predefined.ui_types {
            let hits = self.term_conjunction(FieldName::Ui, &analyze(ui));
            docs = intersect(&docs, &hits.docs);
        }
        if !filters.predefined.screen_types.is_empty() {
            let mut allowed = Vec::new();
            for st in &filters.predefined.screen_types {
                let list: Vec<u32> = self
                    .postings(FieldName::ScreenType, st.as_str())
                    .iter()
                    .map(|p| p.doc)
                    .collect();
                allowed = union(&allowed, &list);
            }
            docs = intersect(&docs, &allowed);
        }
        if let Some((spec, tol)) = &filters.color {
            docs.retain(|&d| {
                self.colors[d as usize]
                    .iter()
                    .any(|c| color_matches(c.hsl, spec, tol))
            });
        }
        docs
    }
}

/// Boolean retrieval followed by BM25 ranking.
///
/// Textual atoms a document satisfies add their BM25 score on the atom's
/// field; color atoms and filters only restrict. Ties go to the smaller doc id.
pub fn execute(index: &Index, ast: &QueryAst, filters: &QueryFilters, top_k: usize) -> Vec<Hit> {
    let atoms = ast.atoms();
    let atom_hits: Vec<AtomHits> = atoms.iter().map(|a| index.atom_hits(a, filters)).collect();
    let candidates = index.eval(ast, &mut atom_hits.iter());
    let candidates = index.apply_filters(candidates, filters);

    let textual: Vec<&AtomHits> = atoms
        .iter()
        .zip(&atom_hits)
        .filter(|(a, _)| a.category != Category::Color)
        .map(|(_, h)| h)
        .collect();
    let mut scored: Vec<(u32, f64)> = candidates
        .into_iter()
        .map(|doc| (doc, textual.iter().filter_map(|h| h.score_of(doc)).sum()))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(top_k);
    scored
        .into_iter()
        .map(|(doc, score)| Hit {
            doc_id: index.docs[doc as usize].doc_id.clone(),
            score,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::build_index;
    use crate::model::{AppMeta, Palette, ScreenRecord};

    fn rec(id: &str, app: &str, texts: &[&str], classes: &[&str], rgb: [u8; 3]) -> ScreenRecord {
        ScreenRecord {
            doc_id: id.into(),
            app: AppMeta {
                package_id: id.split('/').next().unwrap().into(),
                app_name: app.into(),
                store_url: String::new(),
                description: None,
            },
            activity_name: String::new(),
            component_classes: classes
                .iter()
                .map(|s| format!("android.widget.{s}"))
                .collect(),
            component_texts: texts.iter().map(|s| s.to_string()).collect(),
            palette: Palette::solid(rgb),
            image_path: String::new(),
            screen_type: ScreenType::Other,
        }
    }

    fn fixture() -> Index {
        build_index(vec![
            rec(
                "a/A",
                "Pizza Go",
                &["Order pizza"],
                &["EditText", "Button"],
                [255, 0, 0],
            ),
            rec("b/B", "Bank", &["Balance"], &["TextView"], [0, 0, 255]),
            rec(
                "c/C",
                "Chat",
                &["Type a message"],
                &["EditText"],
                [0, 128, 0],
            ),
        ])
        .unwrap()
    }

    fn ids(hits: &[Hit]) -> Vec<&str> {
        hits.iter().map(|h| h.doc_id.as_str()).collect()
    }

    #[test]
    fn ui_atom() {
        let idx = fixture();
        let hits = execute(
            &idx,
            &QueryAst::atom(Category::Ui, "edittext"),
            &QueryFilters::default(),
            10,
        );
        let mut got = ids(&hits);
        got.sort();
        assert_eq!(got, ["a/A", "c/C"]);
    }

    #[test]
    fn disjoint_and_is_empty() {
        let idx = fixture();
        let ast = QueryAst::and(vec![
            QueryAst::atom(Category::AppName, "bank"),
            QueryAst::atom(Category::AppName, "chat"),
        ]);
        assert!(execute(&idx, &ast, &QueryFilters::default(), 10).is_empty());
    }

    #[test]
    fn color_atoms_filter_without_score() {
        let idx = fixture();
        let hits = execute(
            &idx,
            &QueryAst::atom(Category::Color, "red"),
            &QueryFilters::default(),
            10,
        );
        assert_eq!(ids(&hits), ["a/A"]);
        assert_eq!(hits[0].score, 0.0);
    }

    #[test]
    fn filters_intersect() {
        let idx = fixture();
        let ast = QueryAst::atom(Category::Ui, "edittext");
        let filters = QueryFilters {
            color: Some((parse_color_token("green").unwrap(), ColorTolerance::DEFAULT)),
            ..Default::default()
        };
        assert_eq!(ids(&execute(&idx, &ast, &filters, 10)), ["c/C"]);
        let filters = QueryFilters {
            predefined: PredefinedFilters {
                ui_types: vec!["Button".into()],
                screen_types: vec![],
            },
            ..Default::default()
        };
        assert_eq!(ids(&execute(&idx, &ast, &filters, 10)), ["a/A"]);
        let filters = QueryFilters {
            predefined: PredefinedFilters {
                ui_types: vec![],
                screen_types: vec![ScreenType::Login],
            },
            ..Default::default()
        };
        assert!(execute(&idx, &ast, &filters, 10).is_empty());
    }

    #[test]
    fn multi_term_atom_requires_all_terms() {
        let idx = fixture();
        let hit = execute(
            &idx,
            &QueryAst::atom(Category::Text, "order pizza"),
            &QueryFilters::default(),
            10,
        );
        assert_eq!(ids(&hit), ["a/A"]);
        let miss = execute(
            &idx,
            &QueryAst::atom(Category::Text, "order balance"),
            &QueryFilters::default(),
            10,
        );
        assert!(miss.is_empty());
        let nothing = execute(
            &idx,
            &QueryAst::atom(Category::Text, "®"),
            &QueryFilters::default(),
            10,
        );
        assert!(nothing.is_empty());
    }

    #[test]
    fn bm25_matches_hand_computation() {
        let idx = fixture();
        let hits = execute(
            &idx,
            &QueryAst::atom(Category::Text, "balance"),
            &QueryFilters::default(),
            10,
        );
        // N=3, df=1, tf=1, dl=1, avgdl=(2+1+3)/3=2
        let idf = (1.0f64 + (3.0 - 1.0 + 0.5) / 1.5).ln();
        let expected = idf * 2.2 / (1.0 + 1.2 * (0.25 + 0.75 * 0.5));
        assert!((hits[0].score - expected).abs() < 1e-12);
    }

    #[test]
    fn ties_break_by_doc_id_and_top_k_truncates() {
        let idx = fixture();
        let ast = QueryAst::atom(Category::Ui, "edittext");
        let hits = execute(&idx, &ast, &QueryFilters::default(), 1);
        assert_eq!(hits.len(), 1);
        let all = execute(&idx, &ast, &QueryFilters::default(), usize::MAX);
        assert_eq!(all.len(), 2);
        assert!(all[0].score >= all[1].score);
    }

    #[test]
    fn more_matching_atoms_score_higher() {
        let idx = fixture();
        let one = execute(
            &idx,
            &QueryAst::atom(Category::AppName, "pizza"),
            &QueryFilters::default(),
            10,
        );
        let both = execute(
            &idx,
            &QueryAst::or(vec![
                QueryAst::atom(Category::AppName, "pizza"),
                QueryAst::atom(Category::Text, "pizza"),
            ]),
            &QueryFilters::default(),
            10,
        );
        assert!(both[0].score > one[0].score);
    }

    #[test]
    fn idf_is_non_negative() {
        for df in 0..=10 {
            assert!(BM25.idf(10, df) >= 0.0);
        }
    }
}
