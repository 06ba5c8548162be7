//! Reference evaluation: every predicate checked directly against each
//! record, with no index structures involved.

use std::collections::{BTreeSet, HashSet};

use super::{analyze, QueryFilters};
use crate::color::{color_matches, parse_color_token};
use crate::model::{Category, QueryAst, ScreenRecord};

struct DocView<'a> {
    record: &'a ScreenRecord,
    appname: HashSet<String>,
    text: HashSet<String>,
    ui: HashSet<String>,
}

impl DocView<'_> {
    fn terms(&self, category: Category) -> &HashSet<String> {
        match category {
            Category::AppName => &self.appname,
            Category::Text => &self.text,
            _ => &self.ui,
        }
    }

    fn contains_all(set: &HashSet<String>, value: &str) -> bool {
        let terms = analyze(value);
        !terms.is_empty() && terms.iter().all(|t| set.contains(t))
    }

    fn matches(&self, node: &QueryAst, filters: &QueryFilters) -> bool {
        match node {
            QueryAst::Atom(atom) if atom.category == Category::Color => {
                match parse_color_token(&atom.value) {
                    Ok(spec) => self
                        .record
                        .palette
                        .entries()
                        .iter()
                        .any(|e| color_matches(e.hsl, &spec, &filters.color_tolerance)),
                    Err(_) => false,
                }
            }
            QueryAst::Atom(atom) => Self::contains_all(self.terms(atom.category), &atom.value),
            QueryAst::And(children) => children.iter().all(|c| self.matches(c, filters)),
            QueryAst::Or(children) => children.iter().any(|c| self.matches(c, filters)),
        }
    }

    fn passes_filters(&self, filters: &QueryFilters) -> bool {
        let ui_ok = filters
            .predefined
            .ui_types
            .iter()
            .all(|u| Self::contains_all(&self.ui, u));
        let type_ok = filters.predefined.screen_types.is_empty()
            || filters
                .predefined
                .screen_types
                .contains(&self.record.screen_type);
        let color_ok = filters.color.as_ref().is_none_or(|(spec, tol)| {
            self.record
                .palette
                .entries()
                .iter()
                .any(|e| color_matches(e.hsl, spec, tol))
        });
        ui_ok && type_ok && color_ok
    }
}

/// The set of doc ids `execute` must return when unbounded.
pub fn scan_match(
    records: &[ScreenRecord],
    ast: &QueryAst,
    filters: &QueryFilters,
) -> BTreeSet<String> {
    records
        .iter()
        .filter(|record| {
            let view = DocView {
                record,
                appname: analyze(&record.app.app_name).into_iter().collect(),
                text: record
                    .component_texts
                    .iter()
                    .flat_map(|t| analyze(t))
                    .collect(),
                ui: record
                    .component_classes
                    .iter()
                    .flat_map(|c| analyze(c.rsplit('.').next().unwrap_or(c)))
                    .collect(),
            };
            view.matches(ast, filters) && view.passes_filters(filters)
        })
        .map(|r| r.doc_id.clone())
        .collect()
}
