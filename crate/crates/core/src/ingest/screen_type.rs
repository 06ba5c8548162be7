use serde::{Deserialize, Serialize};

use crate::index::analyze;
use crate::model::{class_short_name, ScreenType};

/// Assigns `label` when the activity name contains a keyword, a text term
/// (or two adjacent terms run together) equals a keyword, or a component
/// short class is listed in `classes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenTypeRule {
    pub label: ScreenType,
    #[serde(default)]
    pub keywords: Vec<String>,
    #[serde(default)]
    pub classes: Vec<String>,
}

/// Rules are tried in order; the first hit wins, otherwise `other`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenTypeRules {
    pub rules: Vec<ScreenTypeRule>,
}

impl Default for ScreenTypeRules {
    fn default() -> Self {
        let rule = |label, keywords: &[&str], classes: &[&str]| ScreenTypeRule {
            label,
            keywords: keywords.iter().map(|s| s.to_string()).collect(),
            classes: classes.iter().map(|s| s.to_string()).collect(),
        };
        Self {
            rules: vec![
                rule(
                    ScreenType::Login,
                    &["login", "signin", "signup", "logon", "password", "register"],
                    &[],
                ),
                rule(
                    ScreenType::Settings,
                    &["settings", "setting", "preferences", "preference"],
                    &[],
                ),
                rule(
                    ScreenType::Map,
                    &["map", "maps", "directions"],
                    &["mapview"],
                ),
                rule(ScreenType::Browser, &["browser", "webview"], &["webview"]),
                rule(
                    ScreenType::Media,
                    &["player", "video", "music", "gallery", "camera"],
                    &["videoview"],
                ),
                rule(
                    ScreenType::List,
                    &["list"],
                    &["listview", "recyclerview", "gridview"],
                ),
            ],
        }
    }
}

impl ScreenTypeRules {
    pub fn classify<S: AsRef<str>>(
        &self,
        activity_name: &str,
        texts: &[S],
        classes: &[S],
    ) -> ScreenType {
        let activity = activity_name.to_lowercase();
        let terms: Vec<String> = texts.iter().flat_map(|t| analyze(t.as_ref())).collect();
        let joined_pairs: Vec<String> = terms
            .windows(2)
            .map(|w| format!("{}{}", w[0], w[1]))
            .collect();
        let shorts: Vec<String> = classes
            .iter()
            .map(|c| class_short_name(c.as_ref()))
            .collect();

        for rule in &self.rules {
            let keyword_hit = rule.keywords.iter().any(|k| {
                let k = k.to_lowercase();
                activity.contains(&k) || terms.contains(&k) || joined_pairs.contains(&k)
            });
            let class_hit = rule
                .classes
                .iter()
                .any(|c| shorts.iter().any(|s| s.eq_ignore_ascii_case(c)));
            if keyword_hit || class_hit {
                return rule.label;
            }
        }
        ScreenType::Other
    }
}
