use std::collections::HashMap;

use sha2::{Digest, Sha256};

use super::hierarchy::real_nodes;
use crate::model::{GuiNode, ScreenCapture};

/// Identity of a screen: hash of the pre-order `(class, text)` sequence.
/// Bounds are ignored since they jitter between visits.
pub fn fingerprint_screen(root: &GuiNode) -> String {
    let mut hasher = Sha256::new();
    for node in real_nodes(root) {
        for part in [&node.class_name, &node.text] {
            hasher.update((part.len() as u64).to_le_bytes());
            hasher.update(part.as_bytes());
        }
    }
    hasher.finalize()[..16]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// One group of same-fingerprint captures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct ScreenGroup {
    /// Index of the representative in the input slice.
    pub representative: usize,
    pub members: Vec<usize>,
    pub frequency: u64,
}

/// Groups `(fingerprint, visit_count, capture_id)` triples and ranks the
/// groups by total visits; ties go to the group holding the smaller capture id.
pub(crate) fn rank_groups(items: &[(String, u32, &str)]) -> Vec<ScreenGroup> {
    let mut by_fp: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, (fp, _, _)) in items.iter().enumerate() {
        by_fp.entry(fp.as_str()).or_default().push(i);
    }
    let mut groups: Vec<(ScreenGroup, &str)> = by_fp
        .into_values()
        .map(|members| {
            let frequency = members.iter().map(|&i| items[i].1.max(1) as u64).sum();
            let representative = *members
                .iter()
                .min_by(|&&a, &&b| items[b].1.cmp(&items[a].1).then(items[a].2.cmp(items[b].2)))
                .expect("groups are non-empty");
            let min_id = members
                .iter()
                .map(|&i| items[i].2)
                .min()
                .expect("groups are non-empty");
            (
                ScreenGroup {
                    representative,
                    members,
                    frequency,
                },
                min_id,
            )
        })
        .collect();
    groups.sort_by(|a, b| b.0.frequency.cmp(&a.0.frequency).then(a.1.cmp(b.1)));
    groups.into_iter().map(|(g, _)| g).collect()
}

/// One representative from each of the `k` most visited distinct screens,
/// most visited first.
pub fn select_top_screens(captures: Vec<ScreenCapture>, k: usize) -> Vec<ScreenCapture> {
    let items: Vec<(String, u32, &str)> = captures
        .iter()
        .map(|c| {
            (
                fingerprint_screen(&c.hierarchy),
                c.visit_count,
                c.capture_id.as_str(),
            )
        })
        .collect();
    let picks: Vec<usize> = rank_groups(&items)
        .into_iter()
        .take(k)
        .map(|g| g.representative)
        .collect();
    let mut slots: Vec<Option<ScreenCapture>> = captures.into_iter().map(Some).collect();
    picks.into_iter().filter_map(|i| slots[i].take()).collect()
}
