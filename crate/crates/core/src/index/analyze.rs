/// Lowercases and splits on anything that is not alphanumeric. No stemming,
/// no stopwords.
pub fn analyze(raw: &str) -> Vec<String> {
    raw.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}
