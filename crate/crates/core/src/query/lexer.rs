use super::QueryError;

/// A whitespace/paren-delimited token of the raw query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawToken {
    /// Lowercased, quotes removed.
    pub text: String,
    /// Character offset of the token's first character in the raw query.
    pub offset: usize,
    /// Whether any part of the token was quoted.
    pub quoted: bool,
    /// Byte position in `text` of the first `:` that was outside quotes.
    pub colon: Option<usize>,
}

impl RawToken {
    pub fn is_paren(&self) -> bool {
        !self.quoted && (self.text == "(" || self.text == ")")
    }
}

/// Query clean-up: trims, collapses whitespace runs, lowercases and puts
/// spaces around parentheses. Quoted segments keep their quotes (and any
/// parentheses inside them).
pub fn preprocess(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut in_quote = false;
    let mut pending_space = false;
    let push_space = |out: &mut String, pending: &mut bool| {
        if *pending && !out.is_empty() {
            out.push(' ');
        }
        *pending = false;
    };
    for ch in raw.chars() {
        if ch.is_whitespace() {
            pending_space = true;
            continue;
        }
        if ch == '"' {
            push_space(&mut out, &mut pending_space);
            in_quote = !in_quote;
            out.push('"');
            continue;
        }
        if !in_quote && (ch == '(' || ch == ')') {
            pending_space = true;
            push_space(&mut out, &mut pending_space);
            out.push(ch);
            pending_space = true;
            continue;
        }
        push_space(&mut out, &mut pending_space);
        out.extend(ch.to_lowercase());
    }
    out
}

/// Splits a query into tokens, tracking character offsets into `raw`.
pub fn tokenize(raw: &str) -> Result<Vec<RawToken>, QueryError> {
    let mut tokens = Vec::new();
    let mut current: Option<RawToken> = None;
    let mut in_quote = false;
    let mut quote_start = 0;

    fn flush(tokens: &mut Vec<RawToken>, current: &mut Option<RawToken>) {
        if let Some(tok) = current.take() {
            tokens.push(tok);
        }
    }

    for (offset, ch) in raw.chars().enumerate() {
        if in_quote {
            let tok = current.as_mut().expect("quoted segment belongs to a token");
            if ch == '"' {
                in_quote = false;
            } else if ch.is_whitespace() {
                // collapse runs inside quotes too
                if !tok.text.ends_with(' ') {
                    tok.text.push(' ');
                }
            } else {
                tok.text.extend(ch.to_lowercase());
            }
            continue;
        }
        match ch {
            c if c.is_whitespace() => flush(&mut tokens, &mut current),
            '(' | ')' => {
                flush(&mut tokens, &mut current);
                tokens.push(RawToken {
                    text: ch.to_string(),
                    offset,
                    quoted: false,
                    colon: None,
                });
            }
            '"' => {
                in_quote = true;
                quote_start = offset;
                current
                    .get_or_insert_with(|| RawToken {
                        text: String::new(),
                        offset,
                        quoted: true,
                        colon: None,
                    })
                    .quoted = true;
            }
            _ => {
                let tok = current.get_or_insert_with(|| RawToken {
                    text: String::new(),
                    offset,
                    quoted: false,
                    colon: None,
                });
                if ch == ':' && tok.colon.is_none() && !tok.quoted {
                    tok.colon = Some(tok.text.len());
                }
                tok.text.extend(ch.to_lowercase());
            }
        }
    }
    if in_quote {
        return Err(QueryError::UnterminatedQuote {
            offset: quote_start,
        });
    }
    flush(&mut tokens, &mut current);
    for tok in &mut tokens {
        if tok.quoted {
            let trimmed = tok.text.trim();
            if trimmed.len() != tok.text.len() {
                let lead = tok.text.len() - tok.text.trim_start().len();
                tok.colon = tok.colon.map(|c| c.saturating_sub(lead));
                tok.text = trimmed.to_string();
            }
        }
    }
    Ok(tokens)
}
