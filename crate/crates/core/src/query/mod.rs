//! The query language.
//!
//! Parsing runs in four steps: [`preprocess`] cleans the raw string,
//! [`classify_tokens`] assigns each token a category (explicit
//! `category:value` prefixes win; bare tokens are tried as colors, then as
//! component types, and otherwise search both text and app name), [`parse`]
//! applies the operator rules, and the caller layers predefined filters on
//! top at execution time.
//!
//! ```text
//! expr := term (op? term)*        -- a missing op means AND
//! term := atom | "(" expr ")"
//! op   := "and" | "or"            -- never both at one parenthesis level
//! atom := [category ":"] value    -- category: color | ui | appname | text
//! ```

mod lexer;

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::color::{self, names};
use crate::model::{Category, QueryAst};

pub use lexer::{preprocess, tokenize, RawToken};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("unknown category prefix `{prefix}:` at offset {offset}")]
    InvalidPrefix { prefix: String, offset: usize },
    #[error("`{value}` at offset {offset} is not a color name or hex value")]
    InvalidColorValue { value: String, offset: usize },
    #[error("missing value after prefix at offset {offset}")]
    MissingValue { offset: usize },
    #[error("unterminated quote starting at offset {offset}")]
    UnterminatedQuote { offset: usize },
    #[error("ambiguous query: AND and OR mixed without parentheses at offset {offset}")]
    AmbiguousOperators { offset: usize },
    #[error("empty query")]
    EmptyQuery,
    #[error("empty parentheses at offset {offset}")]
    EmptyGroup { offset: usize },
    #[error("unbalanced parenthesis at offset {offset}")]
    UnbalancedParens { offset: usize },
    #[error("operator without operand at offset {offset}")]
    DanglingOperator { offset: usize },
}

impl QueryError {
    pub fn code(&self) -> &'static str {
        match self {
            QueryError::InvalidPrefix { .. } => "InvalidPrefix",
            QueryError::InvalidColorValue { .. } => "InvalidColorValue",
            QueryError::MissingValue { .. } => "MissingValue",
            QueryError::UnterminatedQuote { .. } => "UnterminatedQuote",
            QueryError::AmbiguousOperators { .. } => "AmbiguousOperators",
            QueryError::EmptyQuery => "EmptyQuery",
            QueryError::EmptyGroup { .. } => "EmptyGroup",
            QueryError::UnbalancedParens { .. } => "UnbalancedParens",
            QueryError::DanglingOperator { .. } => "DanglingOperator",
        }
    }

    /// Character offset into the raw query, when the error has a location.
    pub fn offset(&self) -> Option<usize> {
        match self {
            QueryError::InvalidPrefix { offset, .. }
            | QueryError::InvalidColorValue { offset, .. }
            | QueryError::MissingValue { offset }
            | QueryError::UnterminatedQuote { offset }
            | QueryError::AmbiguousOperators { offset }
            | QueryError::EmptyGroup { offset }
            | QueryError::UnbalancedParens { offset }
            | QueryError::DanglingOperator { offset } => Some(*offset),
            QueryError::EmptyQuery => None,
        }
    }
}

/// Component type names seeded into [`Vocabulary::default`].
pub const STANDARD_UI_TYPES: &[&str] = &[
    "autocompletetextview",
    "button",
    "checkbox",
    "checkedtextview",
    "chronometer",
    "datepicker",
    "edittext",
    "floatingactionbutton",
    "gridview",
    "imagebutton",
    "imageview",
    "listview",
    "mapview",
    "numberpicker",
    "progressbar",
    "radiobutton",
    "radiogroup",
    "ratingbar",
    "recyclerview",
    "scrollview",
    "searchview",
    "seekbar",
    "spinner",
    "switch",
    "tablayout",
    "textview",
    "timepicker",
    "togglebutton",
    "toolbar",
    "videoview",
    "viewpager",
    "webview",
];

/// Suggestion lists that also drive bare-token classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    color_names: BTreeSet<String>,
    ui_types: BTreeSet<String>,
    app_names: BTreeSet<String>,
}

impl Vocabulary {
    pub fn new<U, A>(ui_types: U, app_names: A) -> Self
    where
        U: IntoIterator,
        U::Item: AsRef<str>,
        A: IntoIterator,
        A::Item: AsRef<str>,
    {
        let lower = |s: &str| s.trim().to_lowercase();
        Self {
            color_names: names::names().map(str::to_string).collect(),
            ui_types: ui_types
                .into_iter()
                .map(|s| lower(s.as_ref()))
                .filter(|s| !s.is_empty())
                .collect(),
            app_names: app_names
                .into_iter()
                .map(|s| lower(s.as_ref()))
                .filter(|s| !s.is_empty())
                .collect(),
        }
    }

    pub fn color_names(&self) -> &BTreeSet<String> {
        &self.color_names
    }

    pub fn ui_types(&self) -> &BTreeSet<String> {
        &self.ui_types
    }

    pub fn app_names(&self) -> &BTreeSet<String> {
        &self.app_names
    }

    pub fn is_ui_type(&self, token: &str) -> bool {
        self.ui_types.contains(token)
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary::new(STANDARD_UI_TYPES.iter(), std::iter::empty::<&str>())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Color,
    Ui,
    AppName,
    Text,
    /// Bare value that is neither a color nor a component type.
    TextOrApp,
    And,
    Or,
    LParen,
    RParen,
}

impl From<Category> for TokenKind {
    fn from(c: Category) -> Self {
        match c {
            Category::Color => TokenKind::Color,
            Category::Ui => TokenKind::Ui,
            Category::AppName => TokenKind::AppName,
            Category::Text => TokenKind::Text,
        }
    }
}

/// A classified token. Operators and parentheses carry an empty value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedToken {
    pub kind: TokenKind,
    pub value: String,
    pub offset: usize,
}

impl TypedToken {
    fn new(kind: TokenKind, value: impl Into<String>, offset: usize) -> Self {
        Self {
            kind,
            value: value.into(),
            offset,
        }
    }

    fn starts_term(&self) -> bool {
        !matches!(
            self.kind,
            TokenKind::And | TokenKind::Or | TokenKind::RParen
        )
    }
}

fn color_value(value: &str, offset: usize) -> Result<String, QueryError> {
    color::parse_color_token(value)
        .map(|spec| spec.canonical_value().to_string())
        .map_err(|_| QueryError::InvalidColorValue {
            value: value.to_string(),
            offset,
        })
}

pub fn classify_tokens(
    tokens: &[RawToken],
    vocab: &Vocabulary,
) -> Result<Vec<TypedToken>, QueryError> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut iter = tokens.iter().peekable();
    while let Some(tok) = iter.next() {
        let offset = tok.offset;
        if !tok.quoted {
            match tok.text.as_str() {
                "and" => {
                    out.push(TypedToken::new(TokenKind::And, "", offset));
                    continue;
                }
                "or" => {
                    out.push(TypedToken::new(TokenKind::Or, "", offset));
                    continue;
                }
                "(" => {
                    out.push(TypedToken::new(TokenKind::LParen, "", offset));
                    continue;
                }
                ")" => {
                    out.push(TypedToken::new(TokenKind::RParen, "", offset));
                    continue;
                }
                _ => {}
            }
        }

        if let Some(colon) = tok.colon {
            let prefix = &tok.text[..colon];
            let category =
                Category::from_prefix(prefix).ok_or_else(|| QueryError::InvalidPrefix {
                    prefix: prefix.to_string(),
                    offset,
                })?;
            let mut value = tok.text[colon + 1..].trim().to_string();
            // `appname: pizza` -- the value may follow as its own token.
            if value.is_empty() && !tok.quoted {
                if let Some(next) = iter.peek() {
                    let is_word = next.quoted
                        || (!next.is_paren()
                            && next.colon.is_none()
                            && next.text != "and"
                            && next.text != "or");
                    if is_word {
                        value = next.text.clone();
                        iter.next();
                    }
                }
            }
            if value.is_empty() {
                return Err(QueryError::MissingValue { offset });
            }
            if category == Category::Color {
                value = color_value(&value, offset)?;
            }
            out.push(TypedToken::new(category.into(), value, offset));
            continue;
        }

        if tok.text.is_empty() {
            return Err(QueryError::MissingValue { offset });
        }
        if !tok.quoted {
            if let Ok(spec) = color::parse_color_token(&tok.text) {
                out.push(TypedToken::new(
                    TokenKind::Color,
                    spec.canonical_value(),
                    offset,
                ));
                continue;
            }
            if vocab.is_ui_type(&tok.text) {
                out.push(TypedToken::new(TokenKind::Ui, tok.text.clone(), offset));
                continue;
            }
        }
        out.push(TypedToken::new(
            TokenKind::TextOrApp,
            tok.text.clone(),
            offset,
        ));
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [TypedToken],
    pos: usize,
    /// Offset just past the raw query, used for errors at end of input.
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&TypedToken> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self, open_paren: Option<usize>) -> Result<QueryAst, QueryError> {
        let mut terms = vec![self.term()?];
        let mut op: Option<TokenKind> = None;
        while let Some(tok) = self.peek() {
            let (kind, at) = match tok.kind {
                TokenKind::RParen => break,
                TokenKind::And | TokenKind::Or => {
                    let found = (tok.kind, tok.offset);
                    self.pos += 1;
                    match self.peek() {
                        Some(next) if next.starts_term() => {}
                        _ => return Err(QueryError::DanglingOperator { offset: found.1 }),
                    }
                    found
                }
                _ => (TokenKind::And, tok.offset),
            };
            match op {
                Some(prev) if prev != kind => {
                    return Err(QueryError::AmbiguousOperators { offset: at })
                }
                _ => op = Some(kind),
            }
            terms.push(self.term()?);
        }
        if let Some(open) = open_paren {
            match self.peek() {
                Some(t) if t.kind == TokenKind::RParen => self.pos += 1,
                _ => return Err(QueryError::UnbalancedParens { offset: open }),
            }
        }
        Ok(match op {
            Some(TokenKind::Or) => QueryAst::or(terms),
            _ => QueryAst::and(terms),
        })
    }

    fn term(&mut self) -> Result<QueryAst, QueryError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(QueryError::DanglingOperator { offset: self.end });
        };
        self.pos += 1;
        Ok(match tok.kind {
            TokenKind::Color => QueryAst::atom(Category::Color, tok.value),
            TokenKind::Ui => QueryAst::atom(Category::Ui, tok.value),
            TokenKind::AppName => QueryAst::atom(Category::AppName, tok.value),
            TokenKind::Text => QueryAst::atom(Category::Text, tok.value),
            TokenKind::TextOrApp => QueryAst::or(vec![
                QueryAst::atom(Category::Text, tok.value.clone()),
                QueryAst::atom(Category::AppName, tok.value),
            ]),
            TokenKind::LParen => {
                if self.peek().is_some_and(|t| t.kind == TokenKind::RParen) {
                    return Err(QueryError::EmptyGroup { offset: tok.offset });
                }
                self.expr(Some(tok.offset))?
            }
            TokenKind::RParen => return Err(QueryError::UnbalancedParens { offset: tok.offset }),
            TokenKind::And | TokenKind::Or => {
                return Err(QueryError::DanglingOperator { offset: tok.offset })
            }
        })
    }
}

/// Parses a raw query string into a normalized [`QueryAst`].
pub fn parse(raw: &str, vocab: &Vocabulary) -> Result<QueryAst, QueryError> {
    let tokens = tokenize(raw)?;
    let typed = classify_tokens(&tokens, vocab)?;
    parse_tokens(&typed, raw.chars().count())
}

pub fn parse_tokens(typed: &[TypedToken], end: usize) -> Result<QueryAst, QueryError> {
    if typed.is_empty() {
        return Err(QueryError::EmptyQuery);
    }
    let mut parser = Parser {
        tokens: typed,
        pos: 0,
        end,
    };
    let ast = parser.expr(None)?;
    if let Some(extra) = parser.peek() {
        return Err(QueryError::UnbalancedParens {
            offset: extra.offset,
        });
    }
    Ok(ast)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Suggestion {
    pub text: String,
    pub category: Category,
}

/// Prefix completions: colors, then component types, then app names, each
/// alphabetical.
pub fn suggest(prefix: &str, vocab: &Vocabulary, limit: usize) -> Vec<Suggestion> {
    let prefix = prefix.trim().to_lowercase();
    let lists = [
        (Category::Color, &vocab.color_names),
        (Category::Ui, &vocab.ui_types),
        (Category::AppName, &vocab.app_names),
    ];
    lists
        .into_iter()
        .flat_map(|(category, set)| {
            set.range(prefix.clone()..)
                .take_while(|s| s.starts_with(&prefix))
                .map(move |s| Suggestion {
                    text: s.clone(),
                    category,
                })
        })
        .take(limit)
        .collect()
}
