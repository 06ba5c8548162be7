//! Shared data model: GUI hierarchies, captures, indexed screen records,
//! palettes and the query tree.

use std::fmt;
use std::str::FromStr;

use image::RgbImage;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::{rgb_to_hsl, Hsl};

/// Maximum number of entries kept in a screenshot palette.
pub const MAX_PALETTE_LEN: usize = 6;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("palette must hold between 1 and {MAX_PALETTE_LEN} entries, got {0}")]
    PaletteLength(usize),
    #[error("palette proportions must sum to 1, got {0}")]
    PaletteSum(f64),
    #[error("palette entries must be sorted by descending proportion")]
    PaletteOrder,
    #[error("color proportion {0} is outside [0, 1]")]
    Proportion(f64),
    #[error("invalid bounding box [{0},{1}][{2},{3}]")]
    Bounds(i64, i64, i64, i64),
    #[error("invalid query tree: {0}")]
    Query(String),
}

/// Pixel rectangle in screenshot coordinates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundingBox {
    pub left: u32,
    pub top: u32,
    pub right: u32,
    pub bottom: u32,
}

impl BoundingBox {
    pub fn new(left: i64, top: i64, right: i64, bottom: i64) -> Result<Self, ModelError> {
        let in_range = |v: i64| (0..=u32::MAX as i64).contains(&v);
        if ![left, top, right, bottom].iter().all(|v| in_range(*v)) || left > right || top > bottom
        {
            return Err(ModelError::Bounds(left, top, right, bottom));
        }
        Ok(Self {
            left: left as u32,
            top: top as u32,
            right: right as u32,
            bottom: bottom as u32,
        })
    }

    pub fn width(&self) -> u32 {
        self.right - self.left
    }

    pub fn height(&self) -> u32 {
        self.bottom - self.top
    }
}

/// One component of a screen's GUI hierarchy.
///
/// Children bounds are not required to lie inside the parent: real dumps
/// routinely violate containment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GuiNode {
    pub class_name: String,
    pub text: String,
    pub content_desc: String,
    pub resource_id: String,
    pub package: String,
    pub bounds: BoundingBox,
    pub clickable: bool,
    pub enabled: bool,
    pub focusable: bool,
    pub scrollable: bool,
    pub checked: bool,
    pub selected: bool,
    pub children: Vec<GuiNode>,
}

impl GuiNode {
    pub fn new(class_name: impl Into<String>) -> Self {
        Self {
            class_name: class_name.into(),
            enabled: true,
            ..Default::default()
        }
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text = text.into();
        self
    }

    pub fn with_package(mut self, package: impl Into<String>) -> Self {
        self.package = package.into();
        self
    }

    pub fn with_child(mut self, child: GuiNode) -> Self {
        self.children.push(child);
        self
    }

    /// Pre-order traversal.
    pub fn iter(&self) -> PreOrder<'_> {
        PreOrder { stack: vec![self] }
    }

    /// Lowercase final segment of the class path, `android.widget.EditText` -> `edittext`.
    pub fn short_class(&self) -> String {
        class_short_name(&self.class_name)
    }
}

pub struct PreOrder<'a> {
    stack: Vec<&'a GuiNode>,
}

impl<'a> Iterator for PreOrder<'a> {
    type Item = &'a GuiNode;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}

pub fn class_short_name(class_name: &str) -> String {
    class_name
        .rsplit('.')
        .next()
        .unwrap_or(class_name)
        .to_lowercase()
}

/// A palette color with its share of the screenshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorEntry {
    pub rgb: [u8; 3],
    pub hsl: Hsl,
    pub proportion: f64,
}

impl ColorEntry {
    pub fn new(rgb: [u8; 3], proportion: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&proportion) {
            return Err(ModelError::Proportion(proportion));
        }
        Ok(Self {
            rgb,
            hsl: rgb_to_hsl(rgb),
            proportion,
        })
    }

    pub fn hex(&self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.rgb[0], self.rgb[1], self.rgb[2])
    }
}

/// Up to six colors sorted by descending proportion, proportions summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ColorEntry>", into = "Vec<ColorEntry>")]
pub struct Palette {
    entries: Vec<ColorEntry>,
}

impl Palette {
    pub const SUM_TOLERANCE: f64 = 1e-6;

    pub fn new(entries: Vec<ColorEntry>) -> Result<Self, ModelError> {
        if entries.is_empty() || entries.len() > MAX_PALETTE_LEN {
            return Err(ModelError::PaletteLength(entries.len()));
        }
        for entry in &entries {
            if !(0.0..=1.0).contains(&entry.proportion) {
                return Err(ModelError::Proportion(entry.proportion));
            }
        }
        let sum: f64 = entries.iter().map(|e| e.proportion).sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(ModelError::PaletteSum(sum));
        }
        if entries
            .windows(2)
            .any(|w| w[0].proportion < w[1].proportion)
        {
            return Err(ModelError::PaletteOrder);
        }
        Ok(Self { entries })
    }

    /// Single-color palette covering the whole screen.
    pub fn solid(rgb: [u8; 3]) -> Self {
        Self {
            entries: vec![ColorEntry {
                rgb,
                hsl: rgb_to_hsl(rgb),
                proportion: 1.0,
            }],
        }
    }

    pub fn entries(&self) -> &[ColorEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl TryFrom<Vec<ColorEntry>> for Palette {
    type Error = ModelError;

    fn try_from(entries: Vec<ColorEntry>) -> Result<Self, Self::Error> {
        let rebuilt = entries
            .into_iter()
            .map(|e| ColorEntry::new(e.rgb, e.proportion))
            .collect::<Result<Vec<_>, _>>()?;
        Palette::new(rebuilt)
    }
}

impl From<Palette> for Vec<ColorEntry> {
    fn from(palette: Palette) -> Self {
        palette.entries
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppMeta {
    pub package_id: String,
    pub app_name: String,
    #[serde(default)]
    pub store_url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

/// Raw exploration output for one GUI event, before filtering.
#[derive(Debug, Clone)]
pub struct ScreenCapture {
    pub app: AppMeta,
    pub capture_id: String,
    pub image: RgbImage,
    pub hierarchy: GuiNode,
    pub activity_name: Option<String>,
    pub visit_count: u32,
}

/// Coarse screen category used by the predefined screen-type filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScreenType {
    Login,
    Settings,
    List,
    Map,
    Browser,
    Media,
    Other,
}

impl ScreenType {
    pub const ALL: [ScreenType; 7] = [
        ScreenType::Login,
        ScreenType::Settings,
        ScreenType::List,
        ScreenType::Map,
        ScreenType::Browser,
        ScreenType::Media,
        ScreenType::Other,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScreenType::Login => "login",
            ScreenType::Settings => "settings",
            ScreenType::List => "list",
            ScreenType::Map => "map",
            ScreenType::Browser => "browser",
            ScreenType::Media => "media",
            ScreenType::Other => "other",
        }
    }
}

impl fmt::Display for ScreenType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScreenType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScreenType::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown screen type `{s}`"))
    }
}

/// A filtered screen, ready to be indexed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenRecord {
    /// `<package_id>/<capture_id>`
    pub doc_id: String,
    pub app: AppMeta,
    pub activity_name: String,
    /// Fully-qualified class names in pre-order.
    pub component_classes: Vec<String>,
    pub component_texts: Vec<String>,
    pub palette: Palette,
    pub image_path: String,
    pub screen_type: ScreenType,
}

impl ScreenRecord {
    pub fn make_doc_id(package_id: &str, capture_id: &str) -> String {
        format!("{package_id}/{capture_id}")
    }

    /// Distinct lowercase component short names, sorted.
    pub fn component_short_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .component_classes
            .iter()
            .map(|c| class_short_name(c))
            .collect();
        names.sort();
        names.dedup();
        names
    }
}

/// Field family a query atom targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Color,
    Ui,
    AppName,
    Text,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Color,
        Category::Ui,
        Category::AppName,
        Category::Text,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Color => "color",
            Category::Ui => "ui",
            Category::AppName => "appname",
            Category::Text => "text",
        }
    }

    pub fn from_prefix(prefix: &str) -> Option<Self> {
        Category::ALL.into_iter().find(|c| c.as_str() == prefix)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub category: Category,
    pub value: String,
}

/// Boolean query tree over typed atoms.
///
/// Kept in normal form: `And`/`Or` have at least two children and never
/// directly contain a node of their own kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryAst {
    Atom(Atom),
    And(Vec<QueryAst>),
    Or(Vec<QueryAst>),
}

impl QueryAst {
    pub fn atom(category: Category, value: impl Into<String>) -> Self {
        QueryAst::Atom(Atom {
            category,
            value: value.into(),
        })
    }

    /// Conjunction, flattening nested `And`s. A single child is returned as is.
    pub fn and(children: Vec<QueryAst>) -> Self {
        Self::join(children, true)
    }

    /// Disjunction, flattening nested `Or`s. A single child is returned as is.
    pub fn or(children: Vec<QueryAst>) -> Self {
        Self::join(children, false)
    }

    fn join(children: Vec<QueryAst>, conjunction: bool) -> Self {
        let mut flat = Vec::with_capacity(children.len());
        for child in children {
            match child {
                QueryAst::And(inner) if conjunction => flat.extend(inner),
                QueryAst::Or(inner) if !conjunction => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            return flat.pop().unwrap();
        }
        if conjunction {
            QueryAst::And(flat)
        } else {
            QueryAst::Or(flat)
        }
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            QueryAst::Atom(a) => out.push(a),
            QueryAst::And(c) | QueryAst::Or(c) => c.iter().for_each(|n| n.collect_atoms(out)),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            QueryAst::Atom(_) => 0,
            QueryAst::And(c) | QueryAst::Or(c) => {
                1 + c.iter().map(|n| n.depth()).max().unwrap_or(0)
            }
        }
    }

    /// Checks the structural invariants of the tree.
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            QueryAst::Atom(atom) => {
                if atom.value.is_empty() {
                    return Err(ModelError::Query(format!("empty {} value", atom.category)));
                }
                if atom.value != atom.value.to_lowercase() {
                    return Err(ModelError::Query(format!(
                        "value `{}` is not lowercase",
                        atom.value
                    )));
                }
                if atom.value.contains('"') {
                    return Err(ModelError::Query(format!(
                        "value `{}` contains a quote",
                        atom.value
                    )));
                }
                if atom.category == Category::Color
                    && crate::color::parse_color_token(&atom.value).is_err()
                {
                    return Err(ModelError::Query(format!(
                        "`{}` is not a color",
                        atom.value
                    )));
                }
                Ok(())
            }
            QueryAst::And(children) | QueryAst::Or(children) => {
                if children.len() < 2 {
                    return Err(ModelError::Query(
                        "operator with fewer than two operands".into(),
                    ));
                }
                let conjunction = matches!(self, QueryAst::And(_));
                for child in children {
                    let same_kind = match child {
                        QueryAst::And(_) => conjunction,
                        QueryAst::Or(_) => !conjunction,
                        QueryAst::Atom(_) => false,
                    };
                    if same_kind {
                        return Err(ModelError::Query("operator nested under itself".into()));
                    }
                    child.validate()?;
                }
                Ok(())
            }
        }
    }
}

fn needs_quotes(value: &str) -> bool {
    value
        .chars()
        .any(|c| c.is_whitespace() || c == '(' || c == ')')
}

fn write_node(
    node: &QueryAst,
    f: &mut fmt::Formatter<'_>,
    parent_is_and: Option<bool>,
) -> fmt::Result {
    match node {
        QueryAst::Atom(atom) => {
            if needs_quotes(&atom.value) {
                write!(f, "{}:\"{}\"", atom.category, atom.value)
            } else {
                write!(f, "{}:{}", atom.category, atom.value)
            }
        }
        QueryAst::And(children) | QueryAst::Or(children) => {
            let is_and = matches!(node, QueryAst::And(_));
            let wrap = parent_is_and.is_some_and(|p| p != is_and);
            if wrap {
                f.write_str("(")?;
            }
            let sep = if is_and { " AND " } else { " OR " };
            for (i, child) in children.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write_node(child, f, Some(is_and))?;
            }
            if wrap {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

/// Canonical textual form: `category:value` atoms, infix ` AND `/` OR `,
/// parentheses wherever the operator kind changes.
impl fmt::Display for QueryAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(self, f, None)
    }
}

pub fn canonical_query_string(ast: &QueryAst) -> String {
    ast.to_string()
}
