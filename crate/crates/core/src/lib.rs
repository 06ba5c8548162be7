//! Search engine over mobile-app screen captures.
//!
//! Captures (screenshot + GUI hierarchy dump) are filtered and turned into
//! [`ScreenRecord`]s by [`ingest`], indexed by [`index`] on app name,
//! component text, component type and screen type plus a per-screen color
//! palette from [`color`], and searched with the small query language in
//! [`query`]. [`service`] wires everything into the search, detail,
//! similar-screen, suggestion and favorites operations and the HTTP API.

pub mod color;
pub mod index;
pub mod ingest;
pub mod model;
pub mod query;
pub mod service;
pub mod synth;

pub use color::{ColorSpec, ColorTolerance, Hsl};
pub use index::{
    build_index, execute, load_index, save_index, scan_match, Hit, Index, QueryFilters,
};
pub use model::{
    canonical_query_string, AppMeta, BoundingBox, Category, ColorEntry, GuiNode, Palette, QueryAst,
    ScreenCapture, ScreenRecord, ScreenType,
};
pub use query::{parse, QueryError, Vocabulary};
