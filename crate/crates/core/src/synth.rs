//! Seeded generators for synthetic records, images and queries, shared by the
//! oracle battery, the scale check and the benches.

use std::collections::BTreeSet;

use image::{Rgb, RgbImage};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::color::names::WEB_COLORS;
use crate::color::{ColorSpec, ColorTolerance};
use crate::index::{execute, scan_match, FieldName, Index, PredefinedFilters, QueryFilters};
use crate::model::{
    canonical_query_string, AppMeta, Category, ColorEntry, Palette, QueryAst, ScreenRecord,
    ScreenType,
};

pub const APP_WORDS: &[&str] = &[
    "pizza", "bank", "chat", "maps", "music", "photo", "shop", "travel", "fit", "news", "weather",
    "notes",
];

pub const TEXT_WORDS: &[&str] = &[
    "login", "password", "email", "search", "settings", "profile", "cart", "checkout", "order",
    "pizza", "menu", "home", "share", "like", "comment", "send", "message", "photo", "camera",
    "map", "route", "price", "total", "account", "help", "about", "save", "cancel", "next", "back",
    "play", "pause", "volume", "deals", "news",
];

pub const UI_CLASSES: &[&str] = &[
    "android.widget.Button",
    "android.widget.EditText",
    "android.widget.TextView",
    "android.widget.ImageView",
    "android.widget.CheckBox",
    "android.widget.Switch",
    "android.widget.Spinner",
    "android.widget.SeekBar",
    "android.widget.ProgressBar",
    "android.widget.RadioButton",
    "android.widget.ImageButton",
    "android.widget.ListView",
    "androidx.recyclerview.widget.RecyclerView",
    "com.google.android.gms.maps.MapView",
    "android.webkit.WebView",
    "android.widget.VideoView",
    "android.widget.FrameLayout",
    "android.widget.LinearLayout",
];

/// Distinct screens per synthetic app.
pub const SCREENS_PER_APP: usize = 6;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn pick<'a, T>(rng: &mut StdRng, items: &'a [T]) -> &'a T {
    &items[rng.random_range(0..items.len())]
}

fn random_rgb(rng: &mut StdRng) -> [u8; 3] {
    if rng.random_bool(0.5) {
        pick(rng, &WEB_COLORS).1
    } else {
        [rng.random(), rng.random(), rng.random()]
    }
}

pub fn random_palette(rng: &mut StdRng) -> Palette {
    let n = rng.random_range(1..=6);
    let mut weights: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..100.0)).collect();
    weights.sort_by(|a, b| b.total_cmp(a));
    let sum: f64 = weights.iter().sum();
    let entries = weights
        .iter()
        .map(|w| ColorEntry::new(random_rgb(rng), w / sum).expect("normalized weight"))
        .collect();
    Palette::new(entries).expect("valid synthetic palette")
}

/// `n` records spread over apps of up to six screens each, sorted by doc id.
pub fn synthetic_records(n: usize, seed: u64) -> Vec<ScreenRecord> {
    let mut rng = rng(seed);
    (0..n)
        .map(|i| {
            let app_no = i / SCREENS_PER_APP;
            let w1 = APP_WORDS[app_no % APP_WORDS.len()];
            let w2 = APP_WORDS[(app_no / APP_WORDS.len() + app_no) % APP_WORDS.len()];
            let package_id = format!("com.synth.app{app_no:05}");
            let app = AppMeta {
                app_name: if w1 == w2 {
                    format!("{w1} {app_no}")
                } else {
                    format!("{w1} {w2}")
                },
                store_url: format!("https://play.google.com/store/apps/details?id={package_id}"),
                package_id,
                description: None,
            };
            let class_count = rng.random_range(1..=8);
            let component_classes = (0..class_count)
                .map(|_| pick(&mut rng, UI_CLASSES).to_string())
                .collect();
            let text_count = rng.random_range(0..=5);
            let component_texts = (0..text_count)
                .map(|_| {
                    let words = rng.random_range(1..=3);
                    (0..words)
                        .map(|_| *pick(&mut rng, TEXT_WORDS))
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            let capture_id = format!("s{:02}", i % SCREENS_PER_APP);
            ScreenRecord {
                doc_id: ScreenRecord::make_doc_id(&app.package_id, &capture_id),
                image_path: format!("{}/screens/{capture_id}.png", app.package_id),
                app,
                activity_name: String::new(),
                component_classes,
                component_texts,
                palette: random_palette(&mut rng),
                screen_type: *pick(&mut rng, &ScreenType::ALL),
            }
        })
        .collect()
}

/// Values atoms are drawn from, per category.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomPool {
    pub colors: Vec<String>,
    pub ui: Vec<String>,
    pub app: Vec<String>,
    pub text: Vec<String>,
}

impl AtomPool {
    /// The vocabulary used by [`synthetic_records`].
    pub fn synthetic() -> Self {
        let own = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
        Self {
            colors: WEB_COLORS.iter().map(|(n, _)| n.to_string()).collect(),
            ui: UI_CLASSES
                .iter()
                .map(|c| crate::model::class_short_name(c))
                .collect(),
            app: own(APP_WORDS),
            text: own(TEXT_WORDS),
        }
    }

    /// Terms that occur in `index`, topped up with the synthetic vocabulary
    /// so that misses are exercised too.
    pub fn from_index(index: &Index) -> Self {
        let mut pool = Self::synthetic();
        let extend = |dst: &mut Vec<String>, field| {
            dst.extend(index.terms(field).into_iter().map(String::from));
            dst.sort();
            dst.dedup();
        };
        extend(&mut pool.ui, FieldName::Ui);
        extend(&mut pool.app, FieldName::AppName);
        extend(&mut pool.text, FieldName::Text);
        pool
    }
}

fn random_atom(rng: &mut StdRng, pool: &AtomPool) -> QueryAst {
    match rng.random_range(0..4) {
        0 => {
            let value = if rng.random_bool(0.7) {
                pick(rng, &pool.colors).clone()
            } else {
                ColorSpec::from_rgb(random_rgb(rng))
                    .canonical_value()
                    .to_string()
            };
            QueryAst::atom(Category::Color, value)
        }
        1 => QueryAst::atom(Category::Ui, pick(rng, &pool.ui).clone()),
        2 => QueryAst::atom(Category::AppName, pick(rng, &pool.app).clone()),
        _ => {
            let value = if rng.random_bool(0.15) {
                format!("{} {}", pick(rng, &pool.text), pick(rng, &pool.text))
            } else {
                pick(rng, &pool.text).clone()
            };
            QueryAst::atom(Category::Text, value)
        }
    }
}

/// Random query tree with at most `max_depth` operator levels over the
/// synthetic vocabulary.
pub fn random_ast(rng: &mut StdRng, max_depth: usize) -> QueryAst {
    random_ast_with(rng, max_depth, &AtomPool::synthetic())
}

pub fn random_ast_with(rng: &mut StdRng, max_depth: usize, pool: &AtomPool) -> QueryAst {
    if max_depth == 0 || rng.random_bool(0.3) {
        return random_atom(rng, pool);
    }
    let n = rng.random_range(2..=3);
    let children = (0..n)
        .map(|_| random_ast_with(rng, max_depth - 1, pool))
        .collect();
    if rng.random_bool(0.5) {
        QueryAst::and(children)
    } else {
        QueryAst::or(children)
    }
}

/// Outcome of comparing [`execute`] against [`scan_match`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OracleReport {
    pub queries: usize,
    /// Queries whose result set was non-empty.
    pub non_empty: usize,
    /// Canonical strings of the queries that disagreed.
    pub mismatches: Vec<String>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Runs `queries` random trees (depth at most 3) with random filters and
/// checks that the unranked result set of the index equals the linear scan.
pub fn oracle_battery(index: &Index, queries: usize, seed: u64) -> OracleReport {
    let mut rng = rng(seed);
    let pool = AtomPool::from_index(index);
    let mut report = OracleReport {
        queries,
        ..Default::default()
    };
    for _ in 0..queries {
        let ast = random_ast_with(&mut rng, 3, &pool);
        let filters = random_filters(&mut rng);
        let got: BTreeSet<String> = execute(index, &ast, &filters, usize::MAX)
            .into_iter()
            .map(|h| h.doc_id)
            .collect();
        let want = scan_match(index.docs(), &ast, &filters);
        if !want.is_empty() {
            report.non_empty += 1;
        }
        if got != want {
            report.mismatches.push(canonical_query_string(&ast));
        }
    }
    report
}

/// Random color-picker, tolerance and predefined filters; often empty.
pub fn random_filters(rng: &mut StdRng) -> QueryFilters {
    let tolerance = if rng.random_bool(0.5) {
        ColorTolerance::DEFAULT
    } else {
        ColorTolerance::from_slider(rng.random_range(0.0..=1.0)).expect("slider in range")
    };
    let color = rng
        .random_bool(0.25)
        .then(|| (ColorSpec::from_rgb(random_rgb(rng)), tolerance));
    let ui_types = if rng.random_bool(0.2) {
        vec![crate::model::class_short_name(pick(rng, UI_CLASSES))]
    } else {
        Vec::new()
    };
    let screen_types = if rng.random_bool(0.2) {
        vec![*pick(rng, &ScreenType::ALL), *pick(rng, &ScreenType::ALL)]
    } else {
        Vec::new()
    };
    QueryFilters {
        color,
        predefined: PredefinedFilters {
            ui_types,
            screen_types,
        },
        color_tolerance: tolerance,
    }
}

/// Screenshot made of a few axis-aligned blocks of random colors.
pub fn synthetic_image(rng: &mut StdRng, width: u32, height: u32) -> RgbImage {
    let mut img = RgbImage::from_pixel(width, height, Rgb(random_rgb(rng)));
    for _ in 0..rng.random_range(0..8) {
        let x0 = rng.random_range(0..width);
        let y0 = rng.random_range(0..height);
        let x1 = rng.random_range(x0..=width);
        let y1 = rng.random_range(y0..=height);
        let c = Rgb(random_rgb(rng));
        for y in y0..y1 {
            for x in x0..x1 {
                img.put_pixel(x, y, c);
            }
        }
    }
    img
}

/// Left half `left`, right half `right`; `width` must be even.
pub fn two_region_image(width: u32, height: u32, left: [u8; 3], right: [u8; 3]) -> RgbImage {
    RgbImage::from_fn(width, height, |x, _| {
        Rgb(if x < width / 2 { left } else { right })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::build_index;

    #[test]
    fn records_are_valid_and_deterministic() {
        let a = synthetic_records(50, 7);
        assert_eq!(a, synthetic_records(50, 7));
        assert!(a.windows(2).all(|w| w[0].doc_id < w[1].doc_id));
        build_index(a).unwrap();
    }

    #[test]
    fn small_battery_agrees() {
        let index = build_index(synthetic_records(60, 1)).unwrap();
        let report = oracle_battery(&index, 200, 2);
        assert!(report.passed(), "{:?}", report.mismatches);
        assert!(report.non_empty > 20);
    }

    #[test]
    fn asts_respect_depth_and_normal_form() {
        let mut r = rng(3);
        for _ in 0..500 {
            let ast = random_ast(&mut r, 3);
            assert!(ast.depth() <= 3);
            ast.validate().unwrap();
        }
    }
}
