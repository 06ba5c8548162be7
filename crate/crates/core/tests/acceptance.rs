//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use axum::http::StatusCode;
use image::RgbImage;
use screensearch::color::{extract_palette, hsl_to_rgb, hue_distance, rgb_to_hsl};
use screensearch::index::{build_index, execute, load_index, save_index, IndexError, QueryFilters};
use screensearch::ingest::select_top_screens;
use screensearch::model::{canonical_query_string, AppMeta, GuiNode, ScreenCapture};
use screensearch::service::{open_state, router};
use screensearch::synth::{
    oracle_battery, random_ast, random_filters, rng, synthetic_image, synthetic_records,
    two_region_image,
};
use screensearch::{parse, QueryError, Vocabulary};
use serde_json::json;

const PARSE_BUDGET: Duration = Duration::from_millis(1);
const ORACLE_QUERIES: usize = 1000;
const ORACLE_DOCS: usize = 200;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const ROUND_TRIP_ASTS: usize = 1000;
const PALETTE_IMAGES: usize = 100;
const PROPORTION_TOL: f64 = 1e-6;
const RGB_TOL: i16 = 1;
const SCALE_DOCS: usize = 12_051;
const SCALE_BUILD_BUDGET: Duration = Duration::from_secs(60);
const SCALE_QUERIES: usize = 100;
const SCALE_MEDIAN_BUDGET: Duration = Duration::from_millis(50);

type Outcome = Result<String, String>;
type Criterion = (&'static str, Box<dyn FnOnce() -> Outcome>);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn golden_parse() -> Outcome {
    let vocab = Vocabulary::default();
    parse("red edittext pizza", &vocab).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let ast = parse("red edittext pizza", &vocab).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let got = canonical_query_string(&ast);
    let want = "color:red AND ui:edittext AND (text:pizza OR appname:pizza)";
    check(got == want, format!("canonical string was {got:?}"))?;
    check(took < PARSE_BUDGET, format!("parse took {took:?}"))?;
    Ok(format!("{got:?} in {took:?}"))
}

fn ambiguity_rule() -> Outcome {
    let vocab = Vocabulary::default();
    match parse("a and b or c", &vocab) {
        Err(QueryError::AmbiguousOperators { .. }) => {}
        other => return Err(format!("unparenthesized mix gave {other:?}")),
    }
    for ok in ["(a and b) or c", "a and (b or c)"] {
        parse(ok, &vocab).map_err(|e| format!("{ok:?}: {e}"))?;
    }
    Ok("rejected unparenthesized, accepted both groupings".into())
}

fn oracle_equivalence() -> Outcome {
    let index = build_index(synthetic_records(ORACLE_DOCS, 2024)).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let report = oracle_battery(&index, ORACLE_QUERIES, 7);
    let took = start.elapsed();
    check(
        report.passed(),
        format!(
            "{} mismatches, first {:?}",
            report.mismatches.len(),
            report.mismatches.first()
        ),
    )?;
    check(took < ORACLE_BUDGET, format!("took {took:?}"))?;
    Ok(format!(
        "{}/{} agree ({} non-empty) in {took:.2?}",
        report.queries, report.queries, report.non_empty
    ))
}

fn parse_round_trip() -> Outcome {
    let vocab = Vocabulary::default();
    let mut r = rng(99);
    for i in 0..ROUND_TRIP_ASTS {
        let ast = random_ast(&mut r, 3);
        let text = canonical_query_string(&ast);
        let back = parse(&text, &vocab).map_err(|e| format!("#{i} {text:?}: {e}"))?;
        check(back == ast, format!("#{i} {text:?} reparsed as {back}"))?;
    }
    Ok(format!("{ROUND_TRIP_ASTS}/{ROUND_TRIP_ASTS} intact"))
}

fn palette_properties() -> Outcome {
    let mut r = rng(5);
    for i in 0..PALETTE_IMAGES {
        let img = synthetic_image(&mut r, 64, 96);
        let p = extract_palette(&img, 6).map_err(|e| e.to_string())?;
        let e = p.entries();
        let sum: f64 = e.iter().map(|c| c.proportion).sum();
        check(
            !e.is_empty() && e.len() <= 6,
            format!("image {i}: {} entries", e.len()),
        )?;
        check(
            (sum - 1.0).abs() <= PROPORTION_TOL,
            format!("image {i}: sum {sum}"),
        )?;
        check(
            e.windows(2).all(|w| w[0].proportion >= w[1].proportion),
            format!("image {i}: not descending"),
        )?;
    }
    let img: RgbImage = two_region_image(64, 32, [230, 30, 30], [30, 30, 230]);
    let p = extract_palette(&img, 6).map_err(|e| e.to_string())?;
    let props: Vec<f64> = p.entries().iter().map(|c| c.proportion).collect();
    check(
        props.len() == 2 && props.iter().all(|x| (x - 0.5).abs() <= PROPORTION_TOL),
        format!("two-region proportions {props:?}"),
    )?;
    Ok(format!("{PALETTE_IMAGES} images ok, two-region {props:?}"))
}

fn hsl_round_trip() -> Outcome {
    let grid: Vec<u8> = (0..16).map(|i| (i * 17) as u8).collect();
    let mut worst = 0i16;
    for &r in &grid {
        for &g in &grid {
            for &b in &grid {
                let back = hsl_to_rgb(rgb_to_hsl([r, g, b]));
                for (x, y) in [r, g, b].into_iter().zip(back) {
                    worst = worst.max((x as i16 - y as i16).abs());
                }
            }
        }
    }
    check(worst <= RGB_TOL, format!("max channel error {worst}"))?;
    let d = hue_distance(350.0, 10.0);
    check(d == 20.0, format!("hue_distance(350, 10) = {d}"))?;
    Ok(format!(
        "4096 colors, max channel error {worst}; hue distance {d}"
    ))
}

fn filter_pipeline() -> Outcome {
    let (records, report) = common::ingest_fixture();
    let labels = common::fixture_labels();
    let n = |l: &str| labels.values().filter(|v| *v == l).count();
    check(
        report.input == 12 && labels.len() == 12,
        format!("input {}", report.input),
    )?;
    check(
        (
            report.launcher,
            report.overlay,
            report.container_only,
            report.no_store_meta,
        ) == (2, 1, 2, 2),
        format!("report {report:?}"),
    )?;
    check(
        (
            report.launcher,
            report.overlay,
            report.container_only,
            report.no_store_meta,
            report.kept,
        ) == (
            n("launcher"),
            n("overlay"),
            n("container_only"),
            n("no_store_meta"),
            n("kept"),
        ),
        "report disagrees with labels",
    )?;
    check(
        report.duplicate + report.below_top_k + report.invalid == 0,
        format!("unexpected drops {report:?}"),
    )?;
    let kept: BTreeSet<&str> = records.iter().map(|r| r.doc_id.as_str()).collect();
    let want: BTreeSet<&str> = labels
        .iter()
        .filter(|(_, l)| *l == "kept")
        .map(|(k, _)| k.as_str())
        .collect();
    check(kept == want, format!("kept {kept:?}"))?;
    Ok("launcher 2, overlay 1, container_only 2, no_store_meta 2, kept 5".into())
}

fn top_six_selection() -> Outcome {
    let visits = [3u32, 11, 7, 2, 9, 5, 13, 1];
    let app = AppMeta {
        package_id: "com.top".into(),
        app_name: "Top".into(),
        store_url: String::new(),
        description: None,
    };
    let mut captures = Vec::new();
    for (screen, &v) in visits.iter().enumerate() {
        // split each screen's visits over two captures to exercise grouping
        for (part, count) in [(0, v / 2), (1, v - v / 2)] {
            if count == 0 {
                continue;
            }
            captures.push(ScreenCapture {
                app: app.clone(),
                capture_id: format!("s{screen}-{part}"),
                image: RgbImage::new(1, 1),
                hierarchy: GuiNode::new("android.widget.FrameLayout").with_child(
                    GuiNode::new("android.widget.TextView").with_text(format!("screen {screen}")),
                ),
                activity_name: None,
                visit_count: count,
            });
        }
    }
    let picked: BTreeSet<String> = select_top_screens(captures, 6)
        .into_iter()
        .map(|c| c.capture_id.split('-').next().unwrap().to_string())
        .collect();
    let mut order: Vec<usize> = (0..visits.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(visits[i]));
    let want: BTreeSet<String> = order[..6].iter().map(|i| format!("s{i}")).collect();
    check(picked == want, format!("picked {picked:?}, want {want:?}"))?;
    Ok(format!("picked {picked:?}"))
}

fn scale_check() -> Outcome {
    let records = synthetic_records(SCALE_DOCS, 12_051);
    let start = Instant::now();
    let index = build_index(records).map_err(|e| e.to_string())?;
    let build = start.elapsed();
    check(
        index.len() == SCALE_DOCS,
        format!("indexed {}", index.len()),
    )?;
    check(build < SCALE_BUILD_BUDGET, format!("build took {build:?}"))?;
    let mut r = rng(31);
    let mut times: Vec<Duration> = (0..SCALE_QUERIES)
        .map(|_| {
            let ast = random_ast(&mut r, 3);
            let filters = random_filters(&mut r);
            let t = Instant::now();
            std::hint::black_box(execute(&index, &ast, &filters, 10));
            t.elapsed()
        })
        .collect();
    times.sort();
    let median = times[times.len() / 2];
    check(
        median < SCALE_MEDIAN_BUDGET,
        format!("median query {median:?}"),
    )?;
    Ok(format!(
        "{SCALE_DOCS} docs built in {build:.2?}; median query {median:.2?}, max {:.2?}",
        times[times.len() - 1]
    ))
}

fn persistence() -> Outcome {
    let index = build_index(synthetic_records(ORACLE_DOCS, 8)).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    save_index(&index, dir.path()).map_err(|e| e.to_string())?;
    let loaded = load_index(dir.path()).map_err(|e| e.to_string())?;
    let mut r = rng(17);
    for i in 0..ORACLE_QUERIES {
        let ast = random_ast(&mut r, 3);
        let filters = if i % 2 == 0 {
            random_filters(&mut r)
        } else {
            QueryFilters::default()
        };
        let a = execute(&index, &ast, &filters, usize::MAX);
        let b = execute(&loaded, &ast, &filters, usize::MAX);
        check(a == b, format!("query {ast} differs after reload"))?;
    }
    let path = dir.path().join("postings.json");
    let mut bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
    let mid = bytes.len() / 2;
    bytes[mid] = bytes[mid].wrapping_add(1);
    std::fs::write(&path, bytes).map_err(|e| e.to_string())?;
    match load_index(dir.path()) {
        Err(IndexError::CorruptIndex(msg)) => Ok(format!(
            "{ORACLE_QUERIES} queries identical; corruption: {msg}"
        )),
        other => Err(format!(
            "corrupted index loaded as {:?}",
            other.map(|i| i.len())
        )),
    }
}

async fn service_contract() -> Outcome {
    use common::http::{call, get};
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    common::build_fixture_index(dir.path());
    let app = router(open_state(dir.path()).map_err(|e| e.to_string())?);

    let r = get(&app, "/api/search?q=red%20edittext%20pizza").await;
    check(
        r.status == StatusCode::OK,
        format!("search status {}", r.status),
    )?;
    check(
        r.json()["hits"][0]["doc_id"] == "com.pizzago/p1",
        "golden query not ranked first",
    )?;
    for (uri, code) in [
        ("/api/search?q=a%20and%20b%20or%20c", "AmbiguousOperators"),
        ("/api/search?q=foo:bar", "InvalidPrefix"),
        ("/api/search?q=(x", "UnbalancedParens"),
        ("/api/search?q=", "EmptyQuery"),
        ("/api/search?q=x&page_size=99", "InvalidRequest"),
        ("/api/screens/no/such", "UnknownDoc"),
    ] {
        let r = get(&app, uri).await;
        check(
            r.status.is_client_error() && r.json()["error"]["code"] == code,
            format!("{uri}: {} {}", r.status, String::from_utf8_lossy(&r.bytes)),
        )?;
    }
    let d = get(&app, "/api/screens/com.pizzago/p1").await.json();
    check(
        d["same_app"].as_array().map(Vec::len) == Some(2),
        "same_app length",
    )?;
    let s = get(&app, "/api/screens/com.pizzago/p1/similar?k=3")
        .await
        .json();
    check(
        s["similar"].as_array().is_some_and(|v| !v.is_empty()),
        "similar empty",
    )?;
    let sg = get(&app, "/api/suggest?prefix=ed").await.json();
    check(
        sg["suggestions"]
            .as_array()
            .is_some_and(|v| v.iter().any(|x| x["text"] == "edittext")),
        "suggest",
    )?;
    let t = get(&app, "/static/thumbs/com.pizzago/p1.png").await;
    check(
        t.status == StatusCode::OK && t.content_type == "image/png",
        "thumbnail",
    )?;

    let add = call(
        &app,
        "POST",
        "/api/favorites",
        Some(json!({"doc_id": "com.bankly/b1"})),
    )
    .await;
    check(add.status.is_success(), "favorite add")?;
    drop(app);
    let app = router(open_state(dir.path()).map_err(|e| e.to_string())?);
    let list = get(&app, "/api/favorites").await.json();
    check(
        list["favorites"][0]["doc_id"] == "com.bankly/b1",
        "favorite lost across restart",
    )?;
    Ok("search, errors, detail, similar, suggest, static, favorites across restart".into())
}

fn main() {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .unwrap();
    let criteria: Vec<Criterion> = vec![
        ("parser golden test", Box::new(golden_parse)),
        ("ambiguity rule", Box::new(ambiguity_rule)),
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("parser round-trip", Box::new(parse_round_trip)),
        ("palette properties", Box::new(palette_properties)),
        ("hsl round-trip", Box::new(hsl_round_trip)),
        ("filter pipeline", Box::new(filter_pipeline)),
        ("top-6 selection", Box::new(top_six_selection)),
        ("scale check", Box::new(scale_check)),
        ("index persistence", Box::new(persistence)),
        (
            "service contract",
            Box::new(move || runtime.block_on(service_contract())),
        ),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
