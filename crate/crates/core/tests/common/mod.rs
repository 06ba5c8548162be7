#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use screensearch::index::{build_index, save_index};
use screensearch::ingest::{
    build_corpus, CorpusManifest, FilterReport, IngestConfig, LocalStoreResolver,
};
use screensearch::model::ScreenRecord;
use screensearch::service::write_assets;

pub fn fixture_corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus")
}

/// Hand-assigned fate of every fixture capture, keyed by doc id.
pub fn fixture_labels() -> BTreeMap<String, String> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus_labels.json");
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

pub fn ingest_fixture() -> (Vec<ScreenRecord>, FilterReport) {
    let root = fixture_corpus();
    let manifest = CorpusManifest::load(&root).unwrap();
    build_corpus(
        &manifest,
        &LocalStoreResolver::new(&root),
        &IngestConfig::default(),
    )
}

/// Builds the fixture index with assets into `dir`.
pub fn build_fixture_index(dir: &Path) -> FilterReport {
    let (records, report) = ingest_fixture();
    let index = build_index(records).unwrap();
    save_index(&index, dir).unwrap();
    write_assets(index.docs(), &fixture_corpus(), dir).unwrap();
    report
}

pub mod http {
    use axum::body::Body;
    use axum::http::{Request, StatusCode};
    use axum::Router;
    use http_body_util::BodyExt;
    use serde_json::Value;
    use tower::ServiceExt;

    pub struct Reply {
        pub status: StatusCode,
        pub content_type: String,
        pub bytes: Vec<u8>,
    }

    impl Reply {
        pub fn json(&self) -> Value {
            serde_json::from_slice(&self.bytes).unwrap_or_else(|e| {
                panic!(
                    "non-json body ({e}): {}",
                    String::from_utf8_lossy(&self.bytes)
                )
            })
        }
    }

    pub async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> Reply {
        let mut req = Request::builder().method(method).uri(uri);
        let body = match body {
            Some(v) => {
                req = req.header("content-type", "application/json");
                Body::from(v.to_string())
            }
            None => Body::empty(),
        };
        let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
        let status = resp.status();
        let content_type = resp
            .headers()
            .get("content-type")
            .map(|v| v.to_str().unwrap().to_string())
            .unwrap_or_default();
        let bytes = resp
            .into_body()
            .collect()
            .await
            .unwrap()
            .to_bytes()
            .to_vec();
        Reply {
            status,
            content_type,
            bytes,
        }
    }

    pub async fn get(app: &Router, uri: &str) -> Reply {
        call(app, "GET", uri, None).await
    }
}
