use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_screensearch"))
}

fn fixture_corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/corpus")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn indexed() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "index",
        "--corpus",
        fixture_corpus().to_str().unwrap(),
        "--index",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    dir
}

fn count(report: &str, key: &str) -> usize {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).map(|rest| rest.trim().parse().unwrap()))
        .unwrap_or_else(|| panic!("no `{key}` line in {report}"))
}

#[test]
fn index_prints_filter_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "index",
        "--corpus",
        fixture_corpus().to_str().unwrap(),
        "--index",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(count(&text, "captures "), 12);
    assert_eq!(count(&text, "kept "), 5);
    assert_eq!(count(&text, "launcher "), 2);
    assert_eq!(count(&text, "overlay "), 1);
    assert_eq!(count(&text, "container_only "), 2);
    assert_eq!(count(&text, "no_store_meta "), 2);
    assert!(dir.path().join("filter_report.json").is_file());
    assert!(dir
        .path()
        .join("static/thumbs/com.pizzago/p1.png")
        .is_file());
}

#[test]
fn search_prints_ranked_table() {
    let dir = indexed();
    let out = run(&[
        "search",
        "--index",
        dir.path().to_str().unwrap(),
        "red edittext pizza",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("color:red AND ui:edittext AND (text:pizza OR appname:pizza)"));
    let first = text.lines().nth(2).unwrap();
    assert!(
        first.trim_start().starts_with('1') && first.contains("com.pizzago/p1"),
        "{text}"
    );

    let out = run(&[
        "search",
        "--index",
        dir.path().to_str().unwrap(),
        "--top-k",
        "1",
        "--screen-type",
        "settings",
        "textview",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("com.bankly/b1"));
}

#[test]
fn malformed_query_fails_with_offset() {
    let dir = indexed();
    let out = run(&[
        "search",
        "--index",
        dir.path().to_str().unwrap(),
        "a and b or c",
    ]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(
        err.contains("AmbiguousOperators") && err.contains("offset 8"),
        "{err}"
    );
    assert!(stdout(&out).is_empty());
}

#[test]
fn oracle_check_on_synthetic_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let idx = dir.path().join("syn");
    let out = run(&[
        "gen-synthetic",
        "--index",
        idx.to_str().unwrap(),
        "--docs",
        "200",
        "--seed",
        "3",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = run(&[
        "oracle-check",
        "--index",
        idx.to_str().unwrap(),
        "--seed",
        "5",
        "--queries",
        "1000",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("0 mismatches"));
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nothing");
    let out = run(&["search", "--index", missing.to_str().unwrap(), "pizza"]);
    assert!(!out.status.success());
    assert!(stderr(&out).starts_with("error:"));

    let out = run(&[
        "index",
        "--corpus",
        missing.to_str().unwrap(),
        "--index",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("error:"));

    std::fs::write(dir.path().join("VERSION"), "screensearch-index 1\n").unwrap();
    let out = run(&["oracle-check", "--index", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn serve_answers_http() {
    use std::io::{Read, Write};
    use std::net::{TcpListener, TcpStream};
    use std::time::{Duration, Instant};

    let dir = indexed();
    let port = TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let mut child = bin()
        .args([
            "serve",
            "--index",
            dir.path().to_str().unwrap(),
            "--port",
            &port.to_string(),
        ])
        .stderr(std::process::Stdio::null())
        .spawn()
        .unwrap();
    let deadline = Instant::now() + Duration::from_secs(20);
    let reply = loop {
        if let Ok(mut s) = TcpStream::connect(("127.0.0.1", port)) {
            s.write_all(
                b"GET /api/search?q=pizza HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n",
            )
            .unwrap();
            let mut buf = String::new();
            s.read_to_string(&mut buf).unwrap();
            break buf;
        }
        assert!(Instant::now() < deadline, "server did not start");
        std::thread::sleep(Duration::from_millis(50));
    };
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(reply.starts_with("HTTP/1.1 200"), "{reply}");
    assert!(reply.contains("com.pizzago/p1"));
}
