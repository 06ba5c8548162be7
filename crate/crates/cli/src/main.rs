use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use screensearch::index::{build_index, load_index, save_index};
use screensearch::ingest::{
    build_corpus, CorpusManifest, FilterReport, IngestConfig, LocalStoreResolver,
};
use screensearch::service::{
    open_state, router, write_assets, SearchEngine, SearchRequest, ServiceError,
};
use screensearch::synth::{oracle_battery, synthetic_records};
use screensearch::ScreenType;

#[derive(Parser)]
#[command(
    name = "screensearch",
    version,
    about = "Search engine for mobile app screen captures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter a capture corpus and build an index from it.
    Index {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        index: PathBuf,
        /// Distinct screens kept per app.
        #[arg(long, default_value_t = 6)]
        top_k: usize,
    },
    /// Run one query against an index and print the ranked hits.
    Search {
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
        #[command(flatten)]
        filters: FilterArgs,
        query: String,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
    /// Compare indexed retrieval with a linear scan on random queries.
    OracleCheck {
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        queries: usize,
    },
    /// Write an index of randomly generated records.
    GenSynthetic {
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value_t = 200)]
        docs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct FilterArgs {
    /// Color-picker filter, hex or web color name.
    #[arg(long)]
    color: Option<String>,
    /// Color tolerance slider in [0, 1].
    #[arg(long)]
    tol: Option<f64>,
    /// Required component type; repeatable.
    #[arg(long)]
    ui: Vec<String>,
    /// Allowed screen type; repeatable.
    #[arg(long)]
    screen_type: Vec<ScreenType>,
}

fn print_report(report: &FilterReport) {
    println!("captures       {:>6}", report.input);
    println!("kept           {:>6}", report.kept);
    println!("launcher       {:>6}", report.launcher);
    println!("overlay        {:>6}", report.overlay);
    println!("container_only {:>6}", report.container_only);
    println!("no_store_meta  {:>6}", report.no_store_meta);
    println!("duplicate      {:>6}", report.duplicate);
    println!("below_top_k    {:>6}", report.below_top_k);
    println!("invalid        {:>6}", report.invalid);
    for e in &report.errors {
        eprintln!("warning: {e}");
    }
}

fn run_index(corpus: &Path, index_dir: &Path, top_k: usize) -> anyhow::Result<()> {
    if top_k == 0 {
        bail!("--top-k must be at least 1");
    }
    let manifest = CorpusManifest::load(corpus)
        .with_context(|| format!("reading corpus {}", corpus.display()))?;
    let config = IngestConfig {
        top_k,
        ..IngestConfig::default()
    };
    let resolver = LocalStoreResolver::new(corpus);
    let (records, report) = build_corpus(&manifest, &resolver, &config);
    let index = build_index(records)?;
    save_index(&index, index_dir)?;
    write_assets(index.docs(), corpus, index_dir)?;
    let report_path = index_dir.join("filter_report.json");
    std::fs::write(&report_path, serde_json::to_vec_pretty(&report)?)
        .with_context(|| format!("writing {}", report_path.display()))?;
    print_report(&report);
    println!(
        "indexed {} documents into {}",
        index.len(),
        index_dir.display()
    );
    Ok(())
}

fn run_search(
    index_dir: &Path,
    top_k: usize,
    filters: FilterArgs,
    query: String,
) -> anyhow::Result<()> {
    if top_k == 0 {
        bail!("--top-k must be at least 1");
    }
    let engine = SearchEngine::new(load_index(index_dir)?);
    let req = SearchRequest {
        q: query.clone(),
        color: filters.color,
        tolerance: filters.tol,
        ui_filter: filters.ui,
        screen_type_filter: filters.screen_type,
        page: 0,
        page_size: top_k.min(screensearch::service::MAX_PAGE_SIZE),
    };
    let page = match engine.search(&req) {
        Ok(p) => p,
        Err(e @ ServiceError::Query(_)) => {
            let mut msg = format!("{}: {e}", e.code());
            if let Some(offset) = e.offset() {
                msg.push_str(&format!("\n  {query}\n  {}^", " ".repeat(offset)));
            }
            bail!(msg);
        }
        Err(e) => return Err(e.into()),
    };
    println!("query: {}  ({} matches)", page.query, page.total);
    println!("{:>4}  {:>8}  {:<40}  app", "rank", "score", "doc_id");
    for (i, hit) in page.hits.iter().enumerate() {
        println!(
            "{:>4}  {:>8.4}  {:<40}  {}",
            i + 1,
            hit.score,
            hit.doc_id,
            hit.app_name
        );
    }
    Ok(())
}

async fn run_serve(index_dir: &Path, host: &str, port: u16) -> anyhow::Result<()> {
    let state = open_state(index_dir)?;
    let docs = state.engine.index().len();
    let listener = tokio::net::TcpListener::bind((host, port))
        .await
        .with_context(|| format!("binding {host}:{port}"))?;
    eprintln!(
        "serving {docs} documents on http://{}",
        listener.local_addr()?
    );
    axum::serve(listener, router(state)).await?;
    Ok(())
}

fn run_oracle(index_dir: &Path, seed: u64, queries: usize) -> anyhow::Result<()> {
    let index = load_index(index_dir)?;
    let report = oracle_battery(&index, queries, seed);
    println!(
        "{} queries over {} documents, {} with results, {} mismatches",
        report.queries,
        index.len(),
        report.non_empty,
        report.mismatches.len()
    );
    if !report.passed() {
        for q in report.mismatches.iter().take(20) {
            eprintln!("mismatch: {q}");
        }
        bail!(
            "index and linear scan disagree on {} queries",
            report.mismatches.len()
        );
    }
    Ok(())
}

fn run_gen(index_dir: &Path, docs: usize, seed: u64) -> anyhow::Result<()> {
    let index = build_index(synthetic_records(docs, seed))?;
    save_index(&index, index_dir)?;
    println!(
        "wrote {} synthetic documents to {}",
        index.len(),
        index_dir.display()
    );
    Ok(())
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Index {
            corpus,
            index,
            top_k,
        } => run_index(&corpus, &index, top_k),
        Command::Search {
            index,
            top_k,
            filters,
            query,
        } => run_search(&index, top_k, filters, query),
        Command::Serve { index, port, host } => run_serve(&index, &host, port).await,
        Command::OracleCheck {
            index,
            seed,
            queries,
        } => run_oracle(&index, seed, queries),
        Command::GenSynthetic { index, docs, seed } => run_gen(&index, docs, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
