use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pdnet_core::discovery::{query_datasets, similar_datasets, QueryFilter, RwrParams};
use pdnet_core::evaluation::{eval_er, eval_extraction, AliasTable, GoldEr, GoldExtraction};
use pdnet_core::extraction::client::{RecordingClient, Script};
use pdnet_core::extraction::{extract_corpus, CompletionClient, ExtractOptions, ExtractionRun, ReplayClient, ScriptedClient};
use pdnet_core::ingestion::{load_corpus, Strategy};
use pdnet_core::io::{canonical_pretty, read_json, read_jsonl, write_json, write_jsonl};
use pdnet_core::pipeline::{predicted_names, run_bench_config};
use pdnet_core::resolution::{resolve, ResolutionConfig};
use pdnet_core::store::{
    build_network, compute_stats, export_graph, import_entities, load_network, paper_metas, save_network,
    ExportFormat,
};
use pdnet_core::{DatasetDescription, DatasetEntity, Execution, Match, Paper};
use pdnet::server::{router, AppState};

#[derive(Parser)]
#[command(name = "pdnet", version, about = "Build and query paper-dataset networks")]
struct Cli {
    /// Run data-parallel stages on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a directory of *.paper.json files into papers.jsonl.
    Ingest(IngestArgs),
    /// Extract dataset descriptions with a completion backend.
    Extract(ExtractArgs),
    /// Link descriptions to entities and discover new ones.
    Resolve(ResolveArgs),
    /// Assemble the paper-dataset network.
    Build(BuildArgs),
    /// Print network statistics.
    Stats(StatsArgs),
    /// Write the network as GraphML or DOT.
    Export(ExportArgs),
    /// Filter descriptions by field.
    Query(QueryArgs),
    /// Rank datasets by random walk with restart.
    Similar(SimilarArgs),
    /// Serve the read-only HTTP API.
    Serve(ServeArgs),
    /// Score predictions against gold annotations.
    Eval(EvalArgs),
    /// Run the benchmark described by a config file.
    Bench(BenchArgs),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Write the skip report here as JSONL.
    #[arg(long)]
    skipped: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Replay,
    Remote,
    Mock,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    papers: PathBuf,
    #[arg(long, value_enum, default_value = "replay")]
    backend: Backend,
    /// Replay fixtures, one `<prompt-hash>.txt` per call.
    #[arg(long, required_if_eq("backend", "replay"))]
    replay_dir: Option<PathBuf>,
    /// JSON script for the mock backend: {"rules": [{"contains", "response"}], "default"}.
    #[arg(long, required_if_eq("backend", "mock"))]
    mock_script: Option<PathBuf>,
    /// Also write every completion into this replay directory.
    #[arg(long)]
    record: Option<PathBuf>,
    #[arg(long, default_value = "truncated")]
    strategy: Strategy,
    #[arg(long, default_value_t = 1)]
    max_attempts: usize,
    /// Concurrent calls; 0 uses the pool default.
    #[arg(long, default_value_t = 0)]
    parallelism: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    runs: Option<PathBuf>,
}

#[derive(Args)]
struct ResolveArgs {
    #[arg(long)]
    descriptions: PathBuf,
    /// Imported entities: JSONL of {name, aliases, url, urls}.
    #[arg(long)]
    entities: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    matches: PathBuf,
    #[arg(long)]
    new_entities: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    papers: PathBuf,
    #[arg(long)]
    descriptions: PathBuf,
    #[arg(long)]
    matches: PathBuf,
    /// Imported entities, same file given to `resolve`.
    #[arg(long)]
    entities: PathBuf,
    /// Entities written by `resolve --new-entities`.
    #[arg(long)]
    new_entities: Option<PathBuf>,
    #[arg(long)]
    runs: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    network: PathBuf,
    /// Extraction runs; without them success comes from paper metadata.
    #[arg(long)]
    runs: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long, default_value = "graphml")]
    format: ExportFormat,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    network: PathBuf,
    /// FIELD~VALUE (contains) or FIELD=VALUE (equals); repeat to AND clauses.
    #[arg(long = "where", required = true)]
    clauses: Vec<String>,
}

#[derive(Args)]
struct SimilarArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    seed: String,
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Restart probability.
    #[arg(long, default_value_t = 0.15)]
    c: f64,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
}

#[derive(Clone, Copy, ValueEnum)]
enum Task {
    Extraction,
    Er,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_enum)]
    task: Task,
    #[arg(long)]
    gold: PathBuf,
    /// Extraction: descriptions whose dataset names are the predictions.
    #[arg(long, required_if_eq("task", "extraction"))]
    descriptions: Option<PathBuf>,
    /// Extraction: papers.jsonl, so papers with no description count as empty.
    #[arg(long, required_if_eq("task", "extraction"))]
    papers: Option<PathBuf>,
    /// Extraction: alias table {"canonical": ["alias", ...]}.
    #[arg(long)]
    aliases: Option<PathBuf>,
    /// Extraction: imported entities whose aliases extend the table.
    #[arg(long)]
    entities: Option<PathBuf>,
    /// ER: predicted matches.
    #[arg(long, required_if_eq("task", "er"))]
    matches: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "pdnet=info,pdnet_core=warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match cli.command {
        Command::Ingest(a) => ingest(a, exec),
        Command::Extract(a) => extract(a, exec),
        Command::Resolve(a) => resolve_cmd(a, exec),
        Command::Build(a) => build(a),
        Command::Stats(a) => stats(a),
        Command::Export(a) => {
            let net = load_network(&a.network)?;
            export_graph(&net, a.format, &a.out)?;
            Ok(())
        }
        Command::Query(a) => query(a),
        Command::Similar(a) => similar(a, exec),
        Command::Serve(a) => serve(a, exec),
        Command::Eval(a) => eval(a),
        Command::Bench(a) => bench(a, exec),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(canonical_pretty(value)?.as_bytes())?;
    Ok(())
}

fn ingest(a: IngestArgs, exec: Execution) -> Result<()> {
    let corpus = load_corpus(&a.corpus, exec)?;
    for s in &corpus.skipped {
        tracing::warn!(path = %s.path, reason = %s.reason, "skipped corpus file");
    }
    write_jsonl(&a.out, &corpus.papers)?;
    if let Some(path) = &a.skipped {
        write_jsonl(path, &corpus.skipped)?;
    }
    eprintln!("{} papers loaded, {} skipped", corpus.papers.len(), corpus.skipped.len());
    Ok(())
}

fn client_for(a: &ExtractArgs) -> Result<Box<dyn CompletionClient>> {
    let inner: Box<dyn CompletionClient> = match a.backend {
        Backend::Replay => Box::new(ReplayClient::new(a.replay_dir.clone().expect("required by clap"))?),
        Backend::Mock => {
            let path = a.mock_script.as_ref().expect("required by clap");
            let script: Script = read_json(path)?;
            Box::new(ScriptedClient::new(script))
        }
        Backend::Remote => remote_client()?,
    };
    Ok(match &a.record {
        Some(dir) => Box::new(RecordingClient::new(inner, dir)),
        None => inner,
    })
}

#[cfg(feature = "remote")]
fn remote_client() -> Result<Box<dyn CompletionClient>> {
    use pdnet_core::extraction::client::{RemoteClient, RemoteConfig};
    Ok(Box::new(RemoteClient::new(RemoteConfig::from_env()?)))
}

#[cfg(not(feature = "remote"))]
fn remote_client() -> Result<Box<dyn CompletionClient>> {
    bail!("this build has no remote backend; rebuild with the `remote` feature")
}

fn extract(a: ExtractArgs, exec: Execution) -> Result<()> {
    let papers: Vec<Paper> = read_jsonl(&a.papers)?;
    let client = client_for(&a)?;
    let opts = ExtractOptions { max_attempts: a.max_attempts, ..ExtractOptions::default() };
    let out = extract_corpus(&papers, &client, a.strategy, &opts, a.parallelism, exec);
    write_jsonl(&a.out, &out.descriptions)?;
    if let Some(runs) = &a.runs {
        write_jsonl(runs, &out.runs)?;
    }
    let parsed = out.runs.iter().filter(|r| r.parse_ok).count();
    eprintln!(
        "{} descriptions from {} papers ({parsed} parsed, {} unavailable)",
        out.descriptions.len(),
        papers.len(),
        out.unavailable.len()
    );
    if !out.unavailable.is_empty() {
        bail!("backend unavailable for papers: {}", out.unavailable.join(", "));
    }
    Ok(())
}

fn resolve_cmd(a: ResolveArgs, exec: Execution) -> Result<()> {
    let descriptions: Vec<DatasetDescription> = read_jsonl(&a.descriptions)?;
    let import = import_entities(&a.entities)?;
    for s in &import.skipped {
        tracing::warn!(line = s.line, reason = %s.reason, "skipped entity");
    }
    let config = match &a.config {
        Some(p) => ResolutionConfig::load(p)?,
        None => ResolutionConfig::default(),
    };
    let r = resolve(&descriptions, &import.entities, &config, exec)?;
    write_jsonl(&a.matches, &r.matches)?;
    write_jsonl(&a.new_entities, &r.new_entities)?;
    if let Some(path) = &a.report {
        write_json(path, &r.report)?;
    }
    eprintln!(
        "{} matches ({} to new entities), {} new entities, {} I-nodes removed",
        r.matches.len(),
        r.report.match_counts.get("new").copied().unwrap_or(0),
        r.new_entities.len(),
        r.report.removed_i_nodes.len()
    );
    Ok(())
}

fn build(a: BuildArgs) -> Result<()> {
    let papers: Vec<Paper> = read_jsonl(&a.papers)?;
    let descriptions: Vec<DatasetDescription> = read_jsonl(&a.descriptions)?;
    let matches: Vec<Match> = read_jsonl(&a.matches)?;
    let mut entities = import_entities(&a.entities)?.entities;
    if let Some(path) = &a.new_entities {
        entities.extend(read_jsonl::<DatasetEntity>(path)?);
    }
    let runs: Vec<ExtractionRun> = match &a.runs {
        Some(p) => read_jsonl(p)?,
        None => Vec::new(),
    };
    let net = build_network(&paper_metas(&papers, &runs), &descriptions, &matches, &entities)?;
    save_network(&a.out, &net)?;
    eprintln!(
        "network: {} papers, {} datasets, {} edges",
        net.papers().len(),
        net.entities().len(),
        net.edges().len()
    );
    Ok(())
}

fn stats(a: StatsArgs) -> Result<()> {
    let net = load_network(&a.network)?;
    let runs: Vec<ExtractionRun> = match &a.runs {
        Some(p) => read_jsonl(p)?,
        None => Vec::new(),
    };
    print_json(&compute_stats(&net, &runs))
}

fn query(a: QueryArgs) -> Result<()> {
    let net = load_network(&a.network)?;
    let filter = QueryFilter::parse(&a.clauses)?;
    print_json(&query_datasets(&net, &filter))
}

fn similar(a: SimilarArgs, exec: Execution) -> Result<()> {
    let net = load_network(&a.network)?;
    let params = RwrParams { top_k: a.k, restart_prob: a.c, ..RwrParams::default() };
    let ranked = similar_datasets(&net, &a.seed, &params, exec)?;
    print_json(&ranked)
}

fn serve(a: ServeArgs, exec: Execution) -> Result<()> {
    let state = AppState::load(a.network.clone(), exec)
        .with_context(|| format!("loading {}", a.network.display()))?;
    let app = router(Arc::new(state));
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(a.addr).await.with_context(|| format!("binding {}", a.addr))?;
        tracing::info!(addr = %listener.local_addr()?, "serving");
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

fn alias_table(a: &EvalArgs) -> Result<AliasTable> {
    let mut table = match &a.aliases {
        Some(p) => read_json(p)?,
        None => AliasTable::default(),
    };
    if let Some(p) = &a.entities {
        for e in import_entities(p)?.entities {
            for key in &e.name_keys {
                table.insert(key, &e.canonical_name);
            }
        }
    }
    Ok(table)
}

fn eval(a: EvalArgs) -> Result<()> {
    match a.task {
        Task::Extraction => {
            let gold: Vec<GoldExtraction> = read_jsonl(&a.gold)?;
            let papers: Vec<Paper> = read_jsonl(a.papers.as_deref().expect("required by clap"))?;
            let descriptions: Vec<DatasetDescription> =
                read_jsonl(a.descriptions.as_deref().expect("required by clap"))?;
            let predictions = predicted_names(&papers, &descriptions);
            print_json(&eval_extraction(&predictions, &gold, &alias_table(&a)?)?)
        }
        Task::Er => {
            let gold: Vec<GoldEr> = read_jsonl(&a.gold)?;
            let matches: Vec<Match> = read_jsonl(a.matches.as_deref().expect("required by clap"))?;
            print_json(&eval_er(&matches, &gold)?)
        }
    }
}

fn bench(a: BenchArgs, exec: Execution) -> Result<()> {
    let report = run_bench_config(&a.config, exec)?;
    if let Some(out) = &a.out {
        write_json(out, &report)?;
    }
    print!("{}", report.to_table());
    Ok(())
}
