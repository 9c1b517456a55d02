//! End-to-end runs: corpus to network, and the benchmark driven by a
//! config file.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::evaluation::{run_benchmark, AliasTable, BenchError, BenchInputs, BenchReport, GoldEr, GoldExtraction};
use crate::extraction::{extract_corpus, ClientError, CompletionClient, CorpusExtraction, ExtractOptions, ReplayClient};
use crate::ingestion::{load_corpus, IngestError, Strategy};
use crate::io::{self, IoError};
use crate::model::{DatasetDescription, DatasetEntity, Paper, PaperDatasetNetwork};
use crate::par::Execution;
use crate::resolution::{resolve, ConfigError, Resolution, ResolutionConfig, ResolutionError};
use crate::store::{build_network, compute_stats, import_entities, paper_metas, BuildError, NetworkStats};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error(transparent)]
    Resolution(#[from] ResolutionError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("invalid benchmark config {path}: {message}")]
    BenchConfig { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Default)]
pub struct PipelineOptions {
    pub strategy: Strategy,
    pub extract: ExtractOptions,
    /// Concurrent extraction calls; 0 uses the pool default.
    pub parallelism: usize,
    pub resolution: ResolutionConfig,
    pub exec: Execution,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub extraction: CorpusExtraction,
    pub resolution: Resolution,
    pub network: PaperDatasetNetwork,
    pub stats: NetworkStats,
}

/// Extract, resolve, build, and summarize.
pub fn run_pipeline(
    papers: &[Paper],
    entities: &[DatasetEntity],
    client: &dyn CompletionClient,
    opts: &PipelineOptions,
) -> Result<PipelineOutput, PipelineError> {
    let extraction = extract_corpus(papers, client, opts.strategy, &opts.extract, opts.parallelism, opts.exec);
    let resolution = resolve(&extraction.descriptions, entities, &opts.resolution, opts.exec)?;
    let all_entities: Vec<DatasetEntity> = entities.iter().chain(&resolution.new_entities).cloned().collect();
    let network = build_network(
        &paper_metas(papers, &extraction.runs),
        &extraction.descriptions,
        &resolution.matches,
        &all_entities,
    )?;
    let stats = compute_stats(&network, &extraction.runs);
    Ok(PipelineOutput { extraction, resolution, network, stats })
}

/// Dataset names predicted per paper; every paper gets an entry.
pub fn predicted_names(papers: &[Paper], descriptions: &[DatasetDescription]) -> BTreeMap<String, BTreeSet<String>> {
    let mut out: BTreeMap<String, BTreeSet<String>> =
        papers.iter().map(|p| (p.paper_id.clone(), BTreeSet::new())).collect();
    for d in descriptions {
        if let Some(name) = d.dataset_name.as_deref().filter(|n| !n.trim().is_empty()) {
            out.entry(d.paper_id.clone()).or_default().insert(name.trim().to_string());
        }
    }
    out
}

/// Benchmark config. Paths are relative to the config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub corpus: PathBuf,
    pub gold_extraction: PathBuf,
    /// `{"canonical": ["alias", ...]}`; defaults to the entity aliases.
    #[serde(default)]
    pub aliases: Option<PathBuf>,
    pub entities: PathBuf,
    pub replay_dir: PathBuf,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<String>,
    /// Run the regex baseline over the entity names.
    #[serde(default = "yes")]
    pub regex_baseline: bool,
    pub er: ErBenchConfig,
    #[serde(default)]
    pub resolution: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErBenchConfig {
    pub descriptions: PathBuf,
    pub entities: PathBuf,
    pub gold: PathBuf,
}

fn default_strategies() -> Vec<String> {
    vec!["truncated".into()]
}

fn yes() -> bool {
    true
}

pub fn run_bench_config(path: &Path, exec: Execution) -> Result<BenchReport, PipelineError> {
    let config: BenchConfig = io::read_json(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let at = |p: &Path| base.join(p);
    let bad = |message: String| PipelineError::BenchConfig { path: path.to_path_buf(), message };

    let corpus = load_corpus(&at(&config.corpus), exec)?;
    let entities = import_entities(&at(&config.entities))?.entities;
    let aliases = match &config.aliases {
        Some(p) => io::read_json(&at(p))?,
        None => AliasTable::from_entities(&entities),
    };
    let client = ReplayClient::new(at(&config.replay_dir))?;
    let mut extraction_predictions = BTreeMap::new();
    for name in &config.strategies {
        let strategy: Strategy = name.parse().map_err(bad)?;
        let out = extract_corpus(&corpus.papers, &client, strategy, &ExtractOptions::default(), 0, exec);
        if !out.unavailable.is_empty() {
            tracing::warn!(strategy = name, papers = ?out.unavailable, "replay misses");
        }
        extraction_predictions.insert(format!("Extraction ({name})"), predicted_names(&corpus.papers, &out.descriptions));
    }
    let known_names = if config.regex_baseline {
        entities.iter().map(|e| e.canonical_name.clone()).collect()
    } else {
        Vec::new()
    };
    let er_entities = import_entities(&at(&config.er.entities))?.entities;
    let inputs = BenchInputs {
        papers: corpus.papers,
        gold_extraction: io::read_jsonl::<GoldExtraction>(&at(&config.gold_extraction))?,
        aliases,
        extraction_predictions,
        known_names,
        er_descriptions: io::read_jsonl(&at(&config.er.descriptions))?,
        er_entities,
        er_gold: io::read_jsonl::<GoldEr>(&at(&config.er.gold))?,
        resolution: match &config.resolution {
            Some(p) => ResolutionConfig::load(&at(p))?,
            None => ResolutionConfig::default(),
        },
    };
    Ok(run_benchmark(&inputs, exec)?)
}
