//! Entity resolution: graph creation, completion with refinement,
//! inference, the two baselines, and discovery of new entities.

mod discover;
mod graph;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use discover::{discover_new_entities, Discovery};
pub use graph::{CompletionReport, ImportConflict, RemovalReason, RemovedINode, ResolutionGraph};

use crate::model::{default_warehouse_hosts, parse_host_list, DatasetDescription, DatasetEntity, IdentityAttribute, Match, MatchMethod};
use crate::par::Execution;

#[derive(Debug, Error)]
pub enum ResolutionError {
    #[error("I-node {attribute} refers to {} entities: {}", entities.len(), entities.join(", "))]
    InvariantViolation { attribute: IdentityAttribute, entities: Vec<String> },
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolutionConfig {
    /// Completion passes; `usize::MAX` runs to a fixpoint.
    pub iteration_limit: usize,
    /// Distinct papers needed for a certain new entity.
    pub lambda: usize,
    pub warehouse_hosts: BTreeSet<String>,
}

impl Default for ResolutionConfig {
    fn default() -> Self {
        Self { iteration_limit: 3, lambda: 3, warehouse_hosts: default_warehouse_hosts() }
    }
}

/// On-disk shape of `pdnet.json`. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    iteration_limit: Option<usize>,
    /// `true` selects fixpoint mode.
    fixpoint: Option<bool>,
    lambda: Option<usize>,
    warehouse_hosts: Option<BTreeSet<String>>,
    /// Host list file, one host per line; relative to the config file.
    warehouse_hosts_file: Option<PathBuf>,
}

impl ResolutionConfig {
    pub fn fixpoint() -> Self {
        Self { iteration_limit: usize::MAX, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.iteration_limit == 0 {
            return Err("iteration_limit must be at least 1".into());
        }
        if self.lambda == 0 {
            return Err("lambda must be at least 1".into());
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let invalid = |message: String| ConfigError::Invalid { path: path.into(), message };
        let file: ConfigFile = serde_json::from_str(&text).map_err(|e| invalid(e.to_string()))?;
        let mut config = Self::default();
        if let Some(n) = file.iteration_limit {
            config.iteration_limit = n;
        }
        if file.fixpoint == Some(true) {
            config.iteration_limit = usize::MAX;
        }
        if let Some(n) = file.lambda {
            config.lambda = n;
        }
        if let Some(hosts) = file.warehouse_hosts {
            config.warehouse_hosts = hosts.into_iter().map(|h| h.trim().to_lowercase()).collect();
        }
        if let Some(rel) = file.warehouse_hosts_file {
            let p = path.parent().unwrap_or(Path::new(".")).join(rel);
            let list = std::fs::read_to_string(&p).map_err(|source| ConfigError::Io { path: p.clone(), source })?;
            config.warehouse_hosts.extend(parse_host_list(&list));
        }
        config.validate().map_err(invalid)?;
        Ok(config)
    }
}

pub fn create_graph(
    descriptions: &[DatasetDescription],
    entities: &[DatasetEntity],
) -> (ResolutionGraph, Vec<ImportConflict>) {
    ResolutionGraph::create(descriptions, entities)
}

/// Matches on canonical names only.
pub fn name_matching_baseline(descriptions: &[DatasetDescription], entities: &[DatasetEntity]) -> Vec<Match> {
    let mut by_name: BTreeMap<String, &str> = BTreeMap::new();
    for e in entities {
        if let Some(k) = e.canonical_key() {
            by_name.entry(k).or_insert(&e.entity_id);
        }
    }
    let mut out: Vec<Match> = descriptions
        .iter()
        .filter_map(|d| {
            let key = d.name_key()?;
            let entity = by_name.get(&key)?;
            Some(Match {
                description_id: d.description_id.clone(),
                entity_id: entity.to_string(),
                via: IdentityAttribute::name(key),
                method: MatchMethod::NameMatching,
            })
        })
        .collect();
    out.sort();
    out.dedup_by(|a, b| a.description_id == b.description_id);
    out
}

/// Inference on the created graph, generic URLs removed, no completion.
pub fn graph_inference_baseline(
    descriptions: &[DatasetDescription],
    entities: &[DatasetEntity],
    config: &ResolutionConfig,
    exec: Execution,
) -> Result<Vec<Match>, ResolutionError> {
    let (mut graph, _) = create_graph(descriptions, entities);
    graph.remove_generic_urls(&config.warehouse_hosts);
    graph.infer_matches(MatchMethod::GraphInference, exec)
}

/// Completion, refinement, then inference.
pub fn graph_completion_inference(
    descriptions: &[DatasetDescription],
    entities: &[DatasetEntity],
    config: &ResolutionConfig,
    exec: Execution,
) -> Result<(ResolutionGraph, CompletionReport, Vec<Match>), ResolutionError> {
    let (mut graph, _) = create_graph(descriptions, entities);
    let report = graph.complete_and_refine(config);
    graph.check_refinement()?;
    let matches = graph.infer_matches(MatchMethod::GraphCompletionInference, exec)?;
    Ok((graph, report, matches))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResolveReport {
    pub descriptions: usize,
    pub unresolvable: usize,
    pub completion: CompletionReport,
    pub removed_i_nodes: Vec<RemovedINode>,
    pub import_conflicts: Vec<ImportConflict>,
    pub match_counts: BTreeMap<String, usize>,
    pub unmatched: usize,
    pub new_entities_certain: usize,
    pub new_entities_uncertain: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Resolution {
    /// Matches to imported and discovered entities, sorted by description.
    pub matches: Vec<Match>,
    pub new_entities: Vec<DatasetEntity>,
    pub report: ResolveReport,
}

/// The full resolution stage.
pub fn resolve(
    descriptions: &[DatasetDescription],
    entities: &[DatasetEntity],
    config: &ResolutionConfig,
    exec: Execution,
) -> Result<Resolution, ResolutionError> {
    let (mut graph, conflicts) = create_graph(descriptions, entities);
    let completion = graph.complete_and_refine(config);
    graph.check_refinement()?;
    let mut matches = graph.infer_matches(MatchMethod::GraphCompletionInference, exec)?;

    let matched: BTreeSet<&str> = matches.iter().map(|m| m.description_id.as_str()).collect();
    let unmatched: Vec<DatasetDescription> = descriptions
        .iter()
        .filter(|d| !matched.contains(d.description_id.as_str()))
        .cloned()
        .collect();
    let discovery = discover_new_entities(&graph, &unmatched, config);
    let mut match_counts = BTreeMap::new();
    match_counts.insert("existing".to_string(), matches.len());
    match_counts.insert("new".to_string(), discovery.matches.len());
    matches.extend(discovery.matches);
    matches.sort_by(|a, b| a.description_id.cmp(&b.description_id));

    let described: BTreeSet<&str> = descriptions.iter().map(|d| d.description_id.as_str()).collect();
    let report = ResolveReport {
        descriptions: described.len(),
        unresolvable: descriptions.iter().filter(|d| !d.is_resolvable()).count(),
        completion,
        removed_i_nodes: graph.removed_i_nodes().to_vec(),
        import_conflicts: conflicts,
        match_counts,
        unmatched: described.len().saturating_sub(matches.len()),
        new_entities_certain: discovery.entities.iter().filter(|e| !e.uncertain).count(),
        new_entities_uncertain: discovery.entities.iter().filter(|e| e.uncertain).count(),
    };
    Ok(Resolution { matches, new_entities: discovery.entities, report })
}

#[cfg(test)]
mod tests;
