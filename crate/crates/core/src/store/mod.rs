//! Entity import, network assembly and persistence, statistics, and graph
//! export.

mod export;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use export::{export_graph, render_dot, render_graphml, ExportError, ExportFormat};

use crate::extraction::ExtractionRun;
use crate::io::{self, IoError};
use crate::model::{
    normalize_name, normalize_url, DatasetDescription, DatasetEntity, Edge, EntityOrigin,
    IdentityAttribute, Match, NetworkError, Paper, PaperDatasetNetwork, PaperMeta,
};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("invalid network snapshot: {0}")]
    Invalid(#[from] NetworkError),
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("match for description {description_id:?} references unknown {kind} {id:?}")]
    Dangling { description_id: String, kind: &'static str, id: String },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// One line of an entity snapshot.
#[derive(Debug, Clone, Deserialize)]
struct EntityRecord {
    name: String,
    #[serde(default)]
    aliases: Vec<String>,
    #[serde(default)]
    url: Option<String>,
    #[serde(default)]
    urls: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImportSkip {
    pub line: usize,
    pub reason: String,
}

/// A key claimed by an earlier entity. When `attribute` is the later
/// entity's canonical name the whole entity is dropped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KeyConflict {
    pub line: usize,
    pub attribute: IdentityAttribute,
    pub kept_entity: String,
    pub dropped_name: String,
    pub entity_dropped: bool,
}

#[derive(Debug, Clone, Default)]
pub struct EntityImport {
    pub entities: Vec<DatasetEntity>,
    pub skipped: Vec<ImportSkip>,
    pub conflicts: Vec<KeyConflict>,
}

/// Load an entity snapshot (JSONL of `{"name", "aliases", "url", "urls"}`).
pub fn import_entities(path: &Path) -> Result<EntityImport, IoError> {
    let (records, bad) = io::read_jsonl_lenient::<serde_json::Value>(path)?;
    let mut out = EntityImport {
        skipped: bad.into_iter().map(|(line, reason)| ImportSkip { line, reason }).collect(),
        ..EntityImport::default()
    };
    // read_jsonl_lenient drops blank lines, so recover line numbers here
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    let bad_lines: BTreeSet<usize> = out.skipped.iter().map(|s| s.line).collect();
    let lines = text
        .lines()
        .enumerate()
        .filter(|(i, l)| !l.trim().is_empty() && !bad_lines.contains(&(i + 1)))
        .map(|(i, _)| i + 1);

    let mut owner: BTreeMap<IdentityAttribute, usize> = BTreeMap::new();
    let mut pending: Vec<(String, BTreeSet<String>, BTreeSet<String>)> = Vec::new();
    // index into `pending` of the entity that kept each conflicting key
    let mut kept_by: Vec<usize> = Vec::new();
    for (line, value) in lines.zip(records) {
        let record: EntityRecord = match serde_json::from_value(value) {
            Ok(r) => r,
            Err(e) => {
                out.skipped.push(ImportSkip { line, reason: e.to_string() });
                continue;
            }
        };
        let canonical = match normalize_name(&record.name) {
            Ok(k) => IdentityAttribute::name(k),
            Err(e) => {
                out.skipped.push(ImportSkip { line, reason: e.to_string() });
                continue;
            }
        };
        if let Some(&i) = owner.get(&canonical) {
            kept_by.push(i);
            out.conflicts.push(KeyConflict {
                line,
                attribute: canonical,
                kept_entity: String::new(),
                dropped_name: record.name,
                entity_dropped: true,
            });
            continue;
        }
        let mut attrs = vec![canonical];
        attrs.extend(record.aliases.iter().filter_map(|a| normalize_name(a).ok()).map(IdentityAttribute::name));
        attrs.extend(
            record.url.iter().chain(&record.urls).filter_map(|u| normalize_url(u).ok()).map(IdentityAttribute::url),
        );
        let idx = pending.len();
        let mut names = BTreeSet::new();
        let mut urls = BTreeSet::new();
        for attr in attrs {
            match owner.get(&attr) {
                Some(&i) if i != idx => {
                    kept_by.push(i);
                    out.conflicts.push(KeyConflict {
                        line,
                        attribute: attr,
                        kept_entity: String::new(),
                        dropped_name: record.name.clone(),
                        entity_dropped: false,
                    });
                }
                _ => {
                    owner.insert(attr.clone(), idx);
                    match attr.kind {
                        crate::model::AttributeKind::Name => names.insert(attr.key),
                        crate::model::AttributeKind::Url => urls.insert(attr.key),
                    };
                }
            }
        }
        pending.push((record.name.trim().to_string(), names, urls));
    }
    out.entities = pending
        .into_iter()
        .map(|(name, names, urls)| DatasetEntity::new(name, names, urls, EntityOrigin::Imported))
        .collect();
    for (c, i) in out.conflicts.iter_mut().zip(kept_by) {
        c.kept_entity = out.entities[i].entity_id.clone();
    }
    out.skipped.sort_by_key(|s| s.line);
    Ok(out)
}

/// Paper metadata with `parse_ok` taken from the extraction runs.
pub fn paper_metas(papers: &[Paper], runs: &[ExtractionRun]) -> Vec<PaperMeta> {
    let ok: BTreeMap<&str, bool> = runs.iter().map(|r| (r.paper_id.as_str(), r.parse_ok)).collect();
    papers
        .iter()
        .map(|p| PaperMeta { parse_ok: ok.get(p.paper_id.as_str()).copied(), ..PaperMeta::from(p) })
        .collect()
}

/// Assemble the network: one edge per matched description.
pub fn build_network(
    papers: &[PaperMeta],
    descriptions: &[DatasetDescription],
    matches: &[Match],
    entities: &[DatasetEntity],
) -> Result<PaperDatasetNetwork, BuildError> {
    let mut net = PaperDatasetNetwork::new();
    papers.iter().cloned().for_each(|p| net.add_paper(p));
    entities.iter().cloned().for_each(|e| net.add_entity(e));
    for d in descriptions {
        net.add_description(d.clone())?;
    }
    for m in matches {
        let dangling = |kind, id: &str| BuildError::Dangling {
            description_id: m.description_id.clone(),
            kind,
            id: id.to_string(),
        };
        let paper_id = net
            .descriptions()
            .get(&m.description_id)
            .map(|d| d.paper_id.clone())
            .ok_or_else(|| dangling("description", &m.description_id))?;
        if net.entity(&m.entity_id).is_none() {
            return Err(dangling("entity", &m.entity_id));
        }
        net.add_edge(Edge { paper_id, entity_id: m.entity_id.clone(), description_id: m.description_id.clone() })?;
    }
    Ok(net)
}

pub fn save_network(path: &Path, network: &PaperDatasetNetwork) -> Result<(), StoreError> {
    Ok(io::write_json(path, network)?)
}

pub fn load_network(path: &Path) -> Result<PaperDatasetNetwork, StoreError> {
    Ok(io::read_json(path)?)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub papers_attempted: usize,
    pub papers_extracted: usize,
    pub descriptions_extracted: usize,
    /// Imported entities with at least one matched description.
    pub entities_covered: usize,
    pub descriptions_matched_existing: usize,
    pub new_entities: usize,
    pub descriptions_matched_new: usize,
    pub avg_descriptions_per_paper: f64,
    pub success_rate: f64,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Corpus statistics. With `runs` empty, per-paper success comes from the
/// network's paper metadata (unknown counts as extracted).
pub fn compute_stats(network: &PaperDatasetNetwork, runs: &[ExtractionRun]) -> NetworkStats {
    let (attempted, extracted) = if runs.is_empty() {
        let papers = network.papers().values();
        (network.papers().len(), papers.filter(|p| p.parse_ok != Some(false)).count())
    } else {
        let ids: BTreeMap<&str, bool> = runs.iter().map(|r| (r.paper_id.as_str(), r.parse_ok)).collect();
        (ids.len(), ids.values().filter(|ok| **ok).count())
    };
    let descriptions = network.descriptions().len();
    let origin = |e: &Edge| network.entity(&e.entity_id).map(|x| x.origin);
    let existing = network.edges().iter().filter(|e| origin(e) == Some(EntityOrigin::Imported)).count();
    let new = network.edges().iter().filter(|e| origin(e) == Some(EntityOrigin::Discovered)).count();
    let covered: BTreeSet<&str> = network
        .edges()
        .iter()
        .filter(|e| origin(e) == Some(EntityOrigin::Imported))
        .map(|e| e.entity_id.as_str())
        .collect();
    NetworkStats {
        papers_attempted: attempted,
        papers_extracted: extracted,
        descriptions_extracted: descriptions,
        entities_covered: covered.len(),
        descriptions_matched_existing: existing,
        new_entities: network.entities().values().filter(|e| e.origin == EntityOrigin::Discovered).count(),
        descriptions_matched_new: new,
        avg_descriptions_per_paper: ratio(descriptions, extracted),
        success_rate: ratio(extracted, attempted),
    }
}
