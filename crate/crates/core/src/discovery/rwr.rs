use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::PaperDatasetNetwork;
use crate::par::{self, Execution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RwrError {
    #[error("unknown dataset {0:?}")]
    NotFound(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RwrParams {
    pub restart_prob: f64,
    /// Stop when the L∞ change of one iteration is at most this.
    pub tolerance: f64,
    pub max_iters: usize,
    pub top_k: usize,
}

impl Default for RwrParams {
    fn default() -> Self {
        Self { restart_prob: 0.15, tolerance: 1e-10, max_iters: 10_000, top_k: 5 }
    }
}

impl RwrParams {
    pub fn validate(&self) -> Result<(), RwrError> {
        let c = self.restart_prob;
        if !(c > 0.0 && c < 1.0) {
            return Err(RwrError::InvalidParams(format!("restart_prob must be in (0, 1), got {c}")));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(RwrError::InvalidParams(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_iters == 0 {
            return Err(RwrError::InvalidParams("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum NodeRef {
    Paper(String),
    Dataset(String),
}

/// Stationary scores over every node: papers first, then datasets, each
/// in id order.
#[derive(Debug, Clone, PartialEq)]
pub struct RwrResult {
    pub nodes: Vec<NodeRef>,
    pub scores: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Similar {
    pub entity_id: String,
    pub canonical_name: String,
    pub score: f64,
}

struct Walk {
    nodes: Vec<NodeRef>,
    neighbours: Vec<Vec<usize>>,
    seed: usize,
}

fn walk_graph(network: &PaperDatasetNetwork, seed: &str) -> Result<Walk, RwrError> {
    let mut index = BTreeMap::new();
    let mut nodes = Vec::new();
    for id in network.papers().keys() {
        index.insert(NodeRef::Paper(id.clone()), nodes.len());
        nodes.push(NodeRef::Paper(id.clone()));
    }
    for id in network.entities().keys() {
        index.insert(NodeRef::Dataset(id.clone()), nodes.len());
        nodes.push(NodeRef::Dataset(id.clone()));
    }
    let seed = *index.get(&NodeRef::Dataset(seed.to_string())).ok_or_else(|| RwrError::NotFound(seed.to_string()))?;
    let mut neighbours = vec![Vec::new(); nodes.len()];
    // repeated descriptions collapse into one undirected edge
    let pairs: BTreeSet<(usize, usize)> = network
        .edges()
        .iter()
        .map(|e| (index[&NodeRef::Paper(e.paper_id.clone())], index[&NodeRef::Dataset(e.entity_id.clone())]))
        .collect();
    for (p, d) in pairs {
        neighbours[p].push(d);
        neighbours[d].push(p);
    }
    Ok(Walk { nodes, neighbours, seed })
}

/// Power iteration for p = c·e_seed + (1 − c)·Wᵀp with W the uniform
/// transition over undirected edges. Mass on nodes without neighbours
/// returns to the seed.
pub fn rwr_scores(
    network: &PaperDatasetNetwork,
    seed: &str,
    params: &RwrParams,
    exec: Execution,
) -> Result<RwrResult, RwrError> {
    params.validate()?;
    let Walk { nodes, neighbours, seed } = walk_graph(network, seed)?;
    let c = params.restart_prob;
    let n = nodes.len();
    let inv_deg: Vec<f64> = neighbours.iter().map(|nb| if nb.is_empty() { 0.0 } else { 1.0 / nb.len() as f64 }).collect();
    let mut p = vec![0.0; n];
    p[seed] = 1.0;
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iters {
        iterations += 1;
        let dangling: f64 = (0..n).filter(|&i| neighbours[i].is_empty()).map(|i| p[i]).sum();
        par::fill(exec, &mut next, |j| {
            let pulled: f64 = neighbours[j].iter().map(|&i| p[i] * inv_deg[i]).sum();
            let restart = if j == seed { c + (1.0 - c) * dangling } else { 0.0 };
            restart + (1.0 - c) * pulled
        });
        let delta = p.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut p, &mut next);
        if delta <= params.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        tracing::warn!(iterations, "random walk did not converge");
    }
    Ok(RwrResult { nodes, scores: p, iterations, converged })
}

/// Datasets ranked by walk score from `seed`, best first, ties by id.
/// The seed, papers, and unreachable datasets are never returned.
pub fn similar_datasets(
    network: &PaperDatasetNetwork,
    seed: &str,
    params: &RwrParams,
    exec: Execution,
) -> Result<Vec<Similar>, RwrError> {
    if network.entity(seed).is_none() {
        return Err(RwrError::NotFound(seed.to_string()));
    }
    if network.papers_of_entity(seed).is_empty() {
        return Ok(Vec::new());
    }
    let result = rwr_scores(network, seed, params, exec)?;
    let mut ranked: Vec<(String, f64)> = result
        .nodes
        .into_iter()
        .zip(result.scores)
        .filter_map(|(node, score)| match node {
            NodeRef::Dataset(id) if id != seed && score > 0.0 => Some((id, score)),
            _ => None,
        })
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(params.top_k);
    Ok(ranked
        .into_iter()
        .map(|(id, score)| Similar {
            canonical_name: network.entity(&id).map(|e| e.canonical_name.clone()).unwrap_or_default(),
            entity_id: id,
            score,
        })
        .collect())
}
