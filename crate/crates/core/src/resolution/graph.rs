//! The D/E/I working graph: description nodes, entity nodes, and one
//! identity-attribute node per unique normalized name or URL.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{ResolutionConfig, ResolutionError};
use crate::model::{
    is_generic_url, AttributeKind, DatasetDescription, DatasetEntity, IdentityAttribute, Match,
    MatchMethod,
};
use crate::par::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalReason {
    Generic,
    Ambiguous,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RemovedINode {
    pub kind: AttributeKind,
    pub key: String,
    pub reason: RemovalReason,
    /// 0 for the generic-URL sweep before the first pass.
    pub pass: usize,
    /// Entities the node referred to when it was removed.
    pub entities: Vec<String>,
}

/// An identity key claimed by two imported entities; the first keeps it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportConflict {
    pub attribute: IdentityAttribute,
    pub kept_entity: String,
    pub dropped_entity: String,
}

#[derive(Debug, Clone)]
struct INode {
    attr: IdentityAttribute,
    alive: bool,
    refers: BTreeSet<String>,
    descriptions: BTreeSet<usize>,
}

#[derive(Debug, Clone)]
struct DNode {
    description_id: String,
    name: Option<usize>,
    url: Option<usize>,
}

impl DNode {
    fn slot(&self, kind: AttributeKind) -> Option<usize> {
        match kind {
            AttributeKind::Name => self.name,
            AttributeKind::Url => self.url,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionReport {
    /// Passes executed, including a final pass that changed nothing.
    pub passes: usize,
    pub edges_added: Vec<usize>,
    pub removed: Vec<usize>,
    /// Whether the last pass reached a fixpoint.
    pub converged: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ResolutionGraph {
    d_nodes: Vec<DNode>,
    e_nodes: BTreeSet<String>,
    i_nodes: Vec<INode>,
    index: BTreeMap<IdentityAttribute, usize>,
    removed: Vec<RemovedINode>,
}

impl ResolutionGraph {
    fn intern(&mut self, attr: IdentityAttribute) -> usize {
        if let Some(&id) = self.index.get(&attr) {
            return id;
        }
        let id = self.i_nodes.len();
        self.i_nodes.push(INode {
            attr: attr.clone(),
            alive: true,
            refers: BTreeSet::new(),
            descriptions: BTreeSet::new(),
        });
        self.index.insert(attr, id);
        id
    }

    /// Build the graph. Entities are linked in input order; a key already
    /// claimed by an earlier entity is reported and left with the first.
    pub fn create(descriptions: &[DatasetDescription], entities: &[DatasetEntity]) -> (Self, Vec<ImportConflict>) {
        let mut graph = ResolutionGraph::default();
        let mut conflicts = Vec::new();
        for entity in entities {
            graph.e_nodes.insert(entity.entity_id.clone());
            for attr in entity.identity() {
                let id = graph.intern(attr.clone());
                let node = &mut graph.i_nodes[id];
                match node.refers.iter().next() {
                    Some(owner) if *owner != entity.entity_id => conflicts.push(ImportConflict {
                        attribute: attr,
                        kept_entity: owner.clone(),
                        dropped_entity: entity.entity_id.clone(),
                    }),
                    _ => {
                        node.refers.insert(entity.entity_id.clone());
                    }
                }
            }
        }

        let mut sorted: Vec<&DatasetDescription> = descriptions.iter().collect();
        sorted.sort_by(|a, b| a.description_id.cmp(&b.description_id));
        sorted.dedup_by(|a, b| a.description_id == b.description_id);
        for d in sorted {
            let idx = graph.d_nodes.len();
            let mut node = DNode { description_id: d.description_id.clone(), name: None, url: None };
            for attr in d.identity() {
                let kind = attr.kind;
                let id = graph.intern(attr);
                graph.i_nodes[id].descriptions.insert(idx);
                match kind {
                    AttributeKind::Name => node.name = Some(id),
                    AttributeKind::Url => node.url = Some(id),
                }
            }
            graph.d_nodes.push(node);
        }
        (graph, conflicts)
    }

    fn remove(&mut self, id: usize, reason: RemovalReason, pass: usize) {
        let node = &mut self.i_nodes[id];
        node.alive = false;
        self.removed.push(RemovedINode {
            kind: node.attr.kind,
            key: node.attr.key.clone(),
            reason,
            pass,
            entities: std::mem::take(&mut node.refers).into_iter().collect(),
        });
    }

    /// Tombstone every URL I-node that is a warehouse front page.
    pub fn remove_generic_urls(&mut self, warehouse_hosts: &BTreeSet<String>) -> usize {
        let generic: Vec<usize> = self
            .i_nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.alive && n.attr.kind == AttributeKind::Url && is_generic_url(&n.attr.key, warehouse_hosts))
            .map(|(i, _)| i)
            .collect();
        for &id in &generic {
            self.remove(id, RemovalReason::Generic, 0);
        }
        generic.len()
    }

    fn alive_slot(&self, d: &DNode, kind: AttributeKind) -> Option<usize> {
        d.slot(kind).filter(|&id| self.i_nodes[id].alive)
    }

    /// Graph completion with refinement after every pass.
    ///
    /// Each pass reads the state at its start: when a description's
    /// attribute node refers to an entity, the description's other
    /// attribute node gains a refers_to edge to that entity. Afterwards every
    /// node that refers to more than one entity is removed with its edges.
    /// Removed nodes never come back.
    pub fn complete_and_refine(&mut self, config: &ResolutionConfig) -> CompletionReport {
        self.remove_generic_urls(&config.warehouse_hosts);
        let mut report = CompletionReport::default();
        for pass in 1..=config.iteration_limit {
            let mut additions: BTreeSet<(usize, String)> = BTreeSet::new();
            for d in &self.d_nodes {
                let (Some(name), Some(url)) =
                    (self.alive_slot(d, AttributeKind::Name), self.alive_slot(d, AttributeKind::Url))
                else {
                    continue;
                };
                for (from, to) in [(name, url), (url, name)] {
                    for e in &self.i_nodes[from].refers {
                        if !self.i_nodes[to].refers.contains(e) {
                            additions.insert((to, e.clone()));
                        }
                    }
                }
            }
            for (to, e) in &additions {
                self.i_nodes[*to].refers.insert(e.clone());
            }
            let ambiguous: Vec<usize> = self
                .i_nodes
                .iter()
                .enumerate()
                .filter(|(_, n)| n.alive && n.refers.len() > 1)
                .map(|(i, _)| i)
                .collect();
            for &id in &ambiguous {
                self.remove(id, RemovalReason::Ambiguous, pass);
            }
            report.passes = pass;
            report.edges_added.push(additions.len());
            report.removed.push(ambiguous.len());
            if additions.is_empty() && ambiguous.is_empty() {
                report.converged = true;
                break;
            }
        }
        debug_assert!(self.check_refinement().is_ok());
        report
    }

    /// Every surviving I-node refers to at most one entity.
    pub fn check_refinement(&self) -> Result<(), ResolutionError> {
        match self.i_nodes.iter().find(|n| n.alive && n.refers.len() > 1) {
            Some(n) => Err(ResolutionError::InvariantViolation {
                attribute: n.attr.clone(),
                entities: n.refers.iter().cloned().collect(),
            }),
            None => Ok(()),
        }
    }

    /// Match each description through its first attribute (name, then URL)
    /// whose node refers to an entity.
    pub fn infer_matches(&self, method: MatchMethod, exec: Execution) -> Result<Vec<Match>, ResolutionError> {
        let found = par::map(exec, &self.d_nodes, |d| -> Result<Option<Match>, ResolutionError> {
            for kind in AttributeKind::ALL {
                let Some(id) = self.alive_slot(d, kind) else { continue };
                let node = &self.i_nodes[id];
                let mut refers = node.refers.iter();
                let Some(entity) = refers.next() else { continue };
                if refers.next().is_some() {
                    return Err(ResolutionError::InvariantViolation {
                        attribute: node.attr.clone(),
                        entities: node.refers.iter().cloned().collect(),
                    });
                }
                return Ok(Some(Match {
                    description_id: d.description_id.clone(),
                    entity_id: entity.clone(),
                    via: node.attr.clone(),
                    method,
                }));
            }
            Ok(None)
        });
        found.into_iter().filter_map(Result::transpose).collect()
    }

    pub fn d_nodes(&self) -> impl Iterator<Item = &str> {
        self.d_nodes.iter().map(|d| d.description_id.as_str())
    }

    pub fn e_nodes(&self) -> &BTreeSet<String> {
        &self.e_nodes
    }

    /// All I-nodes ever created, with liveness.
    pub fn i_nodes(&self) -> impl Iterator<Item = (&IdentityAttribute, bool)> {
        self.i_nodes.iter().map(|n| (&n.attr, n.alive))
    }

    pub fn is_alive(&self, attr: &IdentityAttribute) -> bool {
        self.index.get(attr).is_some_and(|&id| self.i_nodes[id].alive)
    }

    /// Entities an alive I-node refers to.
    pub fn refers_to(&self, attr: &IdentityAttribute) -> Option<&BTreeSet<String>> {
        let &id = self.index.get(attr)?;
        let node = &self.i_nodes[id];
        node.alive.then_some(&node.refers)
    }

    /// has_α edges between descriptions and alive I-nodes.
    pub fn has_edges(&self) -> Vec<(&str, &IdentityAttribute)> {
        let mut out = Vec::new();
        for d in &self.d_nodes {
            for kind in AttributeKind::ALL {
                if let Some(id) = self.alive_slot(d, kind) {
                    out.push((d.description_id.as_str(), &self.i_nodes[id].attr));
                }
            }
        }
        out
    }

    /// refers_to edges of alive I-nodes.
    pub fn refers_edges(&self) -> Vec<(&IdentityAttribute, &str)> {
        self.i_nodes
            .iter()
            .filter(|n| n.alive)
            .flat_map(|n| n.refers.iter().map(move |e| (&n.attr, e.as_str())))
            .collect()
    }

    pub fn removed_i_nodes(&self) -> &[RemovedINode] {
        &self.removed
    }

    /// Descriptions linked to an I-node (alive or not).
    pub fn descriptions_of(&self, attr: &IdentityAttribute) -> Vec<&str> {
        self.index
            .get(attr)
            .map(|&id| {
                self.i_nodes[id]
                    .descriptions
                    .iter()
                    .map(|&d| self.d_nodes[d].description_id.as_str())
                    .collect()
            })
            .unwrap_or_default()
    }
}
