use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DatasetDescription, DatasetEntity, Paper};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("unknown {kind} id {id:?}")]
    Missing { kind: &'static str, id: String },
    #[error("description {description_id:?} belongs to paper {owner:?}, not {paper_id:?}")]
    WrongPaper {
        description_id: String,
        paper_id: String,
        owner: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperMeta {
    pub paper_id: String,
    pub title: String,
    /// Whether the paper's extraction output parsed; `None` when unknown.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse_ok: Option<bool>,
}

impl From<&Paper> for PaperMeta {
    fn from(p: &Paper) -> Self {
        Self { paper_id: p.paper_id.clone(), title: p.title.clone(), parse_ok: None }
    }
}

/// A usage record: `paper_id` uses `entity_id`, evidenced by `description_id`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub paper_id: String,
    pub entity_id: String,
    pub description_id: String,
}

/// Bipartite paper–dataset graph. Every mutation checks that edges only
/// reference existing nodes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "NetworkDocument", into = "NetworkDocument")]
pub struct PaperDatasetNetwork {
    papers: BTreeMap<String, PaperMeta>,
    entities: BTreeMap<String, DatasetEntity>,
    descriptions: BTreeMap<String, DatasetDescription>,
    edges: BTreeSet<Edge>,
}

impl PaperDatasetNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_paper(&mut self, paper: PaperMeta) {
        self.papers.insert(paper.paper_id.clone(), paper);
    }

    pub fn add_entity(&mut self, entity: DatasetEntity) {
        self.entities.insert(entity.entity_id.clone(), entity);
    }

    pub fn add_description(&mut self, description: DatasetDescription) -> Result<(), NetworkError> {
        if !self.papers.contains_key(&description.paper_id) {
            return Err(NetworkError::Missing { kind: "paper", id: description.paper_id });
        }
        self.descriptions.insert(description.description_id.clone(), description);
        Ok(())
    }

    pub fn add_edge(&mut self, edge: Edge) -> Result<bool, NetworkError> {
        if !self.papers.contains_key(&edge.paper_id) {
            return Err(NetworkError::Missing { kind: "paper", id: edge.paper_id });
        }
        if !self.entities.contains_key(&edge.entity_id) {
            return Err(NetworkError::Missing { kind: "entity", id: edge.entity_id });
        }
        let owner = match self.descriptions.get(&edge.description_id) {
            Some(d) => &d.paper_id,
            None => return Err(NetworkError::Missing { kind: "description", id: edge.description_id }),
        };
        if *owner != edge.paper_id {
            return Err(NetworkError::WrongPaper {
                owner: owner.clone(),
                description_id: edge.description_id,
                paper_id: edge.paper_id,
            });
        }
        Ok(self.edges.insert(edge))
    }

    pub fn papers(&self) -> &BTreeMap<String, PaperMeta> {
        &self.papers
    }

    pub fn entities(&self) -> &BTreeMap<String, DatasetEntity> {
        &self.entities
    }

    pub fn descriptions(&self) -> &BTreeMap<String, DatasetDescription> {
        &self.descriptions
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn paper(&self, id: &str) -> Option<&PaperMeta> {
        self.papers.get(id)
    }

    pub fn entity(&self, id: &str) -> Option<&DatasetEntity> {
        self.entities.get(id)
    }

    /// Distinct entities used by a paper, sorted by id.
    pub fn entities_of_paper(&self, paper_id: &str) -> Vec<&DatasetEntity> {
        let ids: BTreeSet<&str> = self
            .edges
            .iter()
            .filter(|e| e.paper_id == paper_id)
            .map(|e| e.entity_id.as_str())
            .collect();
        ids.into_iter().filter_map(|id| self.entities.get(id)).collect()
    }

    /// Distinct papers using an entity, sorted by id.
    pub fn papers_of_entity(&self, entity_id: &str) -> Vec<&PaperMeta> {
        let ids: BTreeSet<&str> = self
            .edges
            .iter()
            .filter(|e| e.entity_id == entity_id)
            .map(|e| e.paper_id.as_str())
            .collect();
        ids.into_iter().filter_map(|id| self.papers.get(id)).collect()
    }

    /// Entity a description was resolved to, if any.
    pub fn entity_of_description(&self, description_id: &str) -> Option<&str> {
        self.edges
            .iter()
            .find(|e| e.description_id == description_id)
            .map(|e| e.entity_id.as_str())
    }

    /// Distinct (paper, entity) pairs.
    pub fn usage_pairs(&self) -> BTreeSet<(&str, &str)> {
        self.edges
            .iter()
            .map(|e| (e.paper_id.as_str(), e.entity_id.as_str()))
            .collect()
    }
}

/// On-disk snapshot: four arrays, each sorted by id.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NetworkDocument {
    pub papers: Vec<PaperMeta>,
    pub entities: Vec<DatasetEntity>,
    pub descriptions: Vec<DatasetDescription>,
    pub edges: Vec<Edge>,
}

impl From<PaperDatasetNetwork> for NetworkDocument {
    fn from(n: PaperDatasetNetwork) -> Self {
        Self {
            papers: n.papers.into_values().collect(),
            entities: n.entities.into_values().collect(),
            descriptions: n.descriptions.into_values().collect(),
            edges: n.edges.into_iter().collect(),
        }
    }
}

impl TryFrom<NetworkDocument> for PaperDatasetNetwork {
    type Error = NetworkError;

    fn try_from(doc: NetworkDocument) -> Result<Self, Self::Error> {
        let mut n = PaperDatasetNetwork::new();
        doc.papers.into_iter().for_each(|p| n.add_paper(p));
        doc.entities.into_iter().for_each(|e| n.add_entity(e));
        for d in doc.descriptions {
            n.add_description(d)?;
        }
        for e in doc.edges {
            n.add_edge(e)?;
        }
        Ok(n)
    }
}

impl std::fmt::Display for NetworkDocument {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} papers, {} entities, {} descriptions, {} edges",
            self.papers.len(),
            self.entities.len(),
            self.descriptions.len(),
            self.edges.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EntityOrigin;

    fn entity(name: &str) -> DatasetEntity {
        DatasetEntity::new(name, [name.to_lowercase()].into(), BTreeSet::new(), EntityOrigin::Imported)
    }

    fn meta(id: &str) -> PaperMeta {
        PaperMeta { paper_id: id.into(), title: format!("Paper {id}"), parse_ok: None }
    }

    #[test]
    fn edges_must_reference_existing_nodes() {
        let mut n = PaperDatasetNetwork::new();
        n.add_paper(meta("p1"));
        n.add_paper(meta("p2"));
        let e = entity("GLUE");
        let eid = e.entity_id.clone();
        n.add_entity(e);
        n.add_description(DatasetDescription::new("p1#0", "p1")).unwrap();

        assert!(matches!(
            n.add_description(DatasetDescription::new("p9#0", "p9")),
            Err(NetworkError::Missing { kind: "paper", .. })
        ));
        let bad_entity = Edge { paper_id: "p1".into(), entity_id: "ds-x".into(), description_id: "p1#0".into() };
        assert!(matches!(n.add_edge(bad_entity), Err(NetworkError::Missing { kind: "entity", .. })));
        let wrong = Edge { paper_id: "p2".into(), entity_id: eid.clone(), description_id: "p1#0".into() };
        assert!(matches!(n.add_edge(wrong), Err(NetworkError::WrongPaper { .. })));
        let ok = Edge { paper_id: "p1".into(), entity_id: eid, description_id: "p1#0".into() };
        assert!(n.add_edge(ok.clone()).unwrap());
        assert!(!n.add_edge(ok).unwrap());
        assert_eq!(n.edges().len(), 1);
    }

    #[test]
    fn snapshot_rejects_dangling_edges() {
        let doc = r#"{"papers":[],"entities":[],"descriptions":[],
            "edges":[{"paper_id":"p","entity_id":"e","description_id":"d"}]}"#;
        assert!(serde_json::from_str::<PaperDatasetNetwork>(doc).is_err());
    }
}
