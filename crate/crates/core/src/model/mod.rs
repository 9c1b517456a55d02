//! Domain types shared by every stage of the pipeline. No I/O here.

mod network;
mod normalize;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use network::{Edge, NetworkError, PaperDatasetNetwork, PaperMeta};
pub use normalize::{
    default_warehouse_hosts, is_generic_url, normalize_name, normalize_url, parse_host_list,
    url_host, url_path_depth, NormalizeError, DEFAULT_WAREHOUSE_HOSTS,
};

/// First 8 bytes of SHA-256 as 16 lowercase hex characters.
pub fn stable_hash64(data: &str) -> String {
    let digest = Sha256::digest(data.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub heading: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paper {
    pub paper_id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub sections: Vec<Section>,
    #[serde(default)]
    pub source_path: String,
}

impl Paper {
    /// Title, abstract and section bodies joined by blank lines.
    pub fn full_text(&self) -> String {
        let mut parts = vec![self.title.as_str(), self.abstract_text.as_str()];
        parts.extend(self.sections.iter().map(|s| s.body.as_str()));
        parts.join("\n\n")
    }
}

/// One dataset mention extracted from a paper. Values are the raw strings
/// the extractor produced.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetDescription {
    pub description_id: String,
    pub paper_id: String,
    #[serde(default)]
    pub dataset_name: Option<String>,
    #[serde(default)]
    pub paper_title: Option<String>,
    #[serde(default)]
    pub dataset_summary: Option<String>,
    #[serde(default)]
    pub data_type: Option<String>,
    #[serde(default)]
    pub task: Option<String>,
    #[serde(default)]
    pub location: Option<String>,
    #[serde(default)]
    pub time: Option<String>,
    #[serde(default)]
    pub scale: Option<String>,
    #[serde(default)]
    pub dataset_provider: Option<String>,
    #[serde(default)]
    pub dataset_url: Option<String>,
    #[serde(default)]
    pub publicly_available: Option<String>,
    #[serde(default)]
    pub other_info: Option<String>,
}

impl DatasetDescription {
    /// Record field names, in declaration order.
    pub const FIELDS: [&'static str; 14] = [
        "description_id",
        "paper_id",
        "dataset_name",
        "paper_title",
        "dataset_summary",
        "data_type",
        "task",
        "location",
        "time",
        "scale",
        "dataset_provider",
        "dataset_url",
        "publicly_available",
        "other_info",
    ];

    pub fn new(description_id: impl Into<String>, paper_id: impl Into<String>) -> Self {
        Self {
            description_id: description_id.into(),
            paper_id: paper_id.into(),
            ..Self::default()
        }
    }

    pub fn field(&self, name: &str) -> Option<&str> {
        match name {
            "description_id" => Some(&self.description_id),
            "paper_id" => Some(&self.paper_id),
            _ => self.optional_field(name)?.as_deref(),
        }
    }

    fn optional_field(&self, name: &str) -> Option<&Option<String>> {
        Some(match name {
            "dataset_name" => &self.dataset_name,
            "paper_title" => &self.paper_title,
            "dataset_summary" => &self.dataset_summary,
            "data_type" => &self.data_type,
            "task" => &self.task,
            "location" => &self.location,
            "time" => &self.time,
            "scale" => &self.scale,
            "dataset_provider" => &self.dataset_provider,
            "dataset_url" => &self.dataset_url,
            "publicly_available" => &self.publicly_available,
            "other_info" => &self.other_info,
            _ => return None,
        })
    }

    /// Mutable access to an optional field; `None` for unknown names and
    /// for the two id fields.
    pub fn optional_field_mut(&mut self, name: &str) -> Option<&mut Option<String>> {
        Some(match name {
            "dataset_name" => &mut self.dataset_name,
            "paper_title" => &mut self.paper_title,
            "dataset_summary" => &mut self.dataset_summary,
            "data_type" => &mut self.data_type,
            "task" => &mut self.task,
            "location" => &mut self.location,
            "time" => &mut self.time,
            "scale" => &mut self.scale,
            "dataset_provider" => &mut self.dataset_provider,
            "dataset_url" => &mut self.dataset_url,
            "publicly_available" => &mut self.publicly_available,
            "other_info" => &mut self.other_info,
            _ => return None,
        })
    }

    pub fn name_key(&self) -> Option<String> {
        self.dataset_name.as_deref().and_then(|n| normalize_name(n).ok())
    }

    pub fn url_key(&self) -> Option<String> {
        self.dataset_url.as_deref().and_then(|u| normalize_url(u).ok())
    }

    /// Identity attributes present on this description, name first.
    pub fn identity(&self) -> Vec<IdentityAttribute> {
        let mut out = Vec::with_capacity(2);
        if let Some(k) = self.name_key() {
            out.push(IdentityAttribute::name(k));
        }
        if let Some(k) = self.url_key() {
            out.push(IdentityAttribute::url(k));
        }
        out
    }

    /// A description with neither a usable name nor URL can never be matched.
    pub fn is_resolvable(&self) -> bool {
        self.name_key().is_some() || self.url_key().is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeKind {
    Name,
    Url,
}

impl AttributeKind {
    pub const ALL: [AttributeKind; 2] = [AttributeKind::Name, AttributeKind::Url];
}

impl fmt::Display for AttributeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttributeKind::Name => "name",
            AttributeKind::Url => "url",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IdentityAttribute {
    pub kind: AttributeKind,
    pub key: String,
}

impl IdentityAttribute {
    pub fn name(key: impl Into<String>) -> Self {
        Self { kind: AttributeKind::Name, key: key.into() }
    }

    pub fn url(key: impl Into<String>) -> Self {
        Self { kind: AttributeKind::Url, key: key.into() }
    }
}

impl fmt::Display for IdentityAttribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.key)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityOrigin {
    Imported,
    Discovered,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetEntity {
    pub entity_id: String,
    pub canonical_name: String,
    pub name_keys: BTreeSet<String>,
    pub url_keys: BTreeSet<String>,
    pub origin: EntityOrigin,
    #[serde(default)]
    pub uncertain: bool,
    #[serde(default)]
    pub mention_count: u64,
}

impl DatasetEntity {
    /// Build an entity whose id is derived from its identity keys.
    pub fn new(
        canonical_name: impl Into<String>,
        name_keys: BTreeSet<String>,
        url_keys: BTreeSet<String>,
        origin: EntityOrigin,
    ) -> Self {
        let entity_id = entity_id_for(&name_keys, &url_keys);
        Self {
            entity_id,
            canonical_name: canonical_name.into(),
            name_keys,
            url_keys,
            origin,
            uncertain: false,
            mention_count: 0,
        }
    }

    pub fn canonical_key(&self) -> Option<String> {
        normalize_name(&self.canonical_name).ok()
    }

    /// All identity attributes, names first, each group sorted.
    pub fn identity(&self) -> impl Iterator<Item = IdentityAttribute> + '_ {
        self.name_keys
            .iter()
            .map(|k| IdentityAttribute::name(k.clone()))
            .chain(self.url_keys.iter().map(|k| IdentityAttribute::url(k.clone())))
    }
}

/// Content-addressed entity id: hash of the sorted identity keys.
pub fn entity_id_for(name_keys: &BTreeSet<String>, url_keys: &BTreeSet<String>) -> String {
    let mut material = String::new();
    for k in name_keys {
        material.push_str("name:");
        material.push_str(k);
        material.push('\n');
    }
    for k in url_keys {
        material.push_str("url:");
        material.push_str(k);
        material.push('\n');
    }
    format!("ds-{}", stable_hash64(&material))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMethod {
    NameMatching,
    GraphInference,
    GraphCompletionInference,
    RegexBaseline,
}

impl MatchMethod {
    pub fn label(self) -> &'static str {
        match self {
            MatchMethod::NameMatching => "Name Matching",
            MatchMethod::GraphInference => "Graph Inference",
            MatchMethod::GraphCompletionInference => "Graph Completion & Inference",
            MatchMethod::RegexBaseline => "Regex Baseline",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Match {
    pub description_id: String,
    pub entity_id: String,
    pub via: IdentityAttribute,
    pub method: MatchMethod,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn description_identity_order() {
        let mut d = DatasetDescription::new("p1#0", "p1");
        d.dataset_name = Some("MS COCO".into());
        d.dataset_url = Some("https://cocodataset.org/".into());
        assert_eq!(
            d.identity(),
            vec![IdentityAttribute::name("ms coco"), IdentityAttribute::url("cocodataset.org")]
        );
        // raw values untouched
        assert_eq!(d.dataset_name.as_deref(), Some("MS COCO"));
    }

    #[test]
    fn unresolvable_description() {
        let mut d = DatasetDescription::new("p1#0", "p1");
        d.dataset_url = Some("N/A".into());
        d.task = Some("classification".into());
        assert!(!d.is_resolvable());
        assert!(d.identity().is_empty());
    }

    #[test]
    fn field_lookup_covers_all_names() {
        let d = DatasetDescription::new("x", "p");
        for f in DatasetDescription::FIELDS {
            if f.ends_with("_id") {
                assert!(d.field(f).is_some());
            } else {
                assert!(d.clone().optional_field_mut(f).is_some(), "{f}");
            }
        }
        assert!(d.field("nope").is_none());
    }

    #[test]
    fn entity_ids_are_content_addressed() {
        let names: BTreeSet<String> = ["ms coco".to_string(), "coco".to_string()].into();
        let urls: BTreeSet<String> = ["cocodataset.org".to_string()].into();
        let a = DatasetEntity::new("MS COCO", names.clone(), urls.clone(), EntityOrigin::Imported);
        let b = DatasetEntity::new("COCO", names, urls, EntityOrigin::Imported);
        assert_eq!(a.entity_id, b.entity_id);
        assert!(a.entity_id.starts_with("ds-"));
        assert_eq!(a.entity_id.len(), 3 + 16);
    }

    #[test]
    fn paper_json_uses_abstract_key() {
        let p: Paper = serde_json::from_str(
            r#"{"paper_id":"1","title":"T","abstract":"A","sections":[{"heading":"H","body":"B"}]}"#,
        )
        .unwrap();
        assert_eq!(p.abstract_text, "A");
        assert_eq!(p.full_text(), "T\n\nA\n\nB");
    }
}
