use std::collections::{BTreeMap, BTreeSet};

use super::{ResolutionConfig, ResolutionGraph};
use crate::model::{DatasetDescription, DatasetEntity, EntityOrigin, IdentityAttribute, Match, MatchMethod};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Discovery {
    /// Sorted by entity id.
    pub entities: Vec<DatasetEntity>,
    /// Sorted by description id.
    pub matches: Vec<Match>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Create entities from unmatched descriptions that carry both a name and a
/// surviving URL. Candidates sharing an alive key form one cluster; the
/// number of distinct papers in a cluster decides whether it becomes a
/// certain entity, an uncertain one, or nothing.
pub fn discover_new_entities(
    graph: &ResolutionGraph,
    unmatched: &[DatasetDescription],
    config: &ResolutionConfig,
) -> Discovery {
    struct Candidate<'a> {
        d: &'a DatasetDescription,
        name: String,
        url: IdentityAttribute,
        keys: Vec<IdentityAttribute>,
    }
    let mut sorted: Vec<&DatasetDescription> = unmatched.iter().collect();
    sorted.sort_by(|a, b| a.description_id.cmp(&b.description_id));
    sorted.dedup_by(|a, b| a.description_id == b.description_id);
    let candidates: Vec<Candidate> = sorted
        .into_iter()
        .filter_map(|d| {
            let name = IdentityAttribute::name(d.name_key()?);
            let url = IdentityAttribute::url(d.url_key()?);
            if !graph.is_alive(&url) {
                return None;
            }
            let mut keys = vec![url.clone()];
            if graph.is_alive(&name) {
                keys.push(name.clone());
            }
            Some(Candidate { d, name: name.key, url, keys })
        })
        .collect();

    let mut uf = UnionFind((0..candidates.len()).collect());
    let mut owner: BTreeMap<&IdentityAttribute, usize> = BTreeMap::new();
    for (i, c) in candidates.iter().enumerate() {
        for k in &c.keys {
            match owner.get(k) {
                Some(&j) => uf.union(i, j),
                None => {
                    owner.insert(k, i);
                }
            }
        }
    }
    let mut clusters: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..candidates.len() {
        let root = uf.find(i);
        clusters.entry(root).or_default().push(i);
    }

    let mut out = Discovery::default();
    for members in clusters.values() {
        let papers: BTreeSet<&str> = members.iter().map(|&i| candidates[i].d.paper_id.as_str()).collect();
        let certain = papers.len() >= config.lambda;
        if !certain && papers.len() < 2 {
            continue;
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for &i in members {
            if let Some(raw) = candidates[i].d.dataset_name.as_deref() {
                *counts.entry(raw.trim()).or_default() += 1;
            }
        }
        // BTreeMap iteration is lexicographic, so the first maximum wins ties
        let canonical = counts
            .iter()
            .fold(None::<(&str, usize)>, |best, (&n, &c)| match best {
                Some((_, bc)) if bc >= c => best,
                _ => Some((n, c)),
            })
            .map(|(n, _)| n)
            .unwrap_or_default();
        let name_keys: BTreeSet<String> = members.iter().map(|&i| candidates[i].name.clone()).collect();
        let url_keys: BTreeSet<String> = members.iter().map(|&i| candidates[i].url.key.clone()).collect();
        let mut entity = DatasetEntity::new(canonical, name_keys, url_keys, EntityOrigin::Discovered);
        entity.uncertain = !certain;
        entity.mention_count = papers.len() as u64;
        for &i in members {
            out.matches.push(Match {
                description_id: candidates[i].d.description_id.clone(),
                entity_id: entity.entity_id.clone(),
                via: candidates[i].url.clone(),
                method: MatchMethod::GraphCompletionInference,
            });
        }
        out.entities.push(entity);
    }
    out.entities.sort_by(|a, b| a.entity_id.cmp(&b.entity_id));
    out.matches.sort_by(|a, b| a.description_id.cmp(&b.description_id));
    out
}
