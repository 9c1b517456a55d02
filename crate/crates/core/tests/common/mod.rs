//! Shared test helpers: a random instance generator for resolution and a
//! closed-form oracle that does not touch the library's graph code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use pdnet_core::{DatasetDescription, DatasetEntity, EntityOrigin};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Key {
    Name(String),
    Url(String),
}

#[derive(Debug, Clone)]
pub struct Instance {
    /// Per entity: its keys. Keys are disjoint across entities.
    pub entities: Vec<Vec<Key>>,
    /// (description id, paper id, name key, url key).
    pub descriptions: Vec<(String, String, Option<String>, Option<String>)>,
    /// URL keys that count as warehouse front pages.
    pub generic: BTreeSet<String>,
}

pub const GENERIC_URL: &str = "kaggle.com";

/// Keys are produced already normalized, so raw value and key coincide
/// (apart from the scheme the generator adds to URLs).
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = StdRng::seed_from_u64(seed);
    let n_entities = rng.random_range(1..=15);
    let mut entities = Vec::new();
    let mut entity_names = Vec::new();
    let mut entity_urls = Vec::new();
    for e in 0..n_entities {
        let mut keys = Vec::new();
        for j in 0..rng.random_range(1..=2) {
            let k = format!("ent{e}n{j}");
            entity_names.push(k.clone());
            keys.push(Key::Name(k));
        }
        if rng.random_bool(0.6) {
            let k = format!("e{e}.org/data");
            entity_urls.push(k.clone());
            keys.push(Key::Url(k));
        }
        entities.push(keys);
    }
    let novel_names: Vec<String> = (0..5).map(|i| format!("novel{i}")).collect();
    let novel_urls: Vec<String> = (0..5).map(|i| format!("n{i}.org/data")).collect();

    let n_desc = rng.random_range(1..=40);
    let mut descriptions = Vec::new();
    for i in 0..n_desc {
        let name = match rng.random_range(0..100) {
            0..15 => None,
            15..65 => Some(entity_names[rng.random_range(0..entity_names.len())].clone()),
            _ => Some(novel_names[rng.random_range(0..novel_names.len())].clone()),
        };
        let url = match rng.random_range(0..100) {
            0..40 => None,
            40..60 if !entity_urls.is_empty() => Some(entity_urls[rng.random_range(0..entity_urls.len())].clone()),
            60..66 => Some(GENERIC_URL.to_string()),
            _ => Some(novel_urls[rng.random_range(0..novel_urls.len())].clone()),
        };
        descriptions.push((format!("d{i:02}"), format!("p{}", rng.random_range(0..12)), name, url));
    }
    Instance { entities, descriptions, generic: BTreeSet::from([GENERIC_URL.to_string()]) }
}

impl Instance {
    pub fn library_entities(&self) -> Vec<DatasetEntity> {
        self.entities
            .iter()
            .map(|keys| {
                let names: BTreeSet<String> = keys
                    .iter()
                    .filter_map(|k| if let Key::Name(n) = k { Some(n.clone()) } else { None })
                    .collect();
                let urls: BTreeSet<String> = keys
                    .iter()
                    .filter_map(|k| if let Key::Url(u) = k { Some(u.clone()) } else { None })
                    .collect();
                let canonical = names.iter().next().cloned().unwrap_or_default();
                DatasetEntity::new(canonical, names, urls, EntityOrigin::Imported)
            })
            .collect()
    }

    pub fn library_descriptions(&self) -> Vec<DatasetDescription> {
        self.descriptions
            .iter()
            .map(|(id, paper, name, url)| {
                let mut d = DatasetDescription::new(id.clone(), paper.clone());
                d.dataset_name = name.clone();
                d.dataset_url = url.as_ref().map(|u| format!("https://{u}"));
                assert_eq!(d.name_key(), *name);
                assert_eq!(d.url_key(), *url);
                d
            })
            .collect()
    }
}

/// Closed form of synchronous completion run to a fixpoint.
///
/// Labels spread from entity keys one hop per round along keys that share
/// a description. A key's first-arrival label set decides its fate: two or
/// more labels at once kill it and it never forwards anything; a single
/// label survives unless some neighbour holding a different single label
/// reaches it later. Returns description id -> entity index.
pub fn oracle(inst: &Instance) -> BTreeMap<String, usize> {
    let alive = |k: &Key| !matches!(k, Key::Url(u) if inst.generic.contains(u));
    let mut adj: BTreeMap<Key, BTreeSet<Key>> = BTreeMap::new();
    for (_, _, name, url) in &inst.descriptions {
        if let (Some(n), Some(u)) = (name, url) {
            let (n, u) = (Key::Name(n.clone()), Key::Url(u.clone()));
            if alive(&n) && alive(&u) {
                adj.entry(n.clone()).or_default().insert(u.clone());
                adj.entry(u).or_default().insert(n);
            }
        }
    }

    let mut first: BTreeMap<Key, BTreeSet<usize>> = BTreeMap::new();
    let mut frontier: Vec<Key> = Vec::new();
    for (e, keys) in inst.entities.iter().enumerate() {
        for k in keys.iter().filter(|k| alive(k)) {
            first.insert(k.clone(), BTreeSet::from([e]));
            frontier.push(k.clone());
        }
    }
    while !frontier.is_empty() {
        let mut arrivals: BTreeMap<Key, BTreeSet<usize>> = BTreeMap::new();
        for k in &frontier {
            let labels = &first[k];
            if labels.len() != 1 {
                continue;
            }
            for n in adj.get(k).into_iter().flatten() {
                if !first.contains_key(n) {
                    arrivals.entry(n.clone()).or_default().extend(labels);
                }
            }
        }
        frontier = arrivals.keys().cloned().collect();
        first.extend(arrivals);
    }

    let unique = |k: &Key| first.get(k).filter(|s| s.len() == 1).and_then(|s| s.iter().next().copied());
    let label_of = |k: &Key| -> Option<usize> {
        if !alive(k) {
            return None;
        }
        let mine = unique(k)?;
        let clash = adj.get(k).into_iter().flatten().any(|n| unique(n).is_some_and(|l| l != mine));
        (!clash).then_some(mine)
    };

    let mut out = BTreeMap::new();
    for (id, _, name, url) in &inst.descriptions {
        let hit = name
            .as_ref()
            .and_then(|n| label_of(&Key::Name(n.clone())))
            .or_else(|| url.as_ref().and_then(|u| label_of(&Key::Url(u.clone()))));
        if let Some(e) = hit {
            out.insert(id.clone(), e);
        }
    }
    out
}
