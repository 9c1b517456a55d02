//! Extraction and entity-resolution metrics, the regex extraction
//! baseline, and the benchmark report.

mod bench;

use std::collections::{BTreeMap, BTreeSet};

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bench::{run_benchmark, BenchError, BenchInputs, BenchReport, ErRow, ExtractionRow};

use crate::model::{normalize_name, DatasetEntity, Match, Paper};
use crate::par::{self, Execution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no prediction entry for gold paper {0:?}")]
    MissingPrediction(String),
    #[error("description {0:?} has more than one predicted entity")]
    DuplicatePrediction(String),
    #[error("the regex baseline needs at least one known name")]
    NoKnownNames,
    #[error("invalid pattern for {name:?}: {message}")]
    Pattern { name: String, message: String },
}

/// Gold datasets used by one paper.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldExtraction {
    pub paper_id: String,
    pub datasets: Vec<String>,
}

/// Gold entity for one description; `None` means no entity exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldEr {
    pub description_id: String,
    pub entity_id: Option<String>,
}

/// Maps normalized names to a canonical normalized name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "BTreeMap<String, Vec<String>>")]
pub struct AliasTable {
    map: BTreeMap<String, String>,
}

impl From<BTreeMap<String, Vec<String>>> for AliasTable {
    /// `{"canonical": ["alias", ...]}`.
    fn from(groups: BTreeMap<String, Vec<String>>) -> Self {
        let mut t = AliasTable::default();
        for (canonical, aliases) in groups {
            for alias in aliases {
                t.insert(&alias, &canonical);
            }
        }
        t
    }
}

impl AliasTable {
    pub fn insert(&mut self, alias: &str, canonical: &str) {
        if let (Ok(a), Ok(c)) = (normalize_name(alias), normalize_name(canonical)) {
            self.map.insert(a, c);
        }
    }

    /// Every entity name key maps to the entity's canonical key.
    pub fn from_entities(entities: &[DatasetEntity]) -> Self {
        let mut t = AliasTable::default();
        for e in entities {
            if let Some(c) = e.canonical_key() {
                for k in &e.name_keys {
                    t.map.entry(k.clone()).or_insert_with(|| c.clone());
                }
            }
        }
        t
    }

    pub fn canonicalize(&self, name: &str) -> Option<String> {
        let key = normalize_name(name).ok()?;
        Some(self.map.get(&key).cloned().unwrap_or(key))
    }

    fn canonical_set<'a>(&self, names: impl IntoIterator<Item = &'a String>) -> BTreeSet<String> {
        names.into_iter().filter_map(|n| self.canonicalize(n)).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        Self { precision, recall, f1 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtractionMetrics {
    pub papers: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub exact_match_ratio: f64,
    #[serde(flatten)]
    pub prf: Prf,
}

/// Exact match ratio and micro P/R/F1 over per-paper usage records.
/// Papers predicted but absent from gold are ignored.
pub fn eval_extraction(
    predictions: &BTreeMap<String, BTreeSet<String>>,
    gold: &[GoldExtraction],
    aliases: &AliasTable,
) -> Result<ExtractionMetrics, EvalError> {
    let (mut tp, mut fp, mut fn_, mut exact) = (0, 0, 0, 0);
    for g in gold {
        let pred = predictions.get(&g.paper_id).ok_or_else(|| EvalError::MissingPrediction(g.paper_id.clone()))?;
        let pred = aliases.canonical_set(pred);
        let truth = aliases.canonical_set(&g.datasets);
        tp += pred.intersection(&truth).count();
        fp += pred.difference(&truth).count();
        fn_ += truth.difference(&pred).count();
        exact += usize::from(pred == truth);
    }
    let papers = gold.len();
    Ok(ExtractionMetrics {
        papers,
        tp,
        fp,
        fn_,
        exact_match_ratio: if papers == 0 { 0.0 } else { exact as f64 / papers as f64 },
        prf: Prf::from_counts(tp, fp, fn_),
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ErMetrics {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// Predictions for descriptions outside the gold set.
    pub ignored: usize,
    #[serde(flatten)]
    pub prf: Prf,
}

pub fn eval_er(predicted: &[Match], gold: &[GoldEr]) -> Result<ErMetrics, EvalError> {
    let mut pred: BTreeMap<&str, &str> = BTreeMap::new();
    for m in predicted {
        if pred.insert(&m.description_id, &m.entity_id).is_some() {
            return Err(EvalError::DuplicatePrediction(m.description_id.clone()));
        }
    }
    let truth: BTreeMap<&str, Option<&str>> =
        gold.iter().map(|g| (g.description_id.as_str(), g.entity_id.as_deref())).collect();
    let (mut tp, mut fp, mut ignored) = (0, 0, 0);
    for (d, e) in &pred {
        match truth.get(d) {
            Some(Some(g)) if g == e => tp += 1,
            Some(_) => fp += 1,
            None => ignored += 1,
        }
    }
    let positives = truth.values().filter(|e| e.is_some()).count();
    Ok(ErMetrics { tp, fp, fn_: positives - tp, ignored, prf: Prf::from_counts(tp, fp, positives - tp) })
}

/// Case-insensitive pattern for `name` that also accepts a hyphen,
/// underscore or space between any two characters, bounded by non-word
/// characters.
pub fn name_pattern(name: &str) -> Result<Regex, EvalError> {
    let body: Vec<String> = name
        .chars()
        .filter(|c| !(c.is_whitespace() || *c == '-' || *c == '_'))
        .map(|c| regex::escape(&c.to_string()))
        .collect();
    if body.is_empty() {
        return Err(EvalError::Pattern { name: name.to_string(), message: "empty name".into() });
    }
    Regex::new(&format!(r"(?i)(?:^|\W){}(?:\W|$)", body.join(r"[-_\s]?")))
        .map_err(|e| EvalError::Pattern { name: name.to_string(), message: e.to_string() })
}

/// Report every known name mentioned anywhere in each paper's text.
pub fn regex_baseline(
    papers: &[Paper],
    known_names: &[String],
    exec: Execution,
) -> Result<BTreeMap<String, BTreeSet<String>>, EvalError> {
    if known_names.is_empty() {
        return Err(EvalError::NoKnownNames);
    }
    let patterns: Vec<(&String, Regex)> =
        known_names.iter().map(|n| Ok((n, name_pattern(n)?))).collect::<Result<_, EvalError>>()?;
    let hits = par::map(exec, papers, |p| {
        let text = p.full_text();
        let found: BTreeSet<String> =
            patterns.iter().filter(|(_, re)| re.is_match(&text)).map(|(n, _)| (*n).clone()).collect();
        (p.paper_id.clone(), found)
    });
    Ok(hits.into_iter().collect())
}
