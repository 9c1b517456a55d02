use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{eval_er, eval_extraction, regex_baseline, AliasTable, ErMetrics, EvalError, ExtractionMetrics, GoldEr, GoldExtraction};
use crate::model::{DatasetDescription, DatasetEntity, MatchMethod, Paper};
use crate::par::Execution;
use crate::resolution::{graph_completion_inference, graph_inference_baseline, name_matching_baseline, ResolutionConfig, ResolutionError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Resolution(#[from] ResolutionError),
}

#[derive(Debug, Clone, Default)]
pub struct BenchInputs {
    pub papers: Vec<Paper>,
    pub gold_extraction: Vec<GoldExtraction>,
    pub aliases: AliasTable,
    /// Method label -> paper id -> predicted dataset names.
    pub extraction_predictions: BTreeMap<String, BTreeMap<String, BTreeSet<String>>>,
    /// Names the regex baseline searches for; the row is skipped when empty.
    pub known_names: Vec<String>,
    pub er_descriptions: Vec<DatasetDescription>,
    pub er_entities: Vec<DatasetEntity>,
    pub er_gold: Vec<GoldEr>,
    pub resolution: ResolutionConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionRow {
    pub method: String,
    pub metrics: ExtractionMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErRow {
    pub method: String,
    pub metrics: ErMetrics,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub extraction: Vec<ExtractionRow>,
    pub entity_resolution: Vec<ErRow>,
}

impl BenchReport {
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<32} {:>8} {:>9} {:>8} {:>8}", "Extraction", "EMR", "Precision", "Recall", "F1");
        for r in &self.extraction {
            let m = &r.metrics;
            let _ = writeln!(
                s,
                "{:<32} {:>8.4} {:>9.4} {:>8.4} {:>8.4}",
                r.method, m.exact_match_ratio, m.prf.precision, m.prf.recall, m.prf.f1
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<32} {:>9} {:>8} {:>8}", "Entity resolution", "Precision", "Recall", "F1");
        for r in &self.entity_resolution {
            let p = &r.metrics.prf;
            let _ = writeln!(s, "{:<32} {:>9.4} {:>8.4} {:>8.4}", r.method, p.precision, p.recall, p.f1);
        }
        s
    }
}

/// Score every extraction method and the three resolution methods.
pub fn run_benchmark(inputs: &BenchInputs, exec: Execution) -> Result<BenchReport, BenchError> {
    let mut report = BenchReport::default();
    let gold_papers: BTreeSet<&str> = inputs.gold_extraction.iter().map(|g| g.paper_id.as_str()).collect();
    let complete = |preds: &BTreeMap<String, BTreeSet<String>>| {
        // a paper with no output predicts nothing
        let mut preds = preds.clone();
        for p in &gold_papers {
            preds.entry(p.to_string()).or_default();
        }
        preds
    };
    for (method, preds) in &inputs.extraction_predictions {
        let metrics = eval_extraction(&complete(preds), &inputs.gold_extraction, &inputs.aliases)?;
        report.extraction.push(ExtractionRow { method: method.clone(), metrics });
    }
    if !inputs.known_names.is_empty() {
        let preds = regex_baseline(&inputs.papers, &inputs.known_names, exec)?;
        let metrics = eval_extraction(&complete(&preds), &inputs.gold_extraction, &inputs.aliases)?;
        report.extraction.push(ExtractionRow { method: MatchMethod::RegexBaseline.label().into(), metrics });
    }

    let (ds, es, cfg) = (&inputs.er_descriptions, &inputs.er_entities, &inputs.resolution);
    let rows = [
        (MatchMethod::NameMatching, name_matching_baseline(ds, es)),
        (MatchMethod::GraphInference, graph_inference_baseline(ds, es, cfg, exec)?),
        (MatchMethod::GraphCompletionInference, graph_completion_inference(ds, es, cfg, exec)?.2),
    ];
    for (method, matches) in rows {
        let metrics = eval_er(&matches, &inputs.er_gold)?;
        report.entity_resolution.push(ErRow { method: method.label().into(), metrics });
    }
    Ok(report)
}
