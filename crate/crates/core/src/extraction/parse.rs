//! Turn repaired model output into [`DatasetDescription`] records.

use serde_json::{Map, Value};
use thiserror::Error;

use super::repair::split_top_level;
use crate::model::DatasetDescription;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("output is empty")]
    Empty,
    #[error("output is not JSON: {0}")]
    ParseFailed(String),
}

/// Map a model-facing key onto a record field; `None` for unknown keys.
/// Returns `Some("")` for keys that are recognised but ignored.
fn field_for_key(key: &str) -> Option<&'static str> {
    let k = key
        .to_lowercase()
        .replace(['_', '-'], " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ");
    Some(match k.as_str() {
        "dataset name" | "name" | "dataset" => "dataset_name",
        "paper title" | "title" => "paper_title",
        "dataset summary" | "summary" | "description" => "dataset_summary",
        "data type" | "type" | "modality" => "data_type",
        "task" | "tasks" => "task",
        "location" => "location",
        "time" | "time range" => "time",
        "scale" | "size" => "scale",
        "dataset provider" | "dataset providers" | "provider" => "dataset_provider",
        "dataset url" | "url" | "link" => "dataset_url",
        "publicly available" | "dataset publicly available" | "public" => "publicly_available",
        "other info" | "other information" | "other useful information about this dataset" => "other_info",
        "paper id" | "arxiv id" | "description id" => "",
        _ => return None,
    })
}

fn value_text(v: &Value) -> Option<String> {
    match v {
        Value::Null => None,
        Value::String(s) => Some(s.clone()),
        other => Some(other.to_string()),
    }
}

fn description_from_object(obj: &Map<String, Value>, paper_id: &str, index: usize) -> DatasetDescription {
    let mut d = DatasetDescription::new(format!("{paper_id}#{index}"), paper_id);
    let mut extra = Vec::new();
    for (key, value) in obj {
        match field_for_key(key) {
            Some("") => {}
            Some(field) => {
                let slot = d.optional_field_mut(field).expect("mapped field exists");
                if slot.is_none() {
                    *slot = value_text(value);
                }
            }
            None => {
                if let Some(text) = value_text(value) {
                    extra.push(format!("{key}: {text}"));
                }
            }
        }
    }
    if !extra.is_empty() {
        let joined = extra.join("; ");
        d.other_info = Some(match d.other_info.take() {
            Some(existing) => format!("{existing}; {joined}"),
            None => joined,
        });
    }
    d
}

fn looks_like_description(obj: &Map<String, Value>) -> bool {
    obj.keys().any(|k| matches!(field_for_key(k), Some(f) if !f.is_empty()))
}

fn collect_objects(value: Value, out: &mut Vec<Map<String, Value>>) {
    match value {
        Value::Array(items) => items.into_iter().for_each(|v| collect_objects(v, out)),
        Value::Object(obj) if !looks_like_description(&obj) => {
            // wrapper such as {"datasets": [...]}
            for v in obj.into_values() {
                if matches!(v, Value::Array(_) | Value::Object(_)) {
                    collect_objects(v, out);
                }
            }
        }
        Value::Object(obj) => out.push(obj),
        _ => {}
    }
}

/// Accepts a single object, an array of objects, or a concatenated stream
/// of objects. Unknown keys are folded into `other_info`.
pub fn parse_descriptions(repaired: &str, paper_id: &str) -> Result<Vec<DatasetDescription>, ParseError> {
    if repaired.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let values: Vec<Value> = match serde_json::from_str::<Value>(repaired) {
        Ok(v) => vec![v],
        Err(strict_err) => {
            let spans = split_top_level(repaired)
                .map_err(|_| ParseError::ParseFailed(strict_err.to_string()))?;
            if spans.is_empty() {
                return Err(ParseError::ParseFailed(strict_err.to_string()));
            }
            spans
                .iter()
                .map(|s| serde_json::from_str(s).map_err(|e| ParseError::ParseFailed(e.to_string())))
                .collect::<Result<_, _>>()?
        }
    };
    let mut objects = Vec::new();
    values.into_iter().for_each(|v| collect_objects(v, &mut objects));
    Ok(objects
        .iter()
        .enumerate()
        .map(|(i, obj)| description_from_object(obj, paper_id, i))
        .collect())
}
