use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DatasetDescription, PaperDatasetNetwork};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("unknown field {field:?}; valid fields: {}", valid.join(", "))]
    UnknownField { field: String, valid: Vec<String> },
    #[error("malformed clause {0:?}; expected FIELD~VALUE or FIELD=VALUE")]
    Malformed(String),
    #[error("a query needs at least one clause")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    Contains,
    Equals,
}

impl FromStr for Predicate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "contains" => Ok(Predicate::Contains),
            "equals" => Ok(Predicate::Equals),
            other => Err(format!("unknown predicate {other:?} (expected contains or equals)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub field: String,
    pub predicate: Predicate,
    /// Lowercased.
    pub value: String,
}

impl Clause {
    pub fn new(field: &str, predicate: Predicate, value: &str) -> Result<Self, QueryError> {
        let field = field.trim();
        if !DatasetDescription::FIELDS.contains(&field) {
            return Err(QueryError::UnknownField {
                field: field.to_string(),
                valid: DatasetDescription::FIELDS.iter().map(|f| f.to_string()).collect(),
            });
        }
        Ok(Self { field: field.to_string(), predicate, value: value.trim().to_lowercase() })
    }

    pub fn matches(&self, d: &DatasetDescription) -> bool {
        let Some(v) = d.field(&self.field) else { return false };
        let v = v.to_lowercase();
        match self.predicate {
            Predicate::Contains => v.contains(&self.value),
            Predicate::Equals => v.trim() == self.value,
        }
    }
}

impl FromStr for Clause {
    type Err = QueryError;

    /// `location~new york` (contains) or `task=dispatching` (equals). The
    /// value may be wrapped in double quotes.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let pos = s.find(['~', '=']).ok_or_else(|| QueryError::Malformed(s.to_string()))?;
        let (field, rest) = s.split_at(pos);
        let predicate = if rest.starts_with('~') { Predicate::Contains } else { Predicate::Equals };
        let value = rest[1..].trim();
        let value = value.strip_prefix('"').and_then(|v| v.strip_suffix('"')).unwrap_or(value);
        if field.trim().is_empty() {
            return Err(QueryError::Malformed(s.to_string()));
        }
        Clause::new(field, predicate, value)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.predicate {
            Predicate::Contains => '~',
            Predicate::Equals => '=',
        };
        write!(f, "{}{}{:?}", self.field, op, self.value)
    }
}

/// A conjunction of case-insensitive clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryFilter {
    clauses: Vec<Clause>,
}

impl QueryFilter {
    pub fn new(clauses: Vec<Clause>) -> Result<Self, QueryError> {
        if clauses.is_empty() {
            return Err(QueryError::Empty);
        }
        Ok(Self { clauses })
    }

    pub fn parse<S: AsRef<str>>(clauses: &[S]) -> Result<Self, QueryError> {
        Self::new(clauses.iter().map(|c| c.as_ref().parse()).collect::<Result<_, _>>()?)
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn matches(&self, d: &DatasetDescription) -> bool {
        self.clauses.iter().all(|c| c.matches(d))
    }
}

/// Descriptions satisfying every clause, ordered by paper then description.
pub fn query_datasets<'a>(network: &'a PaperDatasetNetwork, filter: &QueryFilter) -> Vec<&'a DatasetDescription> {
    let mut out: Vec<&DatasetDescription> = network.descriptions().values().filter(|d| filter.matches(d)).collect();
    out.sort_by(|a, b| (&a.paper_id, &a.description_id).cmp(&(&b.paper_id, &b.description_id)));
    out
}
