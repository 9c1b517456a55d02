//! Field queries over extracted descriptions and random-walk similarity
//! between datasets.

mod query;
mod rwr;

pub use query::{query_datasets, Clause, Predicate, QueryError, QueryFilter};
pub use rwr::{rwr_scores, similar_datasets, NodeRef, RwrError, RwrParams, RwrResult, Similar};
