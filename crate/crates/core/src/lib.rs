//! Build a paper–dataset network from paper texts.
//!
//! The pipeline runs in four stages:
//!
//! * [`ingestion`] loads a local corpus and assembles token-budgeted payloads,
//! * [`extraction`] turns payloads into dataset descriptions through a
//!   pluggable completion client and repairs malformed JSON output,
//! * [`resolution`] links descriptions to canonical dataset entities with the
//!   identity-attribute graph (creation, completion, refinement, inference)
//!   and discovers new entities,
//! * [`store`] persists the resulting bipartite network, computes statistics
//!   and exports graph formats.
//!
//! [`discovery`] answers table-style filters and random-walk-with-restart
//! similarity queries over a built network; [`evaluation`] scores extraction
//! and resolution against gold annotations.

pub mod discovery;
pub mod evaluation;
pub mod extraction;
pub mod ingestion;
pub mod io;
pub mod model;
pub mod par;
pub mod pipeline;
pub mod resolution;
pub mod store;

pub use model::{
    AttributeKind, DatasetDescription, DatasetEntity, EntityOrigin, IdentityAttribute, Match,
    MatchMethod, Paper, PaperDatasetNetwork, Section,
};
pub use par::Execution;
