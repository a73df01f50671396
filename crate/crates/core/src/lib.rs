//! Weak-supervision construction for aspect-based summarization.
//!
//! The crate turns a generic `(document, summary)` corpus into aspect-based
//! training examples. Seed aspects come from entity mentions in the summary,
//! are expanded through a ConceptNet-style knowledge graph, and each aspect
//! gets an extractive summary built from the summary sentences that mention
//! it or one of its graph neighbors. Related words found through TF-IDF and
//! Wikipedia page extracts are prepended to the model input.
//!
//! Alongside the construction pipeline the crate ships an MA-News-style
//! synthetic benchmark generator and a ROUGE-1/2/L scorer with Lead-3
//! baselines.

pub mod aspect_seed;
pub mod concept_graph;
pub mod corpus_io;
pub mod error;
pub mod manews;
pub mod model_input;
pub mod pipeline;
pub mod rouge;
pub mod salience;
pub mod weak_supervision;

pub use error::{Error, Result};
