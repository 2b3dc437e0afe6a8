//! MediaGraph: entity co-occurrence networks built from news corpora.
//!
//! The pipeline runs in stages, each in its own module:
//!
//! * [`corpus`] loads article corpora, filters them by keyphrase and keeps the
//!   leading words of each article, then finds gazetteer mentions.
//! * [`resolver`] clusters name variants with a rule-based matcher.
//! * [`graph`] builds the weighted, timestamped co-occurrence graph.
//! * [`analytics`] computes centralities, Leiden communities and leaders.
//! * [`embeddings`] learns Node2Vec vectors from biased random walks.
//! * [`linkpred`] trains GraphSAGE encoders and feed-forward link decoders.
//! * [`harness`] runs temporal split experiments, baselines and bootstrap CIs.

pub mod analytics;
pub mod corpus;
pub mod embeddings;
mod entity;
mod error;
pub mod graph;
pub mod harness;
pub mod linkpred;
pub mod resolver;
pub mod synthetic;

pub use entity::EntityType;
pub use error::{Error, Result};
