//! Topic-sensitive influential user discovery for question-answer style
//! online social groups.
//!
//! The pipeline turns a group activity log (posts, comments and reactions)
//! into a weighted social interaction graph, ranks members with several
//! authority measures and plans reinforced word-of-mouth campaigns over the
//! weakly connected sub-groups of that graph.
//!
//! Module map:
//!
//! - [`ingest`]: activity log model, line-delimited parser and serializer.
//! - [`text`]: tokenizer, stopword filter and suffix stemmer.
//! - [`relevance`]: mutual-information relatedness table and content boost.
//! - [`graph`]: interaction graph construction, degree statistics, export.
//! - [`authority`]: PageRank, HITS, eigenvector, betweenness, closeness, z-score.
//! - [`structure`]: bow-tie decomposition and weakly connected components.
//! - [`campaign`]: influencer selection, reinforced plans, coverage, timing.
//! - [`eval`]: votes, Pearson, MAP, NDCG and correlation reports.
//! - [`synth`]: seeded synthetic activity logs.
//! - [`config`] and [`pipeline`]: configuration and end-to-end orchestration.

pub mod authority;
pub mod campaign;
pub mod config;
pub mod error;
pub mod eval;
pub mod graph;
pub mod ingest;
pub mod pipeline;
pub mod relevance;
pub mod structure;
pub mod synth;
pub mod text;

pub use error::{Error, Result};
