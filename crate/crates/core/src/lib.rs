//! Speech-driven text retrieval: collection-adapted n-gram language models,
//! a noisy-channel query decoder, a probabilistic ranker and TREC-style
//! evaluation, wired together as a two-stage retrieval pipeline.

pub mod corpus;
pub mod decoder;
pub mod error;
pub mod eval;
pub mod index;
pub mod lm;
pub mod pipeline;
pub mod synthetic;

pub use error::{Error, Result};
