//! Dialogue corpus compiler.
//!
//! Converts heterogeneous dialogue datasets into unified text-to-text records,
//! synthesizes turn-reordering and entity-cloze denoising corpora, plans
//! task-iterative training streams, and scores predictions.

pub mod cli;
pub mod ingest;
pub mod knowledge;
pub mod metrics;
pub mod scheduler;
pub mod schema;
pub mod seed;
pub mod ssl;
pub mod stats;
