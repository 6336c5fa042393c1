//! Std companion to the core channel library: frame file ingestion, the
//! end-to-end analysis pipeline and the report writers behind the
//! `idschan` binary.

pub mod ingest;
pub mod pipeline;
pub mod report;
