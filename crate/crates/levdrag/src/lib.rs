//! Data ingestion, table and figure rendering, run configuration and the
//! `levdrag` command line, built on [`levdrag_core`].

pub mod cli;
pub mod config;
mod error;
pub mod figure;
pub mod ingest;
pub mod report;

pub use error::{Error, Result};
pub use levdrag_core as core;
