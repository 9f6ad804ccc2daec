//! Experiment driver for the `aggmo-core` optimizers.
//!
//! Each subcommand reads a JSON configuration (or its defaults), applies
//! command-line overrides, runs, and writes CSV or JSON tables plus a
//! `manifest.json` with SHA-256 digests of every file it produced.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod output;
pub mod table;

pub use commands::{execute, validate};
pub use config::{Format, MethodName, MethodSpec, Overrides, ProblemSpec, RunConfig};
pub use error::{CliError, Result};
pub use output::{RunManifest, RunSummary, Status};
