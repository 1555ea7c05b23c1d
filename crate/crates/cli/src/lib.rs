//! The `relfilter` command-line tool as a library, so pipelines can be
//! driven from tests and scripts.

pub mod artifact;
pub mod cli;
pub mod commands;
pub mod embed;
pub mod error;
pub mod pipeline;

pub use error::{CliError, CliResult};
pub use pipeline::{export_pr, run_pipeline, PipelineConfig, Summary};
