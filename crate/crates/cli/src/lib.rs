//! Command-line front end: run configuration, checkpoints and the
//! `simulate`, `train`, `predict`, `evaluate` and `km-export` commands.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;

pub use checkpoint::Checkpoint;
pub use config::{DatasetKind, RunConfig};
pub use error::{CliError, CliResult};
