//! Configuration, orchestration and file output for breather experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod plot;

pub use commands::CliError;
pub use config::ExperimentConfig;
