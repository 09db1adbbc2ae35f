//! Experiment runner for the support-function laws of Poisson polytopes:
//! configuration, per-kind runners, post-processing statistics and CSV/JSON
//! output.

// NaN-rejecting checks are written as !(x > 0.0) on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod runner;
pub mod stats;

pub use config::{ExperimentConfig, Intensity, Kind, PowerLog};
pub use error::{CliError, CliResult};
pub use runner::{run, Cell, ExperimentResult};

#[cfg(test)]
mod tests;
