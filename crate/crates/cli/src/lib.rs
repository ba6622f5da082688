//! Command-line front end for the cavity-gate fidelity models.

pub mod commands;
pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod units;

pub use error::{CliError, CliResult};
