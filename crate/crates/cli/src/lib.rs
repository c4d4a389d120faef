//! Command-line front end: PGM I/O, pipeline orchestration and JSON reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::run;
pub use config::{Cli, Command, RunConfig};
pub use error::CliError;
