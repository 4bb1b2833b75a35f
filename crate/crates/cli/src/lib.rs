//! Library side of the `infogeo` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod model;
pub mod report;

pub use error::CliError;
