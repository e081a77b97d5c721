//! File formats, run manifests and the `credal` command-line front end.

pub mod cli;
pub mod commands;
pub mod error;
pub mod formats;
pub mod manifest;
pub mod svg;

pub use error::{CliError, CliResult};
