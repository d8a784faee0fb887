//! Command-line front end: JSON graph documents, CSV data, and the
//! subcommands of the `eqvar` binary.

pub mod commands;
pub mod config;
pub mod document;
pub mod error;
pub mod io;

pub use commands::{run, Cli};
pub use error::{CliError, Result};
