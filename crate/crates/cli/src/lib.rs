//! Command-line front end for the `phototherm` stability solvers: config
//! resolution, subcommands, stable output schemas, figure data bundles and
//! the acceptance checks run by `repro`.

pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod session;

pub use commands::{execute, run, Cli, Command};
pub use config::{Format, Overrides, RunConfig};
pub use error::{CliError, CliResult};
