//! Sweep driver for the LMG toolkit: configuration, persistence and the
//! subcommands behind the `lipkin` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod svg;

pub use error::{CliError, CliResult};
