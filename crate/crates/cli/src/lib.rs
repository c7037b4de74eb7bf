//! Command implementations behind the `pairplan` binary. Each command is a
//! plain function over a [`config::RunConfig`], so it can be driven from
//! tests without spawning a process.

pub mod commands;
pub mod config;
mod error;
pub mod images;

pub use error::{CliError, Result};
