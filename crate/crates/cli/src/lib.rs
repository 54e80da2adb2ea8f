//! Command-line driver for `raman-comb-core`: configuration files, the
//! ensemble file format, a parallel shot runner, CSV/JSON/SVG outputs and
//! the experiment subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod manifest;
pub mod oracle;
pub mod parallel;
pub mod plot;

pub use error::{CliError, Result};
