//! Batch front-end for the cislunar constellation designer: config loading,
//! the optimize / evaluate / sweep / baseline commands and their output files.

pub mod commands;
pub mod config;
mod error;
pub mod io;
pub mod manifest;

pub use error::{CliError, Result};
