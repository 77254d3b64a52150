//! Configuration files, sweeps and validation runs on top of `cognet-core`.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, CliError, Command, Outcome};
pub use config::{load, parse, Config};
