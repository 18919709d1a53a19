//! File formats, verification suites and the command implementations behind
//! the `mqv` binary.

pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod report;
pub mod suites;

pub use config::RunConfig;
pub use error::CliError;
pub use report::{Record, Report};
