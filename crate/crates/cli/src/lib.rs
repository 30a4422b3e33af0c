//! Command-line driver: flat configuration files, run orchestration and
//! report/CSV output for the coupled local/nonlocal solvers.

pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use config::{RawConfig, RunConfig};
pub use error::CliError;
pub use report::Report;
pub use run::{check, solve, sweep, RunOptions};
