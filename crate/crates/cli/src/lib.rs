//! Scenario manifests, batch execution and report output for the arc-fault
//! forcing detector.

pub mod config;
pub mod error;
pub mod format;
pub mod runner;

pub use error::CliError;
