//! Command-line harness for the certified bisection pipeline.

pub mod app;
pub mod config;
pub mod sweep;

pub use app::{run, run_from, Cli, EXIT_CERTIFIED, EXIT_ERROR, EXIT_NOT_SURE};
