//! Config parsing, command execution and report emission for the
//! `dissipalg` binary.

pub mod bundle;
pub mod config;
pub mod emit;
pub mod run;

pub use bundle::ReportBundle;
pub use config::{parse_config, ConfigCode, ConfigError, ModelSpec};
pub use emit::{emit, render, Format};
pub use run::{run, Command, Overrides, RunError};
