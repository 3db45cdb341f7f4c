//! Batch front end for the `mdeconv` binary: generate, degrade, reconstruct,
//! evaluate, render and bench, driven by one JSON pipeline config.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod render;

pub use config::PipelineConfig;
pub use error::{CliError, Stage};
