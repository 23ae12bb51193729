//! Experiment harness around `stirmix-core`: configuration, run
//! orchestration, file formats and figures.

pub mod analysis;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod manifest;
pub mod render;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
