//! Command-line driver for `l2boost-core`: parallel Monte Carlo runs, TOML
//! run configurations, CSV input and the simulation report formats.

pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod mc;
pub mod report;

pub use error::{AppError, Result};
pub use mc::run_mc;
