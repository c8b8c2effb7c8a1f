//! Batch runner for constrained BSDE experiments: TOML configs in, a JSON
//! [`ResultRecord`] and optional CSV tables out.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod record;

pub use commands::{exit_code, execute, Outcome, RunOptions};
pub use config::{ConfigError, ExperimentConfig};
pub use record::{CommandKind, ResultRecord, Status};
