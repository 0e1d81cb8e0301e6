//! Library behind the `verify-pro` command-line tool.
//!
//! Every subcommand is a plain function over a parsed specification,
//! returning a serializable report. The binary stays a thin
//! argument-parsing shell, and integration tests can drive the exact
//! same code paths in-process.

mod artifacts;
mod config;
pub mod ops;

pub use artifacts::{
    load_lines, load_model, load_tree, save_lines, save_model, save_tree, write_atomic,
    ArtifactError,
};
pub use config::{Settings, SettingsError};
