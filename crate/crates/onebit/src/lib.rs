//! Batch front-end for the 1-bit link simulator: configuration, sweeps over
//! (ρ, Δn, ℓ_u, ℓ_d), CSV tables, manifests and gnuplot scripts.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::Path;

pub mod cli;
pub mod config;
pub mod experiments;
pub mod output;
pub mod selftest;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG_ERROR: i32 = 1;
    pub const PARTIAL_FAILURE: i32 = 2;
    pub const IO_ERROR: i32 = 3;
}

/// Errors that abort a command before or while writing results.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG_ERROR,
            CliError::Io { .. } => exit::IO_ERROR,
        }
    }
}
