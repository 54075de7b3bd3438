//! Library half of the `oscul` binary: ingestion, report building, export,
//! and the subcommand logic, kept out of `main.rs` so integration tests can
//! drive the pieces directly.

pub mod csv;
pub mod export;
pub mod report;
pub mod run;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input file is empty: {path}")]
    EmptyFile { path: PathBuf },
    #[error("ragged row: line {line} has {got} columns, expected {expected}")]
    RaggedRows { line: usize, expected: usize, got: usize },
    #[error("non-numeric cell at row {row}, column {col}: {token:?}")]
    NonNumericCell { row: usize, col: usize, token: String },
    #[error("{format} export supports dimension {supported} only, surface has dimension {got}")]
    UnsupportedDimension { format: &'static str, supported: usize, got: usize },
    #[error("cannot infer export format from {path:?}: expected a .svg or .obj extension")]
    UnknownFormat { path: PathBuf },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] oscul_core::Error),
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }
}
