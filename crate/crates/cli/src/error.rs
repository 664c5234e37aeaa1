use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Malformed input, located by line and field.
    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse { line: usize, field: String, message: String },
    /// Well-formed input violating an invariant; `invariant` names it.
    #[error("validation failed ({invariant}): {message}")]
    Validation { invariant: &'static str, message: String },
    #[error("invalid option: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qgraph_core::Error),
    #[error("cannot write output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
