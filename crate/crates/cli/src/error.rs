use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// A data cell that is not a decimal number. `row` counts data rows from 1,
    /// the header excluded.
    #[error("parse error at row {row}, column `{column}`: cannot read {value:?} as a number")]
    Parse { row: usize, column: String, value: String },
    #[error("malformed CSV at row {row}: {message}")]
    Csv { row: usize, message: String },
    #[error("column `{0}` not found in the header")]
    MissingColumn(String),
    #[error("row {row}, column `{column}`: value {value} is not a finite number")]
    NonNumeric { row: usize, column: String, value: String },
    #[error("no data rows in {0}")]
    EmptyData(PathBuf),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] fric::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
