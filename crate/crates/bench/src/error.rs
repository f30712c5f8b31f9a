use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, BenchError>;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: u64, message: String },
    #[error("{0}: no data rows")]
    EmptyDataset(String),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("invalid value for `{key}`: {message}")]
    InvalidSetting { key: String, message: String },
    #[error("every {algorithm} run diverged over the grid c = 2^k, k = {first}..={last}")]
    AllDiverged { algorithm: String, first: i32, last: i32 },
    #[error("suboptimality ratio undefined: F0 = {f0} is not above F* = {f_star}")]
    UndefinedRatio { f0: f64, f_star: f64 },
    #[error(transparent)]
    Solver(#[from] scsg::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl BenchError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.into(),
            source,
        }
    }
}
