use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("partition covers {got} vertices, graph has {expected}")]
    PartitionSize { expected: usize, got: usize },

    #[error("terminals {0} and {1} share a cluster")]
    InvalidPartition(usize, usize),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("enumeration guard: {what} is {got}, limit {limit}")]
    TooLarge {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("linear program: {0}")]
    Lp(String),

    #[error("cluster diameter law violated at level {level}: clusters {a} and {b} at distance {dist:?}, bound {bound}")]
    DiameterViolation {
        level: usize,
        a: usize,
        b: usize,
        dist: Option<usize>,
        bound: usize,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
