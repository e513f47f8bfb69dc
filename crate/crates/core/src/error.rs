use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is numerically singular (smallest/largest singular value = {ratio:e})")]
    SingularMatrix { ratio: f64 },

    #[error("basis is rank deficient: singular value {index} is {value:e}, largest is {largest:e}")]
    RankDeficient {
        index: usize,
        value: f64,
        largest: f64,
    },

    /// Some principal angle between the two subspaces is (numerically) a right angle.
    #[error("points lie on each other's cut locus (smallest singular value of X^T Y = {min_singular:e})")]
    CutLocus { min_singular: f64 },

    #[error("log map from point {i} to point {j} is undefined (cut locus)")]
    PairAtCutLocus { i: usize, j: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
