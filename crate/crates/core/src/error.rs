use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("unbalanced panel: missing {what} for country {country} in year {year}")]
    MissingCell {
        what: &'static str,
        country: String,
        year: i32,
    },

    #[error("non-positive {what} ({value}) for country {country} in year {year}; log transform undefined")]
    NonPositive {
        what: &'static str,
        country: String,
        year: i32,
        value: f64,
    },

    #[error(
        "no residual degrees of freedom ({rows} rows, {columns} retained columns); reduce the candidate block size"
    )]
    DegreesOfFreedom { rows: usize, columns: usize },

    #[error("column provenance mismatch: {0}")]
    Provenance(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 input error, 3 numerical failure, 4 non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_)
            | Error::MissingCell { .. }
            | Error::NonPositive { .. }
            | Error::Io { .. }
            | Error::Csv { .. }
            | Error::Json(_) => 2,
            Error::DegreesOfFreedom { .. } | Error::Provenance(_) | Error::Numerical(_) => 3,
            Error::NonConvergence(_) => 4,
        }
    }
}
