use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("i/o error: {0}")]
    Stream(#[from] std::io::Error),

    #[error("input is not readable as delimited text: {0}")]
    Csv(#[from] csv::Error),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid duration model: {0}")]
    DurationModel(String),

    #[error("invalid node activity for participant {participant}: first entry {first_entry} is after last activity {last_activity}")]
    InvalidActivity {
        participant: u32,
        first_entry: f64,
        last_activity: f64,
    },

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("spill file {path} is corrupt: {reason}")]
    Spill { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
