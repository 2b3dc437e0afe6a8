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

    #[error("no parseable records in {path} ({skipped} malformed lines skipped)")]
    EmptyCorpus { path: PathBuf, skipped: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("name `{0}` normalizes to zero tokens")]
    EmptyName(String),

    #[error("false-miss fraction undefined: fn + tp = 0")]
    UndefinedFmp,

    #[error("density undefined for graphs with fewer than two nodes")]
    UndefinedDensity,

    #[error("skip-gram training has no (center, context) pairs")]
    DegenerateTraining,

    #[error("graph has no non-edge pairs to sample negatives from")]
    NoNegatives,

    #[error("loss undefined: empty positive edge set")]
    UndefinedLoss,

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("empty split: no test positives in window {window}")]
    EmptySplit { window: String },

    #[error("threshold weight >= {min_weight} leaves no positives")]
    EmptyThreshold { min_weight: u32 },

    #[error("empty validation set")]
    EmptyValidation,

    #[error("training diverged (non-finite loss) at epoch {epoch}: {context}")]
    Diverged { epoch: usize, context: String },

    #[error("metric undefined on {undefined} of {resamples} bootstrap resamples")]
    UndefinedMetric { undefined: usize, resamples: usize },

    #[error("experiment cell {cell}: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<Error>,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_cell(self, cell: impl Into<String>) -> Self {
        Error::Cell {
            cell: cell.into(),
            source: Box::new(self),
        }
    }
}
