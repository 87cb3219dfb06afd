use thiserror::Error;

use crate::alignment::AlignmentError;
use crate::corpus::CorpusError;
use crate::eval::EvalError;
use crate::model::ModelError;
use crate::morphology::MorphologyError;
use crate::neural::NeuralError;
use crate::projection::ProjectionError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Top-level error wrapping the per-module errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] CorpusError),

    #[error(transparent)]
    Alignment(#[from] AlignmentError),

    #[error(transparent)]
    Projection(#[from] ProjectionError),

    #[error(transparent)]
    Morphology(#[from] MorphologyError),

    #[error(transparent)]
    Neural(#[from] NeuralError),

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
