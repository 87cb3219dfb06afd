//! The SRL networks and their training and decoding.
//!
//! * [`ArgumentClassifier`]: predicate-specific BiLSTM encoding plus a
//!   role- and predicate-specific decoder. Lemma information comes from
//!   character BiLSTMs or from stem embeddings ([`LemmaMode`]).
//! * [`SenseClassifier`]: one sense classifier shared by all predicates.
//! * [`PredicateIdentifier`]: source-side predicate detection with POS input.
//!
//! All three train through [`train::train`] and persist through
//! [`persist`].

pub mod args;
pub mod config;
pub mod features;
pub mod persist;
pub mod predid;
pub mod senses;
pub mod train;

pub use args::{role_scores, role_weights, ArgumentClassifier, ArgumentSpec};
pub use config::{LemmaMode, ModelConfig, Preset};
pub use persist::{load, save, Model, Sidecar};
pub use predid::{PredicateIdentifier, PredicateSpec};
pub use senses::{SenseClassifier, SenseSpec};
pub use train::{train, TrainOptions, TrainReport, Trainable};

use thiserror::Error;

use crate::neural::NeuralError;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("no training signal: the corpus has no labeled instances")]
    NoTrainingSignal,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("lemma mode {0} needs a stem or lemma lexicon")]
    MissingLexicon(LemmaMode),

    #[error("predicate position {position} outside sentence of length {len}")]
    InvalidPredicate { position: usize, len: usize },

    #[error("token {token} has no POS tag; predicate identification needs the POS column")]
    MissingPos { token: usize },

    #[error("cannot encode an empty word form")]
    EmptyForm,

    #[error("unknown role {0:?}")]
    UnknownRole(String),

    #[error("checkpoint was written for sidecar {recorded}, but the sidecar hashes to {actual}")]
    SidecarMismatch { recorded: String, actual: String },

    #[error("{0}")]
    Io(String),

    #[error(transparent)]
    Neural(#[from] NeuralError),
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
