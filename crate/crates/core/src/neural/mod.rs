//! Dense f64 tensors with tape-based reverse-mode differentiation.
//!
//! A [`Graph`] records operations over values and parameters borrowed from a
//! [`ParamStore`]; [`Graph::backward`] returns [`Gradients`] for every
//! parameter the recorded loss touched. On top of that sit LSTM and BiLSTM
//! stacks ([`lstm`]), the Adam optimizer ([`adam`]), a central-difference
//! gradient checker ([`gradcheck`]) and the parameter checkpoint format
//! ([`checkpoint`]).

pub mod adam;
pub mod checkpoint;
pub mod gradcheck;
mod graph;
pub mod lstm;
mod params;
mod tensor;

pub use adam::{adam_step, AdamConfig};
pub use gradcheck::{grad_check, relative_error, Coordinates, GradCheckReport};
pub use graph::{softmax, Graph, NodeId};
pub use lstm::{bilstm_encode, lstm_step, BiStates, LstmCell, LstmStack};
pub use params::{init, Gradients, Param, ParamId, ParamStore};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeuralError {
    #[error("{op}: shape mismatch for {operand}: expected {expected}, found {found}")]
    ShapeMismatch {
        op: &'static str,
        operand: &'static str,
        expected: String,
        found: String,
    },

    #[error("backward root must be a scalar, found shape {0}")]
    NonScalarRoot(String),

    #[error("backward already ran on this graph; record a new forward pass")]
    AlreadyConsumed,

    #[error("gold index {gold} out of range for {classes} classes")]
    GoldOutOfRange { gold: usize, classes: usize },

    #[error("cannot encode an empty sequence")]
    EmptySequence,

    #[error("row {row} out of range for parameter {name} with {rows} rows")]
    RowOutOfRange {
        name: String,
        row: usize,
        rows: usize,
    },

    #[error("duplicate parameter name {0:?}")]
    DuplicateParam(String),

    #[error("unknown parameter {0:?}")]
    UnknownParam(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

pub(crate) fn shape_str(rows: usize, cols: usize) -> String {
    if cols == 1 {
        format!("[{rows}]")
    } else {
        format!("[{rows}x{cols}]")
    }
}
