//! Cross-lingual dependency-based semantic role labeling.
//!
//! The crate covers two halves of a transfer pipeline:
//!
//! * annotation projection: CoNLL-2009 style corpora ([`corpus`]), word
//!   alignment intersection ([`alignment`]) and the projection rule with
//!   density filtering ([`projection`]);
//! * a character-based neural labeler trained on the projected data: a small
//!   reverse-mode differentiation engine ([`neural`]), the argument
//!   classifier, sense disambiguator and predicate identifier ([`model`]),
//!   fixed-affix stemming for lemma features ([`morphology`]) and a labeled
//!   F-score scorer ([`eval`]).
//!
//! Data-parallel loops (projection over sentence pairs, gradient
//! accumulation over sentences, tagging, scoring) go through [`par`], which
//! uses rayon when the `parallel` feature is enabled and falls back to plain
//! iteration otherwise.

pub mod alignment;
pub mod cli;
pub mod corpus;
pub mod eval;
pub mod model;
pub mod morphology;
pub mod neural;
pub mod par;
pub mod projection;

mod error;
pub use error::{Error, Result};
