//! Data model and I/O for dependency-based SRL corpora.
//!
//! A [`Sentence`] carries tokens, predicate frames and their semantic
//! dependencies. Non-arguments are never stored: a token that is not an
//! argument of a frame simply has no [`SemanticDependency`] for it, and the
//! `NULL` role only exists in the role vocabulary and in classifier output.

mod conll;
mod embeddings;
mod vocab;

pub use conll::{read_conll, read_conll_str, write_conll, write_conll_string, MASK_COMMENT};
pub use embeddings::{load_embeddings, EmbeddingTable};
pub use vocab::{build_vocab, Vocab, Vocabs, NULL_ROLE, PAD, UNK};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of CoNLL-2009 columns the data model does not interpret
/// (LEMMA, POS, FEAT, PFEAT, HEAD, PHEAD, DEPREL, PDEPREL).
pub const OPAQUE_COLUMNS: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("line {line}: expected at least 14 tab-separated columns, found {found}")]
    TooFewColumns { line: usize, found: usize },

    #[error("line {line}: found {found} columns, but the sentence started with {expected}")]
    InconsistentColumns {
        line: usize,
        found: usize,
        expected: usize,
    },

    #[error("sentence {sentence}: {found} APRED columns for {predicates} predicates")]
    ApredMismatch {
        sentence: usize,
        predicates: usize,
        found: usize,
    },

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("sentence {sentence}: {message}")]
    Invalid { sentence: usize, message: String },

    #[error("embeddings line {line}: expected {expected} components, found {found}")]
    EmbeddingDimension {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("embeddings line {line}: invalid component {value:?}")]
    EmbeddingValue { line: usize, value: String },

    #[error("read error: {0}")]
    Io(String),
}

/// A surface token. `index` is 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub form: String,
    pub pos: Option<String>,
    pub lemma: Option<String>,
    /// Uninterpreted CoNLL-2009 columns, kept for round-tripping.
    pub opaque: Vec<String>,
}

impl Token {
    pub fn new(index: usize, form: impl Into<String>) -> Self {
        Token {
            index,
            form: form.into(),
            pos: None,
            lemma: None,
            opaque: vec!["_".to_string(); OPAQUE_COLUMNS],
        }
    }

    pub fn with_pos(mut self, pos: impl Into<String>) -> Self {
        self.pos = Some(pos.into());
        self
    }
}

/// A labeled edge from a frame's predicate to argument token `arg_index`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SemanticDependency {
    pub arg_index: usize,
    pub role: String,
}

impl SemanticDependency {
    pub fn new(arg_index: usize, role: impl Into<String>) -> Self {
        SemanticDependency {
            arg_index,
            role: role.into(),
        }
    }
}

/// A predicate at token `position` with its sense and arguments.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateFrame {
    pub position: usize,
    pub sense: String,
    pub args: Vec<SemanticDependency>,
}

impl PredicateFrame {
    pub fn new(position: usize, sense: impl Into<String>) -> Self {
        PredicateFrame {
            position,
            sense: sense.into(),
            args: Vec::new(),
        }
    }

    pub fn with_arg(mut self, arg_index: usize, role: impl Into<String>) -> Self {
        self.args.push(SemanticDependency::new(arg_index, role));
        self
    }

    /// Role of token `arg_index`, if it is an argument of this frame.
    pub fn role_of(&self, arg_index: usize) -> Option<&str> {
        self.args
            .iter()
            .find(|d| d.arg_index == arg_index)
            .map(|d| d.role.as_str())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub frames: Vec<PredicateFrame>,
    /// Per-token flag for tokens whose labels are trusted. `None` means
    /// every token is labeled.
    pub labeled_mask: Option<Vec<bool>>,
}

impl Sentence {
    pub fn from_forms<S: AsRef<str>>(forms: &[S]) -> Self {
        Sentence {
            tokens: forms
                .iter()
                .enumerate()
                .map(|(i, f)| Token::new(i + 1, f.as_ref()))
                .collect(),
            frames: Vec::new(),
            labeled_mask: None,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn forms(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.form.as_str())
    }

    /// Whether the 1-based token `index` carries trusted labels.
    pub fn is_labeled(&self, index: usize) -> bool {
        match &self.labeled_mask {
            Some(mask) => mask.get(index - 1).copied().unwrap_or(false),
            None => true,
        }
    }

    pub fn frame_at(&self, position: usize) -> Option<&PredicateFrame> {
        self.frames.iter().find(|f| f.position == position)
    }

    pub fn predicate_positions(&self) -> Vec<usize> {
        self.frames.iter().map(|f| f.position).collect()
    }

    /// Number of stored semantic dependencies over all frames.
    pub fn dependency_count(&self) -> usize {
        self.frames.iter().map(|f| f.args.len()).sum()
    }

    /// Sort frames by position and arguments by index.
    pub fn normalize(&mut self) {
        self.frames.sort_by_key(|f| f.position);
        for f in &mut self.frames {
            f.args.sort_by_key(|d| d.arg_index);
        }
    }

    /// Check the structural invariants; `ordinal` is used in error messages.
    pub fn validate(&self, ordinal: usize) -> Result<(), CorpusError> {
        let invalid = |message: String| CorpusError::Invalid {
            sentence: ordinal,
            message,
        };
        let n = self.tokens.len();
        for (i, t) in self.tokens.iter().enumerate() {
            if t.index != i + 1 {
                return Err(invalid(format!(
                    "token {} has index {}, expected {}",
                    i + 1,
                    t.index,
                    i + 1
                )));
            }
            if t.form.is_empty() || t.form.chars().any(char::is_whitespace) {
                return Err(invalid(format!(
                    "token {} has invalid form {:?}",
                    i + 1,
                    t.form
                )));
            }
            if t.opaque.len() != OPAQUE_COLUMNS {
                return Err(invalid(format!(
                    "token {} has {} opaque columns",
                    i + 1,
                    t.opaque.len()
                )));
            }
        }
        if let Some(mask) = &self.labeled_mask {
            if mask.len() != n {
                return Err(invalid(format!(
                    "labeled mask has {} entries for {} tokens",
                    mask.len(),
                    n
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for f in &self.frames {
            if f.position == 0 || f.position > n {
                return Err(invalid(format!(
                    "predicate position {} out of range",
                    f.position
                )));
            }
            if !seen.insert(f.position) {
                return Err(invalid(format!("two frames at position {}", f.position)));
            }
            let mut args = std::collections::HashSet::new();
            for d in &f.args {
                if d.arg_index == 0 || d.arg_index > n {
                    return Err(invalid(format!(
                        "argument index {} out of range",
                        d.arg_index
                    )));
                }
                if !args.insert(d.arg_index) {
                    return Err(invalid(format!(
                        "frame at {} has two arguments at {}",
                        f.position, d.arg_index
                    )));
                }
                if d.role == NULL_ROLE {
                    return Err(invalid("stored dependency with NULL role".to_string()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
}

impl Corpus {
    pub fn new(sentences: Vec<Sentence>) -> Self {
        Corpus { sentences }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn frame_count(&self) -> usize {
        self.sentences.iter().map(|s| s.frames.len()).sum()
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        for (i, s) in self.sentences.iter().enumerate() {
            s.validate(i + 1)?;
        }
        Ok(())
    }
}
