use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ModelError;

/// Source of the predicate-lemma vectors in the encoder input and decoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LemmaMode {
    /// Dedicated character BiLSTMs over the predicate form.
    Char,
    /// Embeddings of unsupervised stems.
    Ustem,
    /// Embeddings of supervised lemmas.
    Slem,
}

impl LemmaMode {
    pub fn uses_lexicon(self) -> bool {
        self != LemmaMode::Char
    }
}

impl fmt::Display for LemmaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LemmaMode::Char => "char",
            LemmaMode::Ustem => "ustem",
            LemmaMode::Slem => "slem",
        })
    }
}

impl FromStr for LemmaMode {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "char" => Ok(LemmaMode::Char),
            "ustem" => Ok(LemmaMode::Ustem),
            "slem" => Ok(LemmaMode::Slem),
            other => Err(ModelError::Config(format!(
                "unknown lemma mode {other:?}; expected char, ustem or slem"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Small dimensions for tests and laptops.
    Desk,
    /// Full-scale dimensions and schedule for large projected corpora.
    Full,
}

impl FromStr for Preset {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "desk" => Ok(Preset::Desk),
            "full" => Ok(Preset::Full),
            other => Err(ModelError::Config(format!(
                "unknown preset {other:?}; expected desk or full"
            ))),
        }
    }
}

/// Hyperparameters shared by the three networks. Each network reads the
/// fields it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Word embedding width (trainable and pre-trained).
    pub d_w: usize,
    /// Character embedding width.
    pub d_c: usize,
    /// Character representation width, forward and backward halves.
    pub d_ch: usize,
    /// Encoder hidden size per direction.
    pub d_h: usize,
    /// Encoder-side predicate lemma width.
    pub d_le: usize,
    /// Decoder-side predicate lemma width.
    pub d_l: usize,
    /// Role embedding width.
    pub d_r: usize,
    /// POS embedding width (predicate identifier only).
    pub d_pos: usize,
    pub char_depth: usize,
    pub enc_depth: usize,
    /// Depth of the character BiLSTMs that produce lemma vectors in char mode.
    pub lemma_depth: usize,
    /// Depth of the sense classifier's sentence encoder.
    pub sense_depth: usize,
    pub lemma_mode: LemmaMode,
    pub lr: f64,
    /// Training instances per minibatch; sentences are never split.
    pub minibatch: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Minimum frequency for the trainable word vocabulary.
    pub min_count: usize,
    /// Fraction of NULL-role instances kept per epoch.
    pub null_keep: f64,
}

impl ModelConfig {
    pub fn preset(preset: Preset) -> Self {
        match preset {
            Preset::Desk => ModelConfig {
                d_w: 16,
                d_c: 8,
                d_ch: 16,
                d_h: 32,
                d_le: 8,
                d_l: 8,
                d_r: 8,
                d_pos: 8,
                char_depth: 1,
                enc_depth: 2,
                lemma_depth: 3,
                sense_depth: 3,
                lemma_mode: LemmaMode::Char,
                lr: 0.01,
                minibatch: 100,
                epochs: 20,
                seed: 1,
                min_count: 2,
                null_keep: 1.0,
            },
            Preset::Full => ModelConfig {
                d_w: 100,
                d_c: 50,
                d_ch: 100,
                d_h: 512,
                d_le: 100,
                d_l: 100,
                d_r: 128,
                d_pos: 32,
                char_depth: 1,
                enc_depth: 3,
                lemma_depth: 3,
                sense_depth: 3,
                lemma_mode: LemmaMode::Char,
                lr: 0.001,
                minibatch: 1000,
                epochs: 2,
                seed: 1,
                min_count: 2,
                null_keep: 1.0,
            },
        }
    }

    pub fn desk() -> Self {
        Self::preset(Preset::Desk)
    }

    /// `preset` overlaid with the fields present in a JSON object.
    pub fn from_json_over(preset: Preset, json: &str) -> Result<Self, ModelError> {
        let mut base = serde_json::to_value(Self::preset(preset)).expect("config serializes");
        let overlay: serde_json::Value = serde_json::from_str(json)
            .map_err(|e| ModelError::Config(format!("config JSON: {e}")))?;
        let serde_json::Value::Object(fields) = overlay else {
            return Err(ModelError::Config("config JSON must be an object".into()));
        };
        let obj = base.as_object_mut().expect("config is an object");
        for (k, v) in fields {
            if !obj.contains_key(&k) {
                return Err(ModelError::Config(format!("unknown config field {k:?}")));
            }
            obj.insert(k, v);
        }
        let cfg: Self = serde_json::from_value(base)
            .map_err(|e| ModelError::Config(format!("config JSON: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let dims = [
            ("d_w", self.d_w),
            ("d_c", self.d_c),
            ("d_ch", self.d_ch),
            ("d_h", self.d_h),
            ("d_le", self.d_le),
            ("d_l", self.d_l),
            ("d_r", self.d_r),
            ("d_pos", self.d_pos),
            ("char_depth", self.char_depth),
            ("enc_depth", self.enc_depth),
            ("lemma_depth", self.lemma_depth),
            ("sense_depth", self.sense_depth),
            ("minibatch", self.minibatch),
            ("min_count", self.min_count),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(ModelError::Config(format!("{name} must be at least 1")));
            }
        }
        let mut even = vec![("d_ch", self.d_ch)];
        if self.lemma_mode == LemmaMode::Char {
            even.extend([("d_le", self.d_le), ("d_l", self.d_l)]);
        }
        for (name, v) in even {
            if v % 2 != 0 {
                return Err(ModelError::Config(format!(
                    "{name} = {v} must be even: it is split into forward and backward halves"
                )));
            }
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(ModelError::Config(format!(
                "lr must be positive, got {}",
                self.lr
            )));
        }
        if !(self.null_keep > 0.0 && self.null_keep <= 1.0) {
            return Err(ModelError::Config(format!(
                "null_keep must be in (0, 1], got {}",
                self.null_keep
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self::desk()
    }
}
