//! Model files: a parameter checkpoint plus a JSON sidecar describing the
//! network (kind, configuration, vocabularies, lemma mode and lexicon).
//!
//! The checkpoint records the SHA-256 of the sidecar bytes, and loading
//! refuses a pair whose digests differ. The sidecar lives next to the
//! checkpoint at `<checkpoint>.json`.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    ArgumentClassifier, ArgumentSpec, LemmaMode, ModelError, PredicateIdentifier, PredicateSpec,
    SenseClassifier, SenseSpec,
};
use crate::neural::checkpoint::{read_params, write_params};
use crate::neural::ParamStore;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Sidecar {
    Arguments {
        lemma_mode: LemmaMode,
        spec: ArgumentSpec,
    },
    Senses {
        spec: SenseSpec,
    },
    Predicates {
        spec: PredicateSpec,
    },
}

impl Sidecar {
    pub fn kind(&self) -> &'static str {
        match self {
            Sidecar::Arguments { .. } => "arguments",
            Sidecar::Senses { .. } => "senses",
            Sidecar::Predicates { .. } => "predicates",
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sidecar serializes");
        s.push('\n');
        s
    }
}

/// Any of the three trained networks.
#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Model {
    Arguments(ArgumentClassifier),
    Senses(SenseClassifier),
    Predicates(PredicateIdentifier),
}

impl Model {
    fn sidecar(&self) -> Sidecar {
        match self {
            Model::Arguments(m) => Sidecar::Arguments {
                lemma_mode: m.spec.config.lemma_mode,
                spec: m.spec.clone(),
            },
            Model::Senses(m) => Sidecar::Senses {
                spec: m.spec.clone(),
            },
            Model::Predicates(m) => Sidecar::Predicates {
                spec: m.spec.clone(),
            },
        }
    }

    fn store(&self) -> &ParamStore {
        match self {
            Model::Arguments(m) => &m.store,
            Model::Senses(m) => &m.store,
            Model::Predicates(m) => &m.store,
        }
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        match self {
            Model::Arguments(m) => &mut m.store,
            Model::Senses(m) => &mut m.store,
            Model::Predicates(m) => &mut m.store,
        }
    }

    pub fn kind(&self) -> &'static str {
        self.sidecar().kind()
    }
}

pub fn sidecar_path(checkpoint: &Path) -> PathBuf {
    let mut s = checkpoint.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn io(path: &Path, e: std::io::Error) -> ModelError {
    ModelError::Io(format!("{}: {e}", path.display()))
}

/// Write the checkpoint to `path` and its sidecar to `<path>.json`.
pub fn save(model: &Model, path: &Path) -> Result<(), ModelError> {
    let sidecar = model.sidecar().to_json();
    let hash = digest(sidecar.as_bytes());
    let side = sidecar_path(path);
    fs::write(&side, &sidecar).map_err(|e| io(&side, e))?;
    let mut buf = Vec::new();
    write_params(model.store(), &hash, &mut buf)?;
    fs::write(path, buf).map_err(|e| io(path, e))
}

pub fn load(path: &Path) -> Result<Model, ModelError> {
    let side = sidecar_path(path);
    let sidecar_bytes = fs::read(&side).map_err(|e| io(&side, e))?;
    let file = fs::File::open(path).map_err(|e| io(path, e))?;
    let (params, recorded) = read_params(BufReader::new(file))?;
    let actual = digest(&sidecar_bytes);
    if recorded != actual {
        return Err(ModelError::SidecarMismatch { recorded, actual });
    }
    let sidecar: Sidecar = serde_json::from_slice(&sidecar_bytes)
        .map_err(|e| ModelError::Io(format!("{}: {e}", side.display())))?;
    let mut model = match sidecar {
        Sidecar::Arguments { lemma_mode, spec } => {
            if lemma_mode != spec.config.lemma_mode {
                return Err(ModelError::Config(
                    "sidecar lemma_mode disagrees with its config".into(),
                ));
            }
            Model::Arguments(ArgumentClassifier::build(spec)?)
        }
        Sidecar::Senses { spec } => Model::Senses(SenseClassifier::build(spec)?),
        Sidecar::Predicates { spec } => Model::Predicates(PredicateIdentifier::build(spec)?),
    };
    model.store_mut().load_values(&params)?;
    Ok(model)
}

/// Bytes of a checkpoint as [`save`] would write them (for determinism checks).
pub fn checkpoint_bytes(model: &Model) -> Result<Vec<u8>, ModelError> {
    let hash = digest(model.sidecar().to_json().as_bytes());
    let mut buf = Vec::new();
    write_params(model.store(), &hash, &mut buf)?;
    Ok(buf)
}
