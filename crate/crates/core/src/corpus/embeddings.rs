use std::collections::BTreeMap;
use std::io::BufRead;

use super::CorpusError;

/// Word vectors in the plain text format word2vec-style tools emit.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub entries: BTreeMap<String, Vec<f64>>,
    pub trainable: bool,
}

impl EmbeddingTable {
    pub fn empty(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            entries: BTreeMap::new(),
            trainable: false,
        }
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Parse `word v1 ... vd` lines. An optional `count dim` header on the
/// first line is detected and skipped; later duplicates overwrite earlier
/// ones.
pub fn load_embeddings<R: BufRead>(
    reader: R,
    expected_dim: usize,
) -> Result<EmbeddingTable, CorpusError> {
    let mut table = EmbeddingTable::empty(expected_dim);
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| CorpusError::Io(e.to_string()))?;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else {
            continue;
        };
        let rest: Vec<&str> = fields.collect();
        if lineno == 1 && is_header(word, &rest, expected_dim) {
            continue;
        }
        if rest.len() != expected_dim {
            return Err(CorpusError::EmbeddingDimension {
                line: lineno,
                expected: expected_dim,
                found: rest.len(),
            });
        }
        let vector = rest
            .iter()
            .map(|v| match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(CorpusError::EmbeddingValue {
                    line: lineno,
                    value: v.to_string(),
                }),
            })
            .collect::<Result<Vec<f64>, _>>()?;
        table.entries.insert(word.to_string(), vector);
    }
    Ok(table)
}

fn is_header(first: &str, rest: &[&str], expected_dim: usize) -> bool {
    // With dim 1, "3 5" is indistinguishable from a one-component vector.
    expected_dim != 1
        && rest.len() == 1
        && first.parse::<usize>().is_ok()
        && rest[0].parse::<usize>() == Ok(expected_dim)
}
