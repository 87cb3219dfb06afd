//! Single-stem extraction for lemma features.
//!
//! A [`StemLexicon`] maps known words directly to a stem and falls back to
//! fixed-affix stripping for everything else: remove the longest known
//! prefix, then the longest known suffix, never consuming the whole word.
//! The same structure backs supervised lemma files, where the affix sets are
//! empty and unknown words stem to themselves.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MorphologyError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("read error: {0}")]
    Io(String),
}

/// Where a lexicon's direct entries came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LexiconSource {
    Segmentation,
    Lemmas,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StemLexicon {
    pub source: LexiconSource,
    pub prefixes: BTreeSet<String>,
    pub suffixes: BTreeSet<String>,
    pub known_stems: BTreeMap<String, String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum MorphTag {
    Prefix,
    Stem,
    Suffix,
}

impl StemLexicon {
    pub fn empty(source: LexiconSource) -> Self {
        StemLexicon {
            source,
            prefixes: BTreeSet::new(),
            suffixes: BTreeSet::new(),
            known_stems: BTreeMap::new(),
        }
    }

    /// Stem of `word`: the direct entry if present, otherwise affix
    /// stripping. Non-empty for a non-empty `word`, and a substring of it
    /// except for direct entries of a lemma lexicon.
    pub fn stem(&self, word: &str) -> String {
        if let Some(s) = self.known_stems.get(word) {
            return s.clone();
        }
        let chars: Vec<char> = word.chars().collect();
        let mut start = 0;
        let mut end = chars.len();
        if let Some(p) = longest_match(&self.prefixes, &chars[start..end], Side::Front) {
            start += p;
        }
        if let Some(s) = longest_match(&self.suffixes, &chars[start..end], Side::Back) {
            end -= s;
        }
        chars[start..end].iter().collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("lexicon serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MorphologyError> {
        serde_json::from_str(text).map_err(|e| MorphologyError::Malformed {
            line: e.line(),
            message: e.to_string(),
        })
    }
}

#[derive(Clone, Copy)]
enum Side {
    Front,
    Back,
}

/// Length in chars of the longest affix matching at `side` that leaves at
/// least one character.
fn longest_match(affixes: &BTreeSet<String>, word: &[char], side: Side) -> Option<usize> {
    (1..word.len()).rev().find(|&k| {
        let piece: String = match side {
            Side::Front => word[..k].iter().collect(),
            Side::Back => word[word.len() - k..].iter().collect(),
        };
        affixes.contains(&piece)
    })
}

fn parse_morph(token: &str, line: usize) -> Result<(String, MorphTag), MorphologyError> {
    let bad = |message: String| MorphologyError::Malformed { line, message };
    let (morph, tag) = token
        .rsplit_once('/')
        .ok_or_else(|| bad(format!("morph {token:?} has no tag")))?;
    if morph.is_empty() {
        return Err(bad(format!("empty morph in {token:?}")));
    }
    let tag = match tag {
        "PRE" => MorphTag::Prefix,
        "STM" => MorphTag::Stem,
        "SUF" => MorphTag::Suffix,
        other => return Err(bad(format!("unknown morph tag {other:?}"))),
    };
    Ok((morph.to_string(), tag))
}

/// Compile `word<TAB>morph/TAG morph/TAG ...` lines with tags PRE, STM and
/// SUF. The stem of a word is its first maximal run of STM morphs.
pub fn compile_lexicon<R: BufRead>(reader: R) -> Result<StemLexicon, MorphologyError> {
    let mut lex = StemLexicon::empty(LexiconSource::Segmentation);
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| MorphologyError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let (word, analysis) = line
            .split_once('\t')
            .ok_or_else(|| MorphologyError::Malformed {
                line: lineno,
                message: "expected word<TAB>analysis".to_string(),
            })?;
        let morphs = analysis
            .split_whitespace()
            .map(|m| parse_morph(m, lineno))
            .collect::<Result<Vec<_>, _>>()?;
        let spelled: String = morphs.iter().map(|(m, _)| m.as_str()).collect();
        if spelled != word {
            return Err(MorphologyError::Malformed {
                line: lineno,
                message: format!("segmentation {spelled:?} does not spell {word:?}"),
            });
        }

        let mut stem = String::new();
        let mut run_done = false;
        for (morph, tag) in &morphs {
            match tag {
                MorphTag::Prefix => {
                    lex.prefixes.insert(morph.clone());
                }
                MorphTag::Suffix => {
                    lex.suffixes.insert(morph.clone());
                }
                MorphTag::Stem => {}
            }
            if !run_done {
                if *tag == MorphTag::Stem {
                    stem.push_str(morph);
                } else if !stem.is_empty() {
                    run_done = true;
                }
            }
        }
        if stem.is_empty() {
            log::warn!("line {lineno}: {word:?} has no STM morph; using the word as its stem");
            stem = word.to_string();
        }
        lex.known_stems.insert(word.to_string(), stem);
    }
    Ok(lex)
}

/// Supervised lemmas from `word<TAB>lemma` lines.
pub fn lemma_lexicon<R: BufRead>(reader: R) -> Result<StemLexicon, MorphologyError> {
    let mut lex = StemLexicon::empty(LexiconSource::Lemmas);
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| MorphologyError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        match line.split_once('\t') {
            Some((word, lemma)) if !word.is_empty() && !lemma.is_empty() => {
                lex.known_stems.insert(word.to_string(), lemma.to_string());
            }
            _ => {
                return Err(MorphologyError::Malformed {
                    line: i + 1,
                    message: "expected word<TAB>lemma".to_string(),
                })
            }
        }
    }
    Ok(lex)
}
