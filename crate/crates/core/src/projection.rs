//! Annotation projection through one-to-one word alignments.
//!
//! A source dependency `(a_p -r-> a_m | sense)` becomes the target
//! dependency `(p -r-> m | sense)` when both target positions are aligned.
//! Frames whose predicate is unaligned vanish; arguments whose token is
//! unaligned are dropped individually. Target tokens without an alignment
//! are marked unlabeled, since their lack of a label is missing data rather
//! than evidence of a non-argument.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment::{
    density, intersect, parse_pharaoh_ordered, AlignmentError, DensityThreshold, OneToOneAlignment,
    PairOrder,
};
use crate::corpus::{Corpus, PredicateFrame, SemanticDependency, Sentence};
use crate::par::{self, Execution};

#[derive(Debug, Error, PartialEq)]
pub enum ProjectionError {
    #[error(
        "alignment covers ({align_src}, {align_tgt}) tokens but the sentences have ({src}, {tgt})"
    )]
    LengthMismatch {
        align_src: usize,
        align_tgt: usize,
        src: usize,
        tgt: usize,
    },

    #[error("input streams diverge at sentence pair {index}: {counts}")]
    StreamMismatch { index: usize, counts: String },

    #[error("sentence pair {index}: {source}")]
    Alignment {
        index: usize,
        #[source]
        source: AlignmentError,
    },
}

/// Project the frames of `src` onto a target sentence with forms `tgt`.
pub fn project_sentence<S: AsRef<str>>(
    src: &Sentence,
    align: &OneToOneAlignment,
    tgt: &[S],
) -> Result<Sentence, ProjectionError> {
    if align.src_len != src.len() || align.tgt_len != tgt.len() {
        return Err(ProjectionError::LengthMismatch {
            align_src: align.src_len,
            align_tgt: align.tgt_len,
            src: src.len(),
            tgt: tgt.len(),
        });
    }
    let mut out = Sentence::from_forms(tgt);
    for frame in &src.frames {
        let Some(p) = align.target_of(frame.position) else {
            continue;
        };
        let mut projected = PredicateFrame::new(p, frame.sense.clone());
        projected.args = frame
            .args
            .iter()
            .filter_map(|d| {
                align
                    .target_of(d.arg_index)
                    .map(|m| SemanticDependency::new(m, d.role.clone()))
            })
            .collect();
        out.frames.push(projected);
    }
    out.labeled_mask = Some(
        (1..=tgt.len())
            .map(|j| align.source_of(j).is_some())
            .collect(),
    );
    out.normalize();
    Ok(out)
}

/// Keep the pairs whose alignment density reaches `threshold` (inclusive),
/// preserving order. Pairs with an empty target are never kept.
pub fn filter_by_density<T>(
    pairs: Vec<(OneToOneAlignment, T)>,
    threshold: DensityThreshold,
) -> Vec<(OneToOneAlignment, T)> {
    pairs
        .into_iter()
        .filter(|(a, _)| density(a).is_ok_and(|d| d.meets(threshold)))
        .collect()
}

/// Corpus size summary: sentences, tokens, distinct forms, predicates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionStats {
    pub sentences: usize,
    pub tokens: usize,
    pub types: usize,
    pub predicates: usize,
}

impl ProjectionStats {
    pub fn of(corpus: &Corpus) -> Self {
        let types: HashSet<&str> = corpus.sentences.iter().flat_map(|s| s.forms()).collect();
        ProjectionStats {
            sentences: corpus.len(),
            tokens: corpus.sentences.iter().map(Sentence::len).sum(),
            types: types.len(),
            predicates: corpus.frame_count(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("stats serialize")
    }

    /// One row in the `#Sent. #Tokens #Types #Pred.` layout with K/M
    /// abbreviations.
    pub fn table_row(&self, label: &str) -> String {
        format!(
            "{label} & {} & {} & {} & {}",
            abbreviate(self.sentences),
            abbreviate(self.tokens),
            abbreviate(self.types),
            abbreviate(self.predicates)
        )
    }
}

fn abbreviate(n: usize) -> String {
    if n >= 1_000_000 {
        format!("{}M", (n as f64 / 1e6).round() as usize)
    } else if n >= 1_000 {
        format!("{}K", (n as f64 / 1e3).round() as usize)
    } else {
        n.to_string()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ProjectionConfig {
    pub threshold: DensityThreshold,
    /// Pair order of the reverse-direction file.
    pub rev_order: PairOrder,
    pub exec: Execution,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig {
            threshold: DensityThreshold::new(4, 5).expect("valid"),
            rev_order: PairOrder::TargetFirst,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProjectionOutput {
    pub corpus: Corpus,
    pub stats: ProjectionStats,
    /// 0-based indices of the sentence pairs that survived filtering.
    pub kept: Vec<usize>,
    pub alignments: Vec<OneToOneAlignment>,
}

/// Intersect one sentence pair's alignment lines.
pub fn intersect_lines(
    fwd: &str,
    rev: &str,
    src_len: usize,
    tgt_len: usize,
    rev_order: PairOrder,
) -> Result<OneToOneAlignment, AlignmentError> {
    let f = parse_pharaoh_ordered(fwd, src_len, tgt_len, PairOrder::SourceFirst)?;
    let r = parse_pharaoh_ordered(rev, src_len, tgt_len, rev_order)?;
    intersect(&f, &r)
}

/// Parse, intersect, project and filter a parallel corpus.
pub fn project_corpus<S: AsRef<str> + Sync>(
    src: &Corpus,
    tgt: &[Vec<S>],
    fwd: &[S],
    rev: &[S],
    config: &ProjectionConfig,
) -> Result<ProjectionOutput, ProjectionError> {
    let lens = [src.len(), tgt.len(), fwd.len(), rev.len()];
    if lens.iter().any(|&l| l != lens[0]) {
        let index = *lens.iter().min().expect("non-empty") + 1;
        return Err(ProjectionError::StreamMismatch {
            index,
            counts: format!(
                "source {} / target {} / forward {} / reverse {} sentences",
                lens[0], lens[1], lens[2], lens[3]
            ),
        });
    }
    let indices: Vec<usize> = (0..src.len()).collect();
    let projected = par::try_map(config.exec, &indices, |&i| {
        let s = &src.sentences[i];
        let t = &tgt[i];
        if t.is_empty() {
            log::warn!("sentence pair {}: empty target sentence skipped", i + 1);
            return Ok(None);
        }
        let wrap = |source| ProjectionError::Alignment {
            index: i + 1,
            source,
        };
        let align = intersect_lines(
            fwd[i].as_ref(),
            rev[i].as_ref(),
            s.len(),
            t.len(),
            config.rev_order,
        )
        .map_err(wrap)?;
        let sentence = project_sentence(s, &align, t)?;
        Ok(Some((align, (i, sentence))))
    })?;
    let pairs: Vec<_> = projected.into_iter().flatten().collect();
    let kept_pairs = filter_by_density(pairs, config.threshold);

    let mut kept = Vec::with_capacity(kept_pairs.len());
    let mut alignments = Vec::with_capacity(kept_pairs.len());
    let mut sentences = Vec::with_capacity(kept_pairs.len());
    for (a, (i, s)) in kept_pairs {
        kept.push(i);
        alignments.push(a);
        sentences.push(s);
    }
    let corpus = Corpus::new(sentences);
    let stats = ProjectionStats::of(&corpus);
    Ok(ProjectionOutput {
        corpus,
        stats,
        kept,
        alignments,
    })
}

/// One sentence per line, tokens separated by spaces.
pub fn read_tokenized(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect()
}
