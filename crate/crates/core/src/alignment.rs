//! Word alignments: Pharaoh-format parsing, intersection into one-to-one
//! alignments, and alignment density.
//!
//! On disk indices are 0-based with the source index first (`i-j`); in
//! memory every index is 1-based.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlignmentError {
    #[error("malformed alignment pair {0:?}")]
    MalformedPair(String),

    #[error("alignment pair {pair:?} out of range for lengths ({src_len}, {tgt_len})")]
    OutOfRange {
        pair: String,
        src_len: usize,
        tgt_len: usize,
    },

    #[error("alignment is not one-to-one at link ({0}, {1})")]
    NotInjective(usize, usize),

    #[error("directional alignments disagree on sentence lengths: ({0}, {1}) vs ({2}, {3})")]
    LengthMismatch(usize, usize, usize, usize),

    #[error("density of an empty target sentence is undefined")]
    EmptyTarget,

    #[error("invalid density threshold {0:?}: expected a decimal in [0, 1]")]
    InvalidThreshold(String),
}

/// Which index comes first in each `i-j` pair of a file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PairOrder {
    #[default]
    SourceFirst,
    TargetFirst,
}

/// Links produced by one alignment direction, as 1-based `(src, tgt)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionalAlignment {
    pub links: BTreeSet<(usize, usize)>,
    pub src_len: usize,
    pub tgt_len: usize,
}

impl DirectionalAlignment {
    pub fn new(
        links: impl IntoIterator<Item = (usize, usize)>,
        src_len: usize,
        tgt_len: usize,
    ) -> Self {
        DirectionalAlignment {
            links: links.into_iter().collect(),
            src_len,
            tgt_len,
        }
    }
}

/// Parse a line of `i-j` pairs (0-based, source first) into 1-based links.
pub fn parse_pharaoh(
    line: &str,
    src_len: usize,
    tgt_len: usize,
) -> Result<DirectionalAlignment, AlignmentError> {
    parse_pharaoh_ordered(line, src_len, tgt_len, PairOrder::SourceFirst)
}

/// Like [`parse_pharaoh`], flipping each pair when the file is target-first.
pub fn parse_pharaoh_ordered(
    line: &str,
    src_len: usize,
    tgt_len: usize,
    order: PairOrder,
) -> Result<DirectionalAlignment, AlignmentError> {
    let mut links = BTreeSet::new();
    for tok in line.split_whitespace() {
        let (a, b) = tok
            .split_once('-')
            .ok_or_else(|| AlignmentError::MalformedPair(tok.to_string()))?;
        let a: usize = a
            .parse()
            .map_err(|_| AlignmentError::MalformedPair(tok.to_string()))?;
        let b: usize = b
            .parse()
            .map_err(|_| AlignmentError::MalformedPair(tok.to_string()))?;
        let (s, t) = match order {
            PairOrder::SourceFirst => (a, b),
            PairOrder::TargetFirst => (b, a),
        };
        if s >= src_len || t >= tgt_len {
            return Err(AlignmentError::OutOfRange {
                pair: tok.to_string(),
                src_len,
                tgt_len,
            });
        }
        links.insert((s + 1, t + 1));
    }
    Ok(DirectionalAlignment {
        links,
        src_len,
        tgt_len,
    })
}

/// An injective partial map between target and source positions.
///
/// A target index missing from the map has a missing alignment (`a_j = 0`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneToOneAlignment {
    tgt_to_src: BTreeMap<usize, usize>,
    src_to_tgt: BTreeMap<usize, usize>,
    pub src_len: usize,
    pub tgt_len: usize,
}

impl OneToOneAlignment {
    pub fn empty(src_len: usize, tgt_len: usize) -> Self {
        OneToOneAlignment {
            tgt_to_src: BTreeMap::new(),
            src_to_tgt: BTreeMap::new(),
            src_len,
            tgt_len,
        }
    }

    /// Build from 1-based `(src, tgt)` links; rejects non-injective or
    /// out-of-range input.
    pub fn from_links(
        links: impl IntoIterator<Item = (usize, usize)>,
        src_len: usize,
        tgt_len: usize,
    ) -> Result<Self, AlignmentError> {
        let mut a = Self::empty(src_len, tgt_len);
        for (s, t) in links {
            if s == 0 || t == 0 || s > src_len || t > tgt_len {
                return Err(AlignmentError::OutOfRange {
                    pair: format!("{}-{}", s.wrapping_sub(1), t.wrapping_sub(1)),
                    src_len,
                    tgt_len,
                });
            }
            if a.tgt_to_src.get(&t).is_some_and(|&x| x != s)
                || a.src_to_tgt.get(&s).is_some_and(|&x| x != t)
            {
                return Err(AlignmentError::NotInjective(s, t));
            }
            a.tgt_to_src.insert(t, s);
            a.src_to_tgt.insert(s, t);
        }
        Ok(a)
    }

    /// Source index aligned to target index `tgt`.
    pub fn source_of(&self, tgt: usize) -> Option<usize> {
        self.tgt_to_src.get(&tgt).copied()
    }

    /// Target index aligned to source index `src`.
    pub fn target_of(&self, src: usize) -> Option<usize> {
        self.src_to_tgt.get(&src).copied()
    }

    /// Links as `(src, tgt)` pairs, ordered by source index.
    pub fn links(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.src_to_tgt.iter().map(|(&s, &t)| (s, t))
    }

    pub fn len(&self) -> usize {
        self.tgt_to_src.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tgt_to_src.is_empty()
    }

    /// Pharaoh line, 0-based, source first.
    pub fn to_pharaoh(&self) -> String {
        self.links()
            .map(|(s, t)| format!("{}-{}", s - 1, t - 1))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Intersect two directional alignments given in the same `(src, tgt)`
/// orientation. Links of the intersection that share a source or a target
/// index with another link are all dropped.
pub fn intersect(
    fwd: &DirectionalAlignment,
    rev: &DirectionalAlignment,
) -> Result<OneToOneAlignment, AlignmentError> {
    if (fwd.src_len, fwd.tgt_len) != (rev.src_len, rev.tgt_len) {
        return Err(AlignmentError::LengthMismatch(
            fwd.src_len,
            fwd.tgt_len,
            rev.src_len,
            rev.tgt_len,
        ));
    }
    let common: Vec<(usize, usize)> = fwd.links.intersection(&rev.links).copied().collect();
    let mut src_count: BTreeMap<usize, usize> = BTreeMap::new();
    let mut tgt_count: BTreeMap<usize, usize> = BTreeMap::new();
    for &(s, t) in &common {
        *src_count.entry(s).or_default() += 1;
        *tgt_count.entry(t).or_default() += 1;
    }
    let kept = common
        .into_iter()
        .filter(|(s, t)| src_count[s] == 1 && tgt_count[t] == 1);
    OneToOneAlignment::from_links(kept, fwd.src_len, fwd.tgt_len)
}

/// Fraction of aligned target tokens, kept as an exact ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Density {
    pub aligned: usize,
    pub total: usize,
}

impl Density {
    pub fn as_f64(self) -> f64 {
        self.aligned as f64 / self.total as f64
    }

    /// `aligned / total >= threshold`, compared exactly.
    pub fn meets(self, threshold: DensityThreshold) -> bool {
        (self.aligned as u128) * threshold.den as u128
            >= (threshold.num as u128) * self.total as u128
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.aligned, self.total)
    }
}

pub fn density(alignment: &OneToOneAlignment) -> Result<Density, AlignmentError> {
    if alignment.tgt_len == 0 {
        return Err(AlignmentError::EmptyTarget);
    }
    let aligned = (1..=alignment.tgt_len)
        .filter(|j| alignment.source_of(*j).is_some())
        .count();
    Ok(Density {
        aligned,
        total: alignment.tgt_len,
    })
}

/// A density threshold held as an exact decimal fraction, so that `0.8`
/// means 4/5 rather than the nearest binary double.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DensityThreshold {
    num: u64,
    den: u64,
}

impl DensityThreshold {
    pub fn new(num: u64, den: u64) -> Result<Self, AlignmentError> {
        if den == 0 || num > den {
            return Err(AlignmentError::InvalidThreshold(format!("{num}/{den}")));
        }
        Ok(DensityThreshold { num, den })
    }

    /// Interpret `value` through its shortest decimal representation.
    pub fn from_f64(value: f64) -> Result<Self, AlignmentError> {
        if !value.is_finite() {
            return Err(AlignmentError::InvalidThreshold(value.to_string()));
        }
        value.to_string().parse()
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl FromStr for DensityThreshold {
    type Err = AlignmentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AlignmentError::InvalidThreshold(s.to_string());
        let (int, frac) = s.trim().split_once('.').unwrap_or((s.trim(), ""));
        if int.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 18 {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let frac: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let num = int
            .checked_mul(den)
            .and_then(|x| x.checked_add(frac))
            .ok_or_else(bad)?;
        DensityThreshold::new(num, den).map_err(|_| bad())
    }
}

impl fmt::Display for DensityThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_f64())
    }
}
