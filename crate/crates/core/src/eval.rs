//! Labeled precision, recall and F1 over semantic dependencies.
//!
//! Scored items are labeled `(predicate, argument, role)` edges plus one
//! sense item per predicate. In [`SenseMode::Gold`] the predicted sense at
//! every gold predicate position is replaced by the gold sense before
//! counting.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Sentence};
use crate::par::{self, Execution};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("gold has {gold} sentences, prediction has {pred}")]
    SentenceCount { gold: usize, pred: usize },

    #[error("sentence {sentence}: gold has {gold} tokens, prediction has {pred}")]
    TokenCount {
        sentence: usize,
        gold: usize,
        pred: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SenseMode {
    Gold,
    Auto,
}

impl fmt::Display for SenseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SenseMode::Gold => "gold",
            SenseMode::Auto => "auto",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub gold: usize,
    pub pred: usize,
    pub correct: usize,
}

impl Counts {
    fn merge(&mut self, other: &Counts) {
        self.gold += other.gold;
        self.pred += other.pred;
        self.correct += other.correct;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub n_gold: usize,
    pub n_pred: usize,
    pub n_correct: usize,
    pub per_role: BTreeMap<String, Counts>,
}

impl Scores {
    fn from_counts(total: Counts, per_role: BTreeMap<String, Counts>) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(total.correct, total.pred);
        let recall = ratio(total.correct, total.gold);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Scores {
            precision,
            recall,
            f1,
            n_gold: total.gold,
            n_pred: total.pred,
            n_correct: total.correct,
            per_role,
        }
    }
}

#[derive(Default)]
struct Tally {
    total: Counts,
    per_role: BTreeMap<String, Counts>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.total.merge(&other.total);
        for (role, c) in other.per_role {
            self.per_role.entry(role).or_default().merge(&c);
        }
        self
    }
}

fn edges(s: &Sentence) -> HashSet<(usize, usize, &str)> {
    s.frames
        .iter()
        .flat_map(|f| {
            f.args
                .iter()
                .map(move |a| (f.position, a.arg_index, a.role.as_str()))
        })
        .collect()
}

fn tally_sentence(gold: &Sentence, pred: &Sentence, mode: SenseMode) -> Tally {
    let mut t = Tally::default();
    let g_edges = edges(gold);
    let p_edges = edges(pred);
    for &(_, _, role) in &g_edges {
        t.per_role.entry(role.to_string()).or_default().gold += 1;
    }
    for e in &p_edges {
        let c = t.per_role.entry(e.2.to_string()).or_default();
        c.pred += 1;
        if g_edges.contains(e) {
            c.correct += 1;
        }
    }
    for c in t.per_role.values() {
        t.total.merge(c);
    }

    let g_senses: BTreeMap<usize, &str> = gold
        .frames
        .iter()
        .map(|f| (f.position, f.sense.as_str()))
        .collect();
    let p_senses: BTreeMap<usize, &str> = pred
        .frames
        .iter()
        .map(|f| (f.position, f.sense.as_str()))
        .collect();
    t.total.gold += g_senses.len();
    t.total.pred += p_senses.len();
    for (pos, sense) in &p_senses {
        let correct = match (mode, g_senses.get(pos)) {
            (_, None) => false,
            (SenseMode::Gold, Some(_)) => true,
            (SenseMode::Auto, Some(g)) => g == sense,
        };
        t.total.correct += usize::from(correct);
    }
    t
}

/// Score `pred` against `gold`; both must have the same sentences and
/// token counts.
pub fn score(
    gold: &Corpus,
    pred: &Corpus,
    mode: SenseMode,
    exec: Execution,
) -> Result<Scores, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::SentenceCount {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    for (i, (g, p)) in gold.sentences.iter().zip(&pred.sentences).enumerate() {
        if g.len() != p.len() {
            return Err(EvalError::TokenCount {
                sentence: i + 1,
                gold: g.len(),
                pred: p.len(),
            });
        }
    }
    let pairs: Vec<_> = gold.sentences.iter().zip(&pred.sentences).collect();
    let tallies = par::map(exec, &pairs, |(g, p)| tally_sentence(g, p, mode));
    let t = tallies.into_iter().fold(Tally::default(), Tally::merge);
    Ok(Scores::from_counts(t.total, t.per_role))
}

/// `"F1_gold (F1_auto)"` in percent with one decimal.
pub fn format_cell(gold_f1: f64, auto_f1: f64) -> String {
    format!("{:.1} ({:.1})", gold_f1 * 100.0, auto_f1 * 100.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub gold: Scores,
    pub auto: Scores,
}

impl Report {
    pub fn compute(gold: &Corpus, pred: &Corpus, exec: Execution) -> Result<Self, EvalError> {
        Ok(Report {
            gold: score(gold, pred, SenseMode::Gold, exec)?,
            auto: score(gold, pred, SenseMode::Auto, exec)?,
        })
    }

    pub fn text(&self) -> String {
        format_cell(self.gold.f1, self.auto.f1)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
