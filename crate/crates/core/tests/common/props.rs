//! Random-instance generators and brute-force oracles shared by the
//! property tests and the acceptance run.

use std::collections::BTreeSet;

use proptest::prelude::*;

use xsrl::corpus::{Corpus, PredicateFrame, SemanticDependency, Sentence, Token};

pub type Links = BTreeSet<(usize, usize)>;

const ROLES: [&str; 6] = ["A0", "A1", "A2", "AM-TMP", "AM-LOC", "C-A1"];

fn links_in(src_len: usize, tgt_len: usize, max: usize) -> impl Strategy<Value = Links> {
    prop::collection::btree_set((1..=src_len, 1..=tgt_len), 0..=max)
}

/// `(src_len, tgt_len, fwd, rev)` with both link sets in `(src, tgt)` order.
pub fn directional_pair() -> impl Strategy<Value = (usize, usize, Links, Links)> {
    (1usize..=20, 1usize..=20).prop_flat_map(|(s, t)| {
        let max = s * t;
        (
            Just(s),
            Just(t),
            links_in(s, t, max.min(40)),
            links_in(s, t, max.min(40)),
        )
    })
}

/// Links surviving in both sets, minus every link that shares a source or
/// target position with another survivor.
pub fn intersect_oracle(fwd: &Links, rev: &Links) -> Links {
    let both: Vec<(usize, usize)> = fwd.iter().filter(|l| rev.contains(l)).copied().collect();
    let mut out = Links::new();
    for (i, &(s, t)) in both.iter().enumerate() {
        let clash = both
            .iter()
            .enumerate()
            .any(|(k, &(s2, t2))| k != i && (s2 == s || t2 == t));
        if !clash {
            out.insert((s, t));
        }
    }
    out
}

pub fn pharaoh(links: &Links, target_first: bool) -> String {
    links
        .iter()
        .map(|&(s, t)| {
            if target_first {
                format!("{}-{}", t - 1, s - 1)
            } else {
                format!("{}-{}", s - 1, t - 1)
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn sense() -> impl Strategy<Value = String> {
    "[a-z]{1,6}\\.0[1-3]"
}

fn frames(len: usize) -> impl Strategy<Value = Vec<PredicateFrame>> {
    let frame = (
        sense(),
        prop::collection::btree_map(1..=len, prop::sample::select(ROLES.to_vec()), 0..=len),
    );
    prop::collection::btree_map(1..=len, frame, 0..=len.min(4)).prop_map(|m| {
        m.into_iter()
            .map(|(p, (sense, args))| {
                let mut f = PredicateFrame::new(p, sense);
                f.args = args
                    .into_iter()
                    .map(|(a, r)| SemanticDependency::new(a, r))
                    .collect();
                f
            })
            .collect()
    })
}

/// A source sentence of up to 12 tokens with random frames, a target
/// length and a random one-to-one alignment between them.
pub fn projection_case() -> impl Strategy<Value = (Sentence, usize, Links)> {
    (1usize..=12, 1usize..=12).prop_flat_map(|(s, t)| {
        let sentence = frames(s).prop_map(move |fs| {
            let forms: Vec<String> = (1..=s).map(|i| format!("w{i}")).collect();
            let mut out = Sentence::from_forms(&forms);
            out.frames = fs;
            out
        });
        let candidate = prop::collection::vec((1..=s, 1..=t), 0..=s.max(t));
        (sentence, Just(t), candidate.prop_map(injective))
    })
}

/// Keep the first link for each source and each target position.
fn injective(pairs: Vec<(usize, usize)>) -> Links {
    let mut used_s = BTreeSet::new();
    let mut used_t = BTreeSet::new();
    let mut out = Links::new();
    for (s, t) in pairs {
        if !used_s.contains(&s) && !used_t.contains(&t) {
            used_s.insert(s);
            used_t.insert(t);
            out.insert((s, t));
        }
    }
    out
}

/// Expected projection: `(frames as (position, sense), dependencies as
/// (predicate, argument, role), labeled mask)`, by enumerating every
/// target position pair.
#[allow(clippy::type_complexity)]
pub fn project_oracle(
    src: &Sentence,
    tgt_len: usize,
    links: &Links,
) -> (
    BTreeSet<(usize, String)>,
    BTreeSet<(usize, usize, String)>,
    Vec<bool>,
) {
    let source_of = |j: usize| links.iter().find(|&&(_, t)| t == j).map(|&(s, _)| s);
    let mut frames = BTreeSet::new();
    let mut deps = BTreeSet::new();
    for p in 1..=tgt_len {
        let Some(sp) = source_of(p) else { continue };
        let Some(frame) = src.frames.iter().find(|f| f.position == sp) else {
            continue;
        };
        frames.insert((p, frame.sense.clone()));
        for m in 1..=tgt_len {
            let Some(sm) = source_of(m) else { continue };
            if let Some(d) = frame.args.iter().find(|d| d.arg_index == sm) {
                deps.insert((p, m, d.role.clone()));
            }
        }
    }
    let mask = (1..=tgt_len).map(|j| source_of(j).is_some()).collect();
    (frames, deps, mask)
}

/// Frames and dependencies of a sentence as sets.
#[allow(clippy::type_complexity)]
pub fn annotation_sets(
    s: &Sentence,
) -> (BTreeSet<(usize, String)>, BTreeSet<(usize, usize, String)>) {
    let frames = s
        .frames
        .iter()
        .map(|f| (f.position, f.sense.clone()))
        .collect();
    let deps = s
        .frames
        .iter()
        .flat_map(|f| {
            f.args
                .iter()
                .map(move |d| (f.position, d.arg_index, d.role.clone()))
        })
        .collect();
    (frames, deps)
}

fn cell() -> impl Strategy<Value = String> {
    // Anything printable without whitespace; includes multi-byte scripts.
    "[^\\s\\p{C}]{1,8}"
}

fn sentence() -> impl Strategy<Value = Sentence> {
    (1usize..=10).prop_flat_map(|n| {
        let token = (
            cell(),
            prop::option::of(cell()),
            prop::option::of("[A-Z$]{1,4}"),
            prop::collection::vec(cell(), 8),
        );
        (
            prop::collection::vec(token, n),
            frames(n),
            prop::option::of(prop::collection::vec(any::<bool>(), n)),
        )
            .prop_map(|(tokens, frames, mask)| {
                let tokens = tokens
                    .into_iter()
                    .enumerate()
                    .map(|(i, (form, lemma, pos, opaque))| {
                        let mut t = Token::new(i + 1, form);
                        t.lemma = lemma;
                        t.pos = pos;
                        t.opaque = opaque;
                        t
                    })
                    .collect();
                Sentence {
                    tokens,
                    frames,
                    labeled_mask: mask,
                }
            })
    })
}

pub fn corpus() -> impl Strategy<Value = Corpus> {
    prop::collection::vec(sentence(), 0..=6).prop_map(Corpus::new)
}

/// A random segmentation file: each word is 1-4 tagged morphs with
/// exactly one run of stems.
pub fn segmentation_lines() -> impl Strategy<Value = String> {
    segmentation_lines_sized(0..=12)
}

pub fn segmentation_lines_sized(
    entries: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = String> {
    let morph = "[\\p{L}\\p{M}\\p{N}]{1,4}";
    let entry = (
        prop::collection::vec(morph, 0..=1),
        prop::collection::vec(morph, 1..=2),
        prop::collection::vec(morph, 0..=2),
    );
    prop::collection::vec(entry, entries).prop_map(|entries| {
        let mut out = String::new();
        for (pre, stm, suf) in entries {
            let word: String = pre
                .iter()
                .chain(&stm)
                .chain(&suf)
                .map(String::as_str)
                .collect();
            let tagged: Vec<String> = pre
                .iter()
                .map(|m| format!("{m}/PRE"))
                .chain(stm.iter().map(|m| format!("{m}/STM")))
                .chain(suf.iter().map(|m| format!("{m}/SUF")))
                .collect();
            out.push_str(&format!("{word}\t{}\n", tagged.join(" ")));
        }
        out
    })
}

/// Arbitrary non-empty Unicode words, control characters included.
pub fn word() -> impl Strategy<Value = String> {
    prop::collection::vec(any::<char>(), 1..=16).prop_map(|cs| cs.into_iter().collect())
}
