use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::Corpus;

pub const PAD: &str = "<pad>";
pub const UNK: &str = "<unk>";
/// The non-argument class. Only ever appears in the role vocabulary.
pub const NULL_ROLE: &str = "NULL";

/// Dense bijection between strings and ids `0..len`.
///
/// Special symbols occupy the first ids; regular items follow in order of
/// descending frequency, ties broken lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "VocabRepr", into = "VocabRepr")]
pub struct Vocab {
    items: Vec<String>,
    specials: usize,
    unk: Option<usize>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    items: Vec<String>,
    specials: usize,
    unk: Option<usize>,
}

impl From<VocabRepr> for Vocab {
    fn from(r: VocabRepr) -> Self {
        let index = r
            .items
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Vocab {
            items: r.items,
            specials: r.specials,
            unk: r.unk,
            index,
        }
    }
}

impl From<Vocab> for VocabRepr {
    fn from(v: Vocab) -> Self {
        VocabRepr {
            items: v.items,
            specials: v.specials,
            unk: v.unk,
        }
    }
}

impl Vocab {
    /// Build from occurrence counts. `specials` come first; `unk`, if given,
    /// must be one of them.
    pub fn from_counts<'a, I>(
        specials: &[&str],
        unk: Option<&str>,
        counts: I,
        min_count: usize,
    ) -> Self
    where
        I: IntoIterator<Item = (&'a str, usize)>,
    {
        let mut items: Vec<String> = specials.iter().map(|s| s.to_string()).collect();
        let mut regular: Vec<(&str, usize)> = counts
            .into_iter()
            .filter(|&(s, c)| c >= min_count && !specials.contains(&s))
            .collect();
        regular.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        items.extend(regular.into_iter().map(|(s, _)| s.to_string()));
        let unk = unk.map(|u| {
            specials
                .iter()
                .position(|s| *s == u)
                .expect("unk must be a special")
        });
        VocabRepr {
            items,
            specials: specials.len(),
            unk,
        }
        .into()
    }

    /// Vocabulary over `items` in the given order, with no specials.
    pub fn from_items<S: AsRef<str>>(items: &[S]) -> Self {
        let mut seen = std::collections::HashSet::new();
        let items = items
            .iter()
            .map(|s| s.as_ref().to_string())
            .filter(|s| seen.insert(s.clone()))
            .collect();
        VocabRepr {
            items,
            specials: 0,
            unk: None,
        }
        .into()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn id(&self, item: &str) -> Option<usize> {
        self.index.get(item).copied()
    }

    /// Id of `item`, falling back to the unknown symbol (or `None` when the
    /// vocabulary has none).
    pub fn id_or_unk(&self, item: &str) -> Option<usize> {
        self.id(item).or(self.unk)
    }

    pub fn item(&self, id: usize) -> Option<&str> {
        self.items.get(id).map(String::as_str)
    }

    pub fn unk_id(&self) -> Option<usize> {
        self.unk
    }

    pub fn special_count(&self) -> usize {
        self.specials
    }

    /// Regular (non-special) items in id order.
    pub fn regular_items(&self) -> &[String] {
        &self.items[self.specials..]
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }
}

/// The four vocabularies a corpus induces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabs {
    pub words: Vocab,
    pub chars: Vocab,
    pub roles: Vocab,
    pub senses: Vocab,
}

/// Word vocabulary uses `min_count`; characters are kept from a single
/// occurrence; the role vocabulary has `NULL` at id 0.
pub fn build_vocab(corpus: &Corpus, min_count: usize) -> Vocabs {
    let min_count = min_count.max(1);
    let mut words: HashMap<&str, usize> = HashMap::new();
    let mut chars: HashMap<String, usize> = HashMap::new();
    let mut roles: HashMap<&str, usize> = HashMap::new();
    let mut senses: HashMap<&str, usize> = HashMap::new();
    for s in &corpus.sentences {
        for t in &s.tokens {
            *words.entry(t.form.as_str()).or_default() += 1;
            for c in t.form.chars() {
                *chars.entry(c.to_string()).or_default() += 1;
            }
        }
        for f in &s.frames {
            *senses.entry(f.sense.as_str()).or_default() += 1;
            for d in &f.args {
                *roles.entry(d.role.as_str()).or_default() += 1;
            }
        }
    }
    Vocabs {
        words: Vocab::from_counts(&[PAD, UNK], Some(UNK), words, min_count),
        chars: Vocab::from_counts(
            &[PAD, UNK],
            Some(UNK),
            chars.iter().map(|(c, n)| (c.as_str(), *n)),
            1,
        ),
        roles: Vocab::from_counts(&[NULL_ROLE], None, roles, 1),
        senses: Vocab::from_counts(&[], None, senses, 1),
    }
}
