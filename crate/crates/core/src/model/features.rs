//! Per-token input features shared by the three networks.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::corpus::{Corpus, EmbeddingTable, Sentence, Vocab, PAD, UNK};
use crate::neural::{init, Graph, LstmStack, NodeId, ParamId, ParamStore, Tensor};

/// Vocabularies behind [`TokenEncoder`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenVocabs {
    pub words: Vocab,
    pub chars: Vocab,
    /// Lowercased words of the fixed pre-trained table, in row order.
    pub pretrained: Option<Vocab>,
    /// POS tags, for networks that read them.
    pub pos: Option<Vocab>,
}

impl TokenVocabs {
    pub fn build(
        corpus: &Corpus,
        min_count: usize,
        pretrained: Option<&EmbeddingTable>,
        with_pos: bool,
    ) -> Self {
        let v = crate::corpus::build_vocab(corpus, min_count);
        let pretrained = pretrained.map(|t| {
            // Keys that collide after lowercasing keep the lexicographically first spelling.
            let mut seen = Vec::new();
            for w in t.entries.keys() {
                seen.push(w.to_lowercase());
            }
            Vocab::from_items(&seen)
        });
        let pos = with_pos.then(|| {
            let mut counts: HashMap<&str, usize> = HashMap::new();
            for t in corpus.sentences.iter().flat_map(|s| &s.tokens) {
                if let Some(p) = &t.pos {
                    *counts.entry(p.as_str()).or_default() += 1;
                }
            }
            Vocab::from_counts(&[PAD, UNK], Some(UNK), counts, 1)
        });
        TokenVocabs {
            words: v.words,
            chars: v.chars,
            pretrained,
            pos,
        }
    }
}

/// Values for the frozen pre-trained rows, aligned with
/// [`TokenVocabs::pretrained`].
pub fn pretrained_matrix(vocab: &Vocab, table: &EmbeddingTable) -> Tensor {
    let mut data = vec![0.0; vocab.len() * table.dim];
    let mut filled = vec![false; vocab.len()];
    for (w, v) in &table.entries {
        let id = vocab.id(&w.to_lowercase()).expect("vocab built from table");
        if !filled[id] {
            data[id * table.dim..(id + 1) * table.dim].copy_from_slice(v);
            filled[id] = true;
        }
    }
    Tensor::new(vec![vocab.len(), table.dim], data).expect("shape matches")
}

/// A character BiLSTM summarised as `[last forward state; first backward state]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CharEncoder {
    pub stack: LstmStack,
}

impl CharEncoder {
    pub fn register<R: Rng>(
        store: &mut ParamStore,
        name: &str,
        depth: usize,
        char_dim: usize,
        out_dim: usize,
        rng: &mut R,
    ) -> Result<Self, ModelError> {
        Ok(CharEncoder {
            stack: LstmStack::register(store, name, depth, char_dim, out_dim / 2, rng)?,
        })
    }

    pub fn output_dim(&self) -> usize {
        self.stack.output_dim()
    }

    pub fn encode(
        &self,
        g: &mut Graph<'_>,
        char_emb: ParamId,
        chars: &Vocab,
        form: &str,
    ) -> Result<NodeId, ModelError> {
        if form.is_empty() {
            return Err(ModelError::EmptyForm);
        }
        let mut xs = Vec::with_capacity(form.len());
        for c in form.chars() {
            let mut buf = [0u8; 4];
            let id = chars.id_or_unk(c.encode_utf8(&mut buf)).ok_or_else(|| {
                ModelError::Config("character vocabulary has no unknown symbol".into())
            })?;
            xs.push(g.row(char_emb, id)?);
        }
        let states = self.stack.run(g, &xs)?;
        let last = *states.forward.last().expect("non-empty");
        Ok(g.concat(&[last, states.backward[0]])?)
    }
}

/// Word, pre-trained word, optional POS and character features of a token.
#[derive(Clone, Debug, PartialEq)]
pub struct TokenEncoder {
    pub word_emb: ParamId,
    pub pretrained: Option<ParamId>,
    pub pos_emb: Option<ParamId>,
    pub char_emb: ParamId,
    pub chars: CharEncoder,
    pub d_w: usize,
}

impl TokenEncoder {
    #[allow(clippy::too_many_arguments)]
    pub fn register<R: Rng>(
        store: &mut ParamStore,
        name: &str,
        vocabs: &TokenVocabs,
        d_w: usize,
        d_c: usize,
        d_ch: usize,
        char_depth: usize,
        d_pos: usize,
        rng: &mut R,
    ) -> Result<Self, ModelError> {
        let word_emb = store.add(
            format!("{name}.words"),
            init::embedding(vocabs.words.len(), d_w, rng),
            false,
        )?;
        let pretrained = match &vocabs.pretrained {
            Some(v) => Some(store.add(
                format!("{name}.pretrained"),
                Tensor::zeros(&[v.len(), d_w]),
                true,
            )?),
            None => None,
        };
        let pos_emb = match &vocabs.pos {
            Some(v) => Some(store.add(
                format!("{name}.pos"),
                init::embedding(v.len(), d_pos, rng),
                false,
            )?),
            None => None,
        };
        let char_emb = store.add(
            format!("{name}.chars"),
            init::embedding(vocabs.chars.len(), d_c, rng),
            false,
        )?;
        let chars = CharEncoder::register(
            store,
            &format!("{name}.charlstm"),
            char_depth,
            d_c,
            d_ch,
            rng,
        )?;
        Ok(TokenEncoder {
            word_emb,
            pretrained,
            pos_emb,
            char_emb,
            chars,
            d_w,
        })
    }

    pub fn output_dim(&self, store: &ParamStore) -> usize {
        2 * self.d_w + self.chars.output_dim() + self.pos_emb.map_or(0, |p| store.value(p).cols())
    }

    /// `[x^re; x^pe; x^pos?; x^char]` for every token. Character features
    /// are computed once per distinct form.
    pub fn encode_sentence(
        &self,
        g: &mut Graph<'_>,
        vocabs: &TokenVocabs,
        sentence: &Sentence,
    ) -> Result<Vec<NodeId>, ModelError> {
        let mut char_cache: HashMap<&str, NodeId> = HashMap::new();
        let mut out = Vec::with_capacity(sentence.len());
        for tok in &sentence.tokens {
            let form = tok.form.as_str();
            let wid = vocabs.words.id_or_unk(form).ok_or_else(|| {
                ModelError::Config("word vocabulary has no unknown symbol".into())
            })?;
            let mut parts = vec![g.row(self.word_emb, wid)?];
            let pe = match (self.pretrained, &vocabs.pretrained) {
                (Some(p), Some(v)) => match v.id(&form.to_lowercase()) {
                    Some(id) => g.row(p, id)?,
                    None => g.zeros(self.d_w),
                },
                _ => g.zeros(self.d_w),
            };
            parts.push(pe);
            if let (Some(p), Some(v)) = (self.pos_emb, &vocabs.pos) {
                let tag = tok
                    .pos
                    .as_deref()
                    .ok_or(ModelError::MissingPos { token: tok.index })?;
                parts.push(g.row(p, v.id_or_unk(tag).expect("pos vocab has unk"))?);
            }
            let ch = match char_cache.get(form) {
                Some(&n) => n,
                None => {
                    let n = self.chars.encode(g, self.char_emb, &vocabs.chars, form)?;
                    char_cache.insert(form, n);
                    n
                }
            };
            parts.push(ch);
            out.push(g.concat(&parts)?);
        }
        Ok(out)
    }
}
