//! A single sense classifier for all predicates: one deep BiLSTM pass per
//! sentence and a softmax over the global sense vocabulary at each
//! predicate position.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{pretrained_matrix, TokenEncoder, TokenVocabs};
use super::train::Trainable;
use super::{argmax, ModelConfig, ModelError};
use crate::corpus::{Corpus, EmbeddingTable, Sentence, Vocab};
use crate::neural::{init, Graph, LstmStack, NodeId, ParamId, ParamStore, Tensor};
use crate::par::{self, Execution};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SenseSpec {
    pub config: ModelConfig,
    pub tokens: TokenVocabs,
    pub senses: Vocab,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SenseClassifier {
    pub spec: SenseSpec,
    pub store: ParamStore,
    tokens: TokenEncoder,
    encoder: LstmStack,
    out_w: ParamId,
    out_b: ParamId,
}

impl SenseClassifier {
    pub fn new(
        config: ModelConfig,
        corpus: &Corpus,
        pretrained: Option<&EmbeddingTable>,
    ) -> Result<Self, ModelError> {
        config.validate()?;
        let senses = crate::corpus::build_vocab(corpus, 1).senses;
        if senses.is_empty() {
            return Err(ModelError::NoTrainingSignal);
        }
        let spec = SenseSpec {
            tokens: TokenVocabs::build(corpus, config.min_count, pretrained, false),
            senses,
            config,
        };
        let mut model = Self::build(spec)?;
        if let (Some(t), Some(id), Some(v)) = (
            pretrained,
            model.tokens.pretrained,
            &model.spec.tokens.pretrained,
        ) {
            if t.dim != model.spec.config.d_w {
                return Err(ModelError::Config(format!(
                    "pre-trained embeddings have dimension {}, but d_w = {}",
                    t.dim, model.spec.config.d_w
                )));
            }
            *model.store.value_mut(id) = pretrained_matrix(v, t);
        }
        Ok(model)
    }

    pub fn build(spec: SenseSpec) -> Result<Self, ModelError> {
        let c = &spec.config;
        c.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
        let mut store = ParamStore::new();
        let tokens = TokenEncoder::register(
            &mut store,
            "tok",
            &spec.tokens,
            c.d_w,
            c.d_c,
            c.d_ch,
            c.char_depth,
            c.d_pos,
            &mut rng,
        )?;
        let d_in = tokens.output_dim(&store);
        let encoder = LstmStack::register(&mut store, "enc", c.sense_depth, d_in, c.d_h, &mut rng)?;
        let out_w = store.add(
            "out.w",
            init::glorot(spec.senses.len(), 2 * c.d_h, &mut rng),
            false,
        )?;
        let out_b = store.add("out.b", Tensor::zeros(&[spec.senses.len()]), false)?;
        Ok(SenseClassifier {
            spec,
            store,
            tokens,
            encoder,
            out_w,
            out_b,
        })
    }

    /// Sense logits at each of `positions` (1-based).
    pub fn logits(
        &self,
        g: &mut Graph<'_>,
        sentence: &Sentence,
        positions: &[usize],
    ) -> Result<Vec<NodeId>, ModelError> {
        for &p in positions {
            if p == 0 || p > sentence.len() {
                return Err(ModelError::InvalidPredicate {
                    position: p,
                    len: sentence.len(),
                });
            }
        }
        if positions.is_empty() {
            return Ok(Vec::new());
        }
        let xs = self
            .tokens
            .encode_sentence(g, &self.spec.tokens, sentence)?;
        let states = crate::neural::bilstm_encode(g, &self.encoder, &xs)?;
        let w = g.param(self.out_w);
        let b = g.param(self.out_b);
        positions
            .iter()
            .map(|&p| {
                let z = g.matvec(w, states[p - 1])?;
                Ok(g.add(z, b)?)
            })
            .collect()
    }

    /// Most probable sense at each position; never fails for unseen words.
    pub fn disambiguate(
        &self,
        sentence: &Sentence,
        positions: &[usize],
    ) -> Result<Vec<String>, ModelError> {
        let mut g = Graph::new(&self.store);
        let logits = self.logits(&mut g, sentence, positions)?;
        Ok(logits
            .iter()
            .map(|&l| {
                self.spec
                    .senses
                    .item(argmax(g.value(l)))
                    .expect("sense id in range")
                    .to_string()
            })
            .collect())
    }

    /// Replace the sense of every frame with the predicted one.
    pub fn relabel_corpus(&self, corpus: &Corpus, exec: Execution) -> Result<Corpus, ModelError> {
        let sentences = par::try_map(exec, &corpus.sentences, |s| {
            let senses = self.disambiguate(s, &s.predicate_positions())?;
            let mut out = s.clone();
            for (f, sense) in out.frames.iter_mut().zip(senses) {
                f.sense = sense;
            }
            Ok::<_, ModelError>(out)
        })?;
        Ok(Corpus::new(sentences))
    }
}

impl Trainable for SenseClassifier {
    fn store(&self) -> &ParamStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    fn instances(&self, sentence: &Sentence) -> usize {
        sentence.frames.len()
    }

    fn loss(
        &self,
        g: &mut Graph<'_>,
        sentence: &Sentence,
        _rng: &mut ChaCha8Rng,
    ) -> Result<Option<NodeId>, ModelError> {
        if sentence.frames.is_empty() {
            return Ok(None);
        }
        let logits = self.logits(g, sentence, &sentence.predicate_positions())?;
        let mut losses = Vec::with_capacity(logits.len());
        for (f, l) in sentence.frames.iter().zip(logits) {
            let gold = self.spec.senses.id(&f.sense).ok_or_else(|| {
                ModelError::Config(format!(
                    "sense {:?} is not in the sense vocabulary",
                    f.sense
                ))
            })?;
            losses.push(g.softmax_xent(l, gold)?);
        }
        Ok(Some(g.sum(&losses)?))
    }
}
