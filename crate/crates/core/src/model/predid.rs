//! Source-side predicate identification from words, POS tags and
//! characters, with a binary decision per token.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{pretrained_matrix, TokenEncoder, TokenVocabs};
use super::train::Trainable;
use super::{ModelConfig, ModelError};
use crate::corpus::{Corpus, EmbeddingTable, Sentence};
use crate::neural::{init, softmax, Graph, LstmStack, NodeId, ParamId, ParamStore, Tensor};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredicateSpec {
    pub config: ModelConfig,
    pub tokens: TokenVocabs,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredicateIdentifier {
    pub spec: PredicateSpec,
    pub store: ParamStore,
    tokens: TokenEncoder,
    encoder: LstmStack,
    out_w: ParamId,
    out_b: ParamId,
}

fn require_pos(corpus: &Corpus) -> Result<(), ModelError> {
    for s in &corpus.sentences {
        if let Some(t) = s.tokens.iter().find(|t| t.pos.is_none()) {
            return Err(ModelError::MissingPos { token: t.index });
        }
    }
    Ok(())
}

impl PredicateIdentifier {
    pub fn new(
        config: ModelConfig,
        corpus: &Corpus,
        pretrained: Option<&EmbeddingTable>,
    ) -> Result<Self, ModelError> {
        config.validate()?;
        require_pos(corpus)?;
        let spec = PredicateSpec {
            tokens: TokenVocabs::build(corpus, config.min_count, pretrained, true),
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

    pub fn build(spec: PredicateSpec) -> Result<Self, ModelError> {
        let c = &spec.config;
        c.validate()?;
        if spec.tokens.pos.is_none() {
            return Err(ModelError::Config(
                "predicate identifier needs a POS vocabulary".into(),
            ));
        }
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
        let encoder = LstmStack::register(&mut store, "enc", c.enc_depth, d_in, c.d_h, &mut rng)?;
        let out_w = store.add("out.w", init::glorot(2, 2 * c.d_h, &mut rng), false)?;
        let out_b = store.add("out.b", Tensor::zeros(&[2]), false)?;
        Ok(PredicateIdentifier {
            spec,
            store,
            tokens,
            encoder,
            out_w,
            out_b,
        })
    }

    /// Two-class logits `[not predicate, predicate]` per token.
    pub fn logits(
        &self,
        g: &mut Graph<'_>,
        sentence: &Sentence,
    ) -> Result<Vec<NodeId>, ModelError> {
        if sentence.is_empty() {
            return Ok(Vec::new());
        }
        let xs = self
            .tokens
            .encode_sentence(g, &self.spec.tokens, sentence)?;
        let states = crate::neural::bilstm_encode(g, &self.encoder, &xs)?;
        let w = g.param(self.out_w);
        let b = g.param(self.out_b);
        states
            .iter()
            .map(|&h| {
                let z = g.matvec(w, h)?;
                Ok(g.add(z, b)?)
            })
            .collect()
    }

    /// 1-based positions whose predicate probability exceeds 0.5.
    pub fn identify(&self, sentence: &Sentence) -> Result<Vec<usize>, ModelError> {
        let mut g = Graph::new(&self.store);
        let logits = self.logits(&mut g, sentence)?;
        Ok(logits
            .iter()
            .enumerate()
            .filter(|(_, &l)| softmax(g.value(l))[1] > 0.5)
            .map(|(i, _)| i + 1)
            .collect())
    }
}

impl Trainable for PredicateIdentifier {
    fn store(&self) -> &ParamStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    fn instances(&self, sentence: &Sentence) -> usize {
        sentence.len()
    }

    fn loss(
        &self,
        g: &mut Graph<'_>,
        sentence: &Sentence,
        _rng: &mut ChaCha8Rng,
    ) -> Result<Option<NodeId>, ModelError> {
        if sentence.is_empty() {
            return Ok(None);
        }
        let logits = self.logits(g, sentence)?;
        let mut losses = Vec::with_capacity(logits.len());
        for (i, l) in logits.into_iter().enumerate() {
            let gold = usize::from(sentence.frame_at(i + 1).is_some());
            losses.push(g.softmax_xent(l, gold)?);
        }
        Ok(Some(g.sum(&losses)?))
    }
}
