//! Argument classifier: one BiLSTM pass per predicate over inputs that mark
//! the predicate, and a decoder whose per-role weights are generated from
//! the predicate lemma and a role embedding.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{pretrained_matrix, CharEncoder, TokenEncoder, TokenVocabs};
use super::train::Trainable;
use super::{argmax, LemmaMode, ModelConfig, ModelError};
use crate::corpus::{
    Corpus, EmbeddingTable, PredicateFrame, SemanticDependency, Sentence, Vocab, PAD, UNK,
};
use crate::morphology::StemLexicon;
use crate::neural::{init, softmax, Graph, LstmStack, NodeId, ParamId, ParamStore};
use crate::par::{self, Execution};

/// Everything needed to rebuild the network's structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArgumentSpec {
    pub config: ModelConfig,
    pub tokens: TokenVocabs,
    /// Role vocabulary; id 0 is NULL.
    pub roles: Vocab,
    /// Stem vocabulary in ustem and slem modes.
    pub stems: Option<Vocab>,
    pub lexicon: Option<StemLexicon>,
}

#[derive(Clone, Debug, PartialEq)]
enum LemmaSource {
    Chars(CharEncoder),
    Table(ParamId),
}

#[derive(Clone, Debug, PartialEq)]
struct Layout {
    tokens: TokenEncoder,
    lemma_in: LemmaSource,
    lemma_dec: LemmaSource,
    encoder: LstmStack,
    /// `4·d_h × (d_l + d_r)`.
    u: ParamId,
    /// `roles × d_r`.
    role_emb: ParamId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArgumentClassifier {
    pub spec: ArgumentSpec,
    pub store: ParamStore,
    layout: Layout,
}

fn role_vocab(corpus: &Corpus) -> Vocab {
    crate::corpus::build_vocab(corpus, 1).roles
}

impl ArgumentClassifier {
    /// A freshly initialized classifier with vocabularies read off `corpus`.
    pub fn new(
        config: ModelConfig,
        corpus: &Corpus,
        pretrained: Option<&EmbeddingTable>,
        lexicon: Option<StemLexicon>,
    ) -> Result<Self, ModelError> {
        config.validate()?;
        if let Some(t) = pretrained {
            if t.dim != config.d_w {
                return Err(ModelError::Config(format!(
                    "pre-trained embeddings have dimension {}, but d_w = {}",
                    t.dim, config.d_w
                )));
            }
        }
        let lexicon = match (config.lemma_mode.uses_lexicon(), lexicon) {
            (true, None) => return Err(ModelError::MissingLexicon(config.lemma_mode)),
            (true, Some(l)) => Some(l),
            (false, _) => None,
        };
        let stems = lexicon.as_ref().map(|lex| {
            let mut counts: HashMap<String, usize> = HashMap::new();
            for s in &corpus.sentences {
                for f in &s.frames {
                    *counts
                        .entry(lex.stem(&s.tokens[f.position - 1].form))
                        .or_default() += 1;
                }
            }
            Vocab::from_counts(
                &[PAD, UNK],
                Some(UNK),
                counts.iter().map(|(k, v)| (k.as_str(), *v)),
                1,
            )
        });
        let spec = ArgumentSpec {
            tokens: TokenVocabs::build(corpus, config.min_count, pretrained, false),
            roles: role_vocab(corpus),
            stems,
            lexicon,
            config,
        };
        let mut model = Self::build(spec)?;
        if let (Some(table), Some(id), Some(v)) = (
            pretrained,
            model.layout.tokens.pretrained,
            &model.spec.tokens.pretrained,
        ) {
            *model.store.value_mut(id) = pretrained_matrix(v, table);
        }
        Ok(model)
    }

    /// Register every parameter in a fixed order, initialized from the
    /// configured seed. Frozen pre-trained rows start at zero.
    pub fn build(spec: ArgumentSpec) -> Result<Self, ModelError> {
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

        let lemma = |store: &mut ParamStore,
                     name: &str,
                     dim: usize,
                     rng: &mut ChaCha8Rng|
         -> Result<LemmaSource, ModelError> {
            match (c.lemma_mode, &spec.stems) {
                (LemmaMode::Char, _) => Ok(LemmaSource::Chars(CharEncoder::register(
                    store,
                    name,
                    c.lemma_depth,
                    c.d_c,
                    dim,
                    rng,
                )?)),
                (_, Some(stems)) => Ok(LemmaSource::Table(store.add(
                    name,
                    init::embedding(stems.len(), dim, rng),
                    false,
                )?)),
                (mode, None) => Err(ModelError::MissingLexicon(mode)),
            }
        };
        let lemma_in = lemma(&mut store, "lemma.in", c.d_le, &mut rng)?;
        let lemma_dec = lemma(&mut store, "lemma.dec", c.d_l, &mut rng)?;
        let enc_in = tokens.output_dim(&store) + c.d_le + 1;
        let encoder = LstmStack::register(&mut store, "enc", c.enc_depth, enc_in, c.d_h, &mut rng)?;
        let u = store.add(
            "dec.u",
            init::glorot(4 * c.d_h, c.d_l + c.d_r, &mut rng),
            false,
        )?;
        let role_emb = store.add(
            "dec.roles",
            init::glorot(spec.roles.len(), c.d_r, &mut rng),
            false,
        )?;
        Ok(ArgumentClassifier {
            layout: Layout {
                tokens,
                lemma_in,
                lemma_dec,
                encoder,
                u,
                role_emb,
            },
            spec,
            store,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.spec.config
    }

    /// Width of one row of [`Self::input_representation`].
    pub fn input_dim(&self) -> usize {
        self.layout.tokens.output_dim(&self.store) + self.spec.config.d_le + 1
    }

    fn lemma_vector(
        &self,
        g: &mut Graph<'_>,
        source: &LemmaSource,
        form: &str,
    ) -> Result<NodeId, ModelError> {
        match source {
            LemmaSource::Chars(enc) => enc.encode(
                g,
                self.layout.tokens.char_emb,
                &self.spec.tokens.chars,
                form,
            ),
            LemmaSource::Table(table) => {
                let lex = self
                    .spec
                    .lexicon
                    .as_ref()
                    .ok_or(ModelError::MissingLexicon(self.spec.config.lemma_mode))?;
                let stems = self
                    .spec
                    .stems
                    .as_ref()
                    .ok_or(ModelError::MissingLexicon(self.spec.config.lemma_mode))?;
                let id = stems
                    .id_or_unk(&lex.stem(form))
                    .expect("stem vocab has unk");
                Ok(g.row(*table, id)?)
            }
        }
    }

    /// Predicate-independent token features `[x^re; x^pe; x^char]`.
    pub fn token_features(
        &self,
        g: &mut Graph<'_>,
        sentence: &Sentence,
    ) -> Result<Vec<NodeId>, ModelError> {
        self.layout
            .tokens
            .encode_sentence(g, &self.spec.tokens, sentence)
    }

    /// Encoder input rows for predicate `pred` (1-based): token features
    /// followed by the lemma block and a predicate flag, both zero away from
    /// the predicate.
    pub fn input_representation(
        &self,
        g: &mut Graph<'_>,
        features: &[NodeId],
        sentence: &Sentence,
        pred: usize,
    ) -> Result<Vec<NodeId>, ModelError> {
        if pred == 0 || pred > sentence.len() {
            return Err(ModelError::InvalidPredicate {
                position: pred,
                len: sentence.len(),
            });
        }
        let d_le = self.spec.config.d_le;
        let lemma = self.lemma_vector(g, &self.layout.lemma_in, &sentence.tokens[pred - 1].form)?;
        let flag = g.constant(vec![1.0]);
        let marked = g.concat(&[lemma, flag])?;
        let blank = g.zeros(d_le + 1);
        features
            .iter()
            .enumerate()
            .map(|(i, &f)| Ok(g.concat(&[f, if i + 1 == pred { marked } else { blank }])?))
            .collect()
    }

    /// Encoder states `h_{i,pred}` for every token.
    pub fn encode(
        &self,
        g: &mut Graph<'_>,
        features: &[NodeId],
        sentence: &Sentence,
        pred: usize,
    ) -> Result<Vec<NodeId>, ModelError> {
        let xs = self.input_representation(g, features, sentence, pred)?;
        Ok(crate::neural::bilstm_encode(g, &self.layout.encoder, &xs)?)
    }

    /// Decoder-side lemma vector of the predicate form.
    pub fn decoder_lemma(&self, g: &mut Graph<'_>, form: &str) -> Result<NodeId, ModelError> {
        self.lemma_vector(g, &self.layout.lemma_dec, form)
    }

    /// Role-by-state weight matrix for one predicate; see [`role_weights`].
    pub fn decoder_weights(&self, g: &mut Graph<'_>, lemma: NodeId) -> Result<NodeId, ModelError> {
        role_weights(g, self.layout.u, self.layout.role_emb, lemma)
    }

    /// Role logits for every token of `sentence` under predicate `pred`.
    pub fn frame_logits(
        &self,
        g: &mut Graph<'_>,
        features: &[NodeId],
        sentence: &Sentence,
        pred: usize,
    ) -> Result<Vec<NodeId>, ModelError> {
        let states = self.encode(g, features, sentence, pred)?;
        let lemma = self.decoder_lemma(g, &sentence.tokens[pred - 1].form)?;
        let w = self.decoder_weights(g, lemma)?;
        let h_pred = states[pred - 1];
        states
            .iter()
            .map(|&h_arg| {
                let both = g.concat(&[h_pred, h_arg])?;
                Ok(g.matvec(w, both)?)
            })
            .collect()
    }

    fn role_id(&self, role: &str) -> Result<usize, ModelError> {
        self.spec
            .roles
            .id(role)
            .ok_or_else(|| ModelError::UnknownRole(role.to_string()))
    }

    /// Summed cross-entropy over the labeled (frame, token) pairs; `None`
    /// when the sentence contributes no instance.
    pub fn sentence_loss<R: Rng>(
        &self,
        g: &mut Graph<'_>,
        sentence: &Sentence,
        rng: &mut R,
    ) -> Result<Option<NodeId>, ModelError> {
        if self.instance_count(sentence) == 0 {
            return Ok(None);
        }
        let keep = self.spec.config.null_keep;
        let features = self.token_features(g, sentence)?;
        let mut losses = Vec::new();
        for frame in &sentence.frames {
            let logits = self.frame_logits(g, &features, sentence, frame.position)?;
            for (i, &l) in logits.iter().enumerate() {
                if !sentence.is_labeled(i + 1) {
                    continue;
                }
                let gold = match frame.role_of(i + 1) {
                    Some(role) => self.role_id(role)?,
                    None => {
                        if keep < 1.0 && rng.gen::<f64>() >= keep {
                            continue;
                        }
                        0
                    }
                };
                losses.push(g.softmax_xent(l, gold)?);
            }
        }
        if losses.is_empty() {
            return Ok(None);
        }
        Ok(Some(g.sum(&losses)?))
    }

    /// Labeled (frame, token) pairs in `sentence`.
    pub fn instance_count(&self, sentence: &Sentence) -> usize {
        let labeled = (1..=sentence.len())
            .filter(|&i| sentence.is_labeled(i))
            .count();
        sentence.frames.len() * labeled
    }

    /// Arguments for each frame of `sentence`, keeping positions and senses.
    /// Every token is scored; NULL argmax emits nothing and ties go to the
    /// lowest role id.
    pub fn tag_sentence(&self, sentence: &Sentence) -> Result<Vec<PredicateFrame>, ModelError> {
        if sentence.frames.is_empty() {
            return Ok(Vec::new());
        }
        let mut g = Graph::new(&self.store);
        let features = self.token_features(&mut g, sentence)?;
        let mut frames = Vec::with_capacity(sentence.frames.len());
        for frame in &sentence.frames {
            let logits = self.frame_logits(&mut g, &features, sentence, frame.position)?;
            let mut out = PredicateFrame::new(frame.position, frame.sense.clone());
            for (i, &l) in logits.iter().enumerate() {
                let r = argmax(g.value(l));
                if r != 0 {
                    let role = self.spec.roles.item(r).expect("role id in range");
                    out.args.push(SemanticDependency::new(i + 1, role));
                }
            }
            frames.push(out);
        }
        Ok(frames)
    }

    /// Tag every sentence; the output has no labeled mask.
    pub fn tag_corpus(&self, corpus: &Corpus, exec: Execution) -> Result<Corpus, ModelError> {
        let sentences = par::try_map(exec, &corpus.sentences, |s| {
            Ok::<_, ModelError>(Sentence {
                tokens: s.tokens.clone(),
                frames: self.tag_sentence(s)?,
                labeled_mask: None,
            })
        })?;
        Ok(Corpus::new(sentences))
    }
}

impl Trainable for ArgumentClassifier {
    fn store(&self) -> &ParamStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    fn instances(&self, sentence: &Sentence) -> usize {
        self.instance_count(sentence)
    }

    fn loss(
        &self,
        g: &mut Graph<'_>,
        sentence: &Sentence,
        rng: &mut ChaCha8Rng,
    ) -> Result<Option<NodeId>, ModelError> {
        self.sentence_loss(g, sentence, rng)
    }
}

/// Stack `relu(U [lemma; v_r])` over all roles `r` into a `roles × 4·d_h`
/// matrix.
pub fn role_weights(
    g: &mut Graph<'_>,
    u: ParamId,
    role_emb: ParamId,
    lemma: NodeId,
) -> Result<NodeId, ModelError> {
    let n_roles = g.store().value(role_emb).rows();
    let um = g.param(u);
    let mut rows = Vec::with_capacity(n_roles);
    for r in 0..n_roles {
        let v = g.row(role_emb, r)?;
        let uv = g.concat(&[lemma, v])?;
        let z = g.matvec(um, uv)?;
        rows.push(g.relu(z));
    }
    Ok(g.stack_rows(&rows)?)
}

/// Role probabilities for one (predicate, argument) pair:
/// `softmax_r(relu(U [lemma; v_r]) · [h_pred; h_arg])`.
pub fn role_scores(
    g: &mut Graph<'_>,
    u: ParamId,
    role_emb: ParamId,
    lemma: NodeId,
    h_pred: NodeId,
    h_arg: NodeId,
) -> Result<Vec<f64>, ModelError> {
    let w = role_weights(g, u, role_emb, lemma)?;
    let both = g.concat(&[h_pred, h_arg])?;
    let logits = g.matvec(w, both)?;
    Ok(softmax(g.value(logits)))
}

/// Probability of role `role` under [`role_scores`].
pub fn role_probability(scores: &[f64], role: usize) -> Result<f64, ModelError> {
    scores
        .get(role)
        .copied()
        .ok_or_else(|| ModelError::UnknownRole(format!("role id {role} of {}", scores.len())))
}
