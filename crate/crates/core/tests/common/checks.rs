//! Fixed gradient-check problems shared by the gradient tests and the
//! acceptance run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use xsrl::corpus::{Corpus, PredicateFrame, Sentence};
use xsrl::model::{ArgumentClassifier, LemmaMode, ModelConfig, ModelError};
use xsrl::morphology::{compile_lexicon, lemma_lexicon};
use xsrl::neural::{
    bilstm_encode, grad_check, init, lstm_step, Coordinates, GradCheckReport, Graph, LstmCell,
    LstmStack, NeuralError, ParamStore,
};

pub const EPS: f64 = 1e-5;

/// One LSTM step from fixed inputs, reduced by a fixed weighting of `[h; c]`.
pub fn lstm_step_check(seed: u64) -> GradCheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = ParamStore::new();
    let cell = LstmCell::register(&mut store, "cell", 3, 4, &mut rng).unwrap();
    grad_check(&mut store, EPS, Coordinates::All, |g: &mut Graph<'_>| {
        let x = g.constant(vec![0.5, -0.3, 0.8]);
        let h = g.constant(vec![0.1, -0.2, 0.3, 0.05]);
        let c = g.constant(vec![-0.4, 0.2, 0.6, -0.1]);
        let (h, c) = lstm_step(g, &cell, x, h, c)?;
        let both = g.concat(&[h, c])?;
        let w = g.constant(vec![1.0, -2.0, 0.5, 1.5, -1.0, 0.7, 0.3, -0.9]);
        let prod = g.mul(both, w)?;
        Ok::<_, NeuralError>(g.sum_elements(prod))
    })
    .unwrap()
}

/// A depth-2 bidirectional stack over three inputs, reduced by a fixed
/// weighting of every output state.
pub fn bilstm_check(seed: u64) -> GradCheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = ParamStore::new();
    let stack = LstmStack::register(&mut store, "enc", 2, 2, 3, &mut rng).unwrap();
    grad_check(&mut store, EPS, Coordinates::All, |g: &mut Graph<'_>| {
        let xs = [vec![0.3, -0.7], vec![-0.2, 0.9], vec![0.6, 0.1]].map(|v| g.constant(v));
        let out = bilstm_encode(g, &stack, &xs)?;
        let mut terms = Vec::new();
        for (t, &o) in out.iter().enumerate() {
            let w = g.constant((0..6).map(|k| ((t * 6 + k) as f64 * 0.37).sin()).collect());
            let prod = g.mul(o, w)?;
            terms.push(g.sum_elements(prod));
        }
        g.sum(&terms)
    })
    .unwrap()
}

/// The 4-token, 2-predicate training sentence.
pub fn two_predicate_sentence() -> Sentence {
    let mut s = Sentence::from_forms(&["ab", "cd", "ab", "ef"]);
    s.frames.push(
        PredicateFrame::new(2, "x.01")
            .with_arg(1, "A0")
            .with_arg(4, "A1"),
    );
    s.frames.push(
        PredicateFrame::new(4, "y.01")
            .with_arg(3, "A2")
            .with_arg(1, "AM"),
    );
    s
}

fn tiny_config(mode: LemmaMode) -> ModelConfig {
    let mut cfg = ModelConfig::desk();
    cfg.lemma_mode = mode;
    cfg.min_count = 1;
    cfg.d_w = 3;
    cfg.d_c = 2;
    cfg.d_ch = 4;
    cfg.d_h = 4;
    cfg.d_le = 2;
    cfg.d_l = 2;
    cfg.d_r = 8;
    cfg.lemma_depth = 1;
    cfg.enc_depth = 1;
    cfg
}

/// Full argument-classifier loss on [`two_predicate_sentence`], every
/// parameter redrawn uniformly from `[-1, 1]` with `seed`.
pub fn classifier_check(mode: LemmaMode, seed: u64) -> GradCheckReport {
    let s = two_predicate_sentence();
    let corpus = Corpus::new(vec![s.clone()]);
    let lexicon = match mode {
        LemmaMode::Char => None,
        LemmaMode::Ustem => {
            Some(compile_lexicon("cd\tc/STM d/SUF\nef\te/STM f/SUF\n".as_bytes()).unwrap())
        }
        LemmaMode::Slem => Some(lemma_lexicon("cd\tc\nef\te\n".as_bytes()).unwrap()),
    };
    let mut m = ArgumentClassifier::new(tiny_config(mode), &corpus, None, lexicon).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<_> = m.store.iter().map(|(id, _)| id).collect();
    for id in ids {
        let shape = m.store.value(id).shape().to_vec();
        *m.store.value_mut(id) = init::uniform(&shape, -1.0, 1.0, &mut rng);
    }
    let mut store = m.store.clone();
    grad_check(&mut store, EPS, Coordinates::All, |g: &mut Graph<'_>| {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        Ok::<_, ModelError>(
            m.sentence_loss(g, &s, &mut rng)?
                .expect("sentence has predicates"),
        )
    })
    .unwrap()
}
