//! Minibatch training with deterministic data-parallel gradient accumulation.
//!
//! Each epoch shuffles sentence order with a seeded generator and cuts the
//! sequence into minibatches of at least `minibatch` instances, never
//! splitting a sentence. Per-sentence losses and gradients are computed
//! independently (in parallel when enabled) and summed in sentence order,
//! so results do not depend on the thread count.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ModelError;
use crate::corpus::{Corpus, Sentence};
use crate::neural::{adam_step, AdamConfig, Gradients, Graph, NodeId, ParamStore};
use crate::par::{self, Execution};

/// A network trained by summed per-sentence losses.
pub trait Trainable: Sync {
    fn store(&self) -> &ParamStore;
    fn store_mut(&mut self) -> &mut ParamStore;
    /// Number of training instances `sentence` provides.
    fn instances(&self, sentence: &Sentence) -> usize;
    /// Record the summed loss of one sentence; `rng` drives any subsampling.
    fn loss(
        &self,
        g: &mut Graph<'_>,
        sentence: &Sentence,
        rng: &mut ChaCha8Rng,
    ) -> Result<Option<NodeId>, ModelError>;
}

#[derive(Clone, Copy, Debug)]
pub struct TrainOptions {
    pub epochs: usize,
    pub minibatch: usize,
    pub lr: f64,
    pub seed: u64,
    pub exec: Execution,
}

impl TrainOptions {
    pub fn from_config(c: &super::ModelConfig, exec: Execution) -> Self {
        TrainOptions {
            epochs: c.epochs,
            minibatch: c.minibatch,
            lr: c.lr,
            seed: c.seed,
            exec,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    /// Summed training loss of each epoch.
    pub epoch_losses: Vec<f64>,
    pub instances: usize,
    pub steps: u64,
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    // SplitMix64-style combination so neighbouring (epoch, sentence) pairs
    // get unrelated streams.
    let mut z =
        seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Loss and gradients of one sentence.
pub fn sentence_gradients<M: Trainable>(
    model: &M,
    sentence: &Sentence,
    rng: &mut ChaCha8Rng,
) -> Result<Option<(f64, Gradients)>, ModelError> {
    let mut g = Graph::new(model.store());
    match model.loss(&mut g, sentence, rng)? {
        None => Ok(None),
        Some(root) => {
            let value = g.scalar(root);
            Ok(Some((value, g.backward(root)?)))
        }
    }
}

/// Summed loss and gradients over `indices`, reduced in the given order.
pub fn batch_gradients<M: Trainable>(
    model: &M,
    corpus: &Corpus,
    indices: &[usize],
    seed: u64,
    epoch: usize,
    exec: Execution,
) -> Result<(f64, Gradients), ModelError> {
    let parts = par::try_map(exec, indices, |&i| {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, epoch as u64 + 1, i as u64 + 1));
        sentence_gradients(model, &corpus.sentences[i], &mut rng)
    })?;
    let store = model.store();
    let mut total = Gradients::new(store.len());
    let mut loss = 0.0;
    for (value, grads) in parts.into_iter().flatten() {
        loss += value;
        total.accumulate(&grads, store);
    }
    Ok((loss, total))
}

pub fn train<M: Trainable>(
    model: &mut M,
    corpus: &Corpus,
    opts: &TrainOptions,
) -> Result<TrainReport, ModelError> {
    let counts: Vec<usize> = corpus
        .sentences
        .iter()
        .map(|s| model.instances(s))
        .collect();
    let instances: usize = counts.iter().sum();
    if instances == 0 {
        return Err(ModelError::NoTrainingSignal);
    }
    let adam = AdamConfig::with_lr(opts.lr);
    let mut report = TrainReport {
        instances,
        ..TrainReport::default()
    };
    let mut order: Vec<usize> = (0..corpus.len()).filter(|&i| counts[i] > 0).collect();
    for epoch in 0..opts.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(opts.seed, epoch as u64 + 1, 0));
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut start = 0;
        while start < order.len() {
            let mut end = start;
            let mut n = 0;
            while end < order.len() && n < opts.minibatch {
                n += counts[order[end]];
                end += 1;
            }
            let (loss, grads) = batch_gradients(
                model,
                corpus,
                &order[start..end],
                opts.seed,
                epoch,
                opts.exec,
            )?;
            adam_step(model.store_mut(), &grads, &adam)?;
            report.steps += 1;
            epoch_loss += loss;
            start = end;
        }
        log::info!("epoch {}: loss {:.6}", epoch + 1, epoch_loss);
        report.epoch_losses.push(epoch_loss);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PredicateFrame;
    use crate::model::{ArgumentClassifier, ModelConfig};

    fn corpus() -> Corpus {
        let mut a = Sentence::from_forms(&["she", "sings", "songs"]);
        a.frames.push(
            PredicateFrame::new(2, "sing.01")
                .with_arg(1, "A0")
                .with_arg(3, "A1"),
        );
        let mut b = Sentence::from_forms(&["he", "runs"]);
        b.frames
            .push(PredicateFrame::new(2, "run.01").with_arg(1, "A0"));
        Corpus::new(vec![a, b, Sentence::from_forms(&["no", "frames"])])
    }

    fn small() -> ModelConfig {
        let mut c = ModelConfig::desk();
        c.d_h = 8;
        c.min_count = 1;
        c.minibatch = 3;
        c.epochs = 3;
        c
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let c = corpus();
        let mut seq = ArgumentClassifier::new(small(), &c, None, None).unwrap();
        let mut par_ = seq.clone();
        let r1 = train(
            &mut seq,
            &c,
            &TrainOptions::from_config(&small(), Execution::Sequential),
        )
        .unwrap();
        let r2 = train(
            &mut par_,
            &c,
            &TrainOptions::from_config(&small(), Execution::Parallel),
        )
        .unwrap();
        assert_eq!(r1, r2);
        assert_eq!(seq.store, par_.store);
        assert_eq!(r1.instances, 3 + 2);
    }

    #[test]
    fn no_frames_is_no_training_signal() {
        let c = Corpus::new(vec![Sentence::from_forms(&["a", "b"])]);
        let mut m = ArgumentClassifier::new(small(), &c, None, None).unwrap();
        assert!(matches!(
            train(
                &mut m,
                &c,
                &TrainOptions::from_config(&small(), Execution::Sequential)
            ),
            Err(ModelError::NoTrainingSignal)
        ));
    }

    #[test]
    fn loss_decreases() {
        let c = corpus();
        let mut cfg = small();
        cfg.epochs = 30;
        let mut m = ArgumentClassifier::new(cfg.clone(), &c, None, None).unwrap();
        let r = train(
            &mut m,
            &c,
            &TrainOptions::from_config(&cfg, Execution::Parallel),
        )
        .unwrap();
        assert!(
            r.epoch_losses.last().unwrap() < &(r.epoch_losses[0] * 0.5),
            "{:?}",
            r.epoch_losses
        );
    }
}
