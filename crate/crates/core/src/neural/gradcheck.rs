use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Graph, NeuralError, NodeId, ParamStore};

/// Which parameter components to perturb.
#[derive(Clone, Copy, Debug)]
pub enum Coordinates {
    All,
    /// Up to `per_param` components per parameter, drawn without replacement.
    Sample {
        per_param: usize,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Largest `|analytic - numeric|`.
    pub max_abs_error: f64,
    pub checked: usize,
    /// `(parameter, component, analytic, numeric)` at the maximum.
    pub worst: Option<(String, usize, f64, f64)>,
}

/// `|a - n| / max(1e-8, |a| + |n|)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8)
}

fn eval<E, F>(store: &ParamStore, loss: &mut F) -> Result<f64, E>
where
    E: From<NeuralError>,
    F: FnMut(&mut Graph<'_>) -> Result<NodeId, E>,
{
    let mut g = Graph::new(store);
    let root = loss(&mut g)?;
    Ok(g.scalar(root))
}

/// Compare reverse-mode gradients of `loss` with central differences of
/// step `eps` over trainable parameters. `loss` records a scalar on the
/// graph it is given and must be deterministic.
pub fn grad_check<E, F>(
    store: &mut ParamStore,
    eps: f64,
    coords: Coordinates,
    mut loss: F,
) -> Result<GradCheckReport, E>
where
    E: From<NeuralError>,
    F: FnMut(&mut Graph<'_>) -> Result<NodeId, E>,
{
    let grads = {
        let mut g = Graph::new(store);
        let root = loss(&mut g)?;
        g.backward(root)?
    };

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        max_abs_error: 0.0,
        checked: 0,
        worst: None,
    };
    let targets: Vec<_> = store
        .iter()
        .filter(|(_, p)| !p.frozen)
        .map(|(id, p)| (id, p.value.numel()))
        .collect();
    for (id, numel) in targets {
        let components: Vec<usize> = match coords {
            Coordinates::All => (0..numel).collect(),
            Coordinates::Sample { per_param, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    seed ^ (id.index() as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                );
                let mut picked = sample(&mut rng, numel, per_param.min(numel)).into_vec();
                picked.sort_unstable();
                picked
            }
        };
        for k in components {
            let orig = store.value(id).data()[k];
            store.value_mut(id).data_mut()[k] = orig + eps;
            let plus = eval(store, &mut loss)?;
            store.value_mut(id).data_mut()[k] = orig - eps;
            let minus = eval(store, &mut loss)?;
            store.value_mut(id).data_mut()[k] = orig;

            let numeric = (plus - minus) / (2.0 * eps);
            let analytic = grads.at(id, k);
            let err = relative_error(analytic, numeric);
            report.checked += 1;
            report.max_abs_error = report.max_abs_error.max((analytic - numeric).abs());
            if err > report.max_rel_error || report.worst.is_none() {
                report.max_rel_error = report.max_rel_error.max(err);
                report.worst = Some((store.param(id).name.clone(), k, analytic, numeric));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{lstm_step, LstmCell, Tensor};

    #[test]
    fn quadratic_loss() {
        let mut store = ParamStore::new();
        let w = store
            .add(
                "w",
                Tensor::new(vec![2, 2], vec![0.5, -1.0, 2.0, 0.25]).unwrap(),
                false,
            )
            .unwrap();
        let report = grad_check(&mut store, 1e-5, Coordinates::All, |g: &mut Graph<'_>| {
            let p = g.param(w);
            let x = g.constant(vec![1.0, -2.0]);
            let y = g.matvec(p, x)?;
            let sq = g.mul(y, y)?;
            Ok::<_, NeuralError>(g.sum_elements(sq))
        })
        .unwrap();
        assert_eq!(report.checked, 4);
        assert!(report.max_rel_error < 1e-9, "{report:?}");
    }

    #[test]
    fn softmax_xent_gradient_is_p_minus_onehot() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let logits: Vec<f64> = (0..7).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let mut store = ParamStore::new();
        let l = store
            .add("logits", Tensor::vector(logits.clone()), false)
            .unwrap();
        let gold = 4;
        let report = grad_check(&mut store, 1e-5, Coordinates::All, |g: &mut Graph<'_>| {
            let p = g.param(l);
            g.softmax_xent(p, gold)
        })
        .unwrap();
        assert!(report.max_rel_error < 1e-8, "{report:?}");

        let mut g = Graph::new(&store);
        let p = g.param(l);
        let x = g.softmax_xent(p, gold).unwrap();
        let probs = g.probabilities(x).unwrap().to_vec();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let grads = g.backward(x).unwrap();
        for k in 0..7 {
            let expect = probs[k] - if k == gold { 1.0 } else { 0.0 };
            let h = 1e-5;
            let f = |d: f64| {
                let mut z = logits.clone();
                z[k] += d;
                let m = z.iter().cloned().fold(f64::MIN, f64::max);
                let lse = z.iter().map(|v| (v - m).exp()).sum::<f64>().ln() + m;
                lse - z[gold]
            };
            let numeric = (f(h) - f(-h)) / (2.0 * h);
            assert!((grads.at(l, k) - expect).abs() < 1e-15);
            assert!((numeric - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn single_lstm_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut store = ParamStore::new();
        let cell = LstmCell::register(&mut store, "c", 3, 4, &mut rng).unwrap();
        let report = grad_check(&mut store, 1e-5, Coordinates::All, |g: &mut Graph<'_>| {
            let x = g.constant(vec![0.5, -0.3, 0.8]);
            let h = g.constant(vec![0.1, -0.2, 0.3, 0.05]);
            let c = g.constant(vec![-0.4, 0.2, 0.6, -0.1]);
            let (h, c) = lstm_step(g, &cell, x, h, c)?;
            let both = g.concat(&[h, c])?;
            let w = g.constant(vec![1.0, -2.0, 0.5, 1.5, -1.0, 0.7, 0.3, -0.9]);
            let prod = g.mul(both, w)?;
            Ok::<_, NeuralError>(g.sum_elements(prod))
        })
        .unwrap();
        assert!(report.max_rel_error < 1e-6, "{report:?}");
    }

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert!((relative_error(1.0, 0.5) - 1.0 / 3.0).abs() < 1e-15);
    }
}
