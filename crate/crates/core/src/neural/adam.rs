use serde::{Deserialize, Serialize};

use super::{shape_str, Gradients, NeuralError, ParamStore};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        AdamConfig {
            lr,
            ..Self::default()
        }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One bias-corrected Adam update of every trainable parameter. Parameters
/// without a recorded gradient see a zero gradient, so their moments decay.
pub fn adam_step(
    store: &mut ParamStore,
    grads: &Gradients,
    cfg: &AdamConfig,
) -> Result<(), NeuralError> {
    if grads.slots() > store.len() {
        return Err(NeuralError::ShapeMismatch {
            op: "adam_step",
            operand: "grads",
            expected: format!("at most {} parameters", store.len()),
            found: format!("{} parameters", grads.slots()),
        });
    }
    let n = store.len();
    store.adam.m.resize(n, Vec::new());
    store.adam.v.resize(n, Vec::new());
    store.adam.step += 1;
    let t = store.adam.step as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);

    let ids: Vec<_> = store
        .iter()
        .filter(|(_, p)| !p.frozen)
        .map(|(id, _)| id)
        .collect();
    for id in ids {
        let numel = store.value(id).numel();
        let g = grads.dense(id, numel);
        if g.len() != numel {
            return Err(NeuralError::ShapeMismatch {
                op: "adam_step",
                operand: "grads",
                expected: shape_str(numel, 1),
                found: shape_str(g.len(), 1),
            });
        }
        let i = id.index();
        let mut m = std::mem::take(&mut store.adam.m[i]);
        let mut v = std::mem::take(&mut store.adam.v[i]);
        m.resize(numel, 0.0);
        v.resize(numel, 0.0);
        let theta = store.value_mut(id).data_mut();
        for k in 0..numel {
            m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
            v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
            let m_hat = m[k] / bc1;
            let v_hat = v[k] / bc2;
            theta[k] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
        store.adam.m[i] = m;
        store.adam.v[i] = v;
    }
    Ok(())
}
