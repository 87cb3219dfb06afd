//! LSTM cells and deep bidirectional stacks.
//!
//! Gate rows are laid out `[i, f, o, g]` in every weight matrix and bias.

use rand::Rng;

use super::{init, Graph, NeuralError, NodeId, ParamId, ParamStore, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LstmCell {
    /// Input weights, `4H × input_dim`.
    pub w: ParamId,
    /// Recurrent weights, `4H × H`.
    pub u: ParamId,
    /// Bias, `4H`; the forget-gate block starts at 1.
    pub b: ParamId,
    pub input_dim: usize,
    pub hidden_dim: usize,
}

impl LstmCell {
    pub fn register<R: Rng>(
        store: &mut ParamStore,
        name: &str,
        input_dim: usize,
        hidden_dim: usize,
        rng: &mut R,
    ) -> Result<Self, NeuralError> {
        let h = hidden_dim;
        let w = store.add(
            format!("{name}.w"),
            init::glorot(4 * h, input_dim, rng),
            false,
        )?;
        let u = store.add(format!("{name}.u"), init::glorot(4 * h, h, rng), false)?;
        let mut bias = vec![0.0; 4 * h];
        bias[h..2 * h].iter_mut().for_each(|x| *x = 1.0);
        let b = store.add(format!("{name}.b"), Tensor::vector(bias), false)?;
        Ok(LstmCell {
            w,
            u,
            b,
            input_dim,
            hidden_dim,
        })
    }
}

/// One LSTM step; returns `(h_t, c_t)`.
pub fn lstm_step(
    g: &mut Graph<'_>,
    cell: &LstmCell,
    x: NodeId,
    h_prev: NodeId,
    c_prev: NodeId,
) -> Result<(NodeId, NodeId), NeuralError> {
    let h = cell.hidden_dim;
    for (operand, id, want) in [
        ("x", x, cell.input_dim),
        ("h_prev", h_prev, h),
        ("c_prev", c_prev, h),
    ] {
        if g.shape(id) != (want, 1) {
            let (r, c) = g.shape(id);
            return Err(NeuralError::ShapeMismatch {
                op: "lstm_step",
                operand,
                expected: super::shape_str(want, 1),
                found: super::shape_str(r, c),
            });
        }
    }
    let w = g.param(cell.w);
    let u = g.param(cell.u);
    let b = g.param(cell.b);
    let wx = g.matvec(w, x)?;
    let uh = g.matvec(u, h_prev)?;
    let z = g.add(wx, uh)?;
    let z = g.add(z, b)?;
    let zi = g.slice(z, 0, h)?;
    let zf = g.slice(z, h, h)?;
    let zo = g.slice(z, 2 * h, h)?;
    let zg = g.slice(z, 3 * h, h)?;
    let i = g.sigmoid(zi);
    let f = g.sigmoid(zf);
    let o = g.sigmoid(zo);
    let gg = g.tanh(zg);
    let keep = g.mul(f, c_prev)?;
    let write = g.mul(i, gg)?;
    let c = g.add(keep, write)?;
    let tc = g.tanh(c);
    let h_t = g.mul(o, tc)?;
    Ok((h_t, c))
}

fn run_direction(
    g: &mut Graph<'_>,
    cell: &LstmCell,
    xs: &[NodeId],
    reverse: bool,
) -> Result<Vec<NodeId>, NeuralError> {
    let mut h = g.zeros(cell.hidden_dim);
    let mut c = g.zeros(cell.hidden_dim);
    let mut out = vec![h; xs.len()];
    let order: Box<dyn Iterator<Item = usize>> = if reverse {
        Box::new((0..xs.len()).rev())
    } else {
        Box::new(0..xs.len())
    };
    for t in order {
        (h, c) = lstm_step(g, cell, xs[t], h, c)?;
        out[t] = h;
    }
    Ok(out)
}

/// Top-layer states of a bidirectional stack, indexed by input position.
#[derive(Clone, Debug)]
pub struct BiStates {
    pub forward: Vec<NodeId>,
    pub backward: Vec<NodeId>,
}

/// A deep bidirectional LSTM. Layer `k > 0` reads the concatenated forward
/// and backward states of layer `k - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmStack {
    /// `(forward, backward)` cells per layer, bottom first.
    pub layers: Vec<(LstmCell, LstmCell)>,
    pub input_dim: usize,
    pub hidden_dim: usize,
}

impl LstmStack {
    pub fn register<R: Rng>(
        store: &mut ParamStore,
        name: &str,
        depth: usize,
        input_dim: usize,
        hidden_dim: usize,
        rng: &mut R,
    ) -> Result<Self, NeuralError> {
        let mut layers = Vec::with_capacity(depth);
        for k in 0..depth {
            let d_in = if k == 0 { input_dim } else { 2 * hidden_dim };
            let fwd =
                LstmCell::register(store, &format!("{name}.l{k}.fwd"), d_in, hidden_dim, rng)?;
            let bwd =
                LstmCell::register(store, &format!("{name}.l{k}.bwd"), d_in, hidden_dim, rng)?;
            layers.push((fwd, bwd));
        }
        Ok(LstmStack {
            layers,
            input_dim,
            hidden_dim,
        })
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn output_dim(&self) -> usize {
        2 * self.hidden_dim
    }

    /// Run every layer and return the top layer's per-direction states.
    pub fn run(&self, g: &mut Graph<'_>, xs: &[NodeId]) -> Result<BiStates, NeuralError> {
        if xs.is_empty() {
            return Err(NeuralError::EmptySequence);
        }
        let mut inputs = xs.to_vec();
        let mut states = BiStates {
            forward: Vec::new(),
            backward: Vec::new(),
        };
        for (k, (fwd, bwd)) in self.layers.iter().enumerate() {
            states.forward = run_direction(g, fwd, &inputs, false)?;
            states.backward = run_direction(g, bwd, &inputs, true)?;
            if k + 1 < self.layers.len() {
                inputs = states
                    .forward
                    .iter()
                    .zip(&states.backward)
                    .map(|(&f, &b)| g.concat(&[f, b]))
                    .collect::<Result<_, _>>()?;
            }
        }
        Ok(states)
    }
}

/// Per-position `[forward; backward]` states of the top layer.
pub fn bilstm_encode(
    g: &mut Graph<'_>,
    stack: &LstmStack,
    xs: &[NodeId],
) -> Result<Vec<NodeId>, NeuralError> {
    let states = stack.run(g, xs)?;
    states
        .forward
        .iter()
        .zip(&states.backward)
        .map(|(&f, &b)| g.concat(&[f, b]))
        .collect()
}
