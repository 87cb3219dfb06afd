use std::borrow::Cow;
use std::collections::BTreeMap;

use rand::Rng;

use super::{NeuralError, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: Tensor,
    /// Frozen parameters receive no gradients and no optimizer updates.
    pub frozen: bool,
}

/// Adam moments, one pair per parameter, with a step count shared by all.
#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct AdamState {
    pub step: u64,
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

/// All trainable (and frozen) tensors of a model, addressed by name or id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamStore {
    params: Vec<Param>,
    names: BTreeMap<String, ParamId>,
    pub(crate) adam: AdamState,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(
        &mut self,
        name: impl Into<String>,
        value: Tensor,
        frozen: bool,
    ) -> Result<ParamId, NeuralError> {
        let name = name.into();
        if self.names.contains_key(&name) {
            return Err(NeuralError::DuplicateParam(name));
        }
        let id = ParamId(self.params.len());
        self.names.insert(name.clone(), id);
        self.params.push(Param {
            name,
            value,
            frozen,
        });
        Ok(id)
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.names.get(name).copied()
    }

    pub fn param(&self, id: ParamId) -> &Param {
        &self.params[id.0]
    }

    pub fn value(&self, id: ParamId) -> &Tensor {
        &self.params[id.0].value
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.params[id.0].value
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Param)> {
        self.params.iter().enumerate().map(|(i, p)| (ParamId(i), p))
    }

    /// Adam steps taken so far.
    pub fn step_count(&self) -> u64 {
        self.adam.step
    }

    /// Set every non-frozen parameter to `value`.
    pub fn fill_trainable(&mut self, value: f64) {
        for p in self.params.iter_mut().filter(|p| !p.frozen) {
            p.value.fill(value);
        }
    }

    /// Overwrite values from `other` by name; every parameter of `self`
    /// must be present in `other` with the same shape.
    pub fn load_values(&mut self, other: &ParamStore) -> Result<(), NeuralError> {
        for p in &mut self.params {
            let id = other.id(&p.name).ok_or_else(|| {
                NeuralError::Checkpoint(format!("missing parameter {:?}", p.name))
            })?;
            let src = other.value(id);
            if src.shape() != p.value.shape() {
                return Err(NeuralError::Checkpoint(format!(
                    "parameter {:?} has shape {:?}, expected {:?}",
                    p.name,
                    src.shape(),
                    p.value.shape()
                )));
            }
            p.value = src.clone();
        }
        if other.len() != self.params.len() {
            return Err(NeuralError::Checkpoint(format!(
                "checkpoint has {} parameters, model expects {}",
                other.len(),
                self.params.len()
            )));
        }
        Ok(())
    }
}

/// Parameter initializers.
pub mod init {
    use super::*;

    /// Uniform in `±sqrt(6 / (rows + cols))`.
    pub fn glorot<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Tensor {
        let limit = (6.0 / (rows + cols) as f64).sqrt();
        uniform(&[rows, cols], -limit, limit, rng)
    }

    pub fn uniform<R: Rng>(shape: &[usize], lo: f64, hi: f64, rng: &mut R) -> Tensor {
        let n = shape.iter().product();
        let data = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
        Tensor::new(shape.to_vec(), data).expect("shape matches")
    }

    /// Embedding tables start in `[-0.01, 0.01]`.
    pub fn embedding<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Tensor {
        uniform(&[rows, cols], -0.01, 0.01, rng)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum GradBuf {
    Dense(Vec<f64>),
    /// Row-sparse gradient for embedding lookups.
    Rows {
        cols: usize,
        rows: BTreeMap<usize, Vec<f64>>,
    },
}

/// Per-parameter gradient buffers. Parameters that the loss never touched
/// have no buffer and an implicit zero gradient.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Gradients {
    bufs: Vec<Option<GradBuf>>,
}

impl Gradients {
    pub fn new(params: usize) -> Self {
        Gradients {
            bufs: vec![None; params],
        }
    }

    fn slot(&mut self, id: ParamId) -> &mut Option<GradBuf> {
        if self.bufs.len() <= id.0 {
            self.bufs.resize(id.0 + 1, None);
        }
        &mut self.bufs[id.0]
    }

    pub(crate) fn dense_mut(&mut self, id: ParamId, numel: usize) -> &mut [f64] {
        let slot = self.slot(id);
        match slot {
            Some(GradBuf::Dense(_)) => {}
            Some(GradBuf::Rows { cols, rows }) => {
                let mut dense = vec![0.0; numel];
                for (r, v) in rows.iter() {
                    dense[r * *cols..(r + 1) * *cols].copy_from_slice(v);
                }
                *slot = Some(GradBuf::Dense(dense));
            }
            None => *slot = Some(GradBuf::Dense(vec![0.0; numel])),
        }
        match slot {
            Some(GradBuf::Dense(d)) => d,
            _ => unreachable!(),
        }
    }

    pub(crate) fn row_mut(&mut self, id: ParamId, row: usize, cols: usize) -> &mut [f64] {
        let slot = self.slot(id);
        if slot.is_none() {
            *slot = Some(GradBuf::Rows {
                cols,
                rows: BTreeMap::new(),
            });
        }
        match slot {
            Some(GradBuf::Dense(d)) => &mut d[row * cols..(row + 1) * cols],
            Some(GradBuf::Rows { rows, .. }) => rows.entry(row).or_insert_with(|| vec![0.0; cols]),
            None => unreachable!(),
        }
    }

    /// Number of parameter slots covered.
    pub fn slots(&self) -> usize {
        self.bufs.len()
    }

    /// Whether any gradient was recorded for `id`.
    pub fn touched(&self, id: ParamId) -> bool {
        self.bufs.get(id.0).is_some_and(Option::is_some)
    }

    /// Gradient of `id` as a dense vector of `numel` components.
    pub fn dense(&self, id: ParamId, numel: usize) -> Cow<'_, [f64]> {
        match self.bufs.get(id.0).and_then(Option::as_ref) {
            None => Cow::Owned(vec![0.0; numel]),
            Some(GradBuf::Dense(d)) => Cow::Borrowed(d),
            Some(GradBuf::Rows { cols, rows }) => {
                let mut dense = vec![0.0; numel];
                for (r, v) in rows {
                    dense[r * cols..(r + 1) * cols].copy_from_slice(v);
                }
                Cow::Owned(dense)
            }
        }
    }

    /// Gradient of component `index` (row-major) of parameter `id`.
    pub fn at(&self, id: ParamId, index: usize) -> f64 {
        match self.bufs.get(id.0).and_then(Option::as_ref) {
            None => 0.0,
            Some(GradBuf::Dense(d)) => d[index],
            Some(GradBuf::Rows { cols, rows }) => {
                rows.get(&(index / cols)).map_or(0.0, |v| v[index % cols])
            }
        }
    }

    /// Add `other` into `self` component-wise.
    pub fn accumulate(&mut self, other: &Gradients, store: &ParamStore) {
        for (i, buf) in other.bufs.iter().enumerate() {
            let id = ParamId(i);
            match buf {
                None => {}
                Some(GradBuf::Dense(d)) => {
                    let numel = store.value(id).numel();
                    for (a, b) in self.dense_mut(id, numel).iter_mut().zip(d) {
                        *a += b;
                    }
                }
                Some(GradBuf::Rows { cols, rows }) => {
                    for (r, v) in rows {
                        for (a, b) in self.row_mut(id, *r, *cols).iter_mut().zip(v) {
                            *a += b;
                        }
                    }
                }
            }
        }
    }

    /// Squared L2 norm over all recorded components.
    pub fn norm_sq(&self) -> f64 {
        self.bufs
            .iter()
            .flatten()
            .map(|b| match b {
                GradBuf::Dense(d) => d.iter().map(|x| x * x).sum::<f64>(),
                GradBuf::Rows { rows, .. } => rows.values().flatten().map(|x| x * x).sum(),
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_and_dense_buffers_merge() {
        let mut store = ParamStore::new();
        let id = store.add("e", Tensor::zeros(&[3, 2]), false).unwrap();
        let mut a = Gradients::new(1);
        a.row_mut(id, 1, 2)[0] = 1.0;
        let mut b = Gradients::new(1);
        b.dense_mut(id, 6)[5] = 2.0;
        b.row_mut(id, 1, 2)[0] += 0.5;
        a.accumulate(&b, &store);
        assert_eq!(a.dense(id, 6).as_ref(), &[0.0, 0.0, 1.5, 0.0, 0.0, 2.0]);
        assert_eq!(a.at(id, 2), 1.5);
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut store = ParamStore::new();
        store.add("w", Tensor::zeros(&[1]), false).unwrap();
        assert!(store.add("w", Tensor::zeros(&[1]), false).is_err());
    }
}
