use super::{shape_str, Gradients, NeuralError, ParamId, ParamStore};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

#[derive(Debug)]
enum Op {
    Constant,
    Param(ParamId),
    Row(ParamId, usize),
    MatVec(NodeId, NodeId),
    Add(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Sigmoid(NodeId),
    Tanh(NodeId),
    Relu(NodeId),
    Concat(Vec<NodeId>),
    Slice(NodeId, usize),
    StackRows(Vec<NodeId>),
    SoftmaxXent {
        logits: NodeId,
        gold: usize,
        probs: Vec<f64>,
    },
    Sum(Vec<NodeId>),
    Scale(NodeId, f64),
    SumElements(NodeId),
}

#[derive(Debug)]
enum Value {
    Owned(Vec<f64>),
    Param(ParamId),
}

#[derive(Debug)]
struct Node {
    op: Op,
    value: Value,
    rows: usize,
    cols: usize,
}

/// A recorded forward computation over parameters borrowed from a store.
///
/// Vectors have `cols == 1`. Every operation checks shapes eagerly and
/// computes its value on creation.
pub struct Graph<'a> {
    store: &'a ParamStore,
    nodes: Vec<Node>,
    param_nodes: Vec<Option<NodeId>>,
    consumed: bool,
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl<'a> Graph<'a> {
    pub fn new(store: &'a ParamStore) -> Self {
        Graph {
            store,
            nodes: Vec::new(),
            param_nodes: vec![None; store.len()],
            consumed: false,
        }
    }

    pub fn store(&self) -> &'a ParamStore {
        self.store
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        match &self.nodes[id.0].value {
            Value::Owned(v) => v,
            Value::Param(p) => self.store.value(*p).data(),
        }
    }

    /// Value of a single-element node.
    pub fn scalar(&self, id: NodeId) -> f64 {
        self.value(id)[0]
    }

    pub fn shape(&self, id: NodeId) -> (usize, usize) {
        let n = &self.nodes[id.0];
        (n.rows, n.cols)
    }

    /// Length of a vector node (rows × cols for matrices).
    pub fn size(&self, id: NodeId) -> usize {
        let (r, c) = self.shape(id);
        r * c
    }

    fn push(&mut self, op: Op, value: Vec<f64>, rows: usize, cols: usize) -> NodeId {
        debug_assert_eq!(value.len(), rows * cols);
        debug_assert!(
            value.iter().all(|x| x.is_finite()),
            "non-finite value from {op:?}"
        );
        self.nodes.push(Node {
            op,
            value: Value::Owned(value),
            rows,
            cols,
        });
        NodeId(self.nodes.len() - 1)
    }

    fn vector_len(
        &self,
        op: &'static str,
        operand: &'static str,
        id: NodeId,
    ) -> Result<usize, NeuralError> {
        let (r, c) = self.shape(id);
        if c != 1 {
            return Err(NeuralError::ShapeMismatch {
                op,
                operand,
                expected: "a vector".to_string(),
                found: shape_str(r, c),
            });
        }
        Ok(r)
    }

    fn same_len(&self, op: &'static str, a: NodeId, b: NodeId) -> Result<usize, NeuralError> {
        let n = self.vector_len(op, "lhs", a)?;
        let m = self.vector_len(op, "rhs", b)?;
        if n != m {
            return Err(NeuralError::ShapeMismatch {
                op,
                operand: "rhs",
                expected: shape_str(n, 1),
                found: shape_str(m, 1),
            });
        }
        Ok(n)
    }

    /// A constant vector.
    pub fn constant(&mut self, value: Vec<f64>) -> NodeId {
        let n = value.len();
        self.push(Op::Constant, value, n, 1)
    }

    pub fn zeros(&mut self, n: usize) -> NodeId {
        self.constant(vec![0.0; n])
    }

    /// The whole parameter as a node. Repeated calls share one node so
    /// gradients from every use accumulate in a single buffer.
    pub fn param(&mut self, id: ParamId) -> NodeId {
        if let Some(n) = self.param_nodes[id.0] {
            return n;
        }
        let t = self.store.value(id);
        self.nodes.push(Node {
            op: Op::Param(id),
            value: Value::Param(id),
            rows: t.rows(),
            cols: t.cols(),
        });
        let n = NodeId(self.nodes.len() - 1);
        self.param_nodes[id.0] = Some(n);
        n
    }

    /// Row `row` of a matrix parameter, as a vector (embedding lookup).
    pub fn row(&mut self, id: ParamId, row: usize) -> Result<NodeId, NeuralError> {
        let t = self.store.value(id);
        if row >= t.rows() {
            return Err(NeuralError::RowOutOfRange {
                name: self.store.param(id).name.clone(),
                row,
                rows: t.rows(),
            });
        }
        let v = t.row(row).to_vec();
        let n = v.len();
        Ok(self.push(Op::Row(id, row), v, n, 1))
    }

    /// Matrix-vector product.
    pub fn matvec(&mut self, m: NodeId, x: NodeId) -> Result<NodeId, NeuralError> {
        let (rows, cols) = self.shape(m);
        let n = self.vector_len("matvec", "x", x)?;
        if n != cols {
            return Err(NeuralError::ShapeMismatch {
                op: "matvec",
                operand: "x",
                expected: shape_str(cols, 1),
                found: shape_str(n, 1),
            });
        }
        let mv = self.value(m);
        let xv = self.value(x);
        let out: Vec<f64> = mv
            .chunks_exact(cols)
            .map(|row| row.iter().zip(xv).map(|(a, b)| a * b).sum())
            .collect();
        Ok(self.push(Op::MatVec(m, x), out, rows, 1))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NeuralError> {
        let n = self.same_len("add", a, b)?;
        let out = self
            .value(a)
            .iter()
            .zip(self.value(b))
            .map(|(x, y)| x + y)
            .collect();
        Ok(self.push(Op::Add(a, b), out, n, 1))
    }

    /// Element-wise product.
    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NeuralError> {
        let n = self.same_len("mul", a, b)?;
        let out = self
            .value(a)
            .iter()
            .zip(self.value(b))
            .map(|(x, y)| x * y)
            .collect();
        Ok(self.push(Op::Mul(a, b), out, n, 1))
    }

    fn unary(&mut self, a: NodeId, op: Op, f: fn(f64) -> f64) -> NodeId {
        let (r, c) = self.shape(a);
        let out = self.value(a).iter().map(|&x| f(x)).collect();
        self.push(op, out, r, c)
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        self.unary(a, Op::Sigmoid(a), sigmoid)
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        self.unary(a, Op::Tanh(a), f64::tanh)
    }

    pub fn relu(&mut self, a: NodeId) -> NodeId {
        self.unary(a, Op::Relu(a), |x| x.max(0.0))
    }

    pub fn scale(&mut self, a: NodeId, c: f64) -> NodeId {
        let (r, cols) = self.shape(a);
        let out = self.value(a).iter().map(|&x| x * c).collect();
        self.push(Op::Scale(a, c), out, r, cols)
    }

    /// Concatenate vectors.
    pub fn concat(&mut self, parts: &[NodeId]) -> Result<NodeId, NeuralError> {
        let mut out = Vec::new();
        for &p in parts {
            self.vector_len("concat", "part", p)?;
            out.extend_from_slice(self.value(p));
        }
        let n = out.len();
        Ok(self.push(Op::Concat(parts.to_vec()), out, n, 1))
    }

    /// Components `start..start + len` of a vector.
    pub fn slice(&mut self, a: NodeId, start: usize, len: usize) -> Result<NodeId, NeuralError> {
        let n = self.vector_len("slice", "input", a)?;
        if start + len > n {
            return Err(NeuralError::ShapeMismatch {
                op: "slice",
                operand: "input",
                expected: format!("at least {} components", start + len),
                found: shape_str(n, 1),
            });
        }
        let out = self.value(a)[start..start + len].to_vec();
        Ok(self.push(Op::Slice(a, start), out, len, 1))
    }

    /// Stack equal-length vectors as the rows of a matrix.
    pub fn stack_rows(&mut self, rows: &[NodeId]) -> Result<NodeId, NeuralError> {
        let Some(&first) = rows.first() else {
            return Err(NeuralError::EmptySequence);
        };
        let cols = self.vector_len("stack_rows", "row", first)?;
        let mut out = Vec::with_capacity(cols * rows.len());
        for &r in rows {
            let n = self.vector_len("stack_rows", "row", r)?;
            if n != cols {
                return Err(NeuralError::ShapeMismatch {
                    op: "stack_rows",
                    operand: "row",
                    expected: shape_str(cols, 1),
                    found: shape_str(n, 1),
                });
            }
            out.extend_from_slice(self.value(r));
        }
        Ok(self.push(Op::StackRows(rows.to_vec()), out, rows.len(), cols))
    }

    /// Sum of equally shaped nodes.
    pub fn sum(&mut self, parts: &[NodeId]) -> Result<NodeId, NeuralError> {
        let Some(&first) = parts.first() else {
            return Ok(self.constant(vec![0.0]));
        };
        let shape = self.shape(first);
        let mut out = vec![0.0; shape.0 * shape.1];
        for &p in parts {
            if self.shape(p) != shape {
                return Err(NeuralError::ShapeMismatch {
                    op: "sum",
                    operand: "part",
                    expected: shape_str(shape.0, shape.1),
                    found: shape_str(self.shape(p).0, self.shape(p).1),
                });
            }
            for (o, v) in out.iter_mut().zip(self.value(p)) {
                *o += v;
            }
        }
        Ok(self.push(Op::Sum(parts.to_vec()), out, shape.0, shape.1))
    }

    /// Sum of all components, as a scalar.
    pub fn sum_elements(&mut self, a: NodeId) -> NodeId {
        let s = self.value(a).iter().sum();
        self.push(Op::SumElements(a), vec![s], 1, 1)
    }

    /// `-log softmax(logits)[gold]` as a scalar node.
    pub fn softmax_xent(&mut self, logits: NodeId, gold: usize) -> Result<NodeId, NeuralError> {
        let k = self.vector_len("softmax_xent", "logits", logits)?;
        if gold >= k {
            return Err(NeuralError::GoldOutOfRange { gold, classes: k });
        }
        let lv = self.value(logits);
        let max = lv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_z = lv.iter().map(|&x| (x - max).exp()).sum::<f64>().ln() + max;
        let loss = log_z - lv[gold];
        let probs = lv.iter().map(|&x| (x - log_z).exp()).collect();
        Ok(self.push(
            Op::SoftmaxXent {
                logits,
                gold,
                probs,
            },
            vec![loss],
            1,
            1,
        ))
    }

    /// Class probabilities cached by a [`Graph::softmax_xent`] node.
    pub fn probabilities(&self, xent: NodeId) -> Option<&[f64]> {
        match &self.nodes[xent.0].op {
            Op::SoftmaxXent { probs, .. } => Some(probs),
            _ => None,
        }
    }

    /// Reverse-mode pass from a scalar `root`. A graph can be differentiated
    /// once; record a fresh forward pass for the next step.
    pub fn backward(&mut self, root: NodeId) -> Result<Gradients, NeuralError> {
        if self.consumed {
            return Err(NeuralError::AlreadyConsumed);
        }
        let (r, c) = self.shape(root);
        if r * c != 1 {
            return Err(NeuralError::NonScalarRoot(shape_str(r, c)));
        }
        self.consumed = true;

        let mut grads = Gradients::new(self.store.len());
        let mut node_grads: Vec<Option<Vec<f64>>> = Vec::with_capacity(root.0 + 1);
        node_grads.resize_with(root.0 + 1, || None);
        node_grads[root.0] = Some(vec![1.0]);

        fn acc(node_grads: &mut [Option<Vec<f64>>], id: NodeId, len: usize) -> &mut Vec<f64> {
            node_grads[id.0].get_or_insert_with(|| vec![0.0; len])
        }

        for i in (0..=root.0).rev() {
            let Some(g) = node_grads[i].take() else {
                continue;
            };
            let node = &self.nodes[i];
            let own = match &node.value {
                Value::Owned(v) => v.as_slice(),
                Value::Param(p) => self.store.value(*p).data(),
            };
            match &node.op {
                Op::Constant => {}
                Op::Param(p) => {
                    if !self.store.param(*p).frozen {
                        for (a, b) in grads.dense_mut(*p, own.len()).iter_mut().zip(&g) {
                            *a += b;
                        }
                    }
                }
                Op::Row(p, row) => {
                    if !self.store.param(*p).frozen {
                        for (a, b) in grads.row_mut(*p, *row, g.len()).iter_mut().zip(&g) {
                            *a += b;
                        }
                    }
                }
                Op::MatVec(m, x) => {
                    let (rows, cols) = (self.nodes[m.0].rows, self.nodes[m.0].cols);
                    let mv = self.value(*m);
                    let xv = self.value(*x);
                    {
                        let dx = acc(&mut node_grads, *x, cols);
                        for (row, &gr) in mv.chunks_exact(cols).zip(&g) {
                            if gr != 0.0 {
                                for (d, w) in dx.iter_mut().zip(row) {
                                    *d += gr * w;
                                }
                            }
                        }
                    }
                    let dm = acc(&mut node_grads, *m, rows * cols);
                    for (drow, &gr) in dm.chunks_exact_mut(cols).zip(&g) {
                        if gr != 0.0 {
                            for (d, xi) in drow.iter_mut().zip(xv) {
                                *d += gr * xi;
                            }
                        }
                    }
                }
                Op::Add(a, b) => {
                    for id in [a, b] {
                        for (d, gi) in acc(&mut node_grads, *id, g.len()).iter_mut().zip(&g) {
                            *d += gi;
                        }
                    }
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    for (k, d) in acc(&mut node_grads, *a, g.len()).iter_mut().enumerate() {
                        *d += g[k] * bv[k];
                    }
                    for (k, d) in acc(&mut node_grads, *b, g.len()).iter_mut().enumerate() {
                        *d += g[k] * av[k];
                    }
                }
                Op::Sigmoid(a) => {
                    for (k, d) in acc(&mut node_grads, *a, g.len()).iter_mut().enumerate() {
                        *d += g[k] * own[k] * (1.0 - own[k]);
                    }
                }
                Op::Tanh(a) => {
                    for (k, d) in acc(&mut node_grads, *a, g.len()).iter_mut().enumerate() {
                        *d += g[k] * (1.0 - own[k] * own[k]);
                    }
                }
                Op::Relu(a) => {
                    let av = self.value(*a);
                    for (k, d) in acc(&mut node_grads, *a, g.len()).iter_mut().enumerate() {
                        if av[k] > 0.0 {
                            *d += g[k];
                        }
                    }
                }
                Op::Scale(a, c) => {
                    for (d, gi) in acc(&mut node_grads, *a, g.len()).iter_mut().zip(&g) {
                        *d += c * gi;
                    }
                }
                Op::Concat(parts) => {
                    let mut off = 0;
                    for p in parts {
                        let n = self.nodes[p.0].rows;
                        for (d, gi) in acc(&mut node_grads, *p, n).iter_mut().zip(&g[off..off + n])
                        {
                            *d += gi;
                        }
                        off += n;
                    }
                }
                Op::Slice(a, start) => {
                    let n = self.nodes[a.0].rows;
                    for (d, gi) in acc(&mut node_grads, *a, n)[*start..].iter_mut().zip(&g) {
                        *d += gi;
                    }
                }
                Op::StackRows(rows) => {
                    let cols = node.cols;
                    for (r, gr) in rows.iter().zip(g.chunks_exact(cols)) {
                        for (d, gi) in acc(&mut node_grads, *r, cols).iter_mut().zip(gr) {
                            *d += gi;
                        }
                    }
                }
                Op::Sum(parts) => {
                    for p in parts {
                        for (d, gi) in acc(&mut node_grads, *p, g.len()).iter_mut().zip(&g) {
                            *d += gi;
                        }
                    }
                }
                Op::SumElements(a) => {
                    let n = self.size(*a);
                    for d in acc(&mut node_grads, *a, n).iter_mut() {
                        *d += g[0];
                    }
                }
                Op::SoftmaxXent {
                    logits,
                    gold,
                    probs,
                } => {
                    for (k, d) in acc(&mut node_grads, *logits, probs.len())
                        .iter_mut()
                        .enumerate()
                    {
                        let target = if k == *gold { 1.0 } else { 0.0 };
                        *d += g[0] * (probs[k] - target);
                    }
                }
            }
        }
        Ok(grads)
    }
}
