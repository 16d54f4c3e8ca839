//! Reverse-mode differentiation over dense matrices.
//!
//! A [`Tape`] is an append-only list of nodes; a [`Value`] is an index into
//! it. Parents always precede children, so [`Tape::backward`] is a single
//! reverse sweep. Sparse operands are constants: only dense values and
//! scalar (1x1) hyperparameters carry gradients.
//!
//! ```
//! use rgnn::autodiff::Tape;
//! use rgnn::tensor::DenseMatrix;
//!
//! let mut tape = Tape::new();
//! let w = tape.variable(DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]));
//! let loss = tape.sum(w).unwrap();
//! let grads = tape.backward(loss).unwrap();
//! assert_eq!(grads.get(w).unwrap(), &DenseMatrix::filled(2, 2, 1.0));
//! ```

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::SimilarityMatrix;
use crate::regsoftmax::{self, ProjectionCache, ProjectionRule};
use crate::tensor::{DenseMatrix, SparseMatrix};

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Value(usize);

impl Value {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Trainable quantity: a matrix (or 1x1 scalar) with its gradient buffer
/// and optimizer settings.
#[derive(Clone, Debug)]
pub struct Parameter {
    pub name: String,
    pub value: DenseMatrix,
    pub grad: DenseMatrix,
    pub learnable: bool,
    pub lr: f64,
    /// Clamp applied after every optimizer step.
    pub lower_bound: Option<f64>,
}

impl Parameter {
    pub fn new(name: impl Into<String>, value: DenseMatrix, lr: f64) -> Result<Self> {
        if !(lr > 0.0) {
            return Err(Error::Contract(format!("learning rate must be positive, got {lr}")));
        }
        let (r, c) = value.shape();
        Ok(Self {
            name: name.into(),
            value,
            grad: DenseMatrix::zeros(r, c),
            learnable: true,
            lr,
            lower_bound: None,
        })
    }

    pub fn scalar(name: impl Into<String>, value: f64, lr: f64) -> Result<Self> {
        Self::new(name, DenseMatrix::scalar(value), lr)
    }

    pub fn with_lower_bound(mut self, bound: f64) -> Self {
        self.lower_bound = Some(bound);
        self
    }

    pub fn frozen(mut self) -> Self {
        self.learnable = false;
        self
    }

    pub fn zero_grad(&mut self) {
        self.grad.as_mut_slice().fill(0.0);
    }
}

enum Op {
    Leaf,
    MatMul(Value, Value),
    SpMM(Arc<SparseMatrix>, Value),
    Add(Value, Value),
    Sub(Value, Value),
    MulConst(Value, DenseMatrix),
    Relu(Value),
    ConcatCols(Value, Value),
    RowSlice(Value, usize),
    ScaleBy(Value, Value),
    Scale(Value, f64),
    Reciprocal(Value),
    RowLog(Value),
    RowSoftmax(Value),
    RowNormalize(Value),
    Sum(Value),
    HalfSquaredNorm(Value),
    CrossEntropy {
        probs: Value,
        targets: DenseMatrix,
        rows: Vec<usize>,
    },
    NeighborMax {
        x: Value,
        argmax: Vec<usize>,
    },
    NlGradient(SimilarityMatrix, Value),
    NlDivergence(SimilarityMatrix, Value),
    ProjectBall(SimilarityMatrix, Value, Box<ProjectionCache>),
}

struct Node {
    value: Arc<DenseMatrix>,
    op: Op,
    requires_grad: bool,
}

/// Probabilities below this are clipped before taking the log.
pub const PROB_CLIP: f64 = 1e-12;

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of one backward sweep, indexed by [`Value`].
pub struct Gradients {
    grads: Vec<Option<DenseMatrix>>,
}

impl Gradients {
    /// Gradient of a differentiable leaf or intermediate. Variable leaves
    /// unreachable from the loss hold zeros.
    pub fn get(&self, v: Value) -> Option<&DenseMatrix> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Value) -> &DenseMatrix {
        &self.nodes[v.0].value
    }

    pub fn requires_grad(&self, v: Value) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn shape(&self, v: Value) -> (usize, usize) {
        self.nodes[v.0].value.shape()
    }

    fn push(&mut self, op_name: &'static str, value: DenseMatrix, op: Op, requires_grad: bool) -> Result<Value> {
        if let Some((row, col)) = value.first_non_finite() {
            return Err(Error::NonFinite { op: op_name, row, col });
        }
        self.nodes.push(Node {
            value: Arc::new(value),
            op,
            requires_grad,
        });
        Ok(Value(self.nodes.len() - 1))
    }

    fn leaf(&mut self, value: Arc<DenseMatrix>, requires_grad: bool) -> Value {
        self.nodes.push(Node {
            value,
            op: Op::Leaf,
            requires_grad,
        });
        Value(self.nodes.len() - 1)
    }

    /// Leaf that never receives a gradient.
    pub fn constant(&mut self, value: DenseMatrix) -> Value {
        self.leaf(Arc::new(value), false)
    }

    /// Constant leaf sharing storage with the caller.
    pub fn constant_shared(&mut self, value: Arc<DenseMatrix>) -> Value {
        self.leaf(value, false)
    }

    /// Leaf that receives a gradient.
    pub fn variable(&mut self, value: DenseMatrix) -> Value {
        self.leaf(Arc::new(value), true)
    }

    /// Binds a parameter: a variable when learnable, a constant otherwise.
    pub fn param(&mut self, p: &Parameter) -> Value {
        self.leaf(Arc::new(p.value.clone()), p.learnable)
    }

    fn rg(&self, vs: &[Value]) -> bool {
        vs.iter().any(|v| self.nodes[v.0].requires_grad)
    }

    fn same_shape(&self, op: &'static str, a: Value, b: Value) -> Result<()> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::Shape {
                op,
                left: self.shape(a),
                right: self.shape(b),
            });
        }
        Ok(())
    }

    fn scalar_operand(&self, op: &'static str, theta: Value) -> Result<f64> {
        if self.shape(theta) != (1, 1) {
            return Err(Error::Shape {
                op,
                left: self.shape(theta),
                right: (1, 1),
            });
        }
        Ok(self.value(theta).item())
    }

    pub fn matmul(&mut self, a: Value, b: Value) -> Result<Value> {
        let out = self.value(a).matmul(self.value(b))?;
        let rg = self.rg(&[a, b]);
        self.push("matmul", out, Op::MatMul(a, b), rg)
    }

    /// Sparse (constant) times dense.
    pub fn spmm(&mut self, s: &Arc<SparseMatrix>, b: Value) -> Result<Value> {
        let out = s.mul_dense(self.value(b))?;
        let rg = self.rg(&[b]);
        self.push("spmm", out, Op::SpMM(Arc::clone(s), b), rg)
    }

    pub fn add(&mut self, a: Value, b: Value) -> Result<Value> {
        self.same_shape("add", a, b)?;
        let out = self.value(a).zip_map(self.value(b), |x, y| x + y);
        let rg = self.rg(&[a, b]);
        self.push("add", out, Op::Add(a, b), rg)
    }

    pub fn sub(&mut self, a: Value, b: Value) -> Result<Value> {
        self.same_shape("sub", a, b)?;
        let out = self.value(a).zip_map(self.value(b), |x, y| x - y);
        let rg = self.rg(&[a, b]);
        self.push("sub", out, Op::Sub(a, b), rg)
    }

    /// Elementwise product with a constant (dropout masks).
    pub fn mul_const(&mut self, a: Value, c: DenseMatrix) -> Result<Value> {
        if self.shape(a) != c.shape() {
            return Err(Error::Shape {
                op: "mul_const",
                left: self.shape(a),
                right: c.shape(),
            });
        }
        let out = self.value(a).zip_map(&c, |x, y| x * y);
        let rg = self.rg(&[a]);
        self.push("mul_const", out, Op::MulConst(a, c), rg)
    }

    pub fn relu(&mut self, a: Value) -> Result<Value> {
        let out = self.value(a).map(|x| x.max(0.0));
        let rg = self.rg(&[a]);
        self.push("relu", out, Op::Relu(a), rg)
    }

    pub fn concat_cols(&mut self, a: Value, b: Value) -> Result<Value> {
        let (ra, ca) = self.shape(a);
        let (rb, cb) = self.shape(b);
        if ra != rb {
            return Err(Error::Shape {
                op: "concat_cols",
                left: (ra, ca),
                right: (rb, cb),
            });
        }
        let mut out = DenseMatrix::zeros(ra, ca + cb);
        for i in 0..ra {
            let row = out.row_mut(i);
            row[..ca].copy_from_slice(self.nodes[a.0].value.row(i));
            row[ca..].copy_from_slice(self.nodes[b.0].value.row(i));
        }
        let rg = self.rg(&[a, b]);
        self.push("concat_cols", out, Op::ConcatCols(a, b), rg)
    }

    /// Rows `start..end` of `a`.
    pub fn row_slice(&mut self, a: Value, start: usize, end: usize) -> Result<Value> {
        let (r, c) = self.shape(a);
        if start > end || end > r {
            return Err(Error::Contract(format!("row slice {start}..{end} of {r} rows")));
        }
        let data = self.value(a).as_slice()[start * c..end * c].to_vec();
        let out = DenseMatrix::from_vec(end - start, c, data)?;
        let rg = self.rg(&[a]);
        self.push("row_slice", out, Op::RowSlice(a, start), rg)
    }

    /// `θ · x` for a 1x1 value `θ`; the gradient reaches `θ`.
    pub fn scale_by(&mut self, x: Value, theta: Value) -> Result<Value> {
        let t = self.scalar_operand("scale_by", theta)?;
        let out = self.value(x).map(|v| t * v);
        let rg = self.rg(&[x, theta]);
        self.push("scale_by", out, Op::ScaleBy(x, theta), rg)
    }

    pub fn scale(&mut self, x: Value, c: f64) -> Result<Value> {
        let out = self.value(x).map(|v| c * v);
        let rg = self.rg(&[x]);
        self.push("scale", out, Op::Scale(x, c), rg)
    }

    /// `1 / θ` for a 1x1 value.
    pub fn reciprocal(&mut self, theta: Value) -> Result<Value> {
        let t = self.scalar_operand("reciprocal", theta)?;
        if t == 0.0 {
            return Err(Error::Domain {
                op: "reciprocal",
                row: 0,
                col: 0,
                value: t,
            });
        }
        let rg = self.rg(&[theta]);
        self.push("reciprocal", DenseMatrix::scalar(1.0 / t), Op::Reciprocal(theta), rg)
    }

    /// Elementwise natural log; every entry must be strictly positive.
    pub fn row_log(&mut self, a: Value) -> Result<Value> {
        let m = self.value(a);
        if let Some(p) = m.as_slice().iter().position(|&v| !(v > 0.0)) {
            let c = m.cols();
            return Err(Error::Domain {
                op: "row_log",
                row: p / c,
                col: p % c,
                value: m.as_slice()[p],
            });
        }
        let out = m.map(f64::ln);
        let rg = self.rg(&[a]);
        self.push("row_log", out, Op::RowLog(a), rg)
    }

    /// Softmax of every row, with the row maximum subtracted first.
    pub fn row_softmax(&mut self, a: Value) -> Result<Value> {
        let m = self.value(a);
        if let Some((row, col)) = m.first_non_finite() {
            return Err(Error::NonFinite {
                op: "row_softmax",
                row,
                col,
            });
        }
        let out = softmax_rows(m);
        let rg = self.rg(&[a]);
        self.push("row_softmax", out, Op::RowSoftmax(a), rg)
    }

    /// Divides every row by its Euclidean norm; zero rows stay zero.
    pub fn row_normalize(&mut self, a: Value) -> Result<Value> {
        let mut out = self.value(a).clone();
        for i in 0..out.rows() {
            let row = out.row_mut(i);
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|v| *v /= norm);
            }
        }
        let rg = self.rg(&[a]);
        self.push("row_normalize", out, Op::RowNormalize(a), rg)
    }

    pub fn sum(&mut self, a: Value) -> Result<Value> {
        let s = self.value(a).sum();
        let rg = self.rg(&[a]);
        self.push("sum", DenseMatrix::scalar(s), Op::Sum(a), rg)
    }

    /// `½ ‖a‖²`
    pub fn half_squared_norm(&mut self, a: Value) -> Result<Value> {
        let s = 0.5 * self.value(a).as_slice().iter().map(|v| v * v).sum::<f64>();
        let rg = self.rg(&[a]);
        self.push("half_squared_norm", DenseMatrix::scalar(s), Op::HalfSquaredNorm(a), rg)
    }

    /// `−Σ_{i ∈ rows} Σ_k Y_ik ln max(P_ik, 1e-12)`, summed (not averaged).
    pub fn cross_entropy(&mut self, probs: Value, targets: &DenseMatrix, rows: &[usize]) -> Result<Value> {
        if rows.is_empty() {
            return Err(Error::Contract("cross-entropy over an empty node set".into()));
        }
        if self.shape(probs) != targets.shape() {
            return Err(Error::Shape {
                op: "cross_entropy",
                left: self.shape(probs),
                right: targets.shape(),
            });
        }
        let p = self.value(probs);
        let mut loss = 0.0;
        for &i in rows {
            if i >= p.rows() {
                return Err(Error::Contract(format!("row {i} outside {} rows", p.rows())));
            }
            for (y, &q) in targets.row(i).iter().zip(p.row(i)) {
                if *y != 0.0 {
                    loss -= y * q.max(PROB_CLIP).ln();
                }
            }
        }
        let rg = self.rg(&[probs]);
        self.push(
            "cross_entropy",
            DenseMatrix::scalar(loss),
            Op::CrossEntropy {
                probs,
                targets: targets.clone(),
                rows: rows.to_vec(),
            },
            rg,
        )
    }

    /// `out_i = max_{j ∈ N(i)} x_j` columnwise over the neighbours stored in
    /// row `i` of `adjacency`; isolated nodes get zeros.
    pub fn neighbor_max(&mut self, adjacency: &SparseMatrix, x: Value) -> Result<Value> {
        let (n, d) = self.shape(x);
        if adjacency.cols() != n {
            return Err(Error::Shape {
                op: "neighbor_max",
                left: adjacency.shape(),
                right: (n, d),
            });
        }
        let xv = self.value(x);
        let rows = adjacency.rows();
        let mut out = DenseMatrix::zeros(rows, d);
        let mut argmax = vec![usize::MAX; rows * d];
        for i in 0..rows {
            let (nbrs, _) = adjacency.row(i);
            if nbrs.is_empty() {
                continue;
            }
            let out_row = out.row_mut(i);
            let arg_row = &mut argmax[i * d..(i + 1) * d];
            out_row.copy_from_slice(xv.row(nbrs[0]));
            arg_row.fill(nbrs[0]);
            for &j in &nbrs[1..] {
                for (c, &v) in xv.row(j).iter().enumerate() {
                    if v > out_row[c] {
                        out_row[c] = v;
                        arg_row[c] = j;
                    }
                }
            }
        }
        let rg = self.rg(&[x]);
        self.push("neighbor_max", out, Op::NeighborMax { x, argmax }, rg)
    }

    /// Non-local gradient of an `N x K` node field into a `slots x K` edge field.
    pub fn nl_gradient(&mut self, sim: &SimilarityMatrix, a: Value) -> Result<Value> {
        if self.shape(a).0 != sim.num_nodes() {
            return Err(Error::Shape {
                op: "nl_gradient",
                left: self.shape(a),
                right: sim.weights().shape(),
            });
        }
        let out = regsoftmax::gradient_field(sim, self.value(a));
        let rg = self.rg(&[a]);
        self.push("nl_gradient", out, Op::NlGradient(sim.clone(), a), rg)
    }

    /// Non-local divergence of a `slots x K` edge field into an `N x K` node field.
    pub fn nl_divergence(&mut self, sim: &SimilarityMatrix, eta: Value) -> Result<Value> {
        if self.shape(eta).0 != sim.num_slots() {
            return Err(Error::Shape {
                op: "nl_divergence",
                left: self.shape(eta),
                right: (sim.num_slots(), self.shape(eta).1),
            });
        }
        let out = regsoftmax::divergence_field(sim, self.value(eta));
        let rg = self.rg(&[eta]);
        self.push("nl_divergence", out, Op::NlDivergence(sim.clone(), eta), rg)
    }

    /// Projection of every node-row of every class onto the unit ball.
    pub fn project_ball(&mut self, sim: &SimilarityMatrix, eta: Value, rule: ProjectionRule) -> Result<Value> {
        if self.shape(eta).0 != sim.num_slots() {
            return Err(Error::Shape {
                op: "project_ball",
                left: self.shape(eta),
                right: (sim.num_slots(), self.shape(eta).1),
            });
        }
        let (out, cache) = regsoftmax::project_field(sim, self.value(eta), rule);
        let rg = self.rg(&[eta]);
        self.push(
            "project_ball",
            out,
            Op::ProjectBall(sim.clone(), eta, Box::new(cache)),
            rg,
        )
    }

    /// Reverse sweep from a scalar `loss`.
    pub fn backward(&self, loss: Value) -> Result<Gradients> {
        if self.shape(loss) != (1, 1) {
            return Err(Error::Contract(format!(
                "backward needs a scalar loss, got {:?}",
                self.shape(loss)
            )));
        }
        let mut grads: Vec<Option<DenseMatrix>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(DenseMatrix::scalar(1.0));
        for idx in (0..=loss.0).rev() {
            let node = &self.nodes[idx];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[idx].take() else { continue };
            self.propagate(node, &g, &mut grads)?;
            grads[idx] = Some(g);
        }
        for (idx, node) in self.nodes.iter().enumerate() {
            if node.requires_grad && matches!(node.op, Op::Leaf) && grads[idx].is_none() {
                let (r, c) = node.value.shape();
                grads[idx] = Some(DenseMatrix::zeros(r, c));
            }
        }
        Ok(Gradients { grads })
    }

    fn propagate(&self, node: &Node, g: &DenseMatrix, grads: &mut [Option<DenseMatrix>]) -> Result<()> {
        let mut acc = |v: Value, contrib: DenseMatrix| {
            if !self.nodes[v.0].requires_grad {
                return;
            }
            match &mut grads[v.0] {
                Some(existing) => existing.add_assign(&contrib),
                slot @ None => *slot = Some(contrib),
            }
        };
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if self.nodes[a.0].requires_grad {
                    acc(*a, g.matmul_t(self.value(*b))?);
                }
                if self.nodes[b.0].requires_grad {
                    acc(*b, self.value(*a).t_matmul(g)?);
                }
            }
            Op::SpMM(s, b) => acc(*b, s.t_mul_dense(g)?),
            Op::Add(a, b) => {
                acc(*a, g.clone());
                acc(*b, g.clone());
            }
            Op::Sub(a, b) => {
                acc(*a, g.clone());
                acc(*b, g.map(|v| -v));
            }
            Op::MulConst(a, c) => acc(*a, g.zip_map(c, |x, y| x * y)),
            Op::Relu(a) => acc(*a, g.zip_map(self.value(*a), |gv, x| if x > 0.0 { gv } else { 0.0 })),
            Op::ConcatCols(a, b) => {
                let ca = self.shape(*a).1;
                let cb = self.shape(*b).1;
                let rows = g.rows();
                let ga = DenseMatrix::from_fn(rows, ca, |i, j| g.get(i, j));
                let gb = DenseMatrix::from_fn(rows, cb, |i, j| g.get(i, ca + j));
                acc(*a, ga);
                acc(*b, gb);
            }
            Op::RowSlice(a, start) => {
                let (r, c) = self.shape(*a);
                let mut full = DenseMatrix::zeros(r, c);
                full.as_mut_slice()[start * c..start * c + g.len()].copy_from_slice(g.as_slice());
                acc(*a, full);
            }
            Op::ScaleBy(x, theta) => {
                let t = self.value(*theta).item();
                if self.nodes[x.0].requires_grad {
                    acc(*x, g.map(|v| t * v));
                }
                if self.nodes[theta.0].requires_grad {
                    let dot: f64 = g
                        .as_slice()
                        .iter()
                        .zip(self.value(*x).as_slice())
                        .map(|(a, b)| a * b)
                        .sum();
                    acc(*theta, DenseMatrix::scalar(dot));
                }
            }
            Op::Scale(x, c) => acc(*x, g.map(|v| c * v)),
            Op::Reciprocal(theta) => {
                let y = node.value.item();
                acc(*theta, DenseMatrix::scalar(-g.item() * y * y));
            }
            Op::RowLog(a) => acc(*a, g.zip_map(self.value(*a), |gv, x| gv / x)),
            Op::RowSoftmax(a) => {
                let y = &node.value;
                let mut out = DenseMatrix::zeros(y.rows(), y.cols());
                for i in 0..y.rows() {
                    let yr = y.row(i);
                    let gr = g.row(i);
                    let dot: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
                    for (o, (&yv, &gv)) in out.row_mut(i).iter_mut().zip(yr.iter().zip(gr)) {
                        *o = yv * (gv - dot);
                    }
                }
                acc(*a, out);
            }
            Op::RowNormalize(a) => {
                let x = self.value(*a);
                let y = &node.value;
                let mut out = DenseMatrix::zeros(x.rows(), x.cols());
                for i in 0..x.rows() {
                    let norm = x.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm == 0.0 {
                        continue;
                    }
                    let yr = y.row(i);
                    let gr = g.row(i);
                    let dot: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
                    for (o, (&yv, &gv)) in out.row_mut(i).iter_mut().zip(yr.iter().zip(gr)) {
                        *o = (gv - yv * dot) / norm;
                    }
                }
                acc(*a, out);
            }
            Op::Sum(a) => {
                let (r, c) = self.shape(*a);
                acc(*a, DenseMatrix::filled(r, c, g.item()));
            }
            Op::HalfSquaredNorm(a) => {
                let s = g.item();
                acc(*a, self.value(*a).map(|v| s * v));
            }
            Op::CrossEntropy { probs, targets, rows } => {
                let p = self.value(*probs);
                let s = g.item();
                let mut out = DenseMatrix::zeros(p.rows(), p.cols());
                for &i in rows {
                    for c in 0..p.cols() {
                        let y = targets.get(i, c);
                        let q = p.get(i, c);
                        if y != 0.0 && q >= PROB_CLIP {
                            let v = out.get(i, c) - s * y / q;
                            out.set(i, c, v);
                        }
                    }
                }
                acc(*probs, out);
            }
            Op::NeighborMax { x, argmax } => {
                let (n, d) = self.shape(*x);
                let mut out = DenseMatrix::zeros(n, d);
                for (p, &src) in argmax.iter().enumerate() {
                    if src != usize::MAX {
                        let c = p % d;
                        out.as_mut_slice()[src * d + c] += g.as_slice()[p];
                    }
                }
                acc(*x, out);
            }
            Op::NlGradient(sim, a) => acc(*a, regsoftmax::gradient_field_adjoint(sim, g)),
            Op::NlDivergence(sim, eta) => acc(*eta, regsoftmax::divergence_field_adjoint(sim, g)),
            Op::ProjectBall(sim, eta, cache) => {
                acc(*eta, regsoftmax::project_field_adjoint(sim, self.value(*eta), cache, g));
            }
        }
        Ok(())
    }
}

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(m: &DenseMatrix) -> DenseMatrix {
    let mut out = m.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            z += *v;
        }
        for v in row.iter_mut() {
            *v /= z;
        }
    }
    out
}

/// Outcome of comparing tape gradients with central differences.
#[derive(Clone, Debug)]
pub struct GradCheckReport {
    /// Largest relative error per input, in input order.
    pub per_input: Vec<f64>,
    pub max_rel_error: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Denominator floor of the relative error, so entries whose true
/// derivative is ~0 are judged on absolute error instead.
pub const REL_ERROR_FLOOR: f64 = 1e-4;

/// Relative error `|a − b| / max(|a|, |b|, 1e-4)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(REL_ERROR_FLOOR)
}

/// Compares the tape gradient of the scalar program `f` with central
/// differences of step `h` for every entry of every input.
pub fn gradient_check<F>(f: F, inputs: &[DenseMatrix], h: f64, tol: f64) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape, &[Value]) -> Result<Value>,
{
    let eval = |vals: &[DenseMatrix]| -> Result<f64> {
        let mut tape = Tape::new();
        let vs: Vec<Value> = vals.iter().map(|m| tape.constant(m.clone())).collect();
        let out = f(&mut tape, &vs)?;
        Ok(tape.value(out).item())
    };

    let mut tape = Tape::new();
    let vs: Vec<Value> = inputs.iter().map(|m| tape.variable(m.clone())).collect();
    let loss = f(&mut tape, &vs)?;
    let grads = tape.backward(loss)?;

    let mut per_input = Vec::with_capacity(inputs.len());
    let mut work: Vec<DenseMatrix> = inputs.to_vec();
    for (p, v) in vs.iter().enumerate() {
        let analytic = grads.get(*v).expect("variable leaves always have a gradient").clone();
        let mut worst = 0.0f64;
        for e in 0..inputs[p].len() {
            let orig = inputs[p].as_slice()[e];
            work[p].as_mut_slice()[e] = orig + h;
            let up = eval(&work)?;
            work[p].as_mut_slice()[e] = orig - h;
            let down = eval(&work)?;
            work[p].as_mut_slice()[e] = orig;
            let numeric = (up - down) / (2.0 * h);
            worst = worst.max(relative_error(analytic.as_slice()[e], numeric));
        }
        per_input.push(worst);
    }
    let max_rel_error = per_input.iter().copied().fold(0.0, f64::max);
    Ok(GradCheckReport {
        per_input,
        max_rel_error,
        tol,
        passed: max_rel_error < tol,
    })
}
