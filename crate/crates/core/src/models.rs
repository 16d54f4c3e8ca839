//! Two-layer GCN and GraphSAGE networks producing pre-softmax outputs.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{Parameter, Tape, Value};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::tensor::{DenseMatrix, SparseMatrix};
use crate::train::glorot_init;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Gcn,
    SageMean,
    SageMaxpool,
}

impl ModelKind {
    pub fn default_hidden_dim(self) -> usize {
        match self {
            ModelKind::Gcn => 16,
            ModelKind::SageMean | ModelKind::SageMaxpool => 64,
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gcn" => Ok(ModelKind::Gcn),
            "sage-mean" => Ok(ModelKind::SageMean),
            "sage-maxpool" => Ok(ModelKind::SageMaxpool),
            other => Err(Error::Config(format!(
                "unknown model `{other}` (expected gcn, sage-mean or sage-maxpool)"
            ))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Gcn => "gcn",
            ModelKind::SageMean => "sage-mean",
            ModelKind::SageMaxpool => "sage-maxpool",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub hidden_dim: usize,
    /// Dropout rate on the input of each layer while training.
    pub dropout: f64,
    /// L2 penalty coefficient on first-layer weights.
    pub weight_decay: f64,
    /// Row-normalize the hidden layer of the GraphSAGE variants.
    pub l2_normalize: bool,
}

impl ModelConfig {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            hidden_dim: kind.default_hidden_dim(),
            dropout: 0.5,
            weight_decay: 5e-4,
            l2_normalize: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_dim == 0 {
            return Err(Error::Config("hidden_dim must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::Config(format!("weight_decay {} is negative", self.weight_decay)));
        }
        Ok(())
    }
}

/// Network weights plus the graph operators the forward pass needs.
///
/// Parameter layout:
/// - GCN: `[W⁰ (d×h), W¹ (h×K)]`
/// - SAGE-mean: `[W⁰ (2d×h), W¹ (2h×K)]`
/// - SAGE-maxpool: `[P⁰ (d×d), W⁰ (2d×h), P¹ (h×h), W¹ (2h×K)]`
#[derive(Clone, Debug)]
pub struct Model {
    config: ModelConfig,
    params: Vec<Parameter>,
    first_layer: usize,
    operator: Arc<SparseMatrix>,
    features: Arc<DenseMatrix>,
}

fn weight_shapes(config: &ModelConfig, d: usize, k: usize) -> Vec<(&'static str, usize, usize)> {
    let h = config.hidden_dim;
    match config.kind {
        ModelKind::Gcn => vec![("w0", d, h), ("w1", h, k)],
        ModelKind::SageMean => vec![("w0", 2 * d, h), ("w1", 2 * h, k)],
        ModelKind::SageMaxpool => vec![("pool0", d, d), ("w0", 2 * d, h), ("pool1", h, h), ("w1", 2 * h, k)],
    }
}

impl Model {
    /// Glorot-initialized model for `graph`.
    pub fn new(graph: &Graph, config: &ModelConfig, lr: f64, rng: &mut ChaCha8Rng) -> Result<Self> {
        let shapes = weight_shapes(config, graph.num_features(), graph.num_classes());
        let weights = shapes.iter().map(|&(_, r, c)| glorot_init(r, c, rng)).collect();
        Self::from_weights(graph, config, lr, weights)
    }

    /// Model with explicit weights, in the layout documented on [`Model`].
    pub fn from_weights(graph: &Graph, config: &ModelConfig, lr: f64, weights: Vec<DenseMatrix>) -> Result<Self> {
        config.validate()?;
        let shapes = weight_shapes(config, graph.num_features(), graph.num_classes());
        if weights.len() != shapes.len() {
            return Err(Error::Contract(format!(
                "{} expects {} weight matrices, got {}",
                config.kind,
                shapes.len(),
                weights.len()
            )));
        }
        let mut params = Vec::with_capacity(shapes.len());
        for ((name, r, c), w) in shapes.into_iter().zip(weights) {
            if w.shape() != (r, c) {
                return Err(Error::Shape {
                    op: "model weights",
                    left: w.shape(),
                    right: (r, c),
                });
            }
            params.push(Parameter::new(name, w, lr)?);
        }
        let (operator, first_layer) = match config.kind {
            ModelKind::Gcn => (graph.gcn_propagation(), 1),
            ModelKind::SageMean => (graph.mean_aggregation(), 1),
            ModelKind::SageMaxpool => ((**graph.adjacency()).clone(), 2),
        };
        Ok(Self {
            config: config.clone(),
            params,
            first_layer,
            operator: Arc::new(operator),
            features: Arc::clone(graph.features()),
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &[Parameter] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Parameter] {
        &mut self.params
    }

    pub fn bind(&self, tape: &mut Tape) -> Vec<Value> {
        self.params.iter().map(|p| tape.param(p)).collect()
    }

    /// Pre-softmax output `O` (N×K). Dropout is applied only when `dropout`
    /// supplies a random stream and the configured rate is positive.
    pub fn forward(&self, tape: &mut Tape, weights: &[Value], mut dropout: Option<&mut ChaCha8Rng>) -> Result<Value> {
        if weights.len() != self.params.len() {
            return Err(Error::Contract("weight handles do not match the model".into()));
        }
        let rate = self.config.dropout;
        let x = tape.constant_shared(Arc::clone(&self.features));
        let x = apply_dropout(tape, x, rate, dropout.as_deref_mut(), true)?;
        match self.config.kind {
            ModelKind::Gcn => {
                let xw = tape.matmul(x, weights[0])?;
                let h = tape.spmm(&self.operator, xw)?;
                let h = tape.relu(h)?;
                let h = apply_dropout(tape, h, rate, dropout.as_deref_mut(), false)?;
                let hw = tape.matmul(h, weights[1])?;
                tape.spmm(&self.operator, hw)
            }
            ModelKind::SageMean => {
                let agg = tape.spmm(&self.operator, x)?;
                let h = self.combine(tape, x, agg, weights[0], true)?;
                let h = apply_dropout(tape, h, rate, dropout.as_deref_mut(), false)?;
                let agg = tape.spmm(&self.operator, h)?;
                self.combine(tape, h, agg, weights[1], false)
            }
            ModelKind::SageMaxpool => {
                let agg = self.maxpool(tape, x, weights[0])?;
                let h = self.combine(tape, x, agg, weights[1], true)?;
                let h = apply_dropout(tape, h, rate, dropout, false)?;
                let agg = self.maxpool(tape, h, weights[2])?;
                self.combine(tape, h, agg, weights[3], false)
            }
        }
    }

    fn maxpool(&self, tape: &mut Tape, h: Value, pool: Value) -> Result<Value> {
        let z = tape.matmul(h, pool)?;
        let z = tape.relu(z)?;
        tape.neighbor_max(&self.operator, z)
    }

    fn combine(&self, tape: &mut Tape, h: Value, agg: Value, w: Value, hidden: bool) -> Result<Value> {
        let c = tape.concat_cols(h, agg)?;
        let out = tape.matmul(c, w)?;
        if !hidden {
            return Ok(out);
        }
        let out = tape.relu(out)?;
        if self.config.l2_normalize {
            tape.row_normalize(out)
        } else {
            Ok(out)
        }
    }

    /// `scale · weight_decay · Σ ½‖W‖²` over the first-layer weights, or
    /// `None` when weight decay is off.
    pub fn decay_penalty(&self, tape: &mut Tape, weights: &[Value], scale: f64) -> Result<Option<Value>> {
        if self.config.weight_decay == 0.0 {
            return Ok(None);
        }
        let mut total: Option<Value> = None;
        for &w in &weights[..self.first_layer] {
            let sq = tape.half_squared_norm(w)?;
            total = Some(match total {
                Some(t) => tape.add(t, sq)?,
                None => sq,
            });
        }
        let total = total.expect("every model has a first layer");
        tape.scale(total, scale * self.config.weight_decay).map(Some)
    }
}

/// Inverted dropout: kept entries are scaled by `1/(1−rate)`. With
/// `nonzero_only` the mask is drawn only where the input is nonzero, which
/// leaves the product unchanged and saves draws on sparse features.
fn apply_dropout(
    tape: &mut Tape,
    x: Value,
    rate: f64,
    rng: Option<&mut ChaCha8Rng>,
    nonzero_only: bool,
) -> Result<Value> {
    let Some(rng) = rng else { return Ok(x) };
    if rate == 0.0 {
        return Ok(x);
    }
    let keep = 1.0 / (1.0 - rate);
    let xv = tape.value(x);
    let mut mask = DenseMatrix::zeros(xv.rows(), xv.cols());
    for (m, &v) in mask.as_mut_slice().iter_mut().zip(xv.as_slice()) {
        if nonzero_only && v == 0.0 {
            continue;
        }
        if rng.random::<f64>() >= rate {
            *m = keep;
        }
    }
    tape.mul_const(x, mask)
}
