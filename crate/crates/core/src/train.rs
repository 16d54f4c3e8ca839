//! Initialization, loss, optimizer and the single-run training loop.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Parameter, Tape, Value, PROB_CLIP};
use crate::error::{Error, Result};
use crate::graph::{ideal_similarity, sym_normalize, Graph, SimilarityMatrix};
use crate::models::{Model, ModelConfig};
use crate::regsoftmax::{reg_softmax_forward, HyperValues, ProjectionRule, RegSoftmaxOptions, RegSoftmaxParams};
use crate::tensor::DenseMatrix;

/// Half-width of the Glorot uniform range, `sqrt(6 / (rows + cols))`.
pub fn glorot_bound(rows: usize, cols: usize) -> f64 {
    (6.0 / (rows + cols) as f64).sqrt()
}

/// Matrix with entries uniform on `±sqrt(6 / (rows + cols))`.
pub fn glorot_init(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let b = glorot_bound(rows, cols);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-b..=b))
}

pub fn one_hot(labels: &[usize], num_classes: usize) -> DenseMatrix {
    DenseMatrix::from_fn(labels.len(), num_classes, |i, k| if labels[i] == k { 1.0 } else { 0.0 })
}

/// Summed cross-entropy of `probs` against `labels` over `rows`.
pub fn cross_entropy(probs: &DenseMatrix, labels: &[usize], rows: &[usize]) -> f64 {
    rows.iter().map(|&i| -probs.get(i, labels[i]).max(PROB_CLIP).ln()).sum()
}

/// Fraction of `rows` whose argmax matches the label.
pub fn accuracy(probs: &DenseMatrix, labels: &[usize], rows: &[usize]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let pred = probs.row_argmax();
    rows.iter().filter(|&&i| pred[i] == labels[i]).count() as f64 / rows.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates of one parameter.
#[derive(Clone, Debug)]
pub struct AdamState {
    m: DenseMatrix,
    v: DenseMatrix,
    t: u32,
}

impl AdamState {
    pub fn new(p: &Parameter) -> Self {
        let (r, c) = p.value.shape();
        Self {
            m: DenseMatrix::zeros(r, c),
            v: DenseMatrix::zeros(r, c),
            t: 0,
        }
    }
}

/// One bias-corrected Adam update of `p` from `p.grad`, followed by the
/// parameter's lower-bound clamp. Frozen parameters are left alone.
pub fn adam_step(p: &mut Parameter, state: &mut AdamState, cfg: &AdamConfig) {
    if !p.learnable {
        return;
    }
    state.t += 1;
    let c1 = 1.0 - cfg.beta1.powi(state.t as i32);
    let c2 = 1.0 - cfg.beta2.powi(state.t as i32);
    let values = p.value.as_mut_slice();
    let m = state.m.as_mut_slice();
    let v = state.v.as_mut_slice();
    for (idx, &g) in p.grad.as_slice().iter().enumerate() {
        m[idx] = cfg.beta1 * m[idx] + (1.0 - cfg.beta1) * g;
        v[idx] = cfg.beta2 * v[idx] + (1.0 - cfg.beta2) * g * g;
        let m_hat = m[idx] / c1;
        let v_hat = v[idx] / c2;
        values[idx] -= p.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        if let Some(lo) = p.lower_bound {
            values[idx] = values[idx].max(lo);
        }
    }
}

/// Node index sets of one split.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    /// Checks that the sets are in range and pairwise disjoint.
    pub fn validate(&self, num_nodes: usize) -> Result<()> {
        let mut seen = vec![false; num_nodes];
        for (name, set) in [("train", &self.train), ("val", &self.val), ("test", &self.test)] {
            for &i in set {
                if i >= num_nodes {
                    return Err(Error::Contract(format!("{name} node {i} outside {num_nodes} nodes")));
                }
                if seen[i] {
                    return Err(Error::Contract(format!("node {i} appears in more than one set")));
                }
                seen[i] = true;
            }
        }
        Ok(())
    }
}

/// How validation metrics reset the early-stopping counter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PatienceRule {
    /// An improvement in validation loss or in validation accuracy resets it.
    #[default]
    Either,
    /// Only an epoch improving both resets it.
    Both,
}

impl FromStr for PatienceRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "either" | "or" => Ok(PatienceRule::Either),
            "both" | "and" => Ok(PatienceRule::Both),
            other => Err(Error::Config(format!("unknown patience rule `{other}`"))),
        }
    }
}

impl fmt::Display for PatienceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatienceRule::Either => "either",
            PatienceRule::Both => "both",
        })
    }
}

/// Source of the similarity matrix used by the regularized softmax.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SimilarityKind {
    /// `D^{-1/2} A D^{-1/2}` of the input graph.
    #[default]
    NormalizedAdjacency,
    /// 1 for every pair of distinct nodes sharing a ground-truth label.
    Ideal,
    /// The ideal matrix with the same `D^{-1/2} S D^{-1/2}` scaling as the
    /// adjacency.
    IdealNormalized,
}

impl FromStr for SimilarityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normalized-adjacency" => Ok(SimilarityKind::NormalizedAdjacency),
            "ideal" => Ok(SimilarityKind::Ideal),
            "ideal-normalized" => Ok(SimilarityKind::IdealNormalized),
            other => Err(Error::Config(format!(
                "unknown similarity `{other}` (expected normalized-adjacency, ideal or ideal-normalized)"
            ))),
        }
    }
}

impl fmt::Display for SimilarityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimilarityKind::NormalizedAdjacency => "normalized-adjacency",
            SimilarityKind::Ideal => "ideal",
            SimilarityKind::IdealNormalized => "ideal-normalized",
        })
    }
}

impl SimilarityKind {
    pub fn build(self, graph: &Graph) -> Result<SimilarityMatrix> {
        match self {
            SimilarityKind::NormalizedAdjacency => Ok(graph.similarity()),
            SimilarityKind::Ideal => ideal_similarity(graph.labels(), graph.num_classes()),
            SimilarityKind::IdealNormalized => {
                let raw = ideal_similarity(graph.labels(), graph.num_classes())?;
                SimilarityMatrix::new(sym_normalize(raw.weights())?)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub patience: usize,
    pub patience_rule: PatienceRule,
    /// Learning rate of the network weights.
    pub lr: f64,
    pub regularized: bool,
    /// Initial `τ`, `λ`, `ε`.
    pub hyper_init: [f64; 3],
    /// Learning rates of `τ`, `λ`, `ε`.
    pub hyper_lr: [f64; 3],
    /// Which of `τ`, `λ`, `ε` are trained.
    pub hyper_learnable: [bool; 3],
    pub t_steps: usize,
    pub projection: ProjectionRule,
    pub similarity: SimilarityKind,
    /// Check row-stochasticity and dual feasibility every this many epochs
    /// (0 disables the checks).
    pub check_every: usize,
    pub seed: u64,
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_epochs: 10_000,
            patience: 50,
            patience_rule: PatienceRule::Either,
            lr: 0.01,
            regularized: true,
            hyper_init: [1.0, 3.0, 1.0],
            hyper_lr: [0.01, 0.001, 0.01],
            hyper_learnable: [true; 3],
            t_steps: 1,
            projection: ProjectionRule::RowNorm,
            similarity: SimilarityKind::NormalizedAdjacency,
            check_every: 1,
            seed: 0,
            adam: AdamConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.patience == 0 {
            return Err(Error::Config("patience must be at least 1".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be at least 1".into()));
        }
        if self.t_steps == 0 {
            return Err(Error::Config("T must be at least 1".into()));
        }
        for (name, lr) in [
            ("lr", self.lr),
            ("tau_lr", self.hyper_lr[0]),
            ("lambda_lr", self.hyper_lr[1]),
            ("epsilon_lr", self.hyper_lr[2]),
        ] {
            if !(lr > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {lr}")));
            }
        }
        let [tau, lambda, eps] = self.hyper_init;
        if !(tau > 0.0) || !(lambda >= 0.0) || !(eps > 0.0) {
            return Err(Error::Config(format!(
                "initial tau/lambda/epsilon must satisfy tau > 0, lambda >= 0, epsilon > 0; got {tau}/{lambda}/{eps}"
            )));
        }
        Ok(())
    }

    fn hyper_params(&self) -> Result<RegSoftmaxParams> {
        let mut p = RegSoftmaxParams::new(self.hyper_init, self.hyper_lr, self.t_steps)?;
        for (param, learn) in [&mut p.tau, &mut p.lambda, &mut p.epsilon]
            .into_iter()
            .zip(self.hyper_learnable)
        {
            param.learnable = learn;
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub test_accuracy: f64,
    pub val_accuracy: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub seconds_per_epoch: f64,
    /// `τ`, `λ`, `ε` of the restored best model.
    pub tau: f64,
    pub lambda: f64,
    pub epsilon: f64,
}

/// A finished run with the restored model's outputs on every node.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub result: RunResult,
    /// Output probabilities (N×K).
    pub probs: DenseMatrix,
    /// Pre-softmax network output `O` (N×K).
    pub logits: DenseMatrix,
    /// Restored network weights, in [`Model`] layout.
    pub weights: Vec<DenseMatrix>,
}

/// Trains one model and reports its test accuracy.
pub fn train_run(graph: &Graph, split: &Split, model_cfg: &ModelConfig, cfg: &TrainConfig) -> Result<RunResult> {
    train_run_detailed(graph, split, model_cfg, cfg).map(|o| o.result)
}

struct Snapshot {
    weights: Vec<DenseMatrix>,
    hyper: (f64, f64, f64),
}

struct Trainer<'a> {
    graph: &'a Graph,
    split: &'a Split,
    cfg: &'a TrainConfig,
    model: Model,
    hyper: RegSoftmaxParams,
    sim: Option<SimilarityMatrix>,
    targets: DenseMatrix,
}

impl<'a> Trainer<'a> {
    fn new(graph: &'a Graph, split: &'a Split, model: Model, cfg: &'a TrainConfig) -> Result<Self> {
        let sim = if cfg.regularized {
            Some(cfg.similarity.build(graph)?)
        } else {
            None
        };
        Ok(Self {
            graph,
            split,
            cfg,
            model,
            hyper: cfg.hyper_params()?,
            sim,
            targets: one_hot(graph.labels(), graph.num_classes()),
        })
    }

    fn adam_states(&self) -> Vec<AdamState> {
        let mut adam: Vec<AdamState> = self.model.params().iter().map(AdamState::new).collect();
        if self.sim.is_some() {
            adam.extend([&self.hyper.tau, &self.hyper.lambda, &self.hyper.epsilon].map(AdamState::new));
        }
        adam
    }

    fn output(&self, tape: &mut Tape, o: Value, hyper: Option<HyperValues>, check: bool) -> Result<Value> {
        match (&self.sim, hyper) {
            (Some(sim), Some(hv)) => {
                let opts = RegSoftmaxOptions {
                    t_steps: self.cfg.t_steps,
                    rule: self.cfg.projection,
                    check_invariants: check,
                };
                reg_softmax_forward(tape, o, sim, hv, &opts)
            }
            _ => tape.row_softmax(o),
        }
    }

    /// One optimizer step; returns the training loss.
    fn step(&mut self, rng: &mut ChaCha8Rng, adam: &mut [AdamState], check: bool) -> Result<f64> {
        let mut tape = Tape::new();
        let w = self.model.bind(&mut tape);
        let hv = self.sim.as_ref().map(|_| self.hyper.bind(&mut tape));
        let o = self.model.forward(&mut tape, &w, Some(rng))?;
        let probs = self.output(&mut tape, o, hv, check)?;
        let mut loss = tape.cross_entropy(probs, &self.targets, &self.split.train)?;
        if let Some(pen) = self.model.decay_penalty(&mut tape, &w, self.split.train.len() as f64)? {
            loss = tape.add(loss, pen)?;
        }
        let grads = tape.backward(loss)?;
        for (p, v) in self.model.params_mut().iter_mut().zip(&w) {
            p.grad = grads
                .get(*v)
                .cloned()
                .unwrap_or_else(|| DenseMatrix::zeros(p.value.rows(), p.value.cols()));
        }
        if let Some(hv) = hv {
            for (p, v) in [&mut self.hyper.tau, &mut self.hyper.lambda, &mut self.hyper.epsilon]
                .into_iter()
                .zip([hv.tau, hv.lambda, hv.epsilon])
            {
                p.grad = grads.get(v).cloned().unwrap_or_else(|| DenseMatrix::scalar(0.0));
            }
        }
        let mut states = adam.iter_mut();
        for p in self.model.params_mut() {
            adam_step(p, states.next().expect("state per parameter"), &self.cfg.adam);
        }
        if self.sim.is_some() {
            for p in [&mut self.hyper.tau, &mut self.hyper.lambda, &mut self.hyper.epsilon] {
                adam_step(p, states.next().expect("state per parameter"), &self.cfg.adam);
            }
        }
        Ok(tape.value(loss).item())
    }

    /// Forward pass without dropout: (probabilities, pre-softmax output).
    fn evaluate(&self) -> Result<(DenseMatrix, DenseMatrix)> {
        let mut tape = Tape::new();
        let w = self.model.bind(&mut tape);
        let hv = self.sim.as_ref().map(|_| self.hyper.bind(&mut tape));
        let o = self.model.forward(&mut tape, &w, None)?;
        let probs = self.output(&mut tape, o, hv, false)?;
        Ok((tape.value(probs).clone(), tape.value(o).clone()))
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            weights: self.model.params().iter().map(|p| p.value.clone()).collect(),
            hyper: self.hyper.values(),
        }
    }

    fn restore(&mut self, s: &Snapshot) {
        for (p, w) in self.model.params_mut().iter_mut().zip(&s.weights) {
            p.value = w.clone();
        }
        self.hyper.tau.value = DenseMatrix::scalar(s.hyper.0);
        self.hyper.lambda.value = DenseMatrix::scalar(s.hyper.1);
        self.hyper.epsilon.value = DenseMatrix::scalar(s.hyper.2);
    }
}

fn diverged(epoch: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::NonFinite { .. } | Error::Domain { .. } => Error::Diverged {
            epoch,
            detail: e.to_string(),
        },
        other => other,
    }
}

/// Trains one model with early stopping, restores the epoch with the best
/// validation accuracy (lower validation loss breaks ties) and evaluates it.
pub fn train_run_detailed(
    graph: &Graph,
    split: &Split,
    model_cfg: &ModelConfig,
    cfg: &TrainConfig,
) -> Result<RunOutput> {
    cfg.validate()?;
    split.validate(graph.num_nodes())?;
    if split.train.is_empty() || split.val.is_empty() {
        return Err(Error::Contract("train and validation sets must be non-empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let model = Model::new(graph, model_cfg, cfg.lr, &mut rng)?;
    let mut trainer = Trainer::new(graph, split, model, cfg)?;
    let mut adam = trainer.adam_states();

    let labels = graph.labels();
    let mut best_loss = f64::INFINITY;
    let mut best_acc = f64::NEG_INFINITY;
    let mut best: Option<(usize, f64, f64, Snapshot)> = None;
    let mut bad_epochs = 0;
    let mut epochs_run = 0;
    let start = Instant::now();

    for epoch in 0..cfg.max_epochs {
        let check = cfg.check_every > 0 && epoch % cfg.check_every == 0;
        let train_loss = trainer.step(&mut rng, &mut adam, check).map_err(diverged(epoch))?;
        if !train_loss.is_finite() || train_loss < 0.0 {
            return Err(Error::Diverged {
                epoch,
                detail: format!("training loss {train_loss}"),
            });
        }
        let (probs, _) = trainer.evaluate().map_err(diverged(epoch))?;
        epochs_run = epoch + 1;
        let val_loss = cross_entropy(&probs, labels, &split.val) / split.val.len() as f64;
        let val_acc = accuracy(&probs, labels, &split.val);
        log::trace!("epoch {epoch}: train loss {train_loss:.5}, val loss {val_loss:.5}, val acc {val_acc:.4}");

        let is_best = match &best {
            None => true,
            Some((_, acc, loss, _)) => val_acc > *acc || (val_acc == *acc && val_loss < *loss),
        };
        if is_best {
            best = Some((epoch, val_acc, val_loss, trainer.snapshot()));
        }

        let loss_improved = val_loss < best_loss;
        let acc_improved = val_acc > best_acc;
        best_loss = best_loss.min(val_loss);
        best_acc = best_acc.max(val_acc);
        let reset = match cfg.patience_rule {
            PatienceRule::Either => loss_improved || acc_improved,
            PatienceRule::Both => loss_improved && acc_improved,
        };
        if reset {
            bad_epochs = 0;
        } else {
            bad_epochs += 1;
            if bad_epochs >= cfg.patience {
                break;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();

    let (best_epoch, val_accuracy, _, snap) = best.expect("at least one epoch ran");
    trainer.restore(&snap);
    let (probs, logits) = trainer.evaluate()?;
    let (tau, lambda, epsilon) = trainer.hyper.values();
    let result = RunResult {
        test_accuracy: accuracy(&probs, trainer.graph.labels(), &split.test),
        val_accuracy,
        best_epoch,
        epochs_run,
        seconds_per_epoch: elapsed / epochs_run as f64,
        tau,
        lambda,
        epsilon,
    };
    let weights = snap.weights;
    Ok(RunOutput {
        result,
        probs,
        logits,
        weights,
    })
}

/// Probabilities and pre-softmax outputs of a trained model on every node,
/// without dropout. `hyper` holds `τ`, `λ`, `ε` and is ignored for baseline
/// (unregularized) configs.
pub fn predict(
    graph: &Graph,
    model_cfg: &ModelConfig,
    cfg: &TrainConfig,
    weights: Vec<DenseMatrix>,
    hyper: [f64; 3],
) -> Result<(DenseMatrix, DenseMatrix)> {
    let model = Model::from_weights(graph, model_cfg, cfg.lr, weights)?;
    let cfg = TrainConfig {
        hyper_init: hyper,
        ..cfg.clone()
    };
    let empty = Split {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    Trainer::new(graph, &empty, model, &cfg)?.evaluate()
}

/// Wall-clock seconds of each of `epochs` training epochs (optimizer step
/// plus validation forward) after `warmup` untimed epochs, with no early
/// stopping.
pub fn epoch_times(
    graph: &Graph,
    split: &Split,
    model_cfg: &ModelConfig,
    cfg: &TrainConfig,
    warmup: usize,
    epochs: usize,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    split.validate(graph.num_nodes())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let model = Model::new(graph, model_cfg, cfg.lr, &mut rng)?;
    let mut trainer = Trainer::new(graph, split, model, cfg)?;
    let mut adam = trainer.adam_states();
    let mut times = Vec::with_capacity(epochs);
    for epoch in 0..warmup + epochs {
        let start = Instant::now();
        trainer.step(&mut rng, &mut adam, false).map_err(diverged(epoch))?;
        let (probs, _) = trainer.evaluate().map_err(diverged(epoch))?;
        std::hint::black_box(accuracy(&probs, graph.labels(), &split.val));
        if epoch >= warmup {
            times.push(start.elapsed().as_secs_f64());
        }
    }
    Ok(times)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;
    use crate::synth::two_triangles;

    #[test]
    fn glorot_bound_and_range() {
        assert!((glorot_bound(100, 100) - 0.17320).abs() < 1e-5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let w = glorot_init(100, 100, &mut rng);
        let b = glorot_bound(100, 100);
        assert!(w.as_slice().iter().all(|v| v.abs() <= b));
    }

    #[test]
    fn glorot_mean_is_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let w = glorot_init(250, 400, &mut rng);
        let b = glorot_bound(250, 400);
        let n = w.len() as f64;
        let mean = w.sum() / n;
        let sigma = b / 3f64.sqrt() / n.sqrt();
        assert!(mean.abs() < 3.0 * sigma, "mean {mean}, 3σ {}", 3.0 * sigma);
    }

    #[test]
    fn adam_ignores_zero_gradient() {
        let mut p = Parameter::new("w", DenseMatrix::from_rows(&[[1.5, -2.0]]), 0.01).unwrap();
        let mut s = AdamState::new(&p);
        adam_step(&mut p, &mut s, &AdamConfig::default());
        assert_eq!(p.value, DenseMatrix::from_rows(&[[1.5, -2.0]]));
    }

    #[test]
    fn adam_first_step_moves_by_lr() {
        let mut p = Parameter::scalar("w", 0.0, 0.01).unwrap();
        p.grad = DenseMatrix::scalar(1.0);
        let mut s = AdamState::new(&p);
        adam_step(&mut p, &mut s, &AdamConfig::default());
        assert!((p.value.item() + 0.01 / (1.0 + 1e-8)).abs() < 1e-15);
    }

    #[test]
    fn adam_converges_on_quadratic() {
        let mut p = Parameter::scalar("w", 0.0, 0.1).unwrap();
        let mut s = AdamState::new(&p);
        for _ in 0..200 {
            p.grad = DenseMatrix::scalar(2.0 * (p.value.item() - 3.0));
            adam_step(&mut p, &mut s, &AdamConfig::default());
        }
        assert!((p.value.item() - 3.0).abs() < 1e-2, "{}", p.value.item());
    }

    #[test]
    fn adam_applies_lower_bound() {
        let mut p = Parameter::scalar("eps", 1e-3, 0.01).unwrap().with_lower_bound(1e-3);
        p.grad = DenseMatrix::scalar(5.0);
        let mut s = AdamState::new(&p);
        adam_step(&mut p, &mut s, &AdamConfig::default());
        assert_eq!(p.value.item(), 1e-3);
    }

    #[test]
    fn cross_entropy_and_accuracy_helpers() {
        let probs = DenseMatrix::from_rows(&[[0.25, 0.75], [0.9, 0.1]]);
        let labels = [1, 1];
        assert!((cross_entropy(&probs, &labels, &[0, 1]) - (-(0.75f64.ln()) - 0.1f64.ln())).abs() < 1e-15);
        assert_eq!(accuracy(&probs, &labels, &[0, 1]), 0.5);
    }

    #[test]
    fn split_validation_rejects_overlap() {
        let s = Split {
            train: vec![0, 1],
            val: vec![1],
            test: vec![2],
        };
        assert!(s.validate(3).is_err());
    }

    fn triangle_split() -> Split {
        Split {
            train: vec![0, 3],
            val: vec![1, 4],
            test: vec![2, 5],
        }
    }

    #[test]
    fn two_triangles_are_learned_perfectly() {
        let g = two_triangles();
        let model = ModelConfig::new(ModelKind::Gcn);
        for regularized in [false, true] {
            let cfg = TrainConfig {
                regularized,
                max_epochs: 300,
                seed: 3,
                ..TrainConfig::default()
            };
            let r = train_run(&g, &triangle_split(), &model, &cfg).unwrap();
            assert_eq!(r.test_accuracy, 1.0, "regularized = {regularized}");
            assert!(r.epsilon >= 1e-3 && r.tau >= 1e-4 && r.lambda >= 0.0);
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let g = two_triangles();
        let model = ModelConfig::new(ModelKind::SageMean);
        let cfg = TrainConfig {
            max_epochs: 40,
            seed: 11,
            ..TrainConfig::default()
        };
        let a = train_run_detailed(&g, &triangle_split(), &model, &cfg).unwrap();
        let b = train_run_detailed(&g, &triangle_split(), &model, &cfg).unwrap();
        assert_eq!(a.probs, b.probs);
        assert_eq!(a.result.test_accuracy, b.result.test_accuracy);
        assert_eq!(a.result.best_epoch, b.result.best_epoch);
    }

    #[test]
    fn early_stopping_respects_max_epochs_and_patience() {
        let g = two_triangles();
        let model = ModelConfig::new(ModelKind::Gcn);
        let cfg = TrainConfig {
            max_epochs: 7,
            ..TrainConfig::default()
        };
        let r = train_run(&g, &triangle_split(), &model, &cfg).unwrap();
        assert!(r.epochs_run <= 7);
        let cfg = TrainConfig {
            patience: 1,
            patience_rule: PatienceRule::Both,
            ..TrainConfig::default()
        };
        let r = train_run(&g, &triangle_split(), &model, &cfg).unwrap();
        assert!(r.epochs_run < 10_000);
        assert!(r.best_epoch < r.epochs_run);
    }

    #[test]
    fn predict_reproduces_restored_outputs() {
        let g = two_triangles();
        let model = ModelConfig::new(ModelKind::Gcn);
        let cfg = TrainConfig {
            max_epochs: 30,
            seed: 4,
            ..TrainConfig::default()
        };
        let out = train_run_detailed(&g, &triangle_split(), &model, &cfg).unwrap();
        let r = &out.result;
        let (probs, logits) = predict(&g, &model, &cfg, out.weights.clone(), [r.tau, r.lambda, r.epsilon]).unwrap();
        assert_eq!(probs, out.probs);
        assert_eq!(logits, out.logits);
    }

    #[test]
    fn epoch_times_are_positive() {
        let g = two_triangles();
        let t = epoch_times(
            &g,
            &triangle_split(),
            &ModelConfig::new(ModelKind::Gcn),
            &TrainConfig::default(),
            2,
            5,
        )
        .unwrap();
        assert_eq!(t.len(), 5);
        assert!(t.iter().all(|s| s.is_finite() && *s > 0.0));
    }

    #[test]
    fn similarity_kinds_build_expected_weights() {
        let g = two_triangles();
        for kind in ["normalized-adjacency", "ideal", "ideal-normalized"] {
            let k: SimilarityKind = kind.parse().unwrap();
            assert_eq!(k.to_string(), kind);
            let s = k.build(&g).unwrap();
            let w = s.weights().to_dense();
            let want = if kind == "ideal" { 1.0 } else { 0.5 };
            assert!((w.get(0, 1) - want).abs() < 1e-15);
            assert_eq!(w.get(0, 3), 0.0);
            assert_eq!(w.get(0, 0), 0.0);
        }
        assert!("ideal-raw".parse::<SimilarityKind>().is_err());
    }
}
