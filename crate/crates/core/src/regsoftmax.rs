//! Non-local TV regularized softmax.
//!
//! The dual variable lives on the directed edge slots of the similarity
//! matrix: slot `s = (i, j)` is the `s`-th stored entry of `S` in CSR order.
//! Node fields are `N x K` matrices, edge fields are `slots x K` matrices
//! (one column per class). Off-edge entries of the non-local gradient are
//! identically zero and the divergence never reads them, so this layout is
//! exact while costing `O(K |E|)` instead of `O(K N^2)`.
//!
//! The forward iteration, starting from `A⁰ = softmax(O)` and `η⁰ = 0`:
//!
//! ```text
//! ηᵗ = P_B(ηᵗ⁻¹ − τ ∇_S Aᵗ⁻¹)
//! Aᵗ = softmax((O − λ div_S ηᵗ) / ε)
//! ```
//!
//! Every step is recorded on the tape, so gradients reach `O`, `τ`, `λ`
//! and `ε` through all `T` iterations.

use crate::autodiff::{Parameter, Tape, Value};
use crate::error::{Error, Result};
use crate::graph::SimilarityMatrix;
use crate::tensor::DenseMatrix;

/// How rows of `η_k` with Euclidean norm above one are pulled back.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ProjectionRule {
    /// Divide an offending row by its own norm (projection onto the product
    /// of unit balls).
    #[default]
    RowNorm,
    /// Divide every offending row by the largest row norm of the class.
    GlobalMax,
}

impl std::str::FromStr for ProjectionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "row" | "row-norm" => Ok(Self::RowNorm),
            "global" | "global-max" => Ok(Self::GlobalMax),
            other => Err(Error::Config(format!("unknown projection rule `{other}`"))),
        }
    }
}

impl std::fmt::Display for ProjectionRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::RowNorm => "row-norm",
            Self::GlobalMax => "global-max",
        })
    }
}

/// Per-class dual values on the edge slots of a similarity matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DualField {
    values: DenseMatrix,
}

impl DualField {
    pub fn zeros(sim: &SimilarityMatrix, num_classes: usize) -> Self {
        Self {
            values: DenseMatrix::zeros(sim.num_slots(), num_classes),
        }
    }

    pub fn from_matrix(sim: &SimilarityMatrix, values: DenseMatrix) -> Result<Self> {
        if values.rows() != sim.num_slots() {
            return Err(Error::Shape {
                op: "dual_field",
                left: values.shape(),
                right: (sim.num_slots(), values.cols()),
            });
        }
        Ok(Self { values })
    }

    /// Builds a field from one slot vector per class.
    pub fn from_classes(sim: &SimilarityMatrix, classes: &[Vec<f64>]) -> Result<Self> {
        let k = classes.len();
        let mut values = DenseMatrix::zeros(sim.num_slots(), k);
        for (c, slots) in classes.iter().enumerate() {
            if slots.len() != sim.num_slots() {
                return Err(Error::Contract(format!(
                    "class {c} has {} slots, similarity has {}",
                    slots.len(),
                    sim.num_slots()
                )));
            }
            for (s, &v) in slots.iter().enumerate() {
                values.set(s, c, v);
            }
        }
        Ok(Self { values })
    }

    pub fn num_classes(&self) -> usize {
        self.values.cols()
    }

    pub fn class_slots(&self, k: usize) -> Vec<f64> {
        (0..self.values.rows()).map(|s| self.values.get(s, k)).collect()
    }

    pub fn as_matrix(&self) -> &DenseMatrix {
        &self.values
    }

    /// Largest Euclidean norm over every (class, node-row) pair.
    pub fn max_row_norm(&self, sim: &SimilarityMatrix) -> f64 {
        row_norms(sim, &self.values)
            .as_slice()
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }
}

/// Non-local gradient of one class: slot `(i, j)` holds `S_ij (a_j − a_i)`.
pub fn nl_gradient(sim: &SimilarityMatrix, a_k: &[f64]) -> Result<Vec<f64>> {
    check_len("nl_gradient", a_k.len(), sim.num_nodes())?;
    let a = DenseMatrix::from_vec(a_k.len(), 1, a_k.to_vec())?;
    Ok(gradient_field(sim, &a).into_vec())
}

/// Non-local divergence of one class:
/// `out_i = Σ_j S_ij (η(i, j) − η(j, i))`.
pub fn nl_divergence(sim: &SimilarityMatrix, eta_k: &[f64]) -> Result<Vec<f64>> {
    check_len("nl_divergence", eta_k.len(), sim.num_slots())?;
    let eta = DenseMatrix::from_vec(eta_k.len(), 1, eta_k.to_vec())?;
    Ok(divergence_field(sim, &eta).into_vec())
}

/// Projects every node-row of every class onto the unit Euclidean ball.
pub fn project_unit_ball(sim: &SimilarityMatrix, eta: &DualField) -> DualField {
    project_unit_ball_with(sim, eta, ProjectionRule::RowNorm)
}

pub fn project_unit_ball_with(sim: &SimilarityMatrix, eta: &DualField, rule: ProjectionRule) -> DualField {
    DualField {
        values: project_field(sim, &eta.values, rule).0,
    }
}

fn check_len(op: &'static str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Shape {
            op,
            left: (got, 1),
            right: (want, 1),
        });
    }
    Ok(())
}

pub(crate) fn gradient_field(sim: &SimilarityMatrix, a: &DenseMatrix) -> DenseMatrix {
    let w = sim.weights();
    let k = a.cols();
    let mut out = DenseMatrix::zeros(sim.num_slots(), k);
    for i in 0..w.rows() {
        let a_i = a.row(i);
        for s in w.row_range(i) {
            let j = w.col_idx()[s];
            let sij = w.values()[s];
            let a_j = a.row(j);
            for (c, o) in out.row_mut(s).iter_mut().enumerate() {
                *o = sij * (a_j[c] - a_i[c]);
            }
        }
    }
    out
}

pub(crate) fn gradient_field_adjoint(sim: &SimilarityMatrix, g: &DenseMatrix) -> DenseMatrix {
    let w = sim.weights();
    let k = g.cols();
    let mut out = DenseMatrix::zeros(w.rows(), k);
    for i in 0..w.rows() {
        for s in w.row_range(i) {
            let j = w.col_idx()[s];
            let sij = w.values()[s];
            for c in 0..k {
                let v = sij * g.get(s, c);
                out.as_mut_slice()[j * k + c] += v;
                out.as_mut_slice()[i * k + c] -= v;
            }
        }
    }
    out
}

pub(crate) fn divergence_field(sim: &SimilarityMatrix, eta: &DenseMatrix) -> DenseMatrix {
    let w = sim.weights();
    let mirror = sim.mirror();
    let k = eta.cols();
    let mut out = DenseMatrix::zeros(w.rows(), k);
    for i in 0..w.rows() {
        let out_row = out.row_mut(i);
        for s in w.row_range(i) {
            let sij = w.values()[s];
            let fwd = eta.row(s);
            let back = eta.row(mirror[s]);
            for c in 0..k {
                out_row[c] += sij * (fwd[c] - back[c]);
            }
        }
    }
    out
}

pub(crate) fn divergence_field_adjoint(sim: &SimilarityMatrix, g: &DenseMatrix) -> DenseMatrix {
    let w = sim.weights();
    let mirror = sim.mirror();
    let k = g.cols();
    let mut out = DenseMatrix::zeros(sim.num_slots(), k);
    for i in 0..w.rows() {
        let g_i = g.row(i);
        for s in w.row_range(i) {
            let sij = w.values()[s];
            let m = mirror[s];
            for c in 0..k {
                let v = sij * g_i[c];
                out.as_mut_slice()[s * k + c] += v;
                out.as_mut_slice()[m * k + c] -= v;
            }
        }
    }
    out
}

/// `N x K` matrix of Euclidean norms of each node-row of each class.
pub(crate) fn row_norms(sim: &SimilarityMatrix, eta: &DenseMatrix) -> DenseMatrix {
    let w = sim.weights();
    let k = eta.cols();
    let mut norms = DenseMatrix::zeros(w.rows(), k);
    for j in 0..w.rows() {
        let acc = norms.row_mut(j);
        for s in w.row_range(j) {
            for (a, &v) in acc.iter_mut().zip(eta.row(s)) {
                *a += v * v;
            }
        }
        for a in acc.iter_mut() {
            *a = a.sqrt();
        }
    }
    norms
}

/// Data kept from the forward projection for its adjoint.
#[derive(Clone, Debug)]
pub(crate) struct ProjectionCache {
    rule: ProjectionRule,
    norms: DenseMatrix,
    /// Per class: largest row norm and the row attaining it.
    class_max: Vec<(f64, usize)>,
}

pub(crate) fn project_field(
    sim: &SimilarityMatrix,
    eta: &DenseMatrix,
    rule: ProjectionRule,
) -> (DenseMatrix, ProjectionCache) {
    let w = sim.weights();
    let k = eta.cols();
    let norms = row_norms(sim, eta);
    let mut class_max = vec![(0.0f64, 0usize); k];
    for j in 0..w.rows() {
        for (c, &n) in norms.row(j).iter().enumerate() {
            if n > class_max[c].0 {
                class_max[c] = (n, j);
            }
        }
    }
    let mut out = eta.clone();
    for j in 0..w.rows() {
        let n_j = norms.row(j);
        for s in w.row_range(j) {
            let row = out.row_mut(s);
            for c in 0..k {
                if n_j[c] > 1.0 {
                    let d = match rule {
                        ProjectionRule::RowNorm => n_j[c],
                        ProjectionRule::GlobalMax => class_max[c].0,
                    };
                    row[c] /= d;
                }
            }
        }
    }
    (out, ProjectionCache { rule, norms, class_max })
}

/// Vector-Jacobian product of the projection. Rows sitting exactly on the
/// sphere take the identity branch.
pub(crate) fn project_field_adjoint(
    sim: &SimilarityMatrix,
    eta_in: &DenseMatrix,
    cache: &ProjectionCache,
    g: &DenseMatrix,
) -> DenseMatrix {
    let w = sim.weights();
    let k = g.cols();
    let mut out = g.clone();
    match cache.rule {
        ProjectionRule::RowNorm => {
            for j in 0..w.rows() {
                let range = w.row_range(j);
                for c in 0..k {
                    let n = cache.norms.get(j, c);
                    if n <= 1.0 {
                        continue;
                    }
                    // y = x/|x|, dx = (g − y ⟨y, g⟩) / |x|
                    let mut yg = 0.0;
                    for s in range.clone() {
                        yg += eta_in.get(s, c) / n * g.get(s, c);
                    }
                    for s in range.clone() {
                        let y = eta_in.get(s, c) / n;
                        out.set(s, c, (g.get(s, c) - y * yg) / n);
                    }
                }
            }
        }
        ProjectionRule::GlobalMax => {
            for c in 0..k {
                let (m, j_star) = cache.class_max[c];
                if m <= 1.0 {
                    continue;
                }
                let mut gx = 0.0;
                for j in 0..w.rows() {
                    if cache.norms.get(j, c) > 1.0 {
                        for s in w.row_range(j) {
                            gx += g.get(s, c) * eta_in.get(s, c);
                            out.set(s, c, g.get(s, c) / m);
                        }
                    }
                }
                // d m / d x_{j*} = x_{j*} / m
                let coef = -gx / (m * m * m);
                for s in w.row_range(j_star) {
                    let v = out.get(s, c) + coef * eta_in.get(s, c);
                    out.set(s, c, v);
                }
            }
        }
    }
    out
}

/// Learnable hyperparameters of the regularized softmax.
#[derive(Clone, Debug)]
pub struct RegSoftmaxParams {
    pub tau: Parameter,
    pub lambda: Parameter,
    pub epsilon: Parameter,
    pub t_steps: usize,
}

pub const TAU_FLOOR: f64 = 1e-4;
pub const LAMBDA_FLOOR: f64 = 0.0;
pub const EPSILON_FLOOR: f64 = 1e-3;

impl RegSoftmaxParams {
    /// Parameters with the given initial values and learning rates, with the
    /// optimizer floors `τ ≥ 1e-4`, `λ ≥ 0`, `ε ≥ 1e-3` attached.
    pub fn new(init: [f64; 3], lrs: [f64; 3], t_steps: usize) -> Result<Self> {
        if t_steps == 0 {
            return Err(Error::Contract("T must be at least 1".into()));
        }
        Ok(Self {
            tau: Parameter::scalar("tau", init[0], lrs[0])?.with_lower_bound(TAU_FLOOR),
            lambda: Parameter::scalar("lambda", init[1], lrs[1])?.with_lower_bound(LAMBDA_FLOOR),
            epsilon: Parameter::scalar("epsilon", init[2], lrs[2])?.with_lower_bound(EPSILON_FLOOR),
            t_steps,
        })
    }

    pub fn bind(&self, tape: &mut Tape) -> HyperValues {
        HyperValues {
            tau: tape.param(&self.tau),
            lambda: tape.param(&self.lambda),
            epsilon: tape.param(&self.epsilon),
        }
    }

    pub fn values(&self) -> (f64, f64, f64) {
        (
            self.tau.value.item(),
            self.lambda.value.item(),
            self.epsilon.value.item(),
        )
    }
}

/// Tape handles for `τ`, `λ`, `ε` (all 1x1).
#[derive(Clone, Copy, Debug)]
pub struct HyperValues {
    pub tau: Value,
    pub lambda: Value,
    pub epsilon: Value,
}

#[derive(Clone, Copy, Debug)]
pub struct RegSoftmaxOptions {
    pub t_steps: usize,
    pub rule: ProjectionRule,
    /// Verify row-stochasticity of every `Aᵗ` and dual feasibility of every
    /// `ηᵗ`; a violation is returned as [`Error::Invariant`].
    pub check_invariants: bool,
}

impl Default for RegSoftmaxOptions {
    fn default() -> Self {
        Self {
            t_steps: 1,
            rule: ProjectionRule::RowNorm,
            check_invariants: false,
        }
    }
}

pub const ROW_SUM_TOL: f64 = 1e-12;
pub const DUAL_TOL: f64 = 1e-12;

/// Runs the primal-dual iteration on the tape and returns `Aᵀ`.
pub fn reg_softmax_forward(
    tape: &mut Tape,
    o: Value,
    sim: &SimilarityMatrix,
    hyper: HyperValues,
    opts: &RegSoftmaxOptions,
) -> Result<Value> {
    if opts.t_steps == 0 {
        return Err(Error::Contract("T must be at least 1".into()));
    }
    let (n, k) = tape.value(o).shape();
    if n != sim.num_nodes() {
        return Err(Error::Shape {
            op: "reg_softmax",
            left: (n, k),
            right: sim.weights().shape(),
        });
    }
    let tau = tape.value(hyper.tau).item();
    let eps = tape.value(hyper.epsilon).item();
    if !(tau > 0.0) {
        return Err(Error::Contract(format!("tau must be positive, got {tau}")));
    }
    if !(eps > 0.0) {
        return Err(Error::Contract(format!("epsilon must be positive, got {eps}")));
    }

    let inv_eps = tape.reciprocal(hyper.epsilon)?;
    let mut a = tape.row_softmax(o)?;
    let mut eta = tape.constant(DenseMatrix::zeros(sim.num_slots(), k));
    for t in 1..=opts.t_steps {
        let grad = tape.nl_gradient(sim, a)?;
        let step = tape.scale_by(grad, hyper.tau)?;
        let moved = tape.sub(eta, step)?;
        eta = tape.project_ball(sim, moved, opts.rule)?;
        if opts.check_invariants {
            check_dual_feasible(sim, tape.value(eta), t)?;
        }
        let div = tape.nl_divergence(sim, eta)?;
        let shift = tape.scale_by(div, hyper.lambda)?;
        let shifted = tape.sub(o, shift)?;
        let logits = tape.scale_by(shifted, inv_eps)?;
        a = tape.row_softmax(logits)?;
        if opts.check_invariants {
            check_row_stochastic(tape.value(a), t)?;
        }
    }
    Ok(a)
}

/// Untaped convenience wrapper around [`reg_softmax_forward`].
pub fn reg_softmax(
    o: &DenseMatrix,
    sim: &SimilarityMatrix,
    tau: f64,
    lambda: f64,
    epsilon: f64,
    opts: &RegSoftmaxOptions,
) -> Result<DenseMatrix> {
    let mut tape = Tape::new();
    let o = tape.constant(o.clone());
    let hyper = HyperValues {
        tau: tape.constant(DenseMatrix::scalar(tau)),
        lambda: tape.constant(DenseMatrix::scalar(lambda)),
        epsilon: tape.constant(DenseMatrix::scalar(epsilon)),
    };
    let out = reg_softmax_forward(&mut tape, o, sim, hyper, opts)?;
    Ok(tape.value(out).clone())
}

pub fn check_row_stochastic(a: &DenseMatrix, iteration: usize) -> Result<()> {
    for i in 0..a.rows() {
        let row = a.row(i);
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::Invariant(format!(
                "iteration {iteration}: row {i} of A sums to {sum}"
            )));
        }
        if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Invariant(format!(
                "iteration {iteration}: row {i} of A has entry {v}"
            )));
        }
    }
    Ok(())
}

pub fn check_dual_feasible(sim: &SimilarityMatrix, eta: &DenseMatrix, iteration: usize) -> Result<()> {
    let norms = row_norms(sim, eta);
    if let Some(p) = norms.as_slice().iter().position(|&v| v > 1.0 + DUAL_TOL) {
        let k = eta.cols();
        return Err(Error::Invariant(format!(
            "iteration {iteration}: dual row {} of class {} has norm {}",
            p / k,
            p % k,
            norms.as_slice()[p]
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::from_edges(n, edges, DenseMatrix::zeros(n, 1), vec![0; n], 2).unwrap()
    }

    fn unit_sim(n: usize, edges: &[(usize, usize)]) -> SimilarityMatrix {
        let a = graph(n, edges).adjacency().as_ref().clone();
        SimilarityMatrix::new(a).unwrap()
    }

    #[test]
    fn gradient_on_single_edge() {
        let s = unit_sim(2, &[(0, 1)]);
        assert_eq!(nl_gradient(&s, &[0.0, 1.0]).unwrap(), vec![1.0, -1.0]);
        assert_eq!(nl_gradient(&s, &[4.0, 4.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn gradient_on_normalised_path() {
        let s = graph(3, &[(0, 1), (1, 2)]).similarity();
        let g = nl_gradient(&s, &[0.0, 1.0, 2.0]).unwrap();
        let r = 1.0 / 2f64.sqrt();
        // slots in CSR order: (0,1), (1,0), (1,2), (2,1)
        let want = [r, -r, r, -r];
        for (a, b) in g.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn divergence_on_single_edge() {
        let s = unit_sim(2, &[(0, 1)]);
        let d = nl_divergence(&s, &[0.7, -0.2]).unwrap();
        assert!((d[0] - 0.9).abs() < 1e-15 && (d[1] + 0.9).abs() < 1e-15);
        assert_eq!(nl_divergence(&s, &[0.3, 0.3]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn projection_examples() {
        // node 0 with two neighbours: its row holds two slots
        let s = unit_sim(3, &[(0, 1), (0, 2)]);
        let small = DualField::from_classes(&s, &[vec![0.3, 0.4, 0.0, 0.0]]).unwrap();
        assert_eq!(project_unit_ball(&s, &small), small);
        let big = DualField::from_classes(&s, &[vec![3.0, 4.0, 0.0, 0.0]]).unwrap();
        let p = project_unit_ball(&s, &big);
        assert!((p.class_slots(0)[0] - 0.6).abs() < 1e-15);
        assert!((p.class_slots(0)[1] - 0.8).abs() < 1e-15);
        assert_eq!(project_unit_ball(&s, &p), p);
    }

    #[test]
    fn global_rule_divides_by_class_maximum() {
        // rows: node 0 -> slots 0,1 ; node 1 -> slot 2 ; node 2 -> slot 3
        let s = unit_sim(3, &[(0, 1), (0, 2)]);
        let f = DualField::from_classes(&s, &[vec![3.0, 4.0, 2.0, 0.5]]).unwrap();
        let p = project_unit_ball_with(&s, &f, ProjectionRule::GlobalMax);
        let v = p.class_slots(0);
        assert_eq!(v, vec![0.6, 0.8, 0.4, 0.5]);
    }

    #[test]
    fn reduction_to_plain_softmax() {
        let s = graph(4, &[(0, 1), (1, 2), (2, 3)]).similarity();
        let o = DenseMatrix::from_fn(4, 3, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.3);
        for t in 1..=3 {
            let opts = RegSoftmaxOptions {
                t_steps: t,
                ..Default::default()
            };
            let reg = reg_softmax(&o, &s, 0.9, 0.0, 1.0, &opts).unwrap();
            let mut tape = Tape::new();
            let ov = tape.constant(o.clone());
            let plain = tape.row_softmax(ov).unwrap();
            assert_eq!(&reg, tape.value(plain));
        }
    }

    #[test]
    fn identical_rows_give_zero_dual() {
        let s = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).similarity();
        let o = DenseMatrix::from_fn(5, 3, |_, j| j as f64 * 0.5);
        let eps = 2.0;
        let opts = RegSoftmaxOptions {
            t_steps: 2,
            ..Default::default()
        };
        let out = reg_softmax(&o, &s, 1.0, 5.0, eps, &opts).unwrap();
        let mut tape = Tape::new();
        let scaled = tape.constant(o.map(|v| v / eps));
        let want = tape.row_softmax(scaled).unwrap();
        assert!(out.max_abs_diff(tape.value(want)) < 1e-15);
    }

    #[test]
    fn rejects_non_positive_tau_and_epsilon() {
        let s = graph(2, &[(0, 1)]).similarity();
        let o = DenseMatrix::zeros(2, 2);
        let opts = RegSoftmaxOptions::default();
        assert!(matches!(
            reg_softmax(&o, &s, 0.0, 1.0, 1.0, &opts),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            reg_softmax(&o, &s, 1.0, 1.0, -1.0, &opts),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn invariant_checks_pass_on_a_strong_regulariser() {
        let s = graph(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]).similarity();
        let o = DenseMatrix::from_fn(6, 2, |i, j| if (i < 3) == (j == 0) { 3.0 } else { -1.0 });
        let opts = RegSoftmaxOptions {
            t_steps: 5,
            rule: ProjectionRule::RowNorm,
            check_invariants: true,
        };
        reg_softmax(&o, &s, 50.0, 10.0, 0.5, &opts).unwrap();
    }

    #[test]
    fn feasibility_check_flags_large_rows() {
        let s = unit_sim(2, &[(0, 1)]);
        let eta = DenseMatrix::from_rows(&[[1.5], [0.0]]);
        assert!(check_dual_feasible(&s, &eta, 1).is_err());
    }
}
