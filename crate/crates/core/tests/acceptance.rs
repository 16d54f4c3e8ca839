//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Criteria that need the benchmark datasets read canonical directories from
//! `$RGNN_DATA_DIR` (default `<workspace>/data`). When a dataset is missing
//! its criteria are reported as `FAIL ... not run` and do not affect the
//! exit status; every other failure does.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rgnn::autodiff::gradient_check;
use rgnn::data::{self, make_split, Dataset, SplitSpec};
use rgnn::graph::{Graph, SimilarityMatrix};
use rgnn::harness::{self, split_seed, ExperimentConfig};
use rgnn::models::{Model, ModelConfig, ModelKind};
use rgnn::regsoftmax::{
    nl_divergence, nl_gradient, project_unit_ball_with, reg_softmax, reg_softmax_forward, DualField, HyperValues,
    ProjectionRule, RegSoftmaxOptions,
};
use rgnn::synth::{random_graph, sbm, two_triangles, SbmConfig};
use rgnn::tensor::{DenseMatrix, SparseMatrix};
use rgnn::train::{glorot_init, one_hot, train_run_detailed, SimilarityKind, Split, TrainConfig};

const ORACLE_TOL: f64 = 1e-12;
const ADJOINT_TOL: f64 = 1e-10;
const CONSERVATION_TOL: f64 = 1e-12;
const GRAD_REL_TOL: f64 = 1e-5;
const GRAD_STEP: f64 = 1e-6;
const ORACLE_GRAPHS: usize = 50;
const CALCULUS_TRIALS: usize = 200;
const TIMING_MIN_RATIO: f64 = 1.05;

const CORA_TARGET: f64 = 81.9;
const CITESEER_TARGET: f64 = 74.1;
const CITATION_BAND: f64 = 2.0;
const CORA_MAX_DEFICIT: f64 = 0.5;
const CITESEER_MIN_GAIN: f64 = 0.5;
const WEBKB_TARGETS: [(&str, f64); 3] = [("cornell", 80.8), ("texas", 81.4), ("wisconsin", 80.8)];
const WEBKB_BAND: f64 = 6.0;
const IDEAL_MIN: f64 = 93.0;
const PUBMED_TARGET: f64 = 79.2;
const PUBMED_BAND: f64 = 3.0;
const PUBMED_MAX_BYTES: u64 = 4 << 30;

enum Outcome {
    Pass(String),
    Fail(String),
    NotRun(String),
}

type Check = Result<Outcome, String>;
type Criterion = (&'static str, fn() -> Check);

fn verdict(ok: bool, detail: String) -> Check {
    Ok(if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    })
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("reduction-identity", reduction_identity),
        ("reduction-identity-datasets", reduction_identity_datasets),
        ("operator-oracle", operator_oracle),
        ("calculus-identities", calculus_identities),
        ("gradient-check", gradient_checks),
        ("training-invariants", training_invariants),
        ("timing-ordering", timing_ordering),
        ("cora-rgcn", cora),
        ("citeseer-rgcn", citeseer),
        ("webkb-rsage-mean", webkb),
        ("ideal-similarity", ideal_similarity),
        ("pubmed-rgcn", pubmed),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut not_run = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = check().unwrap_or_else(|e| Outcome::Fail(format!("error: {e}")));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Outcome::Pass(d) => println!("PASS {name}: {d} ({secs:.1}s)"),
            Outcome::Fail(d) => {
                failed += 1;
                println!("FAIL {name}: {d} ({secs:.1}s)");
            }
            Outcome::NotRun(d) => {
                not_run += 1;
                println!("FAIL {name}: not run, {d}");
            }
        }
    }
    println!("acceptance: {failed} failed, {not_run} not run");
    if failed > 0 {
        std::process::exit(1);
    }
}

fn sbm_dataset(nodes_per_class: usize, seed: u64) -> Dataset {
    let cfg = SbmConfig {
        nodes_per_class,
        ..SbmConfig::default()
    };
    Dataset {
        name: "sbm".into(),
        graph: sbm(&cfg, seed).unwrap(),
        class_names: (0..cfg.num_classes).map(|c| c.to_string()).collect(),
    }
}

fn small_split(graph: &Graph, seed: u64) -> Split {
    let spec = SplitSpec::Citation {
        train_per_class: 10,
        val_per_class: 20,
    };
    make_split(graph, &spec, seed).unwrap()
}

fn frozen_reduction(base: &TrainConfig) -> TrainConfig {
    TrainConfig {
        regularized: true,
        hyper_init: [1.0, 0.0, 1.0],
        hyper_learnable: [false; 3],
        ..base.clone()
    }
}

fn bitwise_equal(a: &DenseMatrix, b: &DenseMatrix) -> bool {
    a.shape() == b.shape()
        && a.as_slice()
            .iter()
            .zip(b.as_slice())
            .all(|(x, y)| x.to_bits() == y.to_bits())
}

fn reduction_pair(graph: &Graph, split: &Split, model: &ModelConfig, seed: u64) -> Result<bool, String> {
    let base = TrainConfig {
        regularized: false,
        seed,
        ..TrainConfig::default()
    };
    let b = train_run_detailed(graph, split, model, &base).map_err(|e| e.to_string())?;
    let r = train_run_detailed(graph, split, model, &frozen_reduction(&base)).map_err(|e| e.to_string())?;
    Ok(bitwise_equal(&b.probs, &r.probs)
        && b.result.best_epoch == r.result.best_epoch
        && b.result.epochs_run == r.result.epochs_run
        && b.weights.iter().zip(&r.weights).all(|(x, y)| bitwise_equal(x, y)))
}

fn reduction_identity() -> Check {
    let ds = sbm_dataset(60, 3);
    let mut cases = 0;
    let mut mismatches = Vec::new();
    for kind in [ModelKind::Gcn, ModelKind::SageMean, ModelKind::SageMaxpool] {
        for seed in 0..3u64 {
            let split = small_split(&ds.graph, seed);
            cases += 1;
            if !reduction_pair(&ds.graph, &split, &ModelConfig::new(kind), 100 + seed)? {
                mismatches.push(format!("{kind}/seed {seed}"));
            }
        }
    }
    verdict(
        mismatches.is_empty(),
        format!(
            "{} of {cases} synthetic runs bitwise identical {mismatches:?}",
            cases - mismatches.len()
        ),
    )
}

fn workspace() -> PathBuf {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    dir.canonicalize().unwrap_or(dir)
}

fn data_dir() -> PathBuf {
    std::env::var_os("RGNN_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| workspace().join("data"))
}

fn available(names: &[&str]) -> Result<(), String> {
    let dir = data_dir();
    let missing: Vec<&str> = names
        .iter()
        .copied()
        .filter(|n| !dir.join(n).join("meta.json").exists())
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(format!("datasets {missing:?} not found under {}", dir.display()))
    }
}

fn config(file: &str, dataset: &str) -> Result<ExperimentConfig, String> {
    let mut cfg = ExperimentConfig::from_file(&workspace().join("configs").join(file)).map_err(|e| e.to_string())?;
    cfg.dataset = data_dir().join(dataset);
    Ok(cfg)
}

fn load(name: &str) -> Result<Dataset, String> {
    data::load(&data_dir().join(name))
        .map(|l| l.dataset)
        .map_err(|e| e.to_string())
}

fn reduction_identity_datasets() -> Check {
    let all = [
        ("cora", "cora-gcn.cfg"),
        ("citeseer", "citeseer-gcn.cfg"),
        ("pubmed", "pubmed-gcn.cfg"),
        ("cornell", "cornell-sage-mean.cfg"),
        ("texas", "cornell-sage-mean.cfg"),
        ("wisconsin", "cornell-sage-mean.cfg"),
    ];
    let present: Vec<_> = all.iter().filter(|(n, _)| available(&[n]).is_ok()).collect();
    if present.is_empty() {
        return Ok(Outcome::NotRun(available(&all.map(|(n, _)| n)).unwrap_err()));
    }
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, file) in present {
        let cfg = config(file, name)?;
        let ds = load(name)?;
        let split = make_split(&ds.graph, &cfg.split, split_seed(cfg.seed, 0)).map_err(|e| e.to_string())?;
        let same = reduction_pair(&ds.graph, &split, &cfg.model, harness::init_seed(cfg.seed, 0, 0))?;
        ok &= same;
        detail.push(format!("{name}={}", if same { "identical" } else { "DIFFERENT" }));
    }
    let missing = all.len() - detail.len();
    let msg = format!("{} ({missing} datasets missing)", detail.join(", "));
    if ok && missing > 0 {
        return Ok(Outcome::NotRun(msg));
    }
    verdict(ok, msg)
}

/// Random symmetric similarity with weights in (0, 1]; some nodes may be
/// isolated.
fn random_similarity(rng: &mut ChaCha8Rng) -> SimilarityMatrix {
    let n = rng.random_range(2..=30);
    let p = rng.random_range(0.05..0.6);
    if rng.random_bool(0.5) {
        let k = rng.random_range(2..=5).min(n);
        return random_graph(n, p, 3, k, rng.random()).unwrap().similarity();
    }
    let mut trips = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                let w = rng.random_range(0.01..=1.0);
                trips.push((i, j, w));
                trips.push((j, i, w));
            }
        }
    }
    SimilarityMatrix::new(SparseMatrix::from_triplets(n, n, &trips).unwrap()).unwrap()
}

fn random_matrix(rows: usize, cols: usize, scale: f64, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-scale..scale))
}

/// Dense per-class reference operators on an N×N weight array.
struct DenseOps {
    n: usize,
    w: Vec<f64>,
}

impl DenseOps {
    fn new(sim: &SimilarityMatrix) -> Self {
        let d = sim.weights().to_dense();
        Self {
            n: d.rows(),
            w: d.as_slice().to_vec(),
        }
    }

    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = self.w[i * n + j] * (u[j] - u[i]);
            }
        }
        g
    }

    fn divergence(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|j| self.w[i * n + j] * (v[i * n + j] - v[j * n + i])).sum())
            .collect()
    }

    fn project(&self, v: &[f64], rule: ProjectionRule) -> Vec<f64> {
        let n = self.n;
        let norms: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| v[i * n + j] * v[i * n + j]).sum::<f64>().sqrt())
            .collect();
        let max = norms.iter().cloned().fold(0.0, f64::max);
        let mut out = v.to_vec();
        for i in 0..n {
            if norms[i] > 1.0 {
                let d = match rule {
                    ProjectionRule::RowNorm => norms[i],
                    ProjectionRule::GlobalMax => max,
                };
                for j in 0..n {
                    out[i * n + j] /= d;
                }
            }
        }
        out
    }

    /// Scatters class `k` of a slot field into an N×N array.
    fn densify(&self, sim: &SimilarityMatrix, field: &DenseMatrix, k: usize) -> Vec<f64> {
        let cols = sim.weights().col_idx();
        let mut v = vec![0.0; self.n * self.n];
        for (s, &i) in sim.row_of_slot().iter().enumerate() {
            v[i * self.n + cols[s]] = field.get(s, k);
        }
        v
    }

    fn on_slots(&self, sim: &SimilarityMatrix, v: &[f64]) -> Vec<f64> {
        let cols = sim.weights().col_idx();
        sim.row_of_slot()
            .iter()
            .enumerate()
            .map(|(s, &i)| v[i * self.n + cols[s]])
            .collect()
    }

    fn reg_softmax(
        &self,
        o: &DenseMatrix,
        tau: f64,
        lambda: f64,
        eps: f64,
        t_steps: usize,
        rule: ProjectionRule,
    ) -> DenseMatrix {
        let (n, k) = o.shape();
        let softmax = |z: &DenseMatrix| {
            DenseMatrix::from_fn(n, k, |i, c| {
                let m = z.row(i).iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let total: f64 = z.row(i).iter().map(|x| (x - m).exp()).sum();
                (z.get(i, c) - m).exp() / total
            })
        };
        let mut a = softmax(o);
        let mut eta = vec![vec![0.0; n * n]; k];
        for _ in 0..t_steps {
            let mut div = DenseMatrix::zeros(n, k);
            for c in 0..k {
                let col: Vec<f64> = (0..n).map(|i| a.get(i, c)).collect();
                let g = self.gradient(&col);
                let moved: Vec<f64> = eta[c].iter().zip(&g).map(|(e, g)| e - tau * g).collect();
                eta[c] = self.project(&moved, rule);
                for (i, d) in self.divergence(&eta[c]).into_iter().enumerate() {
                    div.set(i, c, d);
                }
            }
            let z = DenseMatrix::from_fn(n, k, |i, c| (o.get(i, c) - lambda * div.get(i, c)) / eps);
            a = softmax(&z);
        }
        a
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn operator_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = [0.0f64; 4];
    for _ in 0..ORACLE_GRAPHS {
        let sim = random_similarity(&mut rng);
        let dense = DenseOps::new(&sim);
        let n = sim.num_nodes();
        let k = rng.random_range(1..=5);

        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = nl_gradient(&sim, &u).map_err(|e| e.to_string())?;
        worst[0] = worst[0].max(max_diff(&g, &dense.on_slots(&sim, &dense.gradient(&u))));

        let field = random_matrix(sim.num_slots(), k, 2.0, &mut rng);
        for c in 0..k {
            let slots: Vec<f64> = (0..sim.num_slots()).map(|s| field.get(s, c)).collect();
            let div = nl_divergence(&sim, &slots).map_err(|e| e.to_string())?;
            worst[1] = worst[1].max(max_diff(&div, &dense.divergence(&dense.densify(&sim, &field, c))));
        }

        let eta = DualField::from_matrix(&sim, field.clone()).map_err(|e| e.to_string())?;
        for rule in [ProjectionRule::RowNorm, ProjectionRule::GlobalMax] {
            let p = project_unit_ball_with(&sim, &eta, rule);
            for c in 0..k {
                let want = dense.on_slots(&sim, &dense.project(&dense.densify(&sim, &field, c), rule));
                worst[2] = worst[2].max(max_diff(&p.class_slots(c), &want));
            }
        }

        let o = random_matrix(n, k, 3.0, &mut rng);
        let tau = rng.random_range(0.01..5.0);
        let lambda = rng.random_range(0.0..8.0);
        let eps = rng.random_range(0.3..8.0);
        for t_steps in 1..=3 {
            for rule in [ProjectionRule::RowNorm, ProjectionRule::GlobalMax] {
                let opts = RegSoftmaxOptions {
                    t_steps,
                    rule,
                    check_invariants: true,
                };
                let a = reg_softmax(&o, &sim, tau, lambda, eps, &opts).map_err(|e| e.to_string())?;
                let want = dense.reg_softmax(&o, tau, lambda, eps, t_steps, rule);
                worst[3] = worst[3].max(a.max_abs_diff(&want));
            }
        }
    }
    verdict(
        worst.iter().all(|&w| w <= ORACLE_TOL),
        format!(
            "{ORACLE_GRAPHS} graphs, max |diff| gradient {:.1e}, divergence {:.1e}, projection {:.1e}, forward T=1..3 {:.1e} (tol {ORACLE_TOL:.0e})",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn calculus_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut adjoint = 0.0f64;
    let mut conservation = 0.0f64;
    for _ in 0..CALCULUS_TRIALS {
        let sim = random_similarity(&mut rng);
        let n = sim.num_nodes();
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..sim.num_slots()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let grad = nl_gradient(&sim, &u).map_err(|e| e.to_string())?;
        let div = nl_divergence(&sim, &v).map_err(|e| e.to_string())?;
        let lhs: f64 = u.iter().zip(&div).map(|(a, b)| a * b).sum();
        let rhs: f64 = grad.iter().zip(&v).map(|(a, b)| a * b).sum();
        adjoint = adjoint.max((lhs + rhs).abs());
        conservation = conservation.max(div.iter().sum::<f64>().abs());
    }
    verdict(
        adjoint <= ADJOINT_TOL && conservation <= CONSERVATION_TOL,
        format!(
            "{CALCULUS_TRIALS} trials, max |<u,div v> + <grad u,v>| {adjoint:.1e} (tol {ADJOINT_TOL:.0e}), max |sum div| {conservation:.1e} (tol {CONSERVATION_TOL:.0e})"
        ),
    )
}

fn gradient_checks() -> Check {
    let random6 = random_graph(6, 0.6, 4, 3, 11).unwrap();
    let graphs = [("two-triangles", two_triangles()), ("random-6", random6)];
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (_, graph) in &graphs {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mcfg = ModelConfig::new(ModelKind::Gcn);
        let (d, h, k) = (graph.num_features(), mcfg.hidden_dim, graph.num_classes());
        let w0 = glorot_init(d, h, &mut rng);
        let w1 = glorot_init(h, k, &mut rng);
        let model = Model::from_weights(graph, &mcfg, 0.01, vec![w0.clone(), w1.clone()]).map_err(|e| e.to_string())?;
        let sim = graph.similarity();
        let targets = one_hot(graph.labels(), k);
        let rows: Vec<usize> = (0..graph.num_nodes()).collect();
        for t_steps in [1, 3] {
            for hyper in [[1.0, 3.0, 1.0], [5.0, 1.0, 0.5]] {
                let opts = RegSoftmaxOptions {
                    t_steps,
                    ..RegSoftmaxOptions::default()
                };
                let inputs = [
                    w0.clone(),
                    w1.clone(),
                    DenseMatrix::scalar(hyper[0]),
                    DenseMatrix::scalar(hyper[1]),
                    DenseMatrix::scalar(hyper[2]),
                ];
                let report = gradient_check(
                    |tape, v| {
                        let o = model.forward(tape, &v[..2], None)?;
                        let hv = HyperValues {
                            tau: v[2],
                            lambda: v[3],
                            epsilon: v[4],
                        };
                        let a = reg_softmax_forward(tape, o, &sim, hv, &opts)?;
                        let ce = tape.cross_entropy(a, &targets, &rows)?;
                        match model.decay_penalty(tape, &v[..2], 0.01)? {
                            Some(p) => tape.add(ce, p),
                            None => Ok(ce),
                        }
                    },
                    &inputs,
                    GRAD_STEP,
                    GRAD_REL_TOL,
                )
                .map_err(|e| e.to_string())?;
                worst = worst.max(report.max_rel_error);
                cases += 1;
            }
        }
    }
    verdict(
        worst <= GRAD_REL_TOL,
        format!("{cases} cases (2 graphs, T in {{1,3}}), W0/W1/tau/lambda/eps max rel err {worst:.1e} (tol {GRAD_REL_TOL:.0e})"),
    )
}

fn training_invariants() -> Check {
    let ds = sbm_dataset(40, 9);
    let split = small_split(&ds.graph, 1);
    let mut runs = 0;
    let mut errors = Vec::new();
    for kind in [ModelKind::Gcn, ModelKind::SageMean, ModelKind::SageMaxpool] {
        for (t_steps, rule, similarity) in [
            (1, ProjectionRule::RowNorm, "normalized-adjacency"),
            (3, ProjectionRule::RowNorm, "normalized-adjacency"),
            (3, ProjectionRule::GlobalMax, "normalized-adjacency"),
            (2, ProjectionRule::RowNorm, "ideal"),
            (1, ProjectionRule::RowNorm, "ideal-normalized"),
        ] {
            let cfg = TrainConfig {
                t_steps,
                projection: rule,
                similarity: similarity.parse().unwrap(),
                hyper_init: [3.0, 3.0, 1.0],
                check_every: 1,
                max_epochs: 300,
                seed: runs,
                ..TrainConfig::default()
            };
            runs += 1;
            if let Err(e) = train_run_detailed(&ds.graph, &split, &ModelConfig::new(kind), &cfg) {
                errors.push(format!("{kind} T={t_steps} {rule} {similarity}: {e}"));
            }
        }
    }
    verdict(
        errors.is_empty(),
        format!("{runs} runs checked every epoch at every iteration {errors:?}"),
    )
}

fn timing_ordering() -> Check {
    let ds = sbm_dataset(700, 4);
    let mut detail = Vec::new();
    let mut ok = true;
    for kind in [ModelKind::Gcn, ModelKind::SageMean] {
        let mut cfg = ExperimentConfig::new("unused", kind);
        cfg.split = SplitSpec::Citation {
            train_per_class: 20,
            val_per_class: 30,
        };
        cfg.timing_warmup = 5;
        cfg.timing_epochs = 40;
        let rows = harness::time_epochs_on(&ds, &cfg).map_err(|e| e.to_string())?;
        let ratio = rows[1].median_seconds / rows[0].median_seconds;
        ok &= !rows[0].regularized && rows[1].regularized && ratio >= TIMING_MIN_RATIO;
        detail.push(format!(
            "{kind} {:.2}ms -> {:.2}ms (x{ratio:.2})",
            1e3 * rows[0].median_seconds,
            1e3 * rows[1].median_seconds
        ));
    }
    verdict(
        ok,
        format!(
            "median epoch time baseline -> regularized on synthetic N=2100: {} (min ratio {TIMING_MIN_RATIO})",
            detail.join(", ")
        ),
    )
}

/// Mean test accuracy in percent and the per-run accuracies of an experiment.
fn experiment(file: &str, dataset: &str, ds: &Dataset) -> Result<(f64, Vec<f64>), String> {
    let cfg = config(file, dataset)?;
    let exp = harness::run_experiment_on(ds, &cfg).map_err(|e| e.to_string())?;
    if exp.summary.failures > 0 {
        return Err(format!(
            "{file}: {} of {} runs failed",
            exp.summary.failures, exp.summary.runs
        ));
    }
    let accs = exp
        .records
        .iter()
        .map(|r| 100.0 * r.outcome.as_ref().unwrap().test_accuracy)
        .collect();
    Ok((100.0 * exp.summary.mean_accuracy, accs))
}

fn citation(name: &str, target: f64, margin: f64, is_gain: bool) -> Check {
    if let Err(e) = available(&[name]) {
        return Ok(Outcome::NotRun(e));
    }
    let ds = load(name)?;
    let (reg, _) = experiment(&format!("{name}-rgcn.cfg"), name, &ds)?;
    let (base, _) = experiment(&format!("{name}-gcn.cfg"), name, &ds)?;
    let in_band = (reg - target).abs() <= CITATION_BAND;
    let paired = if is_gain {
        reg >= base + margin
    } else {
        reg >= base - margin
    };
    verdict(
        in_band && paired,
        format!(
            "RGCN {reg:.2} vs target {target} +/- {CITATION_BAND}, GCN {base:.2}, gap {:+.2} (need {}{margin})",
            reg - base,
            if is_gain { ">= +" } else { ">= -" }
        ),
    )
}

fn cora() -> Check {
    citation("cora", CORA_TARGET, CORA_MAX_DEFICIT, false)
}

fn citeseer() -> Check {
    citation("citeseer", CITESEER_TARGET, CITESEER_MIN_GAIN, true)
}

fn webkb() -> Check {
    if let Err(e) = available(&WEBKB_TARGETS.map(|(n, _)| n)) {
        return Ok(Outcome::NotRun(e));
    }
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, target) in WEBKB_TARGETS {
        let ds = load(name)?;
        let (mean, _) = experiment(&format!("{name}-rsage-mean.cfg"), name, &ds)?;
        ok &= (mean - target).abs() <= WEBKB_BAND;
        detail.push(format!("{name} {mean:.2} (target {target})"));
    }
    verdict(ok, format!("{}, band +/- {WEBKB_BAND}", detail.join(", ")))
}

fn ideal_similarity() -> Check {
    if let Err(e) = available(&["cora", "citeseer"]) {
        return Ok(Outcome::NotRun(e));
    }
    let mut ok = true;
    let mut detail = Vec::new();
    for name in ["cora", "citeseer"] {
        let ds = load(name)?;
        let mut cfg = config(&format!("{name}-rgcn-ideal.cfg"), name)?;
        cfg.num_splits = 1;
        cfg.num_inits = 1;
        let (artifact, _) = harness::single_run_on(&ds, &cfg, None).map_err(|e| e.to_string())?;
        let acc = 100.0 * artifact.result.test_accuracy;
        cfg.train.similarity = SimilarityKind::Ideal;
        let (raw, _) = harness::single_run_on(&ds, &cfg, None).map_err(|e| e.to_string())?;
        ok &= acc >= IDEAL_MIN;
        detail.push(format!(
            "{name} {acc:.2} (unnormalized {:.2})",
            100.0 * raw.result.test_accuracy
        ));
    }
    verdict(
        ok,
        format!("normalized ideal S: {} (need >= {IDEAL_MIN})", detail.join(", ")),
    )
}

/// Peak resident set size of this process.
fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn pubmed() -> Check {
    if let Err(e) = available(&["pubmed"]) {
        return Ok(Outcome::NotRun(e));
    }
    let ds = load("pubmed")?;
    let cfg = config("pubmed-rgcn.cfg", "pubmed")?;
    let (artifact, _) = harness::single_run_on(&ds, &cfg, None).map_err(|e| e.to_string())?;
    let acc = 100.0 * artifact.result.test_accuracy;
    let rss = peak_rss_bytes().ok_or("peak memory unavailable")?;
    verdict(
        (acc - PUBMED_TARGET).abs() <= PUBMED_BAND && rss < PUBMED_MAX_BYTES,
        format!(
            "accuracy {acc:.2} (target {PUBMED_TARGET} +/- {PUBMED_BAND}), peak RSS {:.2} GB (limit 4 GB)",
            rss as f64 / (1u64 << 30) as f64
        ),
    )
}
