//! Experiment orchestration: configuration files, split × init matrices,
//! aggregation, sweeps, timing and export.
//!
//! Result files are TSV with a header row and LF line endings:
//!
//! - `runs.tsv`: `split init seed status test_accuracy val_accuracy best_epoch epochs_run tau lambda epsilon`
//! - `summary.tsv`: `dataset model regularized similarity num_splits num_inits runs failures mean_accuracy std_accuracy`
//! - `timing.tsv`: `split init seconds_per_epoch` (kept apart so the other files are reproducible byte for byte)
//! - `sweep.tsv`: `tau lambda epsilon runs failures mean_accuracy std_accuracy`
//! - `predictions.tsv`: `node label predicted p_0 … p_{K-1}` for test nodes
//! - `embeddings.tsv`: `node label o_0 … o_{K-1}` for every node

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{self, make_split, Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::models::{ModelConfig, ModelKind};
use crate::tensor::DenseMatrix;
use crate::train::{accuracy, epoch_times, predict, train_run_detailed, RunOutput, RunResult, Split, TrainConfig};

/// Grid for [`sweep`]. An empty axis uses the configured initial value.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    pub tau: Vec<f64>,
    pub lambda: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub num_splits: usize,
    pub num_inits: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            tau: Vec::new(),
            lambda: Vec::new(),
            epsilon: Vec::new(),
            num_splits: 5,
            num_inits: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub split: SplitSpec,
    pub num_splits: usize,
    pub num_inits: usize,
    /// Master seed from which split and init seeds are derived.
    pub seed: u64,
    /// Worker threads (0 lets the pool decide).
    pub threads: usize,
    pub sweep: SweepGrid,
    pub timing_warmup: usize,
    pub timing_epochs: usize,
}

impl ExperimentConfig {
    pub fn new(dataset: impl Into<PathBuf>, kind: ModelKind) -> Self {
        Self {
            dataset: dataset.into(),
            model: ModelConfig::new(kind),
            train: TrainConfig::default(),
            split: SplitSpec::CITATION,
            num_splits: 5,
            num_inits: 3,
            seed: 0,
            threads: 0,
            sweep: SweepGrid::default(),
            timing_warmup: 10,
            timing_epochs: 100,
        }
    }

    /// Reads a config file. A relative `dataset` path is taken relative to
    /// the file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        if cfg.dataset.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.dataset = dir.join(&cfg.dataset);
            }
        }
        Ok(cfg)
    }

    /// Parses flat `key = value` text. `#` starts a comment; unknown or
    /// repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!("line {}: expected `key = value`", idx + 1)));
            };
            let key = key.trim().to_string();
            if entries
                .insert(key.clone(), (idx + 1, value.trim().to_string()))
                .is_some()
            {
                return Err(Error::Config(format!("line {}: `{key}` given twice", idx + 1)));
            }
        }

        let kind = match entries.remove("model") {
            Some((line, v)) => v.parse::<ModelKind>().map_err(|e| at_line(line, e))?,
            None => ModelKind::Gcn,
        };
        let Some((_, dataset)) = entries.remove("dataset") else {
            return Err(Error::Config("missing required key `dataset`".into()));
        };
        let mut cfg = Self::new(dataset, kind);
        let mut fractions = match cfg.split {
            SplitSpec::Fraction { train, val, test } => [train, val, test],
            SplitSpec::Citation { .. } => [0.6, 0.2, 0.2],
        };
        let mut per_class = [20, 30];
        let mut protocol = "citation".to_string();

        for (key, (line, v)) in entries {
            let t = &mut cfg.train;
            let m = &mut cfg.model;
            let res: Result<()> = (|| {
                match key.as_str() {
                    "regularized" => t.regularized = parse_bool(&v)?,
                    "similarity" => t.similarity = v.parse()?,
                    "split" => protocol = v.clone(),
                    "train_per_class" => per_class[0] = parse(&v)?,
                    "val_per_class" => per_class[1] = parse(&v)?,
                    "train_fraction" => fractions[0] = parse(&v)?,
                    "val_fraction" => fractions[1] = parse(&v)?,
                    "test_fraction" => fractions[2] = parse(&v)?,
                    "num_splits" => cfg.num_splits = parse(&v)?,
                    "num_inits" => cfg.num_inits = parse(&v)?,
                    "seed" => cfg.seed = parse(&v)?,
                    "threads" => cfg.threads = parse(&v)?,
                    "T" | "t_steps" => t.t_steps = parse(&v)?,
                    "projection" => t.projection = v.parse()?,
                    "max_epochs" => t.max_epochs = parse(&v)?,
                    "patience" => t.patience = parse(&v)?,
                    "patience_rule" => t.patience_rule = v.parse()?,
                    "lr" => t.lr = parse(&v)?,
                    "tau" => t.hyper_init[0] = parse(&v)?,
                    "lambda" => t.hyper_init[1] = parse(&v)?,
                    "epsilon" => t.hyper_init[2] = parse(&v)?,
                    "tau_lr" => t.hyper_lr[0] = parse(&v)?,
                    "lambda_lr" => t.hyper_lr[1] = parse(&v)?,
                    "epsilon_lr" => t.hyper_lr[2] = parse(&v)?,
                    "learn_tau" => t.hyper_learnable[0] = parse_bool(&v)?,
                    "learn_lambda" => t.hyper_learnable[1] = parse_bool(&v)?,
                    "learn_epsilon" => t.hyper_learnable[2] = parse_bool(&v)?,
                    "check_every" => t.check_every = parse(&v)?,
                    "hidden_dim" => m.hidden_dim = parse(&v)?,
                    "dropout" => m.dropout = parse(&v)?,
                    "weight_decay" => m.weight_decay = parse(&v)?,
                    "l2_normalize" => m.l2_normalize = parse_bool(&v)?,
                    "sweep_tau" => cfg.sweep.tau = parse_list(&v)?,
                    "sweep_lambda" => cfg.sweep.lambda = parse_list(&v)?,
                    "sweep_epsilon" => cfg.sweep.epsilon = parse_list(&v)?,
                    "sweep_splits" => cfg.sweep.num_splits = parse(&v)?,
                    "sweep_inits" => cfg.sweep.num_inits = parse(&v)?,
                    "timing_warmup" => cfg.timing_warmup = parse(&v)?,
                    "timing_epochs" => cfg.timing_epochs = parse(&v)?,
                    other => return Err(Error::Config(format!("unknown key `{other}`"))),
                }
                Ok(())
            })();
            res.map_err(|e| at_line(line, e))?;
        }
        cfg.split = match protocol.as_str() {
            "citation" => SplitSpec::Citation {
                train_per_class: per_class[0],
                val_per_class: per_class[1],
            },
            "fraction" => SplitSpec::Fraction {
                train: fractions[0],
                val: fractions[1],
                test: fractions[2],
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown split `{other}` (expected citation or fraction)"
                )))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_splits == 0 || self.num_inits == 0 {
            return Err(Error::Config("num_splits and num_inits must be at least 1".into()));
        }
        if self.sweep.num_splits == 0 || self.sweep.num_inits == 0 {
            return Err(Error::Config("sweep_splits and sweep_inits must be at least 1".into()));
        }
        self.split.validate()?;
        self.model.validate()?;
        self.train.validate()
    }

    /// Every key with its current value, in a form [`ExperimentConfig::parse`]
    /// reads back to an equal config.
    pub fn to_text(&self) -> String {
        let t = &self.train;
        let m = &self.model;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("dataset", self.dataset.display().to_string());
        kv("model", m.kind.to_string());
        kv("regularized", t.regularized.to_string());
        kv("similarity", t.similarity.to_string());
        match self.split {
            SplitSpec::Citation {
                train_per_class,
                val_per_class,
            } => {
                kv("split", "citation".into());
                kv("train_per_class", train_per_class.to_string());
                kv("val_per_class", val_per_class.to_string());
            }
            SplitSpec::Fraction { train, val, test } => {
                kv("split", "fraction".into());
                kv("train_fraction", train.to_string());
                kv("val_fraction", val.to_string());
                kv("test_fraction", test.to_string());
            }
        }
        kv("num_splits", self.num_splits.to_string());
        kv("num_inits", self.num_inits.to_string());
        kv("seed", self.seed.to_string());
        kv("threads", self.threads.to_string());
        kv("T", t.t_steps.to_string());
        kv("projection", t.projection.to_string());
        kv("max_epochs", t.max_epochs.to_string());
        kv("patience", t.patience.to_string());
        kv("patience_rule", t.patience_rule.to_string());
        kv("lr", t.lr.to_string());
        for (i, name) in ["tau", "lambda", "epsilon"].iter().enumerate() {
            kv(name, t.hyper_init[i].to_string());
            kv(&format!("{name}_lr"), t.hyper_lr[i].to_string());
            kv(&format!("learn_{name}"), t.hyper_learnable[i].to_string());
        }
        kv("check_every", t.check_every.to_string());
        kv("hidden_dim", m.hidden_dim.to_string());
        kv("dropout", m.dropout.to_string());
        kv("weight_decay", m.weight_decay.to_string());
        kv("l2_normalize", m.l2_normalize.to_string());
        for (name, axis) in [
            ("sweep_tau", &self.sweep.tau),
            ("sweep_lambda", &self.sweep.lambda),
            ("sweep_epsilon", &self.sweep.epsilon),
        ] {
            if !axis.is_empty() {
                kv(name, axis.iter().map(f64::to_string).collect::<Vec<_>>().join(", "));
            }
        }
        kv("sweep_splits", self.sweep.num_splits.to_string());
        kv("sweep_inits", self.sweep.num_inits.to_string());
        kv("timing_warmup", self.timing_warmup.to_string());
        kv("timing_epochs", self.timing_epochs.to_string());
        s
    }
}

fn at_line(line: usize, e: Error) -> Error {
    match e {
        Error::Config(msg) => Error::Config(format!("line {line}: {msg}")),
        other => Error::Config(format!("line {line}: {other}")),
    }
}

fn parse<T: std::str::FromStr>(v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("cannot parse `{v}`")))
}

fn parse_bool(v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::Config(format!("expected a boolean, got `{other}`"))),
    }
}

fn parse_list(v: &str) -> Result<Vec<f64>> {
    let out = v
        .split(',')
        .map(|t| parse::<f64>(t.trim()))
        .collect::<Result<Vec<_>>>()?;
    if out.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    Ok(out)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a path of indices into an independent seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |h, &p| splitmix64(h ^ splitmix64(p)))
}

/// Seed of split `s`; it does not depend on the model, so baseline and
/// regularized experiments sharing a master seed see identical splits.
pub fn split_seed(master: u64, s: usize) -> u64 {
    derive_seed(master, &[0, s as u64])
}

/// Seed of initialization `i` on split `s`.
pub fn init_seed(master: u64, s: usize, i: usize) -> u64 {
    derive_seed(master, &[1, s as u64, i as u64])
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub split: usize,
    pub init: usize,
    pub seed: u64,
    pub outcome: std::result::Result<RunResult, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSummary {
    pub runs: usize,
    pub failures: usize,
    /// Mean test accuracy over successful runs (NaN if none succeeded).
    pub mean_accuracy: f64,
    /// Population standard deviation of test accuracy.
    pub std_accuracy: f64,
    pub mean_seconds_per_epoch: f64,
}

impl ExperimentSummary {
    pub fn from_records(records: &[RunRecord]) -> Self {
        let ok: Vec<&RunResult> = records.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
        let (mean, std) = mean_std(&ok.iter().map(|r| r.test_accuracy).collect::<Vec<_>>());
        let (secs, _) = mean_std(&ok.iter().map(|r| r.seconds_per_epoch).collect::<Vec<_>>());
        Self {
            runs: records.len(),
            failures: records.len() - ok.len(),
            mean_accuracy: mean,
            std_accuracy: std,
            mean_seconds_per_epoch: secs,
        }
    }

    /// More than 10% of the runs failed.
    pub fn too_many_failures(&self) -> bool {
        self.failures * 10 > self.runs
    }
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Clone, Debug)]
pub struct Experiment {
    pub dataset: String,
    pub records: Vec<RunRecord>,
    pub summary: ExperimentSummary,
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    Ok(data::load(&cfg.dataset)?.dataset)
}

/// Runs every (split, init) cell of `cfg` on `ds`. Individual run failures
/// are recorded, not propagated; an infeasible split is an error.
pub fn run_experiment_on(ds: &Dataset, cfg: &ExperimentConfig) -> Result<Experiment> {
    cfg.validate()?;
    let g = &ds.graph;
    let splits = (0..cfg.num_splits)
        .map(|s| make_split(g, &cfg.split, split_seed(cfg.seed, s)))
        .collect::<Result<Vec<Split>>>()?;
    let cells: Vec<(usize, usize)> = (0..cfg.num_splits)
        .flat_map(|s| (0..cfg.num_inits).map(move |i| (s, i)))
        .collect();
    let mut records: Vec<RunRecord> = with_pool(cfg.threads, || {
        cells
            .par_iter()
            .map(|&(s, i)| {
                let seed = init_seed(cfg.seed, s, i);
                let tc = TrainConfig {
                    seed,
                    ..cfg.train.clone()
                };
                let outcome = train_run_detailed(g, &splits[s], &cfg.model, &tc)
                    .map(|o| o.result)
                    .map_err(|e| e.to_string());
                match &outcome {
                    Ok(r) => log::debug!(
                        "run split {s} init {i}: test {:.4} at epoch {} of {}",
                        r.test_accuracy,
                        r.best_epoch,
                        r.epochs_run
                    ),
                    Err(msg) => log::warn!("run split {s} init {i} failed: {msg}"),
                }
                RunRecord {
                    split: s,
                    init: i,
                    seed,
                    outcome,
                }
            })
            .collect()
    })?;
    records.sort_by_key(|r| (r.split, r.init));
    let summary = ExperimentSummary::from_records(&records);
    Ok(Experiment {
        dataset: ds.name.clone(),
        records,
        summary,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
    run_experiment_on(&load_dataset(cfg)?, cfg)
}

/// Writes `runs.tsv`, `summary.tsv`, `timing.tsv` and `config.txt`.
pub fn write_experiment(dir: &Path, exp: &Experiment, cfg: &ExperimentConfig) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut runs = String::from(
        "split\tinit\tseed\tstatus\ttest_accuracy\tval_accuracy\tbest_epoch\tepochs_run\ttau\tlambda\tepsilon\n",
    );
    let mut timing = String::from("split\tinit\tseconds_per_epoch\n");
    for r in &exp.records {
        match &r.outcome {
            Ok(res) => {
                let _ = writeln!(
                    runs,
                    "{}\t{}\t{}\tok\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    r.split,
                    r.init,
                    r.seed,
                    res.test_accuracy,
                    res.val_accuracy,
                    res.best_epoch,
                    res.epochs_run,
                    res.tau,
                    res.lambda,
                    res.epsilon
                );
                let _ = writeln!(timing, "{}\t{}\t{}", r.split, r.init, res.seconds_per_epoch);
            }
            Err(msg) => {
                let msg = msg.replace(['\t', '\n'], " ");
                let _ = writeln!(runs, "{}\t{}\t{}\tfailed: {msg}\t\t\t\t\t\t\t", r.split, r.init, r.seed);
            }
        }
    }
    fs::write(dir.join("runs.tsv"), runs)?;
    fs::write(dir.join("timing.tsv"), timing)?;
    let s = &exp.summary;
    let summary = format!(
        "dataset\tmodel\tregularized\tsimilarity\tnum_splits\tnum_inits\truns\tfailures\tmean_accuracy\tstd_accuracy\n\
         {}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
        exp.dataset,
        cfg.model.kind,
        cfg.train.regularized,
        cfg.train.similarity,
        cfg.num_splits,
        cfg.num_inits,
        s.runs,
        s.failures,
        s.mean_accuracy,
        s.std_accuracy
    );
    fs::write(dir.join("summary.tsv"), summary)?;
    fs::write(dir.join("config.txt"), cfg.to_text())?;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub tau: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub summary: ExperimentSummary,
}

/// Runs an experiment at every grid point with the sweep's split and init
/// counts. Grid order is τ outermost, ε innermost.
pub fn sweep_on(ds: &Dataset, cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let axis = |v: &Vec<f64>, i: usize| {
        if v.is_empty() {
            vec![cfg.train.hyper_init[i]]
        } else {
            v.clone()
        }
    };
    let (taus, lambdas, epsilons) = (
        axis(&cfg.sweep.tau, 0),
        axis(&cfg.sweep.lambda, 1),
        axis(&cfg.sweep.epsilon, 2),
    );
    let mut rows = Vec::new();
    for &tau in &taus {
        for &lambda in &lambdas {
            for &epsilon in &epsilons {
                let mut point = cfg.clone();
                point.train.hyper_init = [tau, lambda, epsilon];
                point.num_splits = cfg.sweep.num_splits;
                point.num_inits = cfg.sweep.num_inits;
                let exp = run_experiment_on(ds, &point)?;
                log::info!(
                    "sweep tau={tau} lambda={lambda} epsilon={epsilon}: {:.4}",
                    exp.summary.mean_accuracy
                );
                rows.push(SweepRow {
                    tau,
                    lambda,
                    epsilon,
                    summary: exp.summary,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_sweep(dir: &Path, rows: &[SweepRow]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut out = String::from("tau\tlambda\tepsilon\truns\tfailures\tmean_accuracy\tstd_accuracy\n");
    for r in rows {
        let s = &r.summary;
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.tau, r.lambda, r.epsilon, s.runs, s.failures, s.mean_accuracy, s.std_accuracy
        );
    }
    fs::write(dir.join("sweep.tsv"), out)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimingRow {
    pub model: ModelKind,
    pub regularized: bool,
    pub epochs: usize,
    pub median_seconds: f64,
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median seconds per epoch of the baseline and the regularized variant of
/// the configured model, on split 0 with init 0.
pub fn time_epochs_on(ds: &Dataset, cfg: &ExperimentConfig) -> Result<Vec<TimingRow>> {
    cfg.validate()?;
    let split = make_split(&ds.graph, &cfg.split, split_seed(cfg.seed, 0))?;
    let mut rows = Vec::new();
    for regularized in [false, true] {
        let tc = TrainConfig {
            regularized,
            seed: init_seed(cfg.seed, 0, 0),
            check_every: 0,
            ..cfg.train.clone()
        };
        let times = epoch_times(&ds.graph, &split, &cfg.model, &tc, cfg.timing_warmup, cfg.timing_epochs)?;
        rows.push(TimingRow {
            model: cfg.model.kind,
            regularized,
            epochs: times.len(),
            median_seconds: median(&times),
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&DenseMatrix> for StoredMatrix {
    fn from(m: &DenseMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.as_slice().to_vec(),
        }
    }
}

/// Everything needed to reproduce a trained model's outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub config: String,
    pub split_seed: u64,
    pub init_seed: u64,
    pub split: Split,
    pub result: RunResult,
    pub weights: Vec<StoredMatrix>,
}

/// Trains split 0 / init 0 of `cfg`; `master` overrides the config's seed.
pub fn single_run_on(ds: &Dataset, cfg: &ExperimentConfig, master: Option<u64>) -> Result<(RunArtifact, RunOutput)> {
    cfg.validate()?;
    let master = master.unwrap_or(cfg.seed);
    let s_seed = split_seed(master, 0);
    let i_seed = init_seed(master, 0, 0);
    let split = make_split(&ds.graph, &cfg.split, s_seed)?;
    let tc = TrainConfig {
        seed: i_seed,
        ..cfg.train.clone()
    };
    let out = train_run_detailed(&ds.graph, &split, &cfg.model, &tc)?;
    let mut stored = cfg.clone();
    stored.seed = master;
    if let Ok(abs) = fs::canonicalize(&stored.dataset) {
        stored.dataset = abs;
    }
    let artifact = RunArtifact {
        config: stored.to_text(),
        split_seed: s_seed,
        init_seed: i_seed,
        split,
        result: out.result.clone(),
        weights: out.weights.iter().map(StoredMatrix::from).collect(),
    };
    Ok((artifact, out))
}

pub fn write_run(dir: &Path, artifact: &RunArtifact) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut json = serde_json::to_string(artifact)?;
    json.push('\n');
    fs::write(dir.join("run.json"), json)?;
    Ok(())
}

/// Writes `predictions.tsv` and `embeddings.tsv` for the run stored in
/// `run_dir` and returns the test accuracy recomputed from the predictions.
pub fn export(run_dir: &Path, out_dir: &Path) -> Result<f64> {
    let artifact: RunArtifact = serde_json::from_str(&fs::read_to_string(run_dir.join("run.json"))?)?;
    let cfg = ExperimentConfig::parse(&artifact.config)?;
    let ds = load_dataset(&cfg)?;
    let weights = artifact
        .weights
        .iter()
        .map(|m| DenseMatrix::from_vec(m.rows, m.cols, m.data.clone()))
        .collect::<Result<Vec<_>>>()?;
    let r = &artifact.result;
    let (probs, logits) = predict(&ds.graph, &cfg.model, &cfg.train, weights, [r.tau, r.lambda, r.epsilon])?;
    let labels = ds.graph.labels();
    let k = ds.graph.num_classes();
    let classes: String = (0..k).map(|c| format!("\tp_{c}")).collect();
    let mut pred = format!("node\tlabel\tpredicted{classes}\n");
    let argmax = probs.row_argmax();
    for &i in &artifact.split.test {
        let _ = write!(pred, "{i}\t{}\t{}", labels[i], argmax[i]);
        for v in probs.row(i) {
            let _ = write!(pred, "\t{v}");
        }
        pred.push('\n');
    }
    let outs: String = (0..k).map(|c| format!("\to_{c}")).collect();
    let mut emb = format!("node\tlabel{outs}\n");
    for i in 0..ds.graph.num_nodes() {
        let _ = write!(emb, "{i}\t{}", labels[i]);
        for v in logits.row(i) {
            let _ = write!(emb, "\t{v}");
        }
        emb.push('\n');
    }
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("predictions.tsv"), pred)?;
    fs::write(out_dir.join("embeddings.tsv"), emb)?;
    Ok(accuracy(&probs, labels, &artifact.split.test))
}
