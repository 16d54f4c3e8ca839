//! Raw dataset ingestion, the canonical on-disk format, splits and statistics.
//!
//! A canonical dataset directory holds:
//!
//! - `meta.json`: name, node/edge/feature/class counts and class names
//! - `edges.tsv`: one undirected edge per line as `src<TAB>dst`, `src < dst`
//! - `features.bin`: row-major little-endian `f32`, N×d (or `features.tsv`)
//! - `labels.tsv`: `node_id<TAB>label_id`, one line per node

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::tensor::DenseMatrix;
use crate::train::Split;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub name: String,
    pub num_nodes: usize,
    pub num_edges: usize,
    pub num_features: usize,
    pub num_classes: usize,
    pub class_names: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub name: String,
    pub graph: Graph,
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn meta(&self) -> Meta {
        Meta {
            name: self.name.clone(),
            num_nodes: self.graph.num_nodes(),
            num_edges: self.graph.num_edges(),
            num_features: self.graph.num_features(),
            num_classes: self.graph.num_classes(),
            class_names: self.class_names.clone(),
        }
    }

    /// Writes the canonical files into `dir`, creating it if needed.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut meta = serde_json::to_string_pretty(&self.meta())?;
        meta.push('\n');
        fs::write(dir.join("meta.json"), meta)?;

        let mut w = BufWriter::new(fs::File::create(dir.join("edges.tsv"))?);
        for (a, b) in self.graph.edge_list() {
            writeln!(w, "{a}\t{b}")?;
        }
        w.flush()?;

        let mut w = BufWriter::new(fs::File::create(dir.join("labels.tsv"))?);
        for (i, l) in self.graph.labels().iter().enumerate() {
            writeln!(w, "{i}\t{l}")?;
        }
        w.flush()?;

        let mut w = BufWriter::new(fs::File::create(dir.join("features.bin"))?);
        for &v in self.graph.features().as_slice() {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A canonical dataset as read from disk, together with its `meta.json`
/// exactly as stored (which may disagree with the files).
#[derive(Clone, Debug)]
pub struct LoadedDataset {
    pub dataset: Dataset,
    pub stored_meta: Meta,
}

/// Reads a canonical dataset. Node count and labels come from `labels.tsv`
/// and the feature width from the feature file, so a stale `meta.json` is
/// reported by [`stats`] rather than misread.
pub fn load(dir: &Path) -> Result<LoadedDataset> {
    let meta_path = dir.join("meta.json");
    let stored_meta: Meta = serde_json::from_str(
        &fs::read_to_string(&meta_path).map_err(|e| Error::Dataset(format!("{}: {e}", meta_path.display())))?,
    )?;

    let labels_path = dir.join("labels.tsv");
    let mut pairs = Vec::new();
    for (ln, line) in read_lines(&labels_path)? {
        let mut it = line.split('\t');
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::parse(&labels_path, ln, "expected `node_id<TAB>label_id`"));
        };
        pairs.push((
            parse_num::<usize>(&labels_path, ln, a)?,
            parse_num::<usize>(&labels_path, ln, b)?,
        ));
    }
    let n = pairs.len();
    let mut labels = vec![usize::MAX; n];
    for &(i, l) in &pairs {
        if i >= n || labels[i] != usize::MAX {
            return Err(Error::Dataset(format!(
                "{}: node ids must cover 0..{n} exactly once",
                labels_path.display()
            )));
        }
        labels[i] = l;
    }
    let num_classes = stored_meta
        .class_names
        .len()
        .max(labels.iter().copied().max().map_or(0, |m| m + 1));

    let edges_path = dir.join("edges.tsv");
    let mut edges = Vec::new();
    for (ln, line) in read_lines(&edges_path)? {
        let mut it = line.split('\t');
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::parse(&edges_path, ln, "expected `src<TAB>dst`"));
        };
        let (a, b) = (
            parse_num::<usize>(&edges_path, ln, a)?,
            parse_num::<usize>(&edges_path, ln, b)?,
        );
        if a >= n || b >= n {
            return Err(Error::parse(&edges_path, ln, format!("endpoint outside {n} nodes")));
        }
        if a >= b {
            return Err(Error::parse(&edges_path, ln, "edges must be stored with src < dst"));
        }
        edges.push((a, b));
    }
    let unique: BTreeSet<_> = edges.iter().collect();
    if unique.len() != edges.len() {
        return Err(Error::Dataset(format!("{}: duplicate edges", edges_path.display())));
    }

    let features = load_features(dir, n)?;
    let graph = Graph::from_edges(n, &edges, features, labels, num_classes)?;
    let class_names = if stored_meta.class_names.len() == num_classes {
        stored_meta.class_names.clone()
    } else {
        (0..num_classes).map(|c| c.to_string()).collect()
    };
    Ok(LoadedDataset {
        dataset: Dataset {
            name: stored_meta.name.clone(),
            graph,
            class_names,
        },
        stored_meta,
    })
}

fn load_features(dir: &Path, n: usize) -> Result<DenseMatrix> {
    let bin = dir.join("features.bin");
    if bin.exists() {
        let bytes = fs::read(&bin)?;
        if n == 0 || bytes.len() % (4 * n) != 0 {
            return Err(Error::Dataset(format!(
                "{}: {} bytes is not a whole number of f32 rows for {n} nodes",
                bin.display(),
                bytes.len()
            )));
        }
        let d = bytes.len() / (4 * n);
        let data = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        return DenseMatrix::from_vec(n, d, data);
    }
    let tsv = dir.join("features.tsv");
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (ln, line) in read_lines(&tsv)? {
        let row = line
            .split('\t')
            .map(|t| parse_num::<f64>(&tsv, ln, t))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(&tsv, ln, "ragged feature row"));
            }
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(Error::Dataset(format!(
            "{}: {} rows for {n} nodes",
            tsv.display(),
            rows.len()
        )));
    }
    let d = rows.first().map_or(0, Vec::len);
    DenseMatrix::from_vec(n, d, rows.concat())
}

/// Non-empty lines of a text file with 1-based line numbers.
fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let f = fs::File::open(path).map_err(|e| Error::Dataset(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if !line.trim().is_empty() {
            out.push((i + 1, line.to_string()));
        }
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(path: &Path, line: usize, tok: &str) -> Result<T> {
    tok.trim()
        .parse()
        .map_err(|_| Error::parse(path, line, format!("cannot parse `{tok}`")))
}

/// Class ids assigned in sorted order of the label names (numerically when
/// every name is an integer).
fn class_index(names: &[String]) -> (Vec<String>, HashMap<String, usize>) {
    let mut uniq: Vec<String> = names.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if uniq.iter().all(|s| s.parse::<i64>().is_ok()) {
        uniq.sort_by_key(|s| s.parse::<i64>().expect("checked"));
    }
    let map = uniq.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    (uniq, map)
}

struct RawGraph {
    ids: Vec<String>,
    features: Vec<Vec<f64>>,
    labels: Vec<String>,
    edges: Vec<(usize, usize)>,
}

impl RawGraph {
    fn into_dataset(self, name: &str, lcc: bool) -> Result<Dataset> {
        let n = self.ids.len();
        if n == 0 {
            return Err(Error::Dataset("no nodes".into()));
        }
        let d = self.features[0].len();
        let (class_names, map) = class_index(&self.labels);
        if class_names.len() < 2 {
            return Err(Error::Dataset("need at least two classes".into()));
        }
        let labels = self.labels.iter().map(|l| map[l]).collect();
        let features = DenseMatrix::from_vec(n, d, self.features.concat())?;
        let graph = Graph::from_edges(n, &self.edges, features, labels, class_names.len())?;
        let graph = if lcc {
            let (g, kept) = graph.largest_connected_component();
            if kept.len() < n {
                log::info!("{name}: kept largest component with {} of {n} nodes", kept.len());
            }
            g
        } else {
            graph
        };
        Ok(Dataset {
            name: name.to_string(),
            graph,
            class_names,
        })
    }

    fn index(&self) -> HashMap<&str, usize> {
        self.ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect()
    }
}

/// Edges between known ids; unknown endpoints are dropped with a warning.
fn resolve_edges(pairs: Vec<(String, String)>, index: &HashMap<&str, usize>, path: &Path) -> Vec<(usize, usize)> {
    let mut dropped = 0usize;
    let mut edges = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        match (index.get(a.as_str()), index.get(b.as_str())) {
            (Some(&i), Some(&j)) => edges.push((i, j)),
            _ => dropped += 1,
        }
    }
    if dropped > 0 {
        log::warn!("{}: dropped {dropped} edges with unknown node ids", path.display());
    }
    edges
}

/// Ingests a `.content`/`.cites` pair (Cora, Citeseer) and keeps the largest
/// connected component.
pub fn ingest_content_cites(name: &str, content: &Path, cites: &Path) -> Result<Dataset> {
    let mut raw = RawGraph {
        ids: Vec::new(),
        features: Vec::new(),
        labels: Vec::new(),
        edges: Vec::new(),
    };
    for (ln, line) in read_lines(content)? {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 3 {
            return Err(Error::parse(content, ln, "expected `id<TAB>features...<TAB>label`"));
        }
        let feats = toks[1..toks.len() - 1]
            .iter()
            .map(|t| parse_num::<f64>(content, ln, t))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = raw.features.first() {
            if first.len() != feats.len() {
                return Err(Error::parse(
                    content,
                    ln,
                    format!("{} features, expected {}", feats.len(), first.len()),
                ));
            }
        }
        raw.ids.push(toks[0].to_string());
        raw.features.push(feats);
        raw.labels.push(toks[toks.len() - 1].to_string());
    }
    let mut pairs = Vec::new();
    for (ln, line) in read_lines(cites)? {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::parse(cites, ln, "expected `cited<TAB>citing`"));
        }
        pairs.push((toks[0].to_string(), toks[1].to_string()));
    }
    raw.edges = resolve_edges(pairs, &raw.index(), cites);
    raw.into_dataset(name, true)
}

/// Ingests a WebKB graph (Cornell, Texas, Wisconsin): an edge file of
/// `src<TAB>dst` lines and a node file of `id<TAB>features<TAB>label` lines.
/// Features are either a dense comma-separated 0/1 vector or a list of
/// active word indices; `num_features` fixes the width of index lists.
/// Non-numeric header lines are skipped. The graph is not reduced to a
/// component.
pub fn ingest_webkb(name: &str, edges_path: &Path, nodes_path: &Path, num_features: Option<usize>) -> Result<Dataset> {
    let mut ids = Vec::new();
    let mut tokens: Vec<Vec<usize>> = Vec::new();
    let mut labels = Vec::new();
    for (ln, line) in read_lines(nodes_path)? {
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 3 {
            return Err(Error::parse(nodes_path, ln, "expected `id<TAB>features<TAB>label`"));
        }
        if parts[0].trim().parse::<i64>().is_err() && ids.is_empty() {
            continue;
        }
        let toks = parts[1]
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| parse_num::<usize>(nodes_path, ln, t))
            .collect::<Result<Vec<_>>>()?;
        ids.push(parts[0].trim().to_string());
        tokens.push(toks);
        labels.push(parts[2].trim().to_string());
    }
    if ids.is_empty() {
        return Err(Error::Dataset(format!("{}: no nodes", nodes_path.display())));
    }
    let width = tokens[0].len();
    let dense = width > 1 && tokens.iter().all(|t| t.len() == width && t.iter().all(|&v| v <= 1));
    let features: Vec<Vec<f64>> = if dense {
        if let Some(d) = num_features {
            if d != width {
                return Err(Error::Dataset(format!(
                    "feature vectors have {width} entries, expected {d}"
                )));
            }
        }
        tokens.iter().map(|t| t.iter().map(|&v| v as f64).collect()).collect()
    } else {
        let max = tokens.iter().flatten().copied().max().map_or(0, |m| m + 1);
        let d = num_features.unwrap_or(max);
        if max > d {
            return Err(Error::Dataset(format!(
                "feature index {} outside {d} features",
                max - 1
            )));
        }
        tokens
            .iter()
            .map(|t| {
                let mut row = vec![0.0; d];
                t.iter().for_each(|&j| row[j] = 1.0);
                row
            })
            .collect()
    };

    let mut pairs = Vec::new();
    for (ln, line) in read_lines(edges_path)? {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::parse(edges_path, ln, "expected `src<TAB>dst`"));
        }
        if toks[0].parse::<i64>().is_err() && pairs.is_empty() {
            continue;
        }
        pairs.push((toks[0].to_string(), toks[1].to_string()));
    }
    let mut raw = RawGraph {
        ids,
        features,
        labels,
        edges: Vec::new(),
    };
    raw.edges = resolve_edges(pairs, &raw.index(), edges_path);
    raw.into_dataset(name, false)
}

/// Ingests the Pubmed-Diabetes `NODE.paper.tab` / `DIRECTED.cites.tab`
/// files, densifying the TF-IDF attributes, and keeps the largest connected
/// component.
pub fn ingest_pubmed(name: &str, nodes_path: &Path, cites_path: &Path) -> Result<Dataset> {
    let lines = read_lines(nodes_path)?;
    let mut vocab: HashMap<String, usize> = HashMap::new();
    let mut data_start = lines.len();
    for (k, (_, line)) in lines.iter().enumerate() {
        if line.starts_with("cat=") || line.contains("numeric:") {
            for tok in line.split('\t') {
                let mut it = tok.split(':');
                if let (Some("numeric"), Some(word)) = (it.next(), it.next()) {
                    let next = vocab.len();
                    vocab.entry(word.to_string()).or_insert(next);
                }
            }
            data_start = k + 1;
            break;
        }
    }
    if vocab.is_empty() {
        return Err(Error::Dataset(format!(
            "{}: no attribute header found",
            nodes_path.display()
        )));
    }
    let d = vocab.len();
    let mut raw = RawGraph {
        ids: Vec::new(),
        features: Vec::new(),
        labels: Vec::new(),
        edges: Vec::new(),
    };
    for (ln, line) in &lines[data_start..] {
        let mut toks = line.split('\t');
        let id = toks.next().unwrap_or_default().trim();
        let mut label = None;
        let mut row = vec![0.0; d];
        for tok in toks {
            let Some((key, value)) = tok.split_once('=') else {
                return Err(Error::parse(
                    nodes_path,
                    *ln,
                    format!("expected `name=value`, got `{tok}`"),
                ));
            };
            match key {
                "label" => label = Some(value.to_string()),
                "summary" => {}
                word => {
                    let Some(&j) = vocab.get(word) else {
                        return Err(Error::parse(nodes_path, *ln, format!("unknown attribute `{word}`")));
                    };
                    row[j] = parse_num::<f64>(nodes_path, *ln, value)?;
                }
            }
        }
        let Some(label) = label else {
            return Err(Error::parse(nodes_path, *ln, "missing label"));
        };
        raw.ids.push(id.to_string());
        raw.features.push(row);
        raw.labels.push(label);
    }

    let mut pairs = Vec::new();
    for (ln, line) in read_lines(cites_path)? {
        if !line.contains('|') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let ends: Vec<&str> = toks.iter().filter_map(|t| t.strip_prefix("paper:")).collect();
        if ends.len() != 2 {
            return Err(Error::parse(
                cites_path,
                ln,
                "expected `id<TAB>paper:A<TAB>|<TAB>paper:B`",
            ));
        }
        pairs.push((ends[0].to_string(), ends[1].to_string()));
    }
    raw.edges = resolve_edges(pairs, &raw.index(), cites_path);
    raw.into_dataset(name, true)
}

/// Split protocol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SplitSpec {
    /// Fixed number of training and validation nodes per class, the rest
    /// for testing.
    Citation {
        train_per_class: usize,
        val_per_class: usize,
    },
    /// Global random fractions. Train and validation sizes are floored and
    /// the remainder goes to test.
    Fraction { train: f64, val: f64, test: f64 },
}

impl SplitSpec {
    pub const CITATION: SplitSpec = SplitSpec::Citation {
        train_per_class: 20,
        val_per_class: 30,
    };
    pub const FRACTION: SplitSpec = SplitSpec::Fraction {
        train: 0.6,
        val: 0.2,
        test: 0.2,
    };

    pub fn validate(&self) -> Result<()> {
        if let SplitSpec::Fraction { train, val, test } = *self {
            let ok = [train, val, test].iter().all(|f| (0.0..=1.0).contains(f));
            if !ok || (train + val + test - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "split fractions {train}/{val}/{test} must lie in [0, 1] and sum to 1"
                )));
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for SplitSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "citation" => Ok(SplitSpec::CITATION),
            "fraction" => Ok(SplitSpec::FRACTION),
            other => Err(Error::Config(format!(
                "unknown split `{other}` (expected citation or fraction)"
            ))),
        }
    }
}

/// Draws a split of `graph` under `spec`. Each set is sorted ascending.
pub fn make_split(graph: &Graph, spec: &SplitSpec, seed: u64) -> Result<Split> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = graph.num_nodes();
    let mut split = Split {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    match *spec {
        SplitSpec::Citation {
            train_per_class,
            val_per_class,
        } => {
            let mut members = vec![Vec::new(); graph.num_classes()];
            for (i, &l) in graph.labels().iter().enumerate() {
                members[l].push(i);
            }
            let required = train_per_class + val_per_class;
            for (class, nodes) in members.iter_mut().enumerate() {
                if nodes.len() < required {
                    return Err(Error::InfeasibleSplit {
                        class,
                        available: nodes.len(),
                        required,
                    });
                }
                nodes.shuffle(&mut rng);
                split.train.extend_from_slice(&nodes[..train_per_class]);
                split.val.extend_from_slice(&nodes[train_per_class..required]);
                split.test.extend_from_slice(&nodes[required..]);
            }
        }
        SplitSpec::Fraction { train, val, .. } => {
            let mut nodes: Vec<usize> = (0..n).collect();
            nodes.shuffle(&mut rng);
            let n_train = (train * n as f64 + 1e-9).floor() as usize;
            let n_val = (val * n as f64 + 1e-9).floor() as usize;
            split.train.extend_from_slice(&nodes[..n_train]);
            split.val.extend_from_slice(&nodes[n_train..n_train + n_val]);
            split.test.extend_from_slice(&nodes[n_train + n_val..]);
        }
    }
    split.train.sort_unstable();
    split.val.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

/// Reference sizes (nodes, edges, features, classes) of the benchmark graphs.
pub const REFERENCE_STATS: [(&str, [usize; 4]); 6] = [
    ("cora", [2485, 5069, 1433, 7]),
    ("citeseer", [2120, 3679, 3703, 6]),
    ("pubmed", [19717, 44324, 500, 3]),
    ("cornell", [183, 295, 1703, 5]),
    ("texas", [183, 309, 1703, 5]),
    ("wisconsin", [251, 499, 1703, 5]),
];

pub fn reference_stats(name: &str) -> Option<[usize; 4]> {
    let key = name.to_ascii_lowercase();
    REFERENCE_STATS.iter().find(|(n, _)| *n == key).map(|(_, s)| *s)
}

#[derive(Clone, Debug)]
pub struct StatsReport {
    pub name: String,
    pub num_nodes: usize,
    pub num_edges: usize,
    pub num_features: usize,
    pub num_classes: usize,
    /// (class name, node count) per class id.
    pub class_counts: Vec<(String, usize)>,
    /// Human-readable disagreements with `meta.json` or the reference sizes.
    pub mismatches: Vec<String>,
}

/// Counts of a loaded dataset, checked against its stored metadata and,
/// for known benchmark names, the reference sizes.
pub fn stats(loaded: &LoadedDataset) -> StatsReport {
    let ds = &loaded.dataset;
    let g = &ds.graph;
    let actual = [g.num_nodes(), g.num_edges(), g.num_features(), g.num_classes()];
    let fields = ["num_nodes", "num_edges", "num_features", "num_classes"];
    let meta = &loaded.stored_meta;
    let stored = [meta.num_nodes, meta.num_edges, meta.num_features, meta.num_classes];
    let mut mismatches = Vec::new();
    for ((f, a), s) in fields.iter().zip(actual).zip(stored) {
        if a != s {
            mismatches.push(format!("meta.json {f} = {s}, files give {a}"));
        }
    }
    if meta.class_names.len() != g.num_classes() {
        mismatches.push(format!(
            "meta.json lists {} class names for {} classes",
            meta.class_names.len(),
            g.num_classes()
        ));
    }
    if let Some(reference) = reference_stats(&ds.name) {
        for ((f, a), r) in fields.iter().zip(actual).zip(reference) {
            if a != r {
                mismatches.push(format!("{f} = {a}, reference {} has {r}", ds.name));
            }
        }
    }
    let mut counts = vec![0usize; g.num_classes()];
    for &l in g.labels() {
        counts[l] += 1;
    }
    StatsReport {
        name: ds.name.clone(),
        num_nodes: actual[0],
        num_edges: actual[1],
        num_features: actual[2],
        num_classes: actual[3],
        class_counts: ds.class_names.iter().cloned().zip(counts).collect(),
        mismatches,
    }
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dataset\t{}", self.name)?;
        writeln!(f, "nodes\t{}", self.num_nodes)?;
        writeln!(f, "edges\t{}", self.num_edges)?;
        writeln!(f, "features\t{}", self.num_features)?;
        writeln!(f, "classes\t{}", self.num_classes)?;
        for (i, (name, c)) in self.class_counts.iter().enumerate() {
            writeln!(f, "class {i}\t{name}\t{c}")?;
        }
        for m in &self.mismatches {
            writeln!(f, "MISMATCH\t{m}")?;
        }
        Ok(())
    }
}
