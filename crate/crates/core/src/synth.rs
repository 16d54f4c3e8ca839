//! Small synthetic graphs for tests and sanity runs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::Graph;
use crate::tensor::DenseMatrix;

/// Stochastic block model with class-correlated binary features.
#[derive(Clone, Debug)]
pub struct SbmConfig {
    pub nodes_per_class: usize,
    pub num_classes: usize,
    /// Edge probability within a class.
    pub p_in: f64,
    /// Edge probability across classes.
    pub p_out: f64,
    pub num_features: usize,
    /// Probability that a word from the node's own class block is present.
    pub p_topic: f64,
    /// Probability that any other word is present.
    pub p_noise: f64,
}

impl Default for SbmConfig {
    fn default() -> Self {
        Self {
            nodes_per_class: 60,
            num_classes: 3,
            p_in: 0.08,
            p_out: 0.01,
            num_features: 60,
            p_topic: 0.15,
            p_noise: 0.05,
        }
    }
}

/// Samples a graph from `cfg`. Node `i` belongs to class `i % K`.
pub fn sbm(cfg: &SbmConfig, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = cfg.num_classes;
    let n = cfg.nodes_per_class * k;
    let labels: Vec<usize> = (0..n).map(|i| i % k).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if labels[i] == labels[j] { cfg.p_in } else { cfg.p_out };
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    let block = (cfg.num_features / k).max(1);
    let features = DenseMatrix::from_fn(n, cfg.num_features, |i, f| {
        let own = f / block == labels[i];
        let p = if own { cfg.p_topic } else { cfg.p_noise };
        if rng.random::<f64>() < p {
            1.0
        } else {
            0.0
        }
    });
    Graph::from_edges(n, &edges, features, labels, k)
}

/// Erdős–Rényi graph with Gaussian-ish features and uniform labels. Every
/// class is guaranteed at least one node when `n ≥ k`.
pub fn random_graph(n: usize, p: f64, num_features: usize, k: usize, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    let features = DenseMatrix::from_fn(n, num_features, |_, _| rng.random_range(-1.0..1.0));
    let labels = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
    Graph::from_edges(n, &edges, features, labels, k)
}

/// Two disjoint triangles `{0,1,2}` and `{3,4,5}`, one class each, with
/// orthogonal one-hot features per class.
pub fn two_triangles() -> Graph {
    let edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)];
    let labels = vec![0, 0, 0, 1, 1, 1];
    let features = DenseMatrix::from_fn(6, 2, |i, j| if labels[i] == j { 1.0 } else { 0.0 });
    Graph::from_edges(6, &edges, features, labels, 2).expect("valid toy graph")
}
