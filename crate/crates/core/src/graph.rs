//! Undirected attributed graphs and the sparse operators derived from them.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tensor::{DenseMatrix, SparseMatrix};

/// Immutable node-classification graph: binary symmetric adjacency without
/// self-loops, node features and labels in `[0, k)`.
#[derive(Clone, Debug)]
pub struct Graph {
    adjacency: Arc<SparseMatrix>,
    features: Arc<DenseMatrix>,
    labels: Arc<Vec<usize>>,
    num_classes: usize,
}

impl Graph {
    pub fn new(adjacency: SparseMatrix, features: DenseMatrix, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        let n = adjacency.rows();
        if adjacency.cols() != n {
            return Err(Error::Contract("adjacency must be square".into()));
        }
        if features.rows() != n || labels.len() != n {
            return Err(Error::Contract(format!(
                "{n} nodes but {} feature rows and {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if num_classes < 2 {
            return Err(Error::Contract("at least two classes are required".into()));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::Contract(format!("label {l} outside [0, {num_classes})")));
        }
        for i in 0..n {
            let (cols, vals) = adjacency.row(i);
            if cols.binary_search(&i).is_ok() {
                return Err(Error::Contract(format!("self-loop stored at node {i}")));
            }
            if vals.iter().any(|&v| v != 1.0) {
                return Err(Error::Contract(format!("non-binary adjacency in row {i}")));
            }
        }
        if !adjacency.is_symmetric(0.0) {
            return Err(Error::Contract("adjacency is not symmetric".into()));
        }
        Ok(Self {
            adjacency: Arc::new(adjacency),
            features: Arc::new(features),
            labels: Arc::new(labels),
            num_classes,
        })
    }

    /// Builds a graph from an undirected edge list. Direction, duplicates
    /// and self-loops in `edges` are discarded.
    pub fn from_edges(
        n: usize,
        edges: &[(usize, usize)],
        features: DenseMatrix,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self> {
        let adjacency = adjacency_from_edges(n, edges)?;
        Self::new(adjacency, features, labels, num_classes)
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.adjacency.rows()
    }

    /// Undirected edge count.
    #[inline]
    pub fn num_edges(&self) -> usize {
        self.adjacency.nnz() / 2
    }

    #[inline]
    pub fn num_features(&self) -> usize {
        self.features.cols()
    }

    #[inline]
    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn adjacency(&self) -> &Arc<SparseMatrix> {
        &self.adjacency
    }

    pub fn features(&self) -> &Arc<DenseMatrix> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.num_nodes())
            .map(|i| self.adjacency.row_range(i).len())
            .collect()
    }

    /// Each undirected edge once, `(src, dst)` with `src < dst`, sorted.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for i in 0..self.num_nodes() {
            for &j in self.adjacency.row(i).0 {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// `Ã = A + I`
    pub fn add_self_loops(&self) -> SparseMatrix {
        let n = self.num_nodes();
        let mut trip = Vec::with_capacity(self.adjacency.nnz() + n);
        for i in 0..n {
            trip.push((i, i, 1.0));
            let (cols, vals) = self.adjacency.row(i);
            trip.extend(cols.iter().zip(vals).map(|(&j, &v)| (i, j, v)));
        }
        SparseMatrix::from_triplets(n, n, &trip).expect("valid adjacency")
    }

    /// GCN propagation matrix `D̃^{-1/2} Ã D̃^{-1/2}`.
    pub fn gcn_propagation(&self) -> SparseMatrix {
        sym_normalize(&self.add_self_loops()).expect("adjacency is non-negative")
    }

    /// Row-normalised adjacency `D^{-1} A` (mean over neighbours, self
    /// excluded). Isolated nodes get an empty row.
    pub fn mean_aggregation(&self) -> SparseMatrix {
        let inv: Vec<f64> = self
            .degrees()
            .into_iter()
            .map(|d| if d == 0 { 0.0 } else { 1.0 / d as f64 })
            .collect();
        self.adjacency.scale_rows(&inv)
    }

    /// Normalised similarity `S = D^{-1/2} A D^{-1/2}` over the raw
    /// adjacency (no self-loops).
    pub fn similarity(&self) -> SimilarityMatrix {
        SimilarityMatrix::new(sym_normalize(&self.adjacency).expect("adjacency is non-negative"))
            .expect("symmetric by construction")
    }

    /// Induced subgraph on the largest connected component, plus the map
    /// from new node index to original index (ascending, so relative order
    /// is kept). Ties go to the component holding the smallest node id.
    pub fn largest_connected_component(&self) -> (Graph, Vec<usize>) {
        let comps = connected_components(&self.adjacency);
        let mut best: Option<&Vec<usize>> = None;
        for c in &comps {
            if best.is_none_or(|b| c.len() > b.len()) {
                best = Some(c);
            }
        }
        let keep = best.cloned().unwrap_or_default();
        if keep.len() == self.num_nodes() {
            return (self.clone(), (0..self.num_nodes()).collect());
        }
        (self.induced_subgraph(&keep), keep)
    }

    /// Subgraph induced by `nodes` (must be sorted ascending, distinct).
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Graph {
        let mut new_id = vec![usize::MAX; self.num_nodes()];
        for (k, &v) in nodes.iter().enumerate() {
            new_id[v] = k;
        }
        let mut trip = Vec::new();
        for (k, &v) in nodes.iter().enumerate() {
            for &j in self.adjacency.row(v).0 {
                if new_id[j] != usize::MAX {
                    trip.push((k, new_id[j], 1.0));
                }
            }
        }
        let adjacency = SparseMatrix::from_triplets(nodes.len(), nodes.len(), &trip).expect("in range");
        let features = self.features.select_rows(nodes);
        let labels = nodes.iter().map(|&v| self.labels[v]).collect();
        Graph {
            adjacency: Arc::new(adjacency),
            features: Arc::new(features),
            labels: Arc::new(labels),
            num_classes: self.num_classes,
        }
    }

    /// Relabels nodes: node `i` of `self` becomes node `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        let n = self.num_nodes();
        if perm.len() != n {
            return Err(Error::Contract("permutation length differs from node count".into()));
        }
        let mut inv = vec![usize::MAX; n];
        for (i, &p) in perm.iter().enumerate() {
            if p >= n || inv[p] != usize::MAX {
                return Err(Error::Contract("not a permutation".into()));
            }
            inv[p] = i;
        }
        let edges: Vec<(usize, usize)> = self.edge_list().into_iter().map(|(a, b)| (perm[a], perm[b])).collect();
        let features = self.features.select_rows(&inv);
        let labels = inv.iter().map(|&i| self.labels[i]).collect();
        Graph::from_edges(n, &edges, features, labels, self.num_classes)
    }
}

pub(crate) fn adjacency_from_edges(n: usize, edges: &[(usize, usize)]) -> Result<SparseMatrix> {
    let mut trip = Vec::with_capacity(edges.len() * 2);
    for &(a, b) in edges {
        if a >= n || b >= n {
            return Err(Error::Contract(format!("edge ({a}, {b}) outside {n} nodes")));
        }
        if a != b {
            trip.push((a, b, 1.0));
            trip.push((b, a, 1.0));
        }
    }
    let summed = SparseMatrix::from_triplets(n, n, &trip)?;
    // duplicates were summed; collapse back to binary weights
    summed.with_values(vec![1.0; summed.nnz()])
}

/// Connected components as ascending node lists, ordered by smallest member.
pub fn connected_components(adjacency: &SparseMatrix) -> Vec<Vec<usize>> {
    let n = adjacency.rows();
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut comp = Vec::new();
        while let Some(v) = queue.pop_front() {
            comp.push(v);
            for &u in adjacency.row(v).0 {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// `out_ij = m_ij / sqrt(r_i r_j)` with `r` the row sums; zero rows stay zero.
pub fn sym_normalize(m: &SparseMatrix) -> Result<SparseMatrix> {
    if m.rows() != m.cols() {
        return Err(Error::Contract("sym_normalize needs a square matrix".into()));
    }
    for i in 0..m.rows() {
        let (cols, vals) = m.row(i);
        if let Some(p) = vals.iter().position(|&v| v < 0.0) {
            return Err(Error::Domain {
                op: "sym_normalize",
                row: i,
                col: cols[p],
                value: vals[p],
            });
        }
    }
    let inv_sqrt: Vec<f64> = m
        .row_sums()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let mut values = Vec::with_capacity(m.nnz());
    for i in 0..m.rows() {
        let (cols, vals) = m.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            values.push(v * inv_sqrt[i] * inv_sqrt[j]);
        }
    }
    m.with_values(values)
}

/// Symmetric non-negative weights driving the non-local operators, with a
/// precomputed map from each stored slot `(i, j)` to its mirror `(j, i)`.
#[derive(Clone, Debug)]
pub struct SimilarityMatrix {
    weights: Arc<SparseMatrix>,
    mirror: Arc<Vec<usize>>,
    row_of_slot: Arc<Vec<usize>>,
}

impl SimilarityMatrix {
    pub fn new(weights: SparseMatrix) -> Result<Self> {
        if weights.rows() != weights.cols() {
            return Err(Error::Contract("similarity matrix must be square".into()));
        }
        if weights.values().iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::Contract(
                "similarity weights must be finite and non-negative".into(),
            ));
        }
        let mut mirror = Vec::with_capacity(weights.nnz());
        let mut row_of_slot = Vec::with_capacity(weights.nnz());
        for i in 0..weights.rows() {
            for &j in weights.row(i).0 {
                let m = weights
                    .slot(j, i)
                    .ok_or_else(|| Error::Contract(format!("similarity pattern not symmetric at ({i}, {j})")))?;
                mirror.push(m);
                row_of_slot.push(i);
            }
        }
        if !weights.is_symmetric(1e-12) {
            return Err(Error::Contract("similarity weights are not symmetric".into()));
        }
        Ok(Self {
            weights: Arc::new(weights),
            mirror: Arc::new(mirror),
            row_of_slot: Arc::new(row_of_slot),
        })
    }

    pub fn weights(&self) -> &SparseMatrix {
        &self.weights
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.weights.rows()
    }

    /// Number of directed edge slots.
    #[inline]
    pub fn num_slots(&self) -> usize {
        self.weights.nnz()
    }

    /// Slot of `(j, i)` for slot `(i, j)`.
    #[inline]
    pub fn mirror(&self) -> &[usize] {
        &self.mirror
    }

    /// Source node `i` of slot `(i, j)`.
    #[inline]
    pub fn row_of_slot(&self) -> &[usize] {
        &self.row_of_slot
    }
}

/// Oracle similarity: weight 1 for every ordered same-label pair `i != j`.
pub fn ideal_similarity(labels: &[usize], num_classes: usize) -> Result<SimilarityMatrix> {
    let n = labels.len();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (i, &l) in labels.iter().enumerate() {
        if l >= num_classes {
            return Err(Error::Contract(format!("label {l} outside [0, {num_classes})")));
        }
        members[l].push(i);
    }
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    row_ptr.push(0);
    for (i, &l) in labels.iter().enumerate() {
        col_idx.extend(members[l].iter().copied().filter(|&j| j != i));
        row_ptr.push(col_idx.len());
    }
    let values = vec![1.0; col_idx.len()];
    SimilarityMatrix::new(SparseMatrix::from_csr(n, n, row_ptr, col_idx, values)?)
}
