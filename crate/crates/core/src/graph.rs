//! Sparse graph storage and the renormalized adjacency operator.
//!
//! Graphs are undirected and stored in CSR form. The convolution operator is
//! the symmetric renormalization `D̃^{-1/2} (A + I) D̃^{-1/2}` where `D̃` is
//! the degree matrix of the self-loop-augmented adjacency; its spectrum lies
//! in [-1, 1], which keeps stacked propagation steps from exploding.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::FeatureMatrix;

/// Undirected graph in CSR form. Neighbor lists are sorted and deduplicated;
/// self-loops are stripped at construction.
#[derive(Debug, Clone)]
pub struct SparseGraph {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl SparseGraph {
    /// Build from an edge list. Edges are symmetrized (each pair stored in
    /// both directions), duplicates collapse, and self-loops are dropped.
    /// Endpoints must lie in `0..n`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            if u == v {
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for nbrs in adj.iter_mut() {
            nbrs.sort_unstable();
            nbrs.dedup();
            col_idx.extend_from_slice(nbrs);
            row_ptr.push(col_idx.len());
        }
        Ok(Self { n, row_ptr, col_idx })
    }

    /// Number of nodes.
    pub fn num_nodes(&self) -> usize {
        self.n
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.col_idx.len() / 2
    }

    /// Sorted neighbor list of `u`.
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[u]..self.row_ptr[u + 1]]
    }

    /// Degree of `u` (self-loops excluded by construction).
    pub fn degree(&self, u: usize) -> usize {
        self.row_ptr[u + 1] - self.row_ptr[u]
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::with_capacity(self.num_edges());
        for u in 0..self.n {
            for &v in self.neighbors(u) {
                if u < v {
                    edges.push((u, v));
                }
            }
        }
        edges
    }
}

/// Symmetric renormalized adjacency `D̃^{-1/2} (A + I) D̃^{-1/2}` in CSR form,
/// self-loops included in the stored entries.
#[derive(Debug, Clone)]
pub struct NormalizedAdjacency {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl NormalizedAdjacency {
    /// Build the operator from a graph. Isolated nodes get degree 1 from the
    /// added self-loop, so the scaling is always finite.
    pub fn from_graph(g: &SparseGraph) -> Self {
        let n = g.num_nodes();
        let dinv_sqrt: Vec<f64> = (0..n)
            .map(|u| 1.0 / ((g.degree(u) + 1) as f64).sqrt())
            .collect();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for u in 0..n {
            // Merge the self-loop into the sorted neighbor run.
            let nbrs = g.neighbors(u);
            let split = nbrs.partition_point(|&v| v < u);
            for &v in &nbrs[..split] {
                col_idx.push(v);
                values.push(dinv_sqrt[u] * dinv_sqrt[v]);
            }
            col_idx.push(u);
            values.push(dinv_sqrt[u] * dinv_sqrt[u]);
            for &v in &nbrs[split..] {
                col_idx.push(v);
                values.push(dinv_sqrt[u] * dinv_sqrt[v]);
            }
            row_ptr.push(col_idx.len());
        }
        Self { n, row_ptr, col_idx, values }
    }

    /// Number of nodes.
    pub fn num_nodes(&self) -> usize {
        self.n
    }

    /// Dense `n x n` form, mainly for small-scale checks.
    pub fn to_dense(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for u in 0..self.n {
            for k in self.row_ptr[u]..self.row_ptr[u + 1] {
                a[[u, self.col_idx[k]]] = self.values[k];
            }
        }
        a
    }

    /// Sparse-dense product `Ă · X`. Each output row accumulates its terms in
    /// ascending column order, so results are reproducible bit for bit.
    pub fn matmul(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        if x.nrows() != self.n {
            return Err(Error::dims(format!(
                "adjacency is {n}x{n} but input has {rows} rows",
                n = self.n,
                rows = x.nrows()
            )));
        }
        let d = x.ncols();
        let mut out = Array2::zeros((self.n, d));
        {
            let xs = x.as_slice().expect("feature matrix is standard layout");
            let os = out.as_slice_mut().expect("output is standard layout");
            for u in 0..self.n {
                let row = &mut os[u * d..(u + 1) * d];
                for k in self.row_ptr[u]..self.row_ptr[u + 1] {
                    let w = self.values[k];
                    let src = &xs[self.col_idx[k] * d..self.col_idx[k] * d + d];
                    for (o, s) in row.iter_mut().zip(src) {
                        *o += w * s;
                    }
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::dense_symmetric_eig;
    use ndarray::array;
    use proptest::prelude::*;

    fn path_graph(n: usize) -> SparseGraph {
        let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        SparseGraph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn dedup_and_self_loop_strip() {
        let g = SparseGraph::from_edges(3, &[(0, 1), (1, 0), (0, 1), (2, 2)]).unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(g.neighbors(2), &[] as &[usize]);
        assert_eq!(g.degree(2), 0);
    }

    #[test]
    fn out_of_range_edge_is_rejected() {
        assert!(SparseGraph::from_edges(2, &[(0, 5)]).is_err());
    }

    #[test]
    fn normalized_adjacency_on_a_path() {
        // Path 0-1-2: degrees-with-loop are 2, 3, 2.
        let g = path_graph(3);
        let a = NormalizedAdjacency::from_graph(&g).to_dense();
        let s6 = 1.0 / 6.0_f64.sqrt();
        let expected = array![
            [0.5, s6, 0.0],
            [s6, 1.0 / 3.0, s6],
            [0.0, s6, 0.5],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert!((a[[i, j]] - expected[[i, j]]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn isolated_node_maps_to_itself() {
        let g = SparseGraph::from_edges(2, &[]).unwrap();
        let a = NormalizedAdjacency::from_graph(&g);
        let x = array![[3.0, -1.0], [2.0, 5.0]];
        let y = a.matmul(&x).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn matmul_rejects_row_mismatch() {
        let g = path_graph(3);
        let a = NormalizedAdjacency::from_graph(&g);
        assert!(a.matmul(&Array2::zeros((2, 4))).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn spmm_matches_dense_product(
            n in 2usize..16,
            edges in proptest::collection::vec((0usize..16, 0usize..16), 0..40),
            seed in 0u64..1000,
        ) {
            let edges: Vec<(usize, usize)> =
                edges.into_iter().map(|(u, v)| (u % n, v % n)).collect();
            let g = SparseGraph::from_edges(n, &edges).unwrap();
            let a = NormalizedAdjacency::from_graph(&g);
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let x = Array2::from_shape_fn((n, 3), |_| rng.gen::<f64>() - 0.5);
            let sparse = a.matmul(&x).unwrap();
            let dense = a.to_dense().dot(&x);
            for i in 0..n {
                for j in 0..3 {
                    prop_assert!((sparse[[i, j]] - dense[[i, j]]).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn spectrum_stays_in_unit_interval(
            n in 2usize..12,
            edges in proptest::collection::vec((0usize..12, 0usize..12), 0..30),
        ) {
            let edges: Vec<(usize, usize)> =
                edges.into_iter().map(|(u, v)| (u % n, v % n)).collect();
            let g = SparseGraph::from_edges(n, &edges).unwrap();
            let a = NormalizedAdjacency::from_graph(&g).to_dense();
            let (vals, _) = dense_symmetric_eig(&a).unwrap();
            for v in vals {
                prop_assert!(v <= 1.0 + 1e-10 && v >= -1.0 - 1e-10);
            }
        }
    }
}
