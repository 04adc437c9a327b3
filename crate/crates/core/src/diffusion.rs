//! Diffusion-maps engine: Gaussian kernel similarity, Markov normalization,
//! spectral decomposition, time-t diffusion coordinates, and diffusion
//! distances.
//!
//! The pipeline is `gaussian_kernel` → `row_normalize` → `eigendecompose` →
//! `diffuse_features` / `diffusion_distance`. Eigenvectors are scaled so that
//! the constant eigenvector is exactly the all-ones vector (unit norm in the
//! inner product weighted by the stationary distribution); with that scaling
//! the squared coordinate distance between two nodes equals the
//! stationary-weighted difference between their t-step transition rows.

use ndarray::{s, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::eigen::{dense_symmetric_eig, lanczos_top_k};
use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::FeatureMatrix;

/// Full eigensolve below this size; Krylov iteration above it.
const DENSE_EIG_LIMIT: usize = 2048;
/// Residual tolerance for the iterative eigensolver.
const LANCZOS_TOL: f64 = 1e-8;
/// Matrix-vector product budget per node for the iterative eigensolver.
const LANCZOS_BUDGET_PER_NODE: usize = 10;
/// Fixed start-vector seed so decompositions are reproducible.
const LANCZOS_SEED: u64 = 7;
/// Sample cap for the median-distance bandwidth heuristic.
const MEDIAN_SAMPLE_LIMIT: usize = 1000;
/// Slack allowed on the leading eigenvalue and the spectrum bounds.
const EIGENVALUE_TOL: f64 = 1e-8;
/// Relative residual allowed on every retained eigenpair.
const RESIDUAL_TOL: f64 = 1e-6;

/// Kernel bandwidth: an explicit σ or the median pairwise-distance heuristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// Median pairwise Euclidean distance over a bounded sample.
    Median,
    /// Explicit σ > 0.
    Fixed(f64),
}

/// Gaussian-kernel construction parameters.
#[derive(Debug, Clone, Copy)]
pub struct KernelConfig {
    pub bandwidth: Bandwidth,
    /// Node count above which each kernel row is truncated to its strongest
    /// neighbors instead of being stored dense.
    pub sparsify_threshold: usize,
    /// Neighbors kept per row when the kernel is truncated.
    pub knn: usize,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            bandwidth: Bandwidth::Median,
            sparsify_threshold: 10_000,
            knn: 64,
        }
    }
}

/// Default number of non-trivial eigenvectors to retain for n nodes.
pub fn default_eigenvector_count(n: usize) -> usize {
    n.saturating_sub(1).min(128)
}

/// Symmetric similarity matrix with unit diagonal, dense or row-truncated.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    storage: Storage,
    sigma: f64,
}

impl SimilarityMatrix {
    /// Bandwidth the kernel was evaluated with.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn num_nodes(&self) -> usize {
        self.storage.num_nodes()
    }

    /// Stored entry (absent entries of a truncated kernel read as 0).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.storage.get(i, j)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        self.storage.to_dense()
    }

    /// Stored entries per row, averaged; n for a dense kernel.
    pub fn mean_row_entries(&self) -> f64 {
        self.storage.nnz() as f64 / self.num_nodes() as f64
    }
}

/// Row-stochastic transition matrix together with the kernel row sums it was
/// normalized by.
#[derive(Debug, Clone)]
pub struct MarkovMatrix {
    kernel_degrees: Vec<f64>,
    transition: Storage,
    sigma: f64,
}

impl MarkovMatrix {
    pub fn num_nodes(&self) -> usize {
        self.transition.num_nodes()
    }

    /// Kernel row sums (all ≥ 1 for a Gaussian kernel with unit diagonal).
    pub fn kernel_degrees(&self) -> &[f64] {
        &self.kernel_degrees
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn to_dense(&self) -> Array2<f64> {
        self.transition.to_dense()
    }
}

/// Leading eigenpairs of the transition matrix.
///
/// Index 0 is the trivial pair (eigenvalue 1, constant eigenvector) when
/// `includes_trivial` is set. Eigenvectors are right eigenvectors of the
/// transition matrix, scaled so the trivial one is the all-ones vector.
#[derive(Debug, Clone)]
pub struct DiffusionBasis {
    /// Descending; length k+1 including the trivial pair.
    pub eigenvalues: Vec<f64>,
    /// n × (k+1); column c pairs with `eigenvalues[c]`.
    pub eigenvectors: Array2<f64>,
    /// Kernel row sums carried along for downstream checks.
    pub kernel_degrees: Vec<f64>,
    /// Whether index 0 is the constant eigenvector.
    pub includes_trivial: bool,
    /// Bandwidth of the kernel this basis came from.
    pub sigma: f64,
}

impl DiffusionBasis {
    pub fn num_nodes(&self) -> usize {
        self.eigenvectors.nrows()
    }

    /// Number of non-trivial eigenpairs retained.
    pub fn num_nontrivial(&self) -> usize {
        self.eigenvalues.len() - usize::from(self.includes_trivial)
    }
}

/// Diffusion coordinates at a fixed time t.
#[derive(Debug, Clone)]
pub struct DiffusedFeatures {
    /// n × k; column c is λ^t ψ for the c-th retained pair.
    pub coordinates: Array2<f64>,
    pub diffusion_time: usize,
}

/// Median pairwise Euclidean distance over a uniform sample of at most 1,000
/// points. The sample is drawn with a fixed internal seed, so repeated calls
/// on the same input agree.
pub fn median_bandwidth(x: &FeatureMatrix) -> Result<f64> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::invalid(format!(
            "bandwidth estimation needs at least 2 points, got {n}"
        )));
    }
    ensure_finite(x)?;
    let idx: Vec<usize> = if n <= MEDIAN_SAMPLE_LIMIT {
        (0..n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6d65_6469_616e);
        rand::seq::index::sample(&mut rng, n, MEDIAN_SAMPLE_LIMIT).into_vec()
    };
    let m = idx.len();
    let idx = idx.as_slice();
    let mut dists: Vec<f64> = (0..m - 1)
        .into_par_iter()
        .flat_map_iter(|a| {
            let xa = x.row(idx[a]);
            (a + 1..m).map(move |b| {
                let xb = x.row(idx[b]);
                let mut acc = 0.0;
                for (u, v) in xa.iter().zip(xb.iter()) {
                    let diff = u - v;
                    acc += diff * diff;
                }
                acc.sqrt()
            })
        })
        .collect();
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = dists.len() / 2;
    let median = if dists.len() % 2 == 1 {
        dists[mid]
    } else {
        0.5 * (dists[mid - 1] + dists[mid])
    };
    if median <= 0.0 {
        return Err(Error::Degenerate(
            "median pairwise distance is zero (sampled points coincide); \
             set the kernel bandwidth explicitly"
                .into(),
        ));
    }
    Ok(median)
}

/// Gaussian kernel similarity `S_ij = exp(−‖x_i − x_j‖² / 2σ²)`.
///
/// Dense up to `cfg.sparsify_threshold` nodes; above that each row keeps its
/// `cfg.knn` largest off-diagonal entries plus the diagonal and the result is
/// symmetrized by maximum. Dot products are accumulated through an inverted
/// feature index, so both storage modes compute identical entry values.
pub fn gaussian_kernel(x: &FeatureMatrix, cfg: &KernelConfig) -> Result<SimilarityMatrix> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::invalid(format!(
            "kernel construction needs at least 2 points, got {n}"
        )));
    }
    ensure_finite(x)?;
    let sigma = match cfg.bandwidth {
        Bandwidth::Fixed(v) if v.is_finite() && v > 0.0 => v,
        Bandwidth::Fixed(v) => {
            return Err(Error::invalid(format!(
                "kernel bandwidth must be a positive finite number, got {v}"
            )))
        }
        Bandwidth::Median => median_bandwidth(x)?,
    };
    let feats = CsrFeatures::from_dense(x);
    let inv = InvertedIndex::build(&feats);
    let inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);

    let storage = if n <= cfg.sparsify_threshold {
        let mut s = Array2::zeros((n, n));
        let buf = s.as_slice_mut().expect("freshly allocated matrix is contiguous");
        buf.par_chunks_mut(n).enumerate().for_each_init(
            || Scratch::new(n),
            |scr, (i, row)| {
                scr.next_row();
                accumulate_dots(&feats, &inv, i, scr);
                for (j, out) in row.iter_mut().enumerate() {
                    *out = if j == i {
                        1.0
                    } else {
                        kernel_entry(feats.sq[i], feats.sq[j], scr.dot(j), inv_two_sigma_sq)
                    };
                }
            },
        );
        Storage::Dense(s)
    } else {
        if cfg.knn == 0 {
            return Err(Error::invalid(
                "knn must be at least 1 when the kernel is sparsified",
            ));
        }
        let keep = cfg.knn.min(n - 1);
        // Candidates with no shared feature have dot 0, so their similarity
        // is ranked by squared norm alone; the globally smallest-norm nodes
        // cover every zero-overlap entry that could reach a row's top knn.
        let mut by_norm: Vec<u32> = (0..n as u32).collect();
        by_norm.sort_unstable_by(|&a, &b| {
            feats.sq[a as usize]
                .partial_cmp(&feats.sq[b as usize])
                .unwrap()
                .then(a.cmp(&b))
        });
        by_norm.truncate((keep + 2).min(n));

        let rows: Vec<Vec<(u32, f64)>> = (0..n)
            .into_par_iter()
            .map_init(
                || Scratch::new(n),
                |scr, i| {
                    scr.next_row();
                    accumulate_dots(&feats, &inv, i, scr);
                    let mut cand: Vec<(u32, f64)> =
                        Vec::with_capacity(scr.touched.len() + by_norm.len());
                    for t in 0..scr.touched.len() {
                        let j = scr.touched[t];
                        if j as usize != i {
                            let sim = kernel_entry(
                                feats.sq[i],
                                feats.sq[j as usize],
                                scr.dots[j as usize],
                                inv_two_sigma_sq,
                            );
                            cand.push((j, sim));
                        }
                    }
                    for &j in &by_norm {
                        if j as usize != i && !scr.is_touched(j as usize) {
                            let sim = kernel_entry(
                                feats.sq[i],
                                feats.sq[j as usize],
                                0.0,
                                inv_two_sigma_sq,
                            );
                            cand.push((j, sim));
                        }
                    }
                    if cand.len() > keep {
                        cand.select_nth_unstable_by(keep - 1, |a, b| {
                            b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0))
                        });
                        cand.truncate(keep);
                    }
                    cand.sort_unstable_by_key(|e| e.0);
                    cand
                },
            )
            .collect();

        // Symmetrize by maximum and insert the unit diagonal.
        let mut sym: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                sym[i].push((j, v));
                sym[j as usize].push((i as u32, v));
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0usize);
        for (i, mut entries) in sym.into_iter().enumerate() {
            entries.push((i as u32, 1.0));
            entries.sort_unstable_by(|a, b| {
                a.0.cmp(&b.0).then(b.1.partial_cmp(&a.1).unwrap())
            });
            entries.dedup_by(|a, b| a.0 == b.0);
            for (j, v) in entries {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Storage::Csr {
            row_ptr,
            col_idx,
            values,
        }
    };
    Ok(SimilarityMatrix { storage, sigma })
}

/// Normalize each similarity row to sum to 1, recording the row sums.
pub fn row_normalize(s: SimilarityMatrix) -> Result<MarkovMatrix> {
    let degrees = s.storage.row_sums();
    for (i, &d) in degrees.iter().enumerate() {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Degenerate(format!(
                "similarity row {i} has non-positive sum {d}; cannot normalize"
            )));
        }
    }
    let mut transition = s.storage;
    transition.scale_rows(&degrees.iter().map(|d| 1.0 / d).collect::<Vec<_>>());
    Ok(MarkovMatrix {
        kernel_degrees: degrees,
        transition,
        sigma: s.sigma,
    })
}

/// Top-(k+1) eigenpairs of the transition matrix, trivial pair included at
/// index 0.
///
/// The decomposition runs on the symmetric conjugate
/// `N = D^{-1/2} S D^{-1/2}` (D = kernel row sums), whose spectrum coincides
/// with the transition matrix's; eigenvectors are mapped back to right
/// eigenvectors and scaled so the trivial one is the all-ones vector.
pub fn eigendecompose(m: &MarkovMatrix, k: usize) -> Result<DiffusionBasis> {
    let n = m.num_nodes();
    if k < 1 || k + 1 > n {
        return Err(Error::invalid(format!(
            "eigenvector count must satisfy 1 <= k <= n-1, got k={k} for n={n}"
        )));
    }
    let want = k + 1;
    let dsqrt: Vec<f64> = m.kernel_degrees.iter().map(|d| d.sqrt()).collect();
    let dinv_sqrt: Vec<f64> = dsqrt.iter().map(|d| 1.0 / d).collect();
    let conj = m.transition.conjugated_symmetric(&dsqrt, &dinv_sqrt);

    let (values, phi) = if n <= DENSE_EIG_LIMIT {
        let (vals, vecs) = dense_symmetric_eig(&conj.to_dense())?;
        (vals[..want].to_vec(), vecs.slice(s![.., ..want]).to_owned())
    } else {
        let pairs = lanczos_top_k(
            |x, y| conj.matvec(x, y),
            n,
            want,
            LANCZOS_TOL,
            LANCZOS_BUDGET_PER_NODE * n,
            LANCZOS_SEED,
        )?;
        (pairs.values, pairs.vectors)
    };

    let total: f64 = m.kernel_degrees.iter().sum();
    let scale = total.sqrt();
    let mut psi = phi;
    for r in 0..n {
        let w = scale * dinv_sqrt[r];
        for c in 0..want {
            psi[[r, c]] *= w;
        }
    }

    validate_basis(m, &values, &psi)?;
    Ok(DiffusionBasis {
        eigenvalues: values,
        eigenvectors: psi,
        kernel_degrees: m.kernel_degrees.clone(),
        includes_trivial: true,
        sigma: m.sigma,
    })
}

fn validate_basis(m: &MarkovMatrix, values: &[f64], psi: &Array2<f64>) -> Result<()> {
    let n = psi.nrows();
    if (values[0] - 1.0).abs() > EIGENVALUE_TOL {
        return Err(Error::Degenerate(format!(
            "leading eigenvalue is {} but a row-stochastic matrix must have 1",
            values[0]
        )));
    }
    for (c, &v) in values.iter().enumerate() {
        if !(-EIGENVALUE_TOL..=1.0 + EIGENVALUE_TOL).contains(&v) {
            return Err(Error::Degenerate(format!(
                "eigenvalue {c} = {v} lies outside [0, 1]"
            )));
        }
        if c > 0 && v > values[c - 1] + 1e-12 {
            return Err(Error::Degenerate(format!(
                "eigenvalues are not sorted: value {c} = {v} after {}",
                values[c - 1]
            )));
        }
    }
    // Constant leading eigenvector, exactly 1 up to solver tolerance.
    let mean = psi.column(0).sum() / n as f64;
    let max_dev = psi
        .column(0)
        .iter()
        .map(|v| (v - mean).abs())
        .fold(0.0, f64::max);
    if max_dev > RESIDUAL_TOL * mean.abs().max(1.0) {
        return Err(Error::Degenerate(format!(
            "leading eigenvector deviates from constant by {max_dev}"
        )));
    }
    // Right-eigenvector residual against the transition matrix itself.
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    for (c, &lambda) in values.iter().enumerate() {
        for r in 0..n {
            x[r] = psi[[r, c]];
        }
        m.transition.matvec(&x, &mut y);
        let mut res = 0.0;
        let mut norm = 0.0;
        for r in 0..n {
            let diff = y[r] - lambda * x[r];
            res += diff * diff;
            norm += x[r] * x[r];
        }
        let rel = res.sqrt() / norm.sqrt();
        if rel > RESIDUAL_TOL {
            return Err(Error::Degenerate(format!(
                "eigenpair {c} has relative residual {rel:.3e} (tolerance {RESIDUAL_TOL:.0e})"
            )));
        }
    }
    Ok(())
}

/// Diffusion coordinates at time t, trivial pair dropped: column c is
/// `λ_{c+1}^t ψ_{c+1}`.
pub fn diffuse_features(basis: &DiffusionBasis, t: usize) -> DiffusedFeatures {
    diffuse_features_with(basis, t, false)
}

/// As [`diffuse_features`], optionally keeping the constant pair as column 0.
pub fn diffuse_features_with(
    basis: &DiffusionBasis,
    t: usize,
    keep_trivial: bool,
) -> DiffusedFeatures {
    let start = usize::from(basis.includes_trivial && !keep_trivial);
    let n = basis.num_nodes();
    let k = basis.eigenvalues.len() - start;
    let mut coordinates = Array2::zeros((n, k));
    for c in 0..k {
        let w = int_pow(basis.eigenvalues[c + start], t);
        for r in 0..n {
            coordinates[[r, c]] = w * basis.eigenvectors[[r, c + start]];
        }
    }
    DiffusedFeatures {
        coordinates,
        diffusion_time: t,
    }
}

/// Squared diffusion distance `Σ_k λ_k^{2t} (ψ_k(i) − ψ_k(j))²` over the
/// retained non-trivial spectrum. Equals the squared Euclidean distance
/// between rows i and j of [`diffuse_features`] at the same t.
pub fn diffusion_distance(basis: &DiffusionBasis, t: usize, i: usize, j: usize) -> f64 {
    let start = usize::from(basis.includes_trivial);
    let mut acc = 0.0;
    for c in start..basis.eigenvalues.len() {
        let w = int_pow(basis.eigenvalues[c], t);
        let diff = w * (basis.eigenvectors[[i, c]] - basis.eigenvectors[[j, c]]);
        acc += diff * diff;
    }
    acc
}

/// Diffusion distance evaluated at every stored adjacency entry, aligned with
/// the graph's CSR order (each undirected edge appears in both directions).
pub fn edge_diffusion_distances(
    basis: &DiffusionBasis,
    g: &SparseGraph,
    t: usize,
) -> Result<Vec<f64>> {
    if g.num_nodes() != basis.num_nodes() {
        return Err(Error::dims(format!(
            "graph has {} nodes but basis covers {}",
            g.num_nodes(),
            basis.num_nodes()
        )));
    }
    let mut out = Vec::with_capacity(2 * g.num_edges());
    for u in 0..g.num_nodes() {
        for &v in g.neighbors(u) {
            out.push(diffusion_distance(basis, t, u, v));
        }
    }
    Ok(out)
}

/// λ^t for integer t (λ^0 = 1 even at λ = 0).
fn int_pow(lambda: f64, t: usize) -> f64 {
    match i32::try_from(t) {
        Ok(p) => lambda.powi(p),
        Err(_) => lambda.powf(t as f64),
    }
}

fn ensure_finite(x: &FeatureMatrix) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("feature matrix contains non-finite values"));
    }
    Ok(())
}

#[inline]
fn kernel_entry(sq_i: f64, sq_j: f64, dot: f64, inv_two_sigma_sq: f64) -> f64 {
    let d2 = (sq_i + sq_j - 2.0 * dot).max(0.0);
    (-d2 * inv_two_sigma_sq).exp()
}

/// Row-compressed view of the feature matrix plus squared row norms.
struct CsrFeatures {
    d: usize,
    row_ptr: Vec<usize>,
    col: Vec<u32>,
    val: Vec<f64>,
    sq: Vec<f64>,
}

impl CsrFeatures {
    fn from_dense(x: &FeatureMatrix) -> Self {
        let (n, d) = (x.nrows(), x.ncols());
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        let mut sq = Vec::with_capacity(n);
        row_ptr.push(0);
        for i in 0..n {
            let mut acc = 0.0;
            for f in 0..d {
                let v = x[[i, f]];
                if v != 0.0 {
                    col.push(f as u32);
                    val.push(v);
                }
                acc += v * v;
            }
            sq.push(acc);
            row_ptr.push(col.len());
        }
        Self { d, row_ptr, col, val, sq }
    }
}

/// Feature-major transpose of [`CsrFeatures`]: for each feature, the nodes
/// where it is non-zero, in ascending node order.
struct InvertedIndex {
    feat_ptr: Vec<usize>,
    node: Vec<u32>,
    val: Vec<f64>,
}

impl InvertedIndex {
    fn build(f: &CsrFeatures) -> Self {
        let mut counts = vec![0usize; f.d + 1];
        for &c in &f.col {
            counts[c as usize + 1] += 1;
        }
        for i in 0..f.d {
            counts[i + 1] += counts[i];
        }
        let feat_ptr = counts.clone();
        let mut cursor = counts;
        let mut node = vec![0u32; f.col.len()];
        let mut val = vec![0.0; f.col.len()];
        for i in 0..f.row_ptr.len() - 1 {
            for k in f.row_ptr[i]..f.row_ptr[i + 1] {
                let c = f.col[k] as usize;
                node[cursor[c]] = i as u32;
                val[cursor[c]] = f.val[k];
                cursor[c] += 1;
            }
        }
        Self { feat_ptr, node, val }
    }
}

/// Per-thread sparse accumulator for one kernel row at a time.
struct Scratch {
    dots: Vec<f64>,
    mark: Vec<u32>,
    stamp: u32,
    touched: Vec<u32>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            dots: vec![0.0; n],
            mark: vec![0; n],
            stamp: 0,
            touched: Vec::new(),
        }
    }

    fn next_row(&mut self) {
        self.stamp += 1;
        self.touched.clear();
    }

    fn is_touched(&self, j: usize) -> bool {
        self.mark[j] == self.stamp
    }

    fn dot(&self, j: usize) -> f64 {
        if self.is_touched(j) {
            self.dots[j]
        } else {
            0.0
        }
    }
}

/// Accumulate row i's dot products against every overlapping row. Features
/// are visited in ascending order and nodes in ascending order within each
/// feature, so `dot(i, j)` and `dot(j, i)` sum identical terms in identical
/// order.
fn accumulate_dots(f: &CsrFeatures, inv: &InvertedIndex, i: usize, scr: &mut Scratch) {
    for k in f.row_ptr[i]..f.row_ptr[i + 1] {
        let feat = f.col[k] as usize;
        let vif = f.val[k];
        for e in inv.feat_ptr[feat]..inv.feat_ptr[feat + 1] {
            let j = inv.node[e] as usize;
            if scr.mark[j] != scr.stamp {
                scr.mark[j] = scr.stamp;
                scr.dots[j] = 0.0;
                scr.touched.push(j as u32);
            }
            scr.dots[j] += vif * inv.val[e];
        }
    }
}

/// Square matrix stored dense or as CSR, shared by the similarity and
/// transition stages.
#[derive(Debug, Clone)]
enum Storage {
    Dense(Array2<f64>),
    Csr {
        row_ptr: Vec<usize>,
        col_idx: Vec<u32>,
        values: Vec<f64>,
    },
}

impl Storage {
    fn num_nodes(&self) -> usize {
        match self {
            Storage::Dense(a) => a.nrows(),
            Storage::Csr { row_ptr, .. } => row_ptr.len() - 1,
        }
    }

    fn nnz(&self) -> usize {
        match self {
            Storage::Dense(a) => a.len(),
            Storage::Csr { values, .. } => values.len(),
        }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Storage::Dense(a) => a[[i, j]],
            Storage::Csr { row_ptr, col_idx, values } => {
                let row = &col_idx[row_ptr[i]..row_ptr[i + 1]];
                match row.binary_search(&(j as u32)) {
                    Ok(pos) => values[row_ptr[i] + pos],
                    Err(_) => 0.0,
                }
            }
        }
    }

    /// Row sums, accumulating entries in ascending column order in both
    /// storage modes.
    fn row_sums(&self) -> Vec<f64> {
        match self {
            Storage::Dense(a) => a
                .rows()
                .into_iter()
                .map(|row| {
                    let mut acc = 0.0;
                    for v in row {
                        acc += v;
                    }
                    acc
                })
                .collect(),
            Storage::Csr { row_ptr, values, .. } => (0..row_ptr.len() - 1)
                .map(|i| {
                    let mut acc = 0.0;
                    for v in &values[row_ptr[i]..row_ptr[i + 1]] {
                        acc += v;
                    }
                    acc
                })
                .collect(),
        }
    }

    /// Multiply row i by `per_row[i]` in place.
    fn scale_rows(&mut self, per_row: &[f64]) {
        match self {
            Storage::Dense(a) => {
                for (i, mut row) in a.rows_mut().into_iter().enumerate() {
                    for v in row.iter_mut() {
                        *v *= per_row[i];
                    }
                }
            }
            Storage::Csr { row_ptr, values, .. } => {
                for i in 0..row_ptr.len() - 1 {
                    for v in &mut values[row_ptr[i]..row_ptr[i + 1]] {
                        *v *= per_row[i];
                    }
                }
            }
        }
    }

    /// `D^{1/2} P D^{-1/2}` with exact symmetry enforced by averaging each
    /// entry with its transpose.
    fn conjugated_symmetric(&self, dsqrt: &[f64], dinv_sqrt: &[f64]) -> Storage {
        match self {
            Storage::Dense(p) => {
                let n = p.nrows();
                let mut m = Array2::zeros((n, n));
                for i in 0..n {
                    for j in 0..n {
                        m[[i, j]] = p[[i, j]] * dsqrt[i] * dinv_sqrt[j];
                    }
                }
                for i in 0..n {
                    for j in 0..i {
                        let v = 0.5 * (m[[i, j]] + m[[j, i]]);
                        m[[i, j]] = v;
                        m[[j, i]] = v;
                    }
                }
                Storage::Dense(m)
            }
            Storage::Csr { row_ptr, col_idx, values } => {
                let n = row_ptr.len() - 1;
                let scaled: Vec<f64> = (0..n)
                    .flat_map(|i| {
                        (row_ptr[i]..row_ptr[i + 1]).map(move |k| (i, k))
                    })
                    .map(|(i, k)| values[k] * dsqrt[i] * dinv_sqrt[col_idx[k] as usize])
                    .collect();
                let mut sym = scaled.clone();
                for i in 0..n {
                    for k in row_ptr[i]..row_ptr[i + 1] {
                        let j = col_idx[k] as usize;
                        let row_j = &col_idx[row_ptr[j]..row_ptr[j + 1]];
                        if let Ok(pos) = row_j.binary_search(&(i as u32)) {
                            sym[k] = 0.5 * (scaled[k] + scaled[row_ptr[j] + pos]);
                        }
                    }
                }
                Storage::Csr {
                    row_ptr: row_ptr.clone(),
                    col_idx: col_idx.clone(),
                    values: sym,
                }
            }
        }
    }

    /// y = M x with per-row accumulation in ascending column order.
    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        match self {
            Storage::Dense(a) => {
                for (i, row) in a.rows().into_iter().enumerate() {
                    let mut acc = 0.0;
                    for (v, xv) in row.iter().zip(x) {
                        acc += v * xv;
                    }
                    y[i] = acc;
                }
            }
            Storage::Csr { row_ptr, col_idx, values } => {
                for i in 0..row_ptr.len() - 1 {
                    let mut acc = 0.0;
                    for k in row_ptr[i]..row_ptr[i + 1] {
                        acc += values[k] * x[col_idx[k] as usize];
                    }
                    y[i] = acc;
                }
            }
        }
    }

    fn to_dense(&self) -> Array2<f64> {
        match self {
            Storage::Dense(a) => a.clone(),
            Storage::Csr { row_ptr, col_idx, values } => {
                let n = row_ptr.len() - 1;
                let mut a = Array2::zeros((n, n));
                for i in 0..n {
                    for k in row_ptr[i]..row_ptr[i + 1] {
                        a[[i, col_idx[k] as usize]] = values[k];
                    }
                }
                a
            }
        }
    }
}
