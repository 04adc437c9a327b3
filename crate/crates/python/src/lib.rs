//! Python bindings for the hybrid-diffusion GCN pipeline.
//!
//! Exposes the dataset model, the diffusion-map embedding, and the training
//! entry point. Values cross the boundary as plain Python lists and dicts so
//! the module has no Python-side dependencies.

use std::path::PathBuf;
use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hdgcn::data::{
    self, inject_feature_noise, load_dataset, make_synthetic_blobs, save_dataset, FeatureKind,
    NoiseMode, NoiseSpec,
};
use hdgcn::diffusion::{
    default_eigenvector_count, diffuse_features, diffusion_distance, edge_diffusion_distances,
    eigendecompose, gaussian_kernel, row_normalize, Bandwidth, DiffusionBasis, KernelConfig,
};
use hdgcn::graph::NormalizedAdjacency;
use hdgcn::training::{self, DistanceWeighting, TrainConfig};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A node-classification dataset: features, undirected graph, labels, split.
#[pyclass(module = "hdgcn_py")]
#[derive(Clone)]
struct Dataset {
    inner: data::Dataset,
}

#[pymethods]
impl Dataset {
    /// Load the plain-text directory format (meta/edges/features/labels/split).
    #[staticmethod]
    fn load(dir: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: load_dataset(&dir).map_err(err)?,
        })
    }

    /// Generate Gaussian class blobs wired as a stochastic block model.
    #[staticmethod]
    #[pyo3(signature = (n_per_class, num_classes, dim, blob_separation=3.0, intra_edge_prob=0.05, inter_edge_prob=0.002, seed=0))]
    #[allow(clippy::too_many_arguments)]
    fn synthetic_blobs(
        n_per_class: usize,
        num_classes: usize,
        dim: usize,
        blob_separation: f64,
        intra_edge_prob: f64,
        inter_edge_prob: f64,
        seed: u64,
    ) -> PyResult<Self> {
        Ok(Self {
            inner: make_synthetic_blobs(
                n_per_class,
                num_classes,
                dim,
                blob_separation,
                intra_edge_prob,
                inter_edge_prob,
                seed,
            )
            .map_err(err)?,
        })
    }

    /// Write the dataset back out in the directory format.
    fn save(&self, dir: PathBuf) -> PyResult<()> {
        save_dataset(&self.inner, &dir).map_err(err)
    }

    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = data::dataset_stats(&self.inner);
        let d = PyDict::new_bound(py);
        d.set_item("nodes", s.nodes)?;
        d.set_item("undirected_edges", s.undirected_edges)?;
        d.set_item("classes", s.classes)?;
        d.set_item("features", s.feature_dim)?;
        d.set_item("feature_kind", self.inner.feature_kind.as_str())?;
        Ok(d)
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.inner.num_nodes()
    }

    #[getter]
    fn num_classes(&self) -> usize {
        self.inner.num_classes
    }

    #[getter]
    fn labels(&self) -> Vec<usize> {
        self.inner.labels.clone()
    }

    fn split<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new_bound(py);
        d.set_item("train", self.inner.split.train.clone())?;
        d.set_item("val", self.inner.split.val.clone())?;
        d.set_item("test", self.inner.split.test.clone())?;
        Ok(d)
    }

    /// Copy with `round(ratio * nnz)` feature entries corrupted: bit flips
    /// for binary features, empirical resampling for continuous ones.
    fn with_feature_noise(&self, ratio: f64, seed: u64) -> PyResult<Self> {
        let spec = NoiseSpec {
            ratio,
            seed,
            mode: match self.inner.feature_kind {
                FeatureKind::Binary => NoiseMode::Flip,
                FeatureKind::Continuous => NoiseMode::Resample,
            },
        };
        let mut out = self.inner.clone();
        out.features = inject_feature_noise(&self.inner.features, &spec).map_err(err)?;
        Ok(Self { inner: out })
    }

    fn __repr__(&self) -> String {
        let s = data::dataset_stats(&self.inner);
        format!(
            "Dataset(nodes={}, edges={}, classes={}, features={})",
            s.nodes, s.undirected_edges, s.classes, s.feature_dim
        )
    }
}

/// Spectral basis of the feature-similarity Markov chain.
#[pyclass(module = "hdgcn_py")]
struct DiffusionMap {
    basis: DiffusionBasis,
}

#[pymethods]
impl DiffusionMap {
    /// Build the Gaussian-kernel Markov chain over `dataset`'s features and
    /// eigendecompose it. `sigma=None` uses the median pairwise distance;
    /// `k=None` keeps `min(n-1, 128)` non-trivial eigenvectors.
    #[staticmethod]
    #[pyo3(signature = (dataset, k=None, sigma=None))]
    fn fit(dataset: &Dataset, k: Option<usize>, sigma: Option<f64>) -> PyResult<Self> {
        let cfg = KernelConfig {
            bandwidth: sigma.map_or(Bandwidth::Median, Bandwidth::Fixed),
            ..KernelConfig::default()
        };
        let k = k.unwrap_or_else(|| default_eigenvector_count(dataset.inner.num_nodes()));
        let sim = gaussian_kernel(&dataset.inner.features, &cfg).map_err(err)?;
        let markov = row_normalize(sim).map_err(err)?;
        let basis = eigendecompose(&markov, k).map_err(err)?;
        Ok(Self { basis })
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.basis.sigma
    }

    /// Descending eigenvalues, leading constant pair included.
    fn eigenvalues(&self) -> Vec<f64> {
        self.basis.eigenvalues.clone()
    }

    /// Diffusion coordinates at time `t` (row per node, trivial pair dropped).
    fn embed(&self, t: usize) -> Vec<Vec<f64>> {
        let coords = diffuse_features(&self.basis, t).coordinates;
        coords.rows().into_iter().map(|r| r.to_vec()).collect()
    }

    /// Squared diffusion distance between nodes `i` and `j` at time `t`.
    fn distance(&self, t: usize, i: usize, j: usize) -> PyResult<f64> {
        let n = self.basis.num_nodes();
        if i >= n || j >= n {
            return Err(err(format!("node index out of range (n={n})")));
        }
        Ok(diffusion_distance(&self.basis, t, i, j))
    }

    fn __repr__(&self) -> String {
        format!(
            "DiffusionMap(n={}, k={}, sigma={})",
            self.basis.num_nodes(),
            self.basis.num_nontrivial(),
            self.basis.sigma
        )
    }
}

/// Train a two-layer GCN on `dataset` and return the run summary as a dict.
///
/// `mode` is one of `"hdgcn"` (diffused features), `"gcn-baseline"` (raw
/// features), or `"reg-hdgcn"` (diffused features plus the diffusion-distance
/// smoothness regularizer weighted by `alpha`).
#[pyfunction]
#[pyo3(signature = (dataset, mode="hdgcn", t=5, alpha=0.0, k=None, hidden=16, lr=0.01,
                    dropout=0.5, epochs=200, weight_decay=5e-4, sigma=None, seed=0))]
#[allow(clippy::too_many_arguments)]
fn train<'py>(
    py: Python<'py>,
    dataset: &Dataset,
    mode: &str,
    t: usize,
    alpha: f64,
    k: Option<usize>,
    hidden: usize,
    lr: f64,
    dropout: f64,
    epochs: usize,
    weight_decay: f64,
    sigma: Option<f64>,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let ds = &dataset.inner;
    let adj = NormalizedAdjacency::from_graph(&ds.graph);

    let (features, distances) = match mode {
        "gcn-baseline" => (Arc::new(ds.features.clone()), Vec::new()),
        "hdgcn" | "reg-hdgcn" => {
            let cfg = KernelConfig {
                bandwidth: sigma.map_or(Bandwidth::Median, Bandwidth::Fixed),
                ..KernelConfig::default()
            };
            let k = k.unwrap_or_else(|| default_eigenvector_count(ds.num_nodes()));
            let sim = gaussian_kernel(&ds.features, &cfg).map_err(err)?;
            let markov = row_normalize(sim).map_err(err)?;
            let basis = eigendecompose(&markov, k).map_err(err)?;
            let coords = Arc::new(diffuse_features(&basis, t).coordinates);
            let dists = if mode == "reg-hdgcn" {
                edge_diffusion_distances(&basis, &ds.graph, t).map_err(err)?
            } else {
                Vec::new()
            };
            (coords, dists)
        }
        other => {
            return Err(err(format!(
                "unknown mode {other:?}; expected hdgcn, gcn-baseline, or reg-hdgcn"
            )))
        }
    };

    let cfg = TrainConfig {
        hidden,
        dropout,
        learning_rate: lr,
        weight_decay,
        epochs,
        alpha: if mode == "reg-hdgcn" { alpha } else { 0.0 },
        regularizer_enabled: mode == "reg-hdgcn",
        distance_weighting: DistanceWeighting::Literal,
    };
    let report = training::train(
        &features,
        &adj,
        &ds.graph,
        &distances,
        &ds.labels,
        ds.num_classes,
        &ds.split,
        &cfg,
        seed,
    )
    .map_err(err)?;

    let d = PyDict::new_bound(py);
    d.set_item("mode", mode)?;
    d.set_item("seed", report.seed)?;
    d.set_item("losses", report.losses)?;
    d.set_item("train_accuracy", report.train_accuracy)?;
    d.set_item("val_accuracy", report.val_accuracy)?;
    d.set_item("test_accuracy", report.test_accuracy)?;
    d.set_item("best_val_epoch", report.best_val_epoch)?;
    d.set_item("best_val_accuracy", report.best_val_accuracy)?;
    Ok(d)
}

#[pymodule]
fn hdgcn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_class::<DiffusionMap>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    Ok(())
}
