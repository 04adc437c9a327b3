//! Helpers shared by integration tests: independently coded dense references
//! and a finite-difference gradient checker.

#![allow(dead_code)]

use std::sync::Arc;

use ndarray::Array2;

use hdgcn::graph::{NormalizedAdjacency, SparseGraph};
use hdgcn::model::{forward, init_params, ModelParams};
use hdgcn::training::{backward, cross_entropy, smoothness_regularizer, total_loss, LossConfig};
use hdgcn::FeatureMatrix;

/// Deterministic scattered points with no special symmetry.
pub fn small_points(n: usize, dim: usize, seed: u64) -> FeatureMatrix {
    let mut x = Array2::zeros((n, dim));
    let mut state = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1);
    for i in 0..n {
        for c in 0..dim {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            x[[i, c]] = ((state >> 11) as f64) / ((1u64 << 53) as f64) * 4.0 - 2.0;
        }
    }
    x
}

/// Dense Gaussian-kernel Markov matrix built with plain nested loops,
/// sharing no code with the library path. Returns (P, kernel degrees).
pub fn dense_markov(x: &FeatureMatrix, sigma: f64) -> (Array2<f64>, Vec<f64>) {
    let n = x.nrows();
    let mut s = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut sq = 0.0;
            for c in 0..x.ncols() {
                let d = x[[i, c]] - x[[j, c]];
                sq += d * d;
            }
            s[[i, j]] = (-sq / (2.0 * sigma * sigma)).exp();
        }
    }
    let degrees: Vec<f64> = (0..n).map(|i| s.row(i).sum()).collect();
    let mut p = s;
    for i in 0..n {
        for j in 0..n {
            p[[i, j]] /= degrees[i];
        }
    }
    (p, degrees)
}

pub fn mat_power(p: &Array2<f64>, t: usize) -> Array2<f64> {
    let n = p.nrows();
    let mut out = Array2::eye(n);
    for _ in 0..t {
        out = out.dot(p);
    }
    out
}

/// Squared diffusion distance straight from the definition: the
/// stationary-weighted squared distance between rows i and j of M^t.
pub fn oracle_distance(pt: &Array2<f64>, degrees: &[f64], i: usize, j: usize) -> f64 {
    let total: f64 = degrees.iter().sum();
    let mut acc = 0.0;
    for z in 0..pt.nrows() {
        let pi_z = degrees[z] / total;
        let d = pt[[i, z]] - pt[[j, z]];
        acc += d * d / pi_z;
    }
    acc
}

/// A small labeled graph instance for loss/gradient checks.
pub struct GradInstance {
    pub graph: SparseGraph,
    pub adj: NormalizedAdjacency,
    pub features: Arc<FeatureMatrix>,
    pub labels: Vec<usize>,
    pub labeled: Vec<usize>,
    pub weights: Vec<f64>,
}

pub fn grad_instance(n: usize, dim: usize, seed: u64) -> GradInstance {
    // Ring plus one chord: connected, irregular degrees.
    let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    edges.push((0, n / 2));
    let graph = SparseGraph::from_edges(n, &edges).unwrap();
    let adj = NormalizedAdjacency::from_graph(&graph);

    let mut state = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) | 1;
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 11) as f64) / ((1u64 << 53) as f64)
    };
    let mut features = Array2::zeros((n, dim));
    for v in features.iter_mut() {
        *v = next() * 2.0 - 1.0;
    }
    let labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
    let labeled: Vec<usize> = (0..n).step_by(2).collect();

    // Positive per-directed-entry weights, symmetric across (u,v)/(v,u).
    let mut weights = vec![0.0; 2 * graph.num_edges()];
    let mut pos = 0;
    for u in 0..n {
        for &v in graph.neighbors(u) {
            let (a, b) = (u.min(v), u.max(v));
            weights[pos] = 0.1 + ((a * 31 + b * 17) % 7) as f64 * 0.2;
            pos += 1;
        }
    }
    GradInstance {
        graph,
        adj,
        features: Arc::new(features),
        labels,
        labeled,
        weights,
    }
}

pub fn loss_at(inst: &GradInstance, params: &ModelParams, alpha: f64) -> f64 {
    let cache = forward(&inst.adj, &inst.features, params, 0.0, false, 0).unwrap();
    let ce = cross_entropy(&cache.probabilities, &inst.labels, &inst.labeled).unwrap();
    let reg = if alpha > 0.0 {
        smoothness_regularizer(&cache.probabilities, &inst.weights, &inst.graph).unwrap()
    } else {
        0.0
    };
    total_loss(ce, reg, alpha)
}

pub fn analytic_gradients(
    inst: &GradInstance,
    params: &ModelParams,
    alpha: f64,
) -> (Array2<f64>, Array2<f64>) {
    let cache = forward(&inst.adj, &inst.features, params, 0.0, false, 0).unwrap();
    let cfg = LossConfig {
        alpha,
        labeled_indices: inst.labeled.clone(),
        regularizer_enabled: alpha > 0.0,
    };
    let grads = backward(
        &cache,
        &inst.adj,
        params,
        &inst.labels,
        &cfg,
        &inst.weights,
        &inst.graph,
    )
    .unwrap();
    (grads.g_w0, grads.g_w1)
}

/// Panics if any parameter entry's analytic gradient disagrees with central
/// finite differences (step 1e-5) beyond relative error 1e-4.
pub fn assert_gradients_match_fd(inst: &GradInstance, alpha: f64) {
    const STEP: f64 = 1e-5;
    const TOL: f64 = 1e-4;
    let params = init_params(inst.features.ncols(), 3, 3, 42).unwrap();
    let (g_w0, g_w1) = analytic_gradients(inst, &params, alpha);

    let check = |which: &str, rows: usize, cols: usize, analytic: &Array2<f64>| {
        for r in 0..rows {
            for c in 0..cols {
                let mut plus = params.clone();
                let mut minus = params.clone();
                match which {
                    "w0" => {
                        plus.w0[[r, c]] += STEP;
                        minus.w0[[r, c]] -= STEP;
                    }
                    _ => {
                        plus.w1[[r, c]] += STEP;
                        minus.w1[[r, c]] -= STEP;
                    }
                }
                let fd = (loss_at(inst, &plus, alpha) - loss_at(inst, &minus, alpha)) / (2.0 * STEP);
                let a = analytic[[r, c]];
                let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-6);
                assert!(
                    rel < TOL,
                    "alpha={alpha} {which}[{r},{c}]: analytic {a} vs fd {fd} (rel {rel})"
                );
            }
        }
    };
    check("w0", params.w0.nrows(), params.w0.ncols(), &g_w0);
    check("w1", params.w1.nrows(), params.w1.ncols(), &g_w1);
}
