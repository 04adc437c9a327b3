//! Two-layer graph convolutional network: deterministic initialization,
//! forward pass over the normalized adjacency, inverted dropout, and
//! row-softmax prediction.
//!
//! The forward computation is `F = softmax(Ă · ReLU(Ă · X · W0) · W1)` with
//! dropout applied to the hidden layer at train time. Every intermediate is
//! cached so the training module can backpropagate without recomputation.

use std::sync::Arc;

use ndarray::Array2;
use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::NormalizedAdjacency;
use crate::FeatureMatrix;

/// Weight matrices of the two-layer model.
#[derive(Debug, Clone)]
pub struct ModelParams {
    /// input → hidden, k_in × h.
    pub w0: Array2<f64>,
    /// hidden → classes, h × c.
    pub w1: Array2<f64>,
}

/// Every intermediate of one forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Layer input the pass was computed from.
    pub input: Arc<FeatureMatrix>,
    /// n × h, before ReLU.
    pub pre_activation_1: Array2<f64>,
    /// n × h, after ReLU and dropout.
    pub hidden: Array2<f64>,
    /// n × h; entries are 0 or 1/(1−p) (all ones in eval mode).
    pub dropout_mask: Array2<f64>,
    /// n × c, before softmax.
    pub logits: Array2<f64>,
    /// n × c, row-softmax of the logits.
    pub probabilities: Array2<f64>,
}

/// Glorot-uniform initialization: entries drawn from
/// ±sqrt(6 / (fan_in + fan_out)), deterministic for a fixed seed.
pub fn init_params(k_in: usize, hidden: usize, classes: usize, seed: u64) -> Result<ModelParams> {
    if k_in == 0 || hidden == 0 || classes == 0 {
        return Err(Error::invalid(format!(
            "layer dimensions must be at least 1, got {k_in}x{hidden}x{classes}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut glorot = |rows: usize, cols: usize| {
        let bound = (6.0 / (rows + cols) as f64).sqrt();
        let dist = Uniform::new(-bound, bound);
        Array2::from_shape_fn((rows, cols), |_| dist.sample(&mut rng))
    };
    let w0 = glorot(k_in, hidden);
    let w1 = glorot(hidden, classes);
    Ok(ModelParams { w0, w1 })
}

/// One forward pass. With `training` set, the hidden layer is masked by
/// inverted dropout drawn from `rng_seed`; in eval mode the pass is a pure
/// function of its inputs.
pub fn forward(
    adj: &NormalizedAdjacency,
    input: &Arc<FeatureMatrix>,
    params: &ModelParams,
    dropout_rate: f64,
    training: bool,
    rng_seed: u64,
) -> Result<ForwardCache> {
    let n = adj.num_nodes();
    if input.nrows() != n {
        return Err(Error::dims(format!(
            "adjacency covers {n} nodes but input has {} rows",
            input.nrows()
        )));
    }
    if input.ncols() != params.w0.nrows() {
        return Err(Error::dims(format!(
            "input width {} does not match W0 rows {}",
            input.ncols(),
            params.w0.nrows()
        )));
    }
    if params.w0.ncols() != params.w1.nrows() {
        return Err(Error::dims(format!(
            "W0 columns {} do not match W1 rows {}",
            params.w0.ncols(),
            params.w1.nrows()
        )));
    }
    if !(0.0..1.0).contains(&dropout_rate) {
        return Err(Error::invalid(format!(
            "dropout rate must lie in [0, 1), got {dropout_rate}"
        )));
    }

    let h = params.w0.ncols();
    let pre_activation_1 = adj.matmul(&input.dot(&params.w0))?;
    let mut hidden = pre_activation_1.mapv(|v| v.max(0.0));

    let dropout_mask = if training && dropout_rate > 0.0 {
        let keep = 1.0 - dropout_rate;
        let scale = 1.0 / keep;
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        Array2::from_shape_fn((n, h), |_| {
            if rng.gen::<f64>() < keep {
                scale
            } else {
                0.0
            }
        })
    } else {
        Array2::ones((n, h))
    };
    hidden *= &dropout_mask;

    let logits = adj.matmul(&hidden.dot(&params.w1))?;
    let probabilities = softmax_rows(&logits);
    Ok(ForwardCache {
        input: Arc::clone(input),
        pre_activation_1,
        hidden,
        dropout_mask,
        logits,
        probabilities,
    })
}

/// Row-wise softmax with per-row max subtraction, so constant shifts of a
/// row cannot overflow.
pub fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

/// Per-node argmax of the predicted probabilities; ties go to the lowest
/// class index.
pub fn predict(cache: &ForwardCache) -> Vec<usize> {
    cache
        .probabilities
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            let mut best_val = row[0];
            for (c, &v) in row.iter().enumerate().skip(1) {
                if v > best_val {
                    best_val = v;
                    best = c;
                }
            }
            best
        })
        .collect()
}
