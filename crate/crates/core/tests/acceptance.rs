//! The acceptance gate. One test per headline criterion; each prints a single
//! `ACCEPTANCE <name>: PASS/SKIP — <measured values>` line (visible with
//! `cargo test --test acceptance -- --nocapture`).
//!
//! The citation-network criteria need the converted datasets on disk under
//! `$HDGCN_DATA_DIR` (default: `<repo>/data`) in the directory format
//! described in the README. When a dataset directory is absent the criterion
//! is reported as SKIP rather than silently passing; everything else runs
//! self-contained. The Pubmed run is extended-scale and additionally gated
//! behind `HDGCN_EXTENDED=1`.

mod common;

use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rayon::prelude::*;

use common::{
    assert_gradients_match_fd, dense_markov, grad_instance, mat_power, oracle_distance,
    small_points,
};
use hdgcn::data::{
    inject_feature_noise, load_dataset, make_synthetic_blobs, Dataset, FeatureKind, NoiseMode,
    NoiseSpec,
};
use hdgcn::diffusion::{
    default_eigenvector_count, diffuse_features, diffusion_distance, eigendecompose,
    edge_diffusion_distances, gaussian_kernel, row_normalize, Bandwidth, DiffusionBasis,
    KernelConfig,
};
use hdgcn::graph::NormalizedAdjacency;
use hdgcn::model::softmax_rows;
use hdgcn::training::{train, TrainConfig};
use hdgcn::FeatureMatrix;

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
const T_GRID: [usize; 11] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10];
const ALPHA_GRID: [f64; 6] = [1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5];

fn data_root() -> PathBuf {
    std::env::var_os("HDGCN_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
            manifest
                .ancestors()
                .nth(2)
                .unwrap_or(manifest)
                .join("data")
        })
}

fn dataset_dir(name: &str) -> Option<PathBuf> {
    let dir = data_root().join(name);
    dir.join("meta").exists().then_some(dir)
}

fn skip(name: &str, reason: &str) {
    println!("ACCEPTANCE {name}: SKIP — {reason}");
}

fn missing(name: &str, dataset: &str) {
    skip(
        name,
        &format!(
            "dataset {dataset:?} not found under {}; convert it into the text \
             format documented in the README and rerun",
            data_root().display()
        ),
    );
}

/// A dataset with its trained-over operators and full spectral basis.
struct Ctx {
    dataset: Dataset,
    adj: NormalizedAdjacency,
    raw: Arc<FeatureMatrix>,
    basis: DiffusionBasis,
}

fn load_ctx(dir: &Path) -> Ctx {
    let dataset = load_dataset(dir).expect("dataset directory must parse");
    let adj = NormalizedAdjacency::from_graph(&dataset.graph);
    let raw = Arc::new(dataset.features.clone());
    let k = default_eigenvector_count(dataset.num_nodes());
    let sim = gaussian_kernel(&dataset.features, &KernelConfig::default()).unwrap();
    let markov = row_normalize(sim).unwrap();
    let basis = eigendecompose(&markov, k).unwrap();
    Ctx {
        dataset,
        adj,
        raw,
        basis,
    }
}

fn cfg_with_alpha(alpha: f64) -> TrainConfig {
    TrainConfig {
        alpha,
        regularizer_enabled: alpha > 0.0,
        ..TrainConfig::default()
    }
}

/// Per-seed (best validation accuracy, test accuracy) for one configuration.
fn run_seeds(
    ctx: &Ctx,
    features: &Arc<FeatureMatrix>,
    distances: &[f64],
    cfg: &TrainConfig,
) -> Vec<(f64, f64)> {
    SEEDS
        .par_iter()
        .map(|&seed| {
            let r = train(
                features,
                &ctx.adj,
                &ctx.dataset.graph,
                distances,
                &ctx.dataset.labels,
                ctx.dataset.num_classes,
                &ctx.dataset.split,
                cfg,
                seed,
            )
            .unwrap();
            (r.best_val_accuracy, r.test_accuracy)
        })
        .collect()
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

/// Everything the Cora criteria share: baseline runs, the t sweep, and the
/// alpha grid at the selected t. Computed once per process.
struct CoraRuns {
    baseline: Vec<(f64, f64)>,
    per_t: Vec<(usize, Vec<(f64, f64)>)>,
    best_t: usize,
    per_alpha: Vec<(f64, Vec<(f64, f64)>)>,
    best_alpha: f64,
    /// Kernel + eigensolve + one 5-seed training at the selected t.
    single_run_secs: f64,
}

fn cora_runs() -> Option<&'static CoraRuns> {
    static RUNS: OnceLock<Option<CoraRuns>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let dir = dataset_dir("cora")?;
        let setup = Instant::now();
        let ctx = load_ctx(&dir);
        let setup_secs = setup.elapsed().as_secs_f64();

        let baseline = run_seeds(&ctx, &ctx.raw, &[], &cfg_with_alpha(0.0));

        let per_t: Vec<(usize, Vec<(f64, f64)>, f64)> = T_GRID
            .iter()
            .map(|&t| {
                let started = Instant::now();
                let feats = Arc::new(diffuse_features(&ctx.basis, t).coordinates);
                let cells = run_seeds(&ctx, &feats, &[], &cfg_with_alpha(0.0));
                (t, cells, started.elapsed().as_secs_f64())
            })
            .collect();
        let (best_t, best_run_secs) = per_t
            .iter()
            .max_by(|a, b| {
                mean(a.1.iter().map(|c| c.0))
                    .total_cmp(&mean(b.1.iter().map(|c| c.0)))
            })
            .map(|(t, _, secs)| (*t, *secs))
            .unwrap();
        let single_run_secs = setup_secs + best_run_secs;
        let per_t: Vec<(usize, Vec<(f64, f64)>)> =
            per_t.into_iter().map(|(t, cells, _)| (t, cells)).collect();

        let feats = Arc::new(diffuse_features(&ctx.basis, best_t).coordinates);
        let dists = edge_diffusion_distances(&ctx.basis, &ctx.dataset.graph, best_t).unwrap();
        let per_alpha: Vec<(f64, Vec<(f64, f64)>)> = ALPHA_GRID
            .iter()
            .map(|&alpha| (alpha, run_seeds(&ctx, &feats, &dists, &cfg_with_alpha(alpha))))
            .collect();
        let best_alpha = per_alpha
            .iter()
            .max_by(|a, b| {
                mean(a.1.iter().map(|c| c.0))
                    .total_cmp(&mean(b.1.iter().map(|c| c.0)))
            })
            .unwrap()
            .0;

        Some(CoraRuns {
            baseline,
            per_t,
            best_t,
            per_alpha,
            best_alpha,
            single_run_secs,
        })
    })
    .as_ref()
}

fn assert_within(name: &str, label: &str, got: f64, target: f64, tol: f64) {
    assert!(
        (got - target).abs() <= tol,
        "{name}: {label} accuracy {got:.4} outside {target} ± {tol}"
    );
}

#[test]
fn cora_accuracy_all_three_modes() {
    let name = "cora-accuracy";
    let Some(runs) = cora_runs() else {
        missing(name, "cora");
        return;
    };
    let baseline = mean(runs.baseline.iter().map(|c| c.1));
    let hdgcn = mean(
        runs.per_t
            .iter()
            .find(|(t, _)| *t == runs.best_t)
            .unwrap()
            .1
            .iter()
            .map(|c| c.1),
    );
    let reg = mean(
        runs.per_alpha
            .iter()
            .find(|(a, _)| *a == runs.best_alpha)
            .unwrap()
            .1
            .iter()
            .map(|c| c.1),
    );
    assert_within(name, "gcn-baseline", baseline, 0.818, 0.02);
    assert_within(name, "hdgcn", hdgcn, 0.836, 0.02);
    assert_within(name, "reg-hdgcn", reg, 0.838, 0.02);
    assert!(
        runs.single_run_secs < 300.0,
        "{name}: single run took {:.1}s (budget 300s)",
        runs.single_run_secs
    );
    println!(
        "ACCEPTANCE {name}: PASS — gcn-baseline {baseline:.4} (0.818±0.02), \
         hdgcn {hdgcn:.4} @ t={} (0.836±0.02), reg-hdgcn {reg:.4} @ alpha={} (0.838±0.02), \
         single run {:.1}s (budget 300s)",
        runs.best_t, runs.best_alpha, runs.single_run_secs
    );
}

#[test]
fn citeseer_accuracy_all_three_modes() {
    let name = "citeseer-accuracy";
    let Some(dir) = dataset_dir("citeseer") else {
        missing(name, "citeseer");
        return;
    };
    let ctx = load_ctx(&dir);
    let baseline_cells = run_seeds(&ctx, &ctx.raw, &[], &cfg_with_alpha(0.0));
    let baseline = mean(baseline_cells.iter().map(|c| c.1));

    let per_t: Vec<(usize, Vec<(f64, f64)>)> = T_GRID
        .iter()
        .map(|&t| {
            let feats = Arc::new(diffuse_features(&ctx.basis, t).coordinates);
            (t, run_seeds(&ctx, &feats, &[], &cfg_with_alpha(0.0)))
        })
        .collect();
    let (best_t, best_cells) = per_t
        .iter()
        .max_by(|a, b| {
            mean(a.1.iter().map(|c| c.0)).total_cmp(&mean(b.1.iter().map(|c| c.0)))
        })
        .map(|(t, cells)| (*t, cells.clone()))
        .unwrap();
    let hdgcn = mean(best_cells.iter().map(|c| c.1));

    let feats = Arc::new(diffuse_features(&ctx.basis, best_t).coordinates);
    let dists = edge_diffusion_distances(&ctx.basis, &ctx.dataset.graph, best_t).unwrap();
    let per_alpha: Vec<(f64, Vec<(f64, f64)>)> = ALPHA_GRID
        .iter()
        .map(|&alpha| (alpha, run_seeds(&ctx, &feats, &dists, &cfg_with_alpha(alpha))))
        .collect();
    let (best_alpha, reg_cells) = per_alpha
        .iter()
        .max_by(|a, b| {
            mean(a.1.iter().map(|c| c.0)).total_cmp(&mean(b.1.iter().map(|c| c.0)))
        })
        .map(|(a, cells)| (*a, cells.clone()))
        .unwrap();
    let reg = mean(reg_cells.iter().map(|c| c.1));

    assert_within(name, "gcn-baseline", baseline, 0.701, 0.02);
    assert_within(name, "hdgcn", hdgcn, 0.742, 0.025);
    assert_within(name, "reg-hdgcn", reg, 0.745, 0.025);
    println!(
        "ACCEPTANCE {name}: PASS — gcn-baseline {baseline:.4} (0.701±0.02), \
         hdgcn {hdgcn:.4} @ t={best_t} (0.742±0.025), reg-hdgcn {reg:.4} @ alpha={best_alpha} (0.745±0.025)"
    );
}

#[test]
fn pubmed_accuracy_extended() {
    let name = "pubmed-accuracy";
    if std::env::var("HDGCN_EXTENDED").as_deref() != Ok("1") {
        skip(
            name,
            "extended-scale run; set HDGCN_EXTENDED=1 (and provide the dataset) to enable",
        );
        return;
    }
    let Some(dir) = dataset_dir("pubmed") else {
        missing(name, "pubmed");
        return;
    };
    let ctx = load_ctx(&dir); // n > 10_000 triggers the kNN-sparsified kernel
    let baseline_cells = run_seeds(&ctx, &ctx.raw, &[], &cfg_with_alpha(0.0));
    let baseline = mean(baseline_cells.iter().map(|c| c.1));

    let per_t: Vec<(usize, Vec<(f64, f64)>)> = T_GRID
        .iter()
        .map(|&t| {
            let feats = Arc::new(diffuse_features(&ctx.basis, t).coordinates);
            (t, run_seeds(&ctx, &feats, &[], &cfg_with_alpha(0.0)))
        })
        .collect();
    let (best_t, best_cells) = per_t
        .iter()
        .max_by(|a, b| {
            mean(a.1.iter().map(|c| c.0)).total_cmp(&mean(b.1.iter().map(|c| c.0)))
        })
        .map(|(t, cells)| (*t, cells.clone()))
        .unwrap();
    let hdgcn = mean(best_cells.iter().map(|c| c.1));

    assert_within(name, "gcn-baseline", baseline, 0.799, 0.02);
    assert_within(name, "hdgcn", hdgcn, 0.800, 0.02);
    println!(
        "ACCEPTANCE {name}: PASS — gcn-baseline {baseline:.4} (0.799±0.02), \
         hdgcn {hdgcn:.4} @ t={best_t} (0.800±0.02)"
    );
}

#[test]
fn cora_accuracy_peaks_at_interior_diffusion_time() {
    let name = "interior-t-peak";
    let Some(runs) = cora_runs() else {
        missing(name, "cora");
        return;
    };
    // Per seed: argmax of test accuracy over t must be strictly interior.
    let mut interior = 0;
    let mut argmaxes = Vec::new();
    for s in 0..SEEDS.len() {
        let best = runs
            .per_t
            .iter()
            .max_by(|a, b| a.1[s].1.total_cmp(&b.1[s].1))
            .unwrap()
            .0;
        argmaxes.push(best);
        if best != T_GRID[0] && best != *T_GRID.last().unwrap() {
            interior += 1;
        }
    }
    assert!(
        interior >= 4,
        "{name}: argmax over t interior for only {interior}/5 seeds ({argmaxes:?})"
    );
    println!(
        "ACCEPTANCE {name}: PASS — per-seed argmax t {argmaxes:?}, {interior}/5 interior (need ≥4)"
    );
}

#[test]
fn cora_within_class_cosine_rises_with_diffusion_time() {
    let name = "within-class-cosine";
    let Some(dir) = dataset_dir("cora") else {
        missing(name, "cora");
        return;
    };
    let ctx = load_ctx(&dir);
    let mut means = Vec::new();
    for t in [0usize, 5, 10] {
        let coords = diffuse_features(&ctx.basis, t).coordinates;
        let n = coords.nrows();
        let norms: Vec<f64> = (0..n)
            .map(|i| coords.row(i).iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        let mut acc = 0.0;
        let mut count = 0usize;
        for i in 0..n {
            for j in (i + 1)..n {
                if ctx.dataset.labels[i] != ctx.dataset.labels[j] {
                    continue;
                }
                let denom = norms[i] * norms[j];
                if denom > 0.0 {
                    acc += coords.row(i).dot(&coords.row(j)) / denom;
                }
                count += 1;
            }
        }
        means.push(acc / count as f64);
    }
    assert!(
        means[0] < means[1] && means[1] < means[2],
        "{name}: within-class cosine not strictly increasing: {means:?}"
    );
    println!(
        "ACCEPTANCE {name}: PASS — mean within-class cosine t=0: {:.4}, t=5: {:.4}, t=10: {:.4}",
        means[0], means[1], means[2]
    );
}

#[test]
fn cora_noise_robustness_vs_baseline() {
    let name = "noise-robustness";
    let Some(dir) = dataset_dir("cora") else {
        missing(name, "cora");
        return;
    };
    let dataset = load_dataset(&dir).unwrap();
    let adj = NormalizedAdjacency::from_graph(&dataset.graph);
    let mode = match dataset.feature_kind {
        FeatureKind::Binary => NoiseMode::Flip,
        FeatureKind::Continuous => NoiseMode::Resample,
    };
    let t = 5usize;
    let ratios = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
    let mut wins = 0usize;
    let mut table = Vec::new();
    for &ratio in &ratios {
        // Limit concurrency to the seed dimension: each cell holds a dense
        // kernel for the corrupted features.
        let cells: Vec<(f64, f64)> = SEEDS
            .par_iter()
            .map(|&seed| {
                let spec = NoiseSpec { ratio, seed, mode };
                let noisy = inject_feature_noise(&dataset.features, &spec).unwrap();

                let k = default_eigenvector_count(dataset.num_nodes());
                let sim = gaussian_kernel(&noisy, &KernelConfig::default()).unwrap();
                let basis = eigendecompose(&row_normalize(sim).unwrap(), k).unwrap();
                let diffused = Arc::new(diffuse_features(&basis, t).coordinates);
                let raw = Arc::new(noisy);

                let cfg = cfg_with_alpha(0.0);
                let run = |features: &Arc<FeatureMatrix>| {
                    train(
                        features,
                        &adj,
                        &dataset.graph,
                        &[],
                        &dataset.labels,
                        dataset.num_classes,
                        &dataset.split,
                        &cfg,
                        seed,
                    )
                    .unwrap()
                    .test_accuracy
                };
                (run(&diffused), run(&raw))
            })
            .collect();
        let hdgcn = mean(cells.iter().map(|c| c.0));
        let baseline = mean(cells.iter().map(|c| c.1));
        if hdgcn >= baseline {
            wins += 1;
        }
        table.push((ratio, hdgcn, baseline));
    }
    assert!(
        wins * 2 > ratios.len(),
        "{name}: hdgcn beat the baseline at only {wins}/{} ratios ({table:?})",
        ratios.len()
    );
    println!("ACCEPTANCE {name}: PASS — hdgcn ≥ baseline at {wins}/6 ratios; (ratio, hdgcn, baseline) = {table:?}");
}

#[test]
fn property_suite_under_60s() {
    let name = "property-suite";
    let started = Instant::now();

    // Markov rows stochastic; spectrum within PSD bounds; λ0 = 1; residuals.
    for (n, seed) in [(5usize, 2u64), (13, 3), (29, 4), (40, 5)] {
        let x = small_points(n, 3, seed);
        let cfg = KernelConfig {
            bandwidth: Bandwidth::Fixed(1.0),
            ..KernelConfig::default()
        };
        let markov = row_normalize(gaussian_kernel(&x, &cfg).unwrap()).unwrap();
        let dense = markov.to_dense();
        for i in 0..n {
            assert!((dense.row(i).sum() - 1.0).abs() <= 1e-10);
        }
        let basis = eigendecompose(&markov, n - 1).unwrap();
        assert!((basis.eigenvalues[0] - 1.0).abs() <= 1e-8);
        for &ev in &basis.eigenvalues {
            assert!((-1e-8..=1.0 + 1e-8).contains(&ev), "eigenvalue {ev}");
        }
        // Residuals of each retained pair as right eigenvectors of P.
        for (c, &ev) in basis.eigenvalues.iter().enumerate() {
            let psi = basis.eigenvectors.column(c);
            let mut worst = 0.0f64;
            for i in 0..n {
                let row_dot: f64 = (0..n).map(|j| dense[[i, j]] * psi[j]).sum();
                worst = worst.max((row_dot - ev * psi[i]).abs());
            }
            assert!(worst <= 1e-6, "pair {c} residual {worst}");
        }
    }

    // Full-spectrum distances equal π-weighted distances of explicit powers.
    for (n, seed) in [(4usize, 1u64), (6, 2), (8, 3)] {
        let x = small_points(n, 3, seed);
        let cfg = KernelConfig {
            bandwidth: Bandwidth::Fixed(0.9),
            ..KernelConfig::default()
        };
        let basis = eigendecompose(
            &row_normalize(gaussian_kernel(&x, &cfg).unwrap()).unwrap(),
            n - 1,
        )
        .unwrap();
        let (p, degrees) = dense_markov(&x, 0.9);
        for t in 1..=3usize {
            let pt = mat_power(&p, t);
            for i in 0..n {
                for j in 0..n {
                    let got = diffusion_distance(&basis, t, i, j);
                    let want = oracle_distance(&pt, &degrees, i, j);
                    assert!((got - want).abs() <= 1e-8);
                }
            }
        }
    }

    // Analytic gradients vs central finite differences.
    for alpha in [0.0, 0.1, 1.0] {
        assert_gradients_match_fd(&grad_instance(6, 4, 5), alpha);
        assert_gradients_match_fd(&grad_instance(8, 3, 6), alpha);
    }

    // Ablation identity: alpha=0 + raw features = plain GCN, loss per epoch.
    {
        let d = make_synthetic_blobs(25, 3, 6, 3.0, 0.2, 0.02, 5).unwrap();
        let adj = NormalizedAdjacency::from_graph(&d.graph);
        let features = Arc::new(d.features.clone());
        let dists = vec![0.5; 2 * d.graph.num_edges()];
        let hybrid_cfg = TrainConfig {
            epochs: 30,
            alpha: 0.0,
            regularizer_enabled: true,
            ..TrainConfig::default()
        };
        let plain_cfg = TrainConfig {
            epochs: 30,
            alpha: 0.0,
            regularizer_enabled: false,
            ..TrainConfig::default()
        };
        let a = train(
            &features, &adj, &d.graph, &dists, &d.labels, d.num_classes, &d.split, &hybrid_cfg, 1,
        )
        .unwrap();
        let b = train(
            &features, &adj, &d.graph, &dists, &d.labels, d.num_classes, &d.split, &plain_cfg, 1,
        )
        .unwrap();
        for (x, y) in a.losses.iter().zip(&b.losses) {
            assert!((x - y).abs() <= 1e-12, "ablation identity: {x} vs {y}");
        }
    }

    // Softmax: rows sum to 1 and shift invariance.
    {
        let logits = small_points(9, 4, 77);
        let probs = softmax_rows(&logits);
        for i in 0..9 {
            assert!((probs.row(i).sum() - 1.0).abs() <= 1e-9);
        }
        let mut shifted = logits.clone();
        for mut row in shifted.rows_mut() {
            row += 123.0;
        }
        let probs2 = softmax_rows(&shifted);
        for (a, b) in probs.iter().zip(probs2.iter()) {
            assert!((a - b).abs() <= 1e-9);
        }
    }

    // Noise injector: exact count (flip on binary), deterministic.
    {
        let mut x = FeatureMatrix::zeros((12, 9));
        for i in 0..12 {
            for j in 0..9 {
                if (i + 2 * j) % 3 == 0 {
                    x[[i, j]] = 1.0;
                }
            }
        }
        let nnz = x.iter().filter(|v| **v != 0.0).count();
        for ratio in [0.0, 0.25, 0.5, 1.0, 1.5] {
            let spec = NoiseSpec {
                ratio,
                seed: 6,
                mode: NoiseMode::Flip,
            };
            let noisy = inject_feature_noise(&x, &spec).unwrap();
            let changed = noisy.iter().zip(x.iter()).filter(|(a, b)| a != b).count();
            assert_eq!(changed, (ratio * nnz as f64).round() as usize);
            assert_eq!(noisy, inject_feature_noise(&x, &spec).unwrap());
        }
    }

    // End-to-end: the diffusion pipeline classifies separable blobs.
    let blob_acc = {
        let d = make_synthetic_blobs(100, 2, 8, 4.0, 0.2, 0.01, 7).unwrap();
        let adj = NormalizedAdjacency::from_graph(&d.graph);
        let sim = gaussian_kernel(&d.features, &KernelConfig::default()).unwrap();
        let basis = eigendecompose(&row_normalize(sim).unwrap(), 16).unwrap();
        let feats = Arc::new(diffuse_features(&basis, 2).coordinates);
        let r = train(
            &feats,
            &adj,
            &d.graph,
            &[],
            &d.labels,
            d.num_classes,
            &d.split,
            &TrainConfig::default(),
            0,
        )
        .unwrap();
        assert!(
            r.test_accuracy >= 0.95,
            "blob hdgcn accuracy {}",
            r.test_accuracy
        );
        r.test_accuracy
    };

    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "property suite took {elapsed:.1}s (budget 60s)");
    println!(
        "ACCEPTANCE {name}: PASS — 7 properties in {elapsed:.1}s (budget 60s); blob hdgcn accuracy {blob_acc:.3}"
    );
}
