//! Command-line harness: dataset statistics, embedding export, single runs,
//! hyperparameter sweeps, noise-robustness curves, and similarity matrices.
//!
//! Every command writes a structured text report. Reruns of an identical
//! invocation produce byte-identical files apart from the one line starting
//! with `# generated_at=`. Output files are written atomically
//! (write-then-rename).

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::data::{
    dataset_stats, inject_feature_noise, load_dataset, Dataset, FeatureKind, NoiseMode, NoiseSpec,
};
use crate::diffusion::{
    default_eigenvector_count, diffuse_features, edge_diffusion_distances, eigendecompose,
    gaussian_kernel, row_normalize, Bandwidth, DiffusionBasis, KernelConfig,
};
use crate::error::{Error, Result};
use crate::graph::NormalizedAdjacency;
use crate::training::{train, DistanceWeighting, TrainConfig, TrainReport};
use crate::FeatureMatrix;

/// Hybrid-diffusion graph convolutional networks.
#[derive(Debug, Parser)]
#[command(name = "hdgcn", version, about)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train one configuration (over one or more seeds) and write a report.
    Train(TrainArgs),
    /// Run the Cartesian product of t × alpha × seed and tabulate results.
    Sweep(SweepArgs),
    /// Corrupt features at several ratios and compare the diffusion model
    /// against the raw-feature baseline.
    Noise(NoiseArgs),
    /// Export the class-sorted pairwise cosine-similarity matrix of the
    /// diffused features.
    Similarity(SimilarityArgs),
    /// Print dataset statistics.
    Stats(StatsArgs),
    /// Export diffusion coordinates at time t.
    Diffuse(DiffuseArgs),
}

/// Model variant selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Diffused features, no regularizer.
    Hdgcn,
    /// Raw features, no regularizer.
    GcnBaseline,
    /// Diffused features plus the distance-weighted smoothness regularizer.
    RegHdgcn,
}

impl Mode {
    fn as_str(self) -> &'static str {
        match self {
            Mode::Hdgcn => "hdgcn",
            Mode::GcnBaseline => "gcn-baseline",
            Mode::RegHdgcn => "reg-hdgcn",
        }
    }
}

fn parse_sigma(s: &str) -> std::result::Result<Bandwidth, String> {
    if s == "median" {
        return Ok(Bandwidth::Median);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(Bandwidth::Fixed(v)),
        _ => Err(format!(
            "expected `median` or a positive real number, got {s:?}"
        )),
    }
}

fn sigma_str(b: Bandwidth) -> String {
    match b {
        Bandwidth::Median => "median".into(),
        Bandwidth::Fixed(v) => format!("{v}"),
    }
}

#[derive(Debug, Clone, Args)]
struct KernelArgs {
    /// Kernel bandwidth: a positive real number or `median`.
    #[arg(long, value_parser = parse_sigma, default_value = "median")]
    sigma: Bandwidth,
    /// Non-trivial eigenvectors to retain [default: min(n-1, 128)].
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Clone, Args)]
struct HyperArgs {
    /// Hidden layer width.
    #[arg(long, default_value_t = 16)]
    hidden: usize,
    /// Learning rate.
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    /// Dropout rate on the hidden layer.
    #[arg(long, default_value_t = 0.5)]
    dropout: f64,
    /// Training epochs.
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    /// Decoupled weight decay on the first layer.
    #[arg(long, default_value_t = 5e-4)]
    weight_decay: f64,
}

#[derive(Debug, Clone, Args)]
struct SeedArgs {
    /// Single seed (overrides --seeds).
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Comma-separated seed list.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
    seeds: Vec<u64>,
}

impl SeedArgs {
    fn effective(&self) -> Vec<u64> {
        match self.seed {
            Some(s) => vec![s],
            None => self.seeds.clone(),
        }
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Dataset directory.
    #[arg(long)]
    dataset: PathBuf,
    /// Model variant.
    #[arg(long, value_enum, default_value_t = Mode::Hdgcn)]
    mode: Mode,
    /// Diffusion time.
    #[arg(long, default_value_t = 5)]
    t: usize,
    /// Regularizer balance (used by reg-hdgcn).
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    hyper: HyperArgs,
    #[command(flatten)]
    seeds: SeedArgs,
    /// Report file path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Dataset directory.
    #[arg(long)]
    dataset: PathBuf,
    /// Model variant.
    #[arg(long, value_enum, default_value_t = Mode::Hdgcn)]
    mode: Mode,
    /// Comma-separated diffusion times.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5,6,7,8,9,10")]
    t: Vec<usize>,
    /// Comma-separated alpha grid [default: 0 unless reg-hdgcn, then
    /// 1,0.1,0.01,0.001,0.0001,0.00001].
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    hyper: HyperArgs,
    #[command(flatten)]
    seeds: SeedArgs,
    /// Results table path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct NoiseArgs {
    /// Dataset directory.
    #[arg(long)]
    dataset: PathBuf,
    /// Diffusion time for the diffusion model.
    #[arg(long, default_value_t = 5)]
    t: usize,
    /// Comma-separated noise ratios (relative to the nonzero feature count).
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6")]
    ratios: Vec<f64>,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    hyper: HyperArgs,
    #[command(flatten)]
    seeds: SeedArgs,
    /// Results table path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SimilarityArgs {
    /// Dataset directory.
    #[arg(long)]
    dataset: PathBuf,
    /// Diffusion time.
    #[arg(long, default_value_t = 5)]
    t: usize,
    #[command(flatten)]
    kernel: KernelArgs,
    /// Matrix file path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Dataset directory.
    #[arg(long)]
    dataset: PathBuf,
    /// Output path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DiffuseArgs {
    /// Dataset directory.
    #[arg(long)]
    dataset: PathBuf,
    /// Diffusion time.
    #[arg(long, default_value_t = 5)]
    t: usize,
    #[command(flatten)]
    kernel: KernelArgs,
    /// Coordinates file path.
    #[arg(long)]
    out: PathBuf,
}

/// Parse arguments, run, and return a process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(0) => 0,
        Ok(failures) => {
            eprintln!("{failures} cell(s) failed");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(command: Command) -> Result<usize> {
    match command {
        Command::Train(a) => cmd_train(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Noise(a) => cmd_noise(a),
        Command::Similarity(a) => cmd_similarity(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Diffuse(a) => cmd_diffuse(a),
    }
}

/// Dataset plus the derived operators shared by every run on it.
struct Prepared {
    dataset: Dataset,
    adj: NormalizedAdjacency,
    raw: Arc<FeatureMatrix>,
    /// Absent in raw-feature (baseline) pipelines.
    basis: Option<DiffusionBasis>,
    k_used: Option<usize>,
}

impl Prepared {
    fn features_at(&self, t: usize) -> Arc<FeatureMatrix> {
        match &self.basis {
            None => Arc::clone(&self.raw),
            Some(b) => Arc::new(diffuse_features(b, t).coordinates),
        }
    }

    fn distances_at(&self, t: usize) -> Result<Vec<f64>> {
        match &self.basis {
            None => Ok(Vec::new()),
            Some(b) => edge_diffusion_distances(b, &self.dataset.graph, t),
        }
    }

    fn sigma_resolved(&self) -> Option<f64> {
        self.basis.as_ref().map(|b| b.sigma)
    }
}

fn prepare(dataset_dir: &Path, needs_basis: bool, kernel: &KernelArgs) -> Result<Prepared> {
    let dataset = load_dataset(dataset_dir)?;
    prepare_from(dataset, needs_basis, kernel)
}

fn prepare_from(dataset: Dataset, needs_basis: bool, kernel: &KernelArgs) -> Result<Prepared> {
    let adj = NormalizedAdjacency::from_graph(&dataset.graph);
    let raw = Arc::new(dataset.features.clone());
    let (basis, k_used) = if needs_basis {
        let cfg = KernelConfig {
            bandwidth: kernel.sigma,
            ..KernelConfig::default()
        };
        let k = kernel
            .k
            .unwrap_or_else(|| default_eigenvector_count(dataset.num_nodes()));
        let sim = gaussian_kernel(&dataset.features, &cfg)?;
        let markov = row_normalize(sim)?;
        (Some(eigendecompose(&markov, k)?), Some(k))
    } else {
        (None, None)
    };
    Ok(Prepared {
        dataset,
        adj,
        raw,
        basis,
        k_used,
    })
}

fn train_config(mode: Mode, alpha: f64, hyper: &HyperArgs) -> TrainConfig {
    TrainConfig {
        hidden: hyper.hidden,
        dropout: hyper.dropout,
        learning_rate: hyper.lr,
        weight_decay: hyper.weight_decay,
        epochs: hyper.epochs,
        alpha: if mode == Mode::RegHdgcn { alpha } else { 0.0 },
        regularizer_enabled: mode == Mode::RegHdgcn,
        distance_weighting: DistanceWeighting::Literal,
    }
}

fn run_one(
    prepared: &Prepared,
    mode: Mode,
    t: usize,
    alpha: f64,
    hyper: &HyperArgs,
    seed: u64,
) -> Result<TrainReport> {
    let features = prepared.features_at(t);
    let distances = if mode == Mode::RegHdgcn {
        prepared.distances_at(t)?
    } else {
        Vec::new()
    };
    let cfg = train_config(mode, alpha, hyper);
    train(
        &features,
        &prepared.adj,
        &prepared.dataset.graph,
        &distances,
        &prepared.dataset.labels,
        prepared.dataset.num_classes,
        &prepared.dataset.split,
        &cfg,
        seed,
    )
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    (mean, var.sqrt())
}

fn cmd_train(args: TrainArgs) -> Result<usize> {
    let started = Instant::now();
    let needs_basis = args.mode != Mode::GcnBaseline;
    let prepared = prepare(&args.dataset, needs_basis, &args.kernel)?;
    let seeds = args.seeds.effective();

    let reports: Vec<TrainReport> = seeds
        .par_iter()
        .map(|&seed| run_one(&prepared, args.mode, args.t, args.alpha, &args.hyper, seed))
        .collect::<Result<_>>()?;

    let mut doc = String::new();
    doc.push_str("# hdgcn train report\n");
    doc.push_str(&generated_at_line(started.elapsed().as_secs_f64()));
    doc.push_str(&format!("dataset={}\n", args.dataset.display()));
    doc.push_str(&format!("mode={}\n", args.mode.as_str()));
    doc.push_str(&format!("t={}\n", args.t));
    doc.push_str(&format!("alpha={}\n", args.alpha));
    doc.push_str(&format!(
        "k={}\n",
        prepared.k_used.map_or("-".into(), |k| k.to_string())
    ));
    doc.push_str(&format!("sigma={}\n", sigma_str(args.kernel.sigma)));
    doc.push_str(&format!(
        "sigma_resolved={}\n",
        prepared
            .sigma_resolved()
            .map_or("-".into(), |s| format!("{s}"))
    ));
    doc.push_str(&format!("hidden={}\n", args.hyper.hidden));
    doc.push_str(&format!("lr={}\n", args.hyper.lr));
    doc.push_str(&format!("dropout={}\n", args.hyper.dropout));
    doc.push_str(&format!("epochs={}\n", args.hyper.epochs));
    doc.push_str(&format!("weight_decay={}\n", args.hyper.weight_decay));
    doc.push_str(&format!("seeds={}\n", join(&seeds)));
    doc.push_str(&stats_block(&prepared.dataset));

    let tests: Vec<f64> = reports.iter().map(|r| r.test_accuracy).collect();
    let vals: Vec<f64> = reports.iter().map(|r| r.best_val_accuracy).collect();
    let (tm, ts) = mean_std(&tests);
    let (vm, vs) = mean_std(&vals);
    doc.push_str(&format!("test_accuracy_mean={tm}\n"));
    doc.push_str(&format!("test_accuracy_std={ts}\n"));
    doc.push_str(&format!("best_val_accuracy_mean={vm}\n"));
    doc.push_str(&format!("best_val_accuracy_std={vs}\n"));

    doc.push_str("seed,best_val_epoch,best_val_accuracy,test_accuracy\n");
    for r in &reports {
        doc.push_str(&format!(
            "{},{},{},{}\n",
            r.seed, r.best_val_epoch, r.best_val_accuracy, r.test_accuracy
        ));
    }
    doc.push_str("epoch_curves\n");
    doc.push_str("seed,epoch,loss,train_accuracy,val_accuracy\n");
    for r in &reports {
        for e in 0..r.losses.len() {
            doc.push_str(&format!(
                "{},{},{},{},{}\n",
                r.seed, e, r.losses[e], r.train_accuracy[e], r.val_accuracy[e]
            ));
        }
    }
    write_atomic(&args.out, &doc)?;
    Ok(0)
}

fn cmd_sweep(args: SweepArgs) -> Result<usize> {
    if args.t.is_empty() {
        return Err(Error::invalid("sweep needs at least one t value"));
    }
    let started = Instant::now();
    let alphas: Vec<f64> = match (&args.alpha, args.mode) {
        (Some(list), _) if !list.is_empty() => list.clone(),
        (Some(_), _) => return Err(Error::invalid("sweep needs at least one alpha value")),
        (None, Mode::RegHdgcn) => vec![1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5],
        (None, _) => vec![0.0],
    };
    let seeds = args.seeds.effective();
    if seeds.is_empty() {
        return Err(Error::invalid("sweep needs at least one seed"));
    }

    let needs_basis = args.mode != Mode::GcnBaseline;
    let prepared = prepare(&args.dataset, needs_basis, &args.kernel)?;

    // Features and edge distances depend only on t; share them across cells.
    let per_t: Vec<(usize, Arc<FeatureMatrix>, Arc<Vec<f64>>)> = args
        .t
        .iter()
        .map(|&t| {
            let feats = prepared.features_at(t);
            let dists = if args.mode == Mode::RegHdgcn {
                prepared.distances_at(t)?
            } else {
                Vec::new()
            };
            Ok((t, feats, Arc::new(dists)))
        })
        .collect::<Result<_>>()?;

    struct Cell {
        t: usize,
        alpha: f64,
        seed: u64,
        outcome: Result<(f64, f64)>,
    }

    let mut cells: Vec<(usize, f64, u64)> = Vec::new();
    for (ti, _, _) in per_t.iter().enumerate().map(|(i, v)| (i, &v.1, &v.2)) {
        for &alpha in &alphas {
            for &seed in &seeds {
                cells.push((ti, alpha, seed));
            }
        }
    }

    let results: Vec<Cell> = cells
        .par_iter()
        .map(|&(ti, alpha, seed)| {
            let (t, feats, dists) = &per_t[ti];
            let cfg = train_config(args.mode, alpha, &args.hyper);
            let outcome = train(
                feats,
                &prepared.adj,
                &prepared.dataset.graph,
                dists,
                &prepared.dataset.labels,
                prepared.dataset.num_classes,
                &prepared.dataset.split,
                &cfg,
                seed,
            )
            .map(|r| (r.best_val_accuracy, r.test_accuracy));
            Cell {
                t: *t,
                alpha,
                seed,
                outcome,
            }
        })
        .collect();

    let mut doc = String::new();
    doc.push_str("# hdgcn sweep\n");
    doc.push_str(&generated_at_line(started.elapsed().as_secs_f64()));
    doc.push_str(&format!("dataset={}\n", args.dataset.display()));
    doc.push_str(&format!("mode={}\n", args.mode.as_str()));
    doc.push_str(&format!(
        "k={}\n",
        prepared.k_used.map_or("-".into(), |k| k.to_string())
    ));
    doc.push_str(&format!("sigma={}\n", sigma_str(args.kernel.sigma)));
    doc.push_str(&format!(
        "sigma_resolved={}\n",
        prepared
            .sigma_resolved()
            .map_or("-".into(), |s| format!("{s}"))
    ));
    doc.push_str(&format!("seeds={}\n", join(&seeds)));
    doc.push_str("t,alpha,seed,val_acc,test_acc,status\n");
    let mut failures = 0usize;
    for c in &results {
        match &c.outcome {
            Ok((va, ta)) => {
                doc.push_str(&format!("{},{},{},{va},{ta},ok\n", c.t, c.alpha, c.seed));
            }
            Err(e) => {
                failures += 1;
                let msg = e.to_string().replace([',', '\n'], ";");
                doc.push_str(&format!("{},{},{},,,{msg}\n", c.t, c.alpha, c.seed));
            }
        }
    }

    // Aggregate over seeds and select by mean validation accuracy.
    doc.push_str("aggregate\n");
    doc.push_str("t,alpha,mean_val_acc,std_val_acc,mean_test_acc,std_test_acc\n");
    let mut best: Option<(f64, f64, usize, f64)> = None; // (mean_val, mean_test, t, alpha)
    for (ti, _, _) in per_t.iter().enumerate().map(|(i, v)| (i, &v.1, &v.2)) {
        for &alpha in &alphas {
            let vals: Vec<f64> = results
                .iter()
                .filter(|c| c.t == per_t[ti].0 && c.alpha == alpha)
                .filter_map(|c| c.outcome.as_ref().ok().map(|(v, _)| *v))
                .collect();
            let tests: Vec<f64> = results
                .iter()
                .filter(|c| c.t == per_t[ti].0 && c.alpha == alpha)
                .filter_map(|c| c.outcome.as_ref().ok().map(|(_, t)| *t))
                .collect();
            if vals.is_empty() {
                continue;
            }
            let (vm, vs) = mean_std(&vals);
            let (tm, ts) = mean_std(&tests);
            doc.push_str(&format!("{},{alpha},{vm},{vs},{tm},{ts}\n", per_t[ti].0));
            let better = match best {
                None => true,
                Some((bv, _, _, _)) => vm > bv,
            };
            if better {
                best = Some((vm, tm, per_t[ti].0, alpha));
            }
        }
    }
    if let Some((vm, tm, t, alpha)) = best {
        doc.push_str(&format!(
            "best_by_val t={t} alpha={alpha} mean_val_acc={vm} mean_test_acc={tm}\n"
        ));
    }
    write_atomic(&args.out, &doc)?;
    Ok(failures)
}

fn cmd_noise(args: NoiseArgs) -> Result<usize> {
    let started = Instant::now();
    for &r in &args.ratios {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::invalid(format!(
                "noise ratios must be finite and non-negative, got {r}"
            )));
        }
    }
    let dataset = load_dataset(&args.dataset)?;
    let mode = match dataset.feature_kind {
        FeatureKind::Binary => NoiseMode::Flip,
        FeatureKind::Continuous => NoiseMode::Resample,
    };
    let seeds = args.seeds.effective();

    struct Cell {
        ratio: f64,
        seed: u64,
        hdgcn: Result<f64>,
        baseline: Result<f64>,
    }

    let cells: Vec<(f64, u64)> = args
        .ratios
        .iter()
        .flat_map(|&r| seeds.iter().map(move |&s| (r, s)))
        .collect();

    let results: Vec<Cell> = cells
        .par_iter()
        .map(|&(ratio, seed)| {
            let spec = NoiseSpec {
                ratio,
                seed,
                mode,
            };
            let run = |m: Mode| -> Result<f64> {
                let mut corrupted = dataset.clone();
                corrupted.features = inject_feature_noise(&dataset.features, &spec)?;
                let prepared = prepare_from(corrupted, m != Mode::GcnBaseline, &args.kernel)?;
                run_one(&prepared, m, args.t, 0.0, &args.hyper, seed).map(|r| r.test_accuracy)
            };
            Cell {
                ratio,
                seed,
                hdgcn: run(Mode::Hdgcn),
                baseline: run(Mode::GcnBaseline),
            }
        })
        .collect();

    let mut doc = String::new();
    doc.push_str("# hdgcn noise robustness\n");
    doc.push_str(&generated_at_line(started.elapsed().as_secs_f64()));
    doc.push_str(&format!("dataset={}\n", args.dataset.display()));
    doc.push_str(&format!("t={}\n", args.t));
    doc.push_str(&format!("noise_mode={}\n", match mode {
        NoiseMode::Flip => "flip",
        NoiseMode::Resample => "resample",
    }));
    doc.push_str(&format!("seeds={}\n", join(&seeds)));
    doc.push_str("ratio,seed,hdgcn_test_acc,baseline_test_acc,status\n");
    let mut failures = 0usize;
    for c in &results {
        match (&c.hdgcn, &c.baseline) {
            (Ok(h), Ok(b)) => {
                doc.push_str(&format!("{},{},{h},{b},ok\n", c.ratio, c.seed));
            }
            (h, b) => {
                failures += 1;
                let msg = [h.as_ref().err(), b.as_ref().err()]
                    .into_iter()
                    .flatten()
                    .map(|e| e.to_string().replace([',', '\n'], ";"))
                    .collect::<Vec<_>>()
                    .join("; ");
                let hs = h.as_ref().map(|v| v.to_string()).unwrap_or_default();
                let bs = b.as_ref().map(|v| v.to_string()).unwrap_or_default();
                doc.push_str(&format!("{},{},{hs},{bs},{msg}\n", c.ratio, c.seed));
            }
        }
    }
    doc.push_str("aggregate\n");
    doc.push_str("ratio,mean_hdgcn_test_acc,mean_baseline_test_acc\n");
    for &ratio in &args.ratios {
        let h: Vec<f64> = results
            .iter()
            .filter(|c| c.ratio == ratio)
            .filter_map(|c| c.hdgcn.as_ref().ok().copied())
            .collect();
        let b: Vec<f64> = results
            .iter()
            .filter(|c| c.ratio == ratio)
            .filter_map(|c| c.baseline.as_ref().ok().copied())
            .collect();
        if h.is_empty() && b.is_empty() {
            continue;
        }
        doc.push_str(&format!("{ratio},{},{}\n", mean_std(&h).0, mean_std(&b).0));
    }
    write_atomic(&args.out, &doc)?;
    Ok(failures)
}

fn cmd_similarity(args: SimilarityArgs) -> Result<usize> {
    let started = Instant::now();
    let prepared = prepare(&args.dataset, true, &args.kernel)?;
    let coords = prepared.features_at(args.t);
    let n = coords.nrows();

    // Class-sorted node order (stable within a class).
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (prepared.dataset.labels[i], i));
    let mut class_sizes = vec![0usize; prepared.dataset.num_classes];
    for &l in &prepared.dataset.labels {
        class_sizes[l] += 1;
    }

    let norms: Vec<f64> = (0..n)
        .map(|i| coords.row(i).iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();

    let mut doc = String::new();
    doc.push_str("# class-sorted cosine similarity of diffused features\n");
    doc.push_str(&generated_at_line(started.elapsed().as_secs_f64()));
    doc.push_str(&format!(
        "# n={n} t={} k={} sigma={}\n",
        args.t,
        prepared.k_used.unwrap_or(0),
        prepared
            .sigma_resolved()
            .map_or("-".into(), |s| format!("{s}"))
    ));
    doc.push_str(&format!("# class_sizes={}\n", join(&class_sizes)));
    doc.push_str(&format!("# node_order={}\n", join(&order)));
    for &i in &order {
        let mut line = String::new();
        for (pos, &j) in order.iter().enumerate() {
            if pos > 0 {
                line.push(',');
            }
            let denom = norms[i] * norms[j];
            let sim = if denom > 0.0 {
                let mut dot = 0.0;
                for c in 0..coords.ncols() {
                    dot += coords[[i, c]] * coords[[j, c]];
                }
                dot / denom
            } else {
                0.0
            };
            line.push_str(&format!("{sim}"));
        }
        line.push('\n');
        doc.push_str(&line);
    }
    write_atomic(&args.out, &doc)?;
    Ok(0)
}

fn cmd_stats(args: StatsArgs) -> Result<usize> {
    let dataset = load_dataset(&args.dataset)?;
    let mut doc = stats_block(&dataset);
    doc.push_str(&format!("train_size={}\n", dataset.split.train.len()));
    doc.push_str(&format!("val_size={}\n", dataset.split.val.len()));
    doc.push_str(&format!("test_size={}\n", dataset.split.test.len()));
    match &args.out {
        Some(path) => write_atomic(path, &doc)?,
        None => print!("{doc}"),
    }
    Ok(0)
}

fn cmd_diffuse(args: DiffuseArgs) -> Result<usize> {
    let prepared = prepare(&args.dataset, true, &args.kernel)?;
    let coords = prepared.features_at(args.t);
    let (n, k) = (coords.nrows(), coords.ncols());
    let sigma = prepared.sigma_resolved().expect("basis was just built");
    let mut doc = format!("# n={n} k={k} t={} sigma={sigma}\n", args.t);
    for i in 0..n {
        let mut line = String::new();
        for c in 0..k {
            if c > 0 {
                line.push(',');
            }
            line.push_str(&format!("{}", coords[[i, c]]));
        }
        line.push('\n');
        doc.push_str(&line);
    }
    write_atomic(&args.out, &doc)?;
    Ok(0)
}

fn stats_block(d: &Dataset) -> String {
    let s = dataset_stats(d);
    format!(
        "nodes={}\nedges={}\nclasses={}\nfeatures={}\nfeature_kind={}\n",
        s.nodes, s.undirected_edges, s.classes, s.feature_dim, d.feature_kind
    )
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Every report carries exactly one volatile line so reruns are otherwise
/// byte-identical.
fn generated_at_line(wall_clock_secs: f64) -> String {
    format!(
        "# generated_at={} wall_clock_secs={wall_clock_secs:.3}\n",
        iso_timestamp_utc()
    )
}

fn iso_timestamp_utc() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .unwrap_or_default()
        .as_secs();
    let (y, m, d) = civil_from_days((secs / 86_400) as i64);
    let rem = secs % 86_400;
    format!(
        "{y:04}-{m:02}-{d:02}T{:02}:{:02}:{:02}Z",
        rem / 3600,
        rem % 3600 / 60,
        rem % 60
    )
}

/// Gregorian date from days since the Unix epoch.
fn civil_from_days(z: i64) -> (i64, u32, u32) {
    let z = z + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = (z - era * 146_097) as u64;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe as i64 + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    (if m <= 2 { y + 1 } else { y }, m, d)
}

/// Write via a temporary file in the same directory, then rename into place.
fn write_atomic(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut tmp_name = path.as_os_str().to_owned();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp_name);
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
