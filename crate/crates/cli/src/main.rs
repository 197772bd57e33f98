//! Command-line interface for cluster-specific sparse K-means.
//!
//! Subcommands: `simulate` (planted-block benchmark data), `cluster` (run an
//! algorithm and write assignment/weights/report), `eval` (score a prediction
//! against truth), `sweep` (scan the sparsity budget).
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use csskm_core::{
    adjusted_rand_index, confusion_matrix, csskm, kmeans, match_accuracy, simulate,
    sparse_kmeans, Assignment, ClusteringResult, Config, DataMatrix, InitMethod, SimSpec,
};
use csskm_cli::io;
use io::EvalSummary;

#[derive(Parser)]
#[command(name = "csskm", version, about = "Cluster-specific sparse K-means")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic planted-block dataset
    Simulate(SimulateArgs),
    /// Cluster a CSV matrix and write assignment, weights and a JSON report
    Cluster(ClusterArgs),
    /// Score a predicted labels file against ground truth
    Eval(EvalArgs),
    /// Run the clustering across a grid of sparsity budgets
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON file with the simulation spec; defaults to the canonical
    /// 60x100 three-cluster benchmark
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Override the spec's seed
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_matrix: PathBuf,
    #[arg(long)]
    out_labels: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Algo {
    Csskm,
    Kmeans,
    SparseKmeans,
}

impl Algo {
    fn name(self) -> &'static str {
        match self {
            Algo::Csskm => "csskm",
            Algo::Kmeans => "kmeans",
            Algo::SparseKmeans => "sparse-kmeans",
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum InitArg {
    RandomPoints,
    KmeansPp,
}

#[derive(Args)]
struct InputArgs {
    /// Input matrix CSV (rows = samples, columns = features)
    #[arg(long)]
    input: PathBuf,
    /// Input is features-by-samples; transpose after reading
    #[arg(long)]
    transpose: bool,
    /// The file has no header line of feature names
    #[arg(long)]
    no_header: bool,
    /// The file has no leading column of sample ids
    #[arg(long)]
    no_row_ids: bool,
}

impl InputArgs {
    fn read(&self) -> Result<DataMatrix> {
        let x = io::read_matrix_csv(&self.input, !self.no_header, !self.no_row_ids)?;
        if self.transpose {
            Ok(x.transposed()?)
        } else {
            Ok(x)
        }
    }
}

#[derive(Args)]
struct EngineArgs {
    /// Number of clusters
    #[arg(long)]
    clusters: usize,
    /// Per-pair L1 budget t in [1, sqrt(p)] (required by csskm and
    /// sparse-kmeans)
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = InitArg::KmeansPp)]
    init: InitArg,
    #[arg(long, default_value_t = 50)]
    max_outer: usize,
    #[arg(long, default_value_t = 100)]
    max_inner: usize,
    /// Relative objective-change convergence threshold
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Re-draw random centers for every E-step instead of warm-starting
    #[arg(long)]
    fresh_estep: bool,
    /// Worker threads (results are identical for any value)
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

impl EngineArgs {
    fn config(&self, algo: Algo) -> Result<Config> {
        let budget = match (algo, self.t) {
            (Algo::Kmeans, t) => t.unwrap_or(1.0),
            (_, Some(t)) => t,
            (_, None) => bail!(UsageError(format!(
                "--t is required for --algo {}",
                algo.name()
            ))),
        };
        let mut cfg = Config::new(self.clusters, budget);
        cfg.restarts = self.restarts;
        cfg.seed = self.seed;
        cfg.init_method = match self.init {
            InitArg::RandomPoints => InitMethod::RandomPoints,
            InitArg::KmeansPp => InitMethod::KmeansPp,
        };
        cfg.max_outer_iters = self.max_outer;
        cfg.max_inner_iters = self.max_inner;
        cfg.rel_tol = self.tol;
        cfg.warm_start = !self.fresh_estep;
        Ok(cfg)
    }
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, value_enum, default_value_t = Algo::Csskm)]
    algo: Algo,
    /// Output directory for assignment.csv, weights.csv, report.json
    #[arg(long)]
    out_dir: PathBuf,
    /// Ground-truth labels file for accuracy reporting
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Write all weight rows including zeros
    #[arg(long)]
    dense: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Predicted labels file
    #[arg(long)]
    pred: PathBuf,
    /// Ground-truth labels file
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    engine: EngineArgs,
    /// Comma-separated budget grid, e.g. "1.5,2,3,5,8"
    #[arg(long)]
    t_grid: String,
    /// Ground-truth labels file; adds an accuracy column
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Output report CSV
    #[arg(long)]
    out: PathBuf,
}

/// Errors that should exit with the usage code rather than the data code.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help/version requests are successes
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprint!("{err}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => run_simulate(args),
        Command::Cluster(args) => run_cluster(args),
        Command::Eval(args) => run_eval(args),
        Command::Sweep(args) => run_sweep(args),
    }
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let mut spec: SimSpec = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read spec {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("invalid simulation spec {}", path.display()))?
        }
        None => SimSpec::default(),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let (matrix, truth) = simulate(&spec)?;
    let matrix = matrix
        .with_sample_ids((0..spec.n_samples()).map(|i| format!("s{i}")).collect())?
        .with_feature_names((0..spec.n_features).map(|k| format!("f{k}")).collect())?;
    io::write_matrix_csv(&matrix, &args.out_matrix)?;
    io::write_labels(truth.labels(), &args.out_labels)?;
    eprintln!(
        "simulated {} samples x {} features -> {}, labels -> {}",
        matrix.n_samples(),
        matrix.n_features(),
        args.out_matrix.display(),
        args.out_labels.display()
    );
    Ok(())
}

enum AlgoRun {
    Plain(ClusteringResult),
    Sparse(ClusteringResult, Vec<f64>),
}

impl AlgoRun {
    fn result(&self) -> &ClusteringResult {
        match self {
            AlgoRun::Plain(r) => r,
            AlgoRun::Sparse(r, _) => r,
        }
    }
}

fn run_algo(algo: Algo, x: &DataMatrix, cfg: &Config) -> Result<AlgoRun> {
    Ok(match algo {
        Algo::Csskm => AlgoRun::Plain(csskm(x, cfg)?),
        Algo::Kmeans => AlgoRun::Plain(kmeans(x, cfg)?),
        Algo::SparseKmeans => {
            let out = sparse_kmeans(x, cfg)?;
            AlgoRun::Sparse(out.clustering, out.global_weights)
        }
    })
}

fn with_thread_pool<T>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T>
where
    T: Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .context("cannot build thread pool")?;
    pool.install(f)
}

fn evaluate(pred: &Assignment, truth: &Assignment) -> Result<EvalSummary> {
    let (accuracy, mapping) = match_accuracy(pred, truth)?;
    let ari = adjusted_rand_index(pred, truth)?;
    let confusion = confusion_matrix(pred, truth, &mapping)?;
    Ok(EvalSummary {
        accuracy,
        adjusted_rand_index: ari,
        mapping,
        confusion,
    })
}

fn run_cluster(args: ClusterArgs) -> Result<()> {
    let started = Instant::now();
    let x = args.input.read()?;
    let cfg = args.engine.config(args.algo)?;
    let truth = args
        .labels
        .as_deref()
        .map(read_truth)
        .transpose()?;

    let run = with_thread_pool(args.engine.threads, || run_algo(args.algo, &x, &cfg))?;
    let result = run.result();

    let evaluation = match &truth {
        Some(truth) => Some(evaluate(&result.assignment, truth)?),
        None => None,
    };

    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    write_assignment_csv(&x, result, &args.out_dir.join("assignment.csv"))?;
    io::write_weights_csv(
        &result.weights,
        x.feature_names(),
        &args.out_dir.join("weights.csv"),
        args.dense,
    )?;
    let global = match &run {
        AlgoRun::Sparse(_, w) => Some(w.clone()),
        AlgoRun::Plain(_) => None,
    };
    let report = io::build_report(
        args.algo.name(),
        &args.input.input.display().to_string(),
        &x,
        &cfg,
        result,
        global,
        evaluation,
    );
    let json = serde_json::to_string_pretty(&report)?;
    std::fs::write(args.out_dir.join("report.json"), json + "\n")?;
    eprintln!(
        "{}: F = {}, {} outer iterations, converged = {}, elapsed = {:.1?}",
        args.algo.name(),
        result.objective(),
        result.iterations,
        result.converged,
        started.elapsed()
    );
    Ok(())
}

fn read_truth(path: &Path) -> Result<Assignment> {
    io::labels_to_assignment(io::read_labels(path)?)
}

fn write_assignment_csv(x: &DataMatrix, result: &ClusteringResult, path: &Path) -> Result<()> {
    let mut out = String::from("sample_id,cluster\n");
    for (i, &c) in result.assignment.labels().iter().enumerate() {
        match x.sample_ids() {
            Some(ids) => {
                let _ = writeln!(out, "{},{c}", ids[i]);
            }
            None => {
                let _ = writeln!(out, "{i},{c}");
            }
        }
    }
    std::fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn run_eval(args: EvalArgs) -> Result<()> {
    let pred_labels = io::read_labels(&args.pred)?;
    let truth_labels = io::read_labels(&args.truth)?;
    if pred_labels.len() != truth_labels.len() {
        bail!(
            "prediction has {} labels, truth has {}",
            pred_labels.len(),
            truth_labels.len()
        );
    }
    let pred = io::labels_to_assignment(pred_labels)?;
    let truth = io::labels_to_assignment(truth_labels)?;
    let summary = evaluate(&pred, &truth)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<()> {
    let x = args.input.read()?;
    let grid = parse_grid(&args.t_grid)?;
    let truth = args.labels.as_deref().map(read_truth).transpose()?;

    let mut out = String::from("t,objective,accuracy,support_size\n");
    for &t in &grid {
        // the grid supplies the budget; --t itself is not needed for sweep
        let mut engine_args = clone_engine(&args.engine);
        engine_args.t = Some(t);
        let cfg = engine_args.config(Algo::Csskm)?;
        let result = with_thread_pool(args.engine.threads, || Ok(csskm(&x, &cfg)?))?;
        let accuracy = match &truth {
            Some(truth) => {
                let (acc, _) = match_accuracy(&result.assignment, truth)?;
                format!("{acc}")
            }
            None => String::new(),
        };
        let support = io::union_support_size(&result.weights);
        let _ = writeln!(out, "{t},{},{accuracy},{support}", result.objective());
    }
    std::fs::write(&args.out, out).with_context(|| format!("cannot write {}", args.out.display()))?;
    eprintln!("sweep over {} budgets -> {}", grid.len(), args.out.display());
    Ok(())
}

fn clone_engine(e: &EngineArgs) -> EngineArgs {
    EngineArgs {
        clusters: e.clusters,
        t: e.t,
        restarts: e.restarts,
        seed: e.seed,
        init: e.init,
        max_outer: e.max_outer,
        max_inner: e.max_inner,
        tol: e.tol,
        fresh_estep: e.fresh_estep,
        threads: e.threads,
    }
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let mut grid = Vec::new();
    for part in text.split(',') {
        let value: f64 = part
            .trim()
            .parse()
            .with_context(|| UsageError(format!("bad --t-grid entry {part:?}")))?;
        grid.push(value);
    }
    if grid.is_empty() {
        bail!(UsageError("--t-grid is empty".into()));
    }
    Ok(grid)
}
