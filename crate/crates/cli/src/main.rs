use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use staircase::bench::{self, BenchConfig, BenchMethod};
use staircase::models::{KeyValues, ModelSpec};
use staircase::mtx::{load_matrix_market, write_matrix_market};
use staircase::solver::{residual_csv, solve_stationary, SolveOptions};
use staircase::spectral::{self, Table1Config, DEFAULT_TOL_ONE};
use staircase::splitting::{SplittingKind, DEFAULT_DENSE_LIMIT};
use staircase::{canonicalize, exec, residual_check, BlockPartition, CanonicalChainMatrix};

#[derive(Debug, Parser)]
#[command(name = "staircase", version, about = "Stationary distributions of Markov chains by block splittings")]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Worker threads.
    #[arg(long, global = true, env = exec::THREADS_ENV)]
    threads: Option<usize>,

    /// Partition block size ℓ.
    #[arg(long, global = true)]
    block_size: Option<usize>,

    /// Stopping tolerance on ‖x(k+1) − x(k)‖₁.
    #[arg(long, global = true, default_value_t = 1.0e-9)]
    tol: f64,

    #[arg(long, global = true, default_value_t = 10_000)]
    maxit: usize,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output file (stdout when omitted, where that makes sense).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a model matrix in Matrix Market format.
    Generate {
        #[arg(long, value_parser = ["mutex", "hess", "ncd"])]
        model: String,
        /// Parameters as `key=value` pairs separated by commas.
        #[arg(long, default_value = "")]
        params: String,
        /// File of `key=value` lines; `--params` entries override it.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Solve for the stationary vector.
    Solve {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value = "stair1")]
        method: SplittingKind,
        /// Write the residual history as CSV.
        #[arg(long)]
        residuals: Option<PathBuf>,
    },
    /// Spectra of dense iteration matrices.
    Spectrum {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "bj,bgs,stair1,stair2")]
        methods: Vec<SplittingKind>,
        #[arg(long, default_value_t = DEFAULT_DENSE_LIMIT)]
        dense_limit: usize,
    },
    /// Convergence-ratio experiment over random block Hessenberg matrices.
    Table1 {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 64)]
        k: usize,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "64")]
        kp: Vec<usize>,
        /// Also write per-trial ratios as JSON.
        #[arg(long)]
        trials_json: Option<PathBuf>,
    },
    /// Time solves across worker counts.
    Bench {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "jgs,stair1,stair2")]
        methods: Vec<BenchMethod>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        workers: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        /// Also write the records as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Directory for per-cell residual CSVs.
        #[arg(long)]
        residuals_dir: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let g = &cli.global;
    match &cli.command {
        Command::Generate { model, params, config } => generate(g, model, params, config.as_deref()),
        Command::Solve { matrix, method, residuals } => solve(g, matrix, *method, residuals.as_deref()),
        Command::Spectrum { matrix, methods, dense_limit } => spectrum(g, matrix, methods, *dense_limit),
        Command::Table1 { trials, k, n, kp, trials_json } => table1(g, *trials, *k, *n, kp, trials_json.as_deref()),
        Command::Bench { matrix, methods, workers, repeats, json, residuals_dir } => {
            run_bench(g, matrix, methods, workers, *repeats, json.as_deref(), residuals_dir.as_deref())
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_chain(path: &Path) -> Result<CanonicalChainMatrix> {
    let m = load_matrix_market(path).with_context(|| format!("reading {}", path.display()))?;
    canonicalize(m).with_context(|| format!("validating {}", path.display()))
}

fn partition_for(g: &Global, n: usize) -> Result<BlockPartition> {
    let ell = g.block_size.context("--block-size is required")?;
    Ok(BlockPartition::uniform(n, ell)?)
}

fn workers(g: &Global) -> usize {
    g.threads.unwrap_or_else(exec::default_workers)
}

#[derive(Serialize)]
struct Sidecar<'a> {
    #[serde(flatten)]
    spec: &'a ModelSpec,
    seed: u64,
    n: usize,
    nnz: usize,
}

fn generate(g: &Global, model: &str, params: &str, config: Option<&Path>) -> Result<()> {
    let mut kv = match config {
        Some(p) => KeyValues::parse(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
        None => KeyValues::default(),
    };
    kv.merge(KeyValues::parse(params)?);
    let spec = ModelSpec::from_key_values(model, &kv, g.seed)?;
    let a = spec.generate()?;
    let Some(out) = g.out.as_deref() else {
        bail!("--out is required for generate");
    };
    write_matrix_market(a.matrix(), out)?;
    let sidecar = Sidecar { spec: &spec, seed: g.seed, n: a.order(), nnz: a.nnz() };
    let side_path = out.with_extension("json");
    fs::write(&side_path, serde_json::to_string_pretty(&sidecar)?)?;
    eprintln!("wrote {} (N = {}, nnz = {}) and {}", out.display(), a.order(), a.nnz(), side_path.display());
    Ok(())
}

#[derive(Serialize)]
struct SolveOutput {
    method: String,
    n: usize,
    block_size: usize,
    workers: usize,
    iterations: usize,
    converged: bool,
    final_err: Option<f64>,
    residual_norm: f64,
    iterate_seconds: f64,
    prepare_seconds: f64,
    pi: Vec<f64>,
}

fn solve(g: &Global, matrix: &Path, method: SplittingKind, residuals: Option<&Path>) -> Result<()> {
    let a = load_chain(matrix)?;
    let part = partition_for(g, a.order())?;
    let opts = SolveOptions { tol: g.tol, maxit: g.maxit, workers: workers(g), ..Default::default() };
    let r = solve_stationary(&a, &part, method, &opts)?;
    if let Some(p) = residuals {
        fs::write(p, residual_csv(&r.residual_history))?;
    }
    eprintln!(
        "{method}: {} iterations, converged = {}, {:.3}s",
        r.iterations, r.converged, r.iterate_seconds
    );
    let out = SolveOutput {
        method: method.to_string(),
        n: a.order(),
        block_size: part.size(0),
        workers: opts.workers,
        iterations: r.iterations,
        converged: r.converged,
        final_err: r.residual_history.last().copied(),
        residual_norm: residual_check(&a, &r.pi),
        iterate_seconds: r.iterate_seconds,
        prepare_seconds: r.prepare_seconds,
        pi: r.pi,
    };
    emit(g.out.as_deref(), &(serde_json::to_string_pretty(&out)? + "\n"))
}

#[derive(Serialize)]
struct MethodSpectrum {
    method: String,
    #[serde(flatten)]
    report: spectral::SpectralReport,
}

fn spectrum(g: &Global, matrix: &Path, methods: &[SplittingKind], limit: usize) -> Result<()> {
    let a = load_chain(matrix)?;
    let part = partition_for(g, a.order())?;
    let reports = methods
        .iter()
        .map(|&k| {
            let h = spectral::iteration_matrix(&a, &part, k, limit)?;
            Ok(MethodSpectrum { method: k.to_string(), report: spectral::spectral_report(&h, DEFAULT_TOL_ONE)? })
        })
        .collect::<Result<Vec<_>>>()?;
    emit(g.out.as_deref(), &(serde_json::to_string_pretty(&reports)? + "\n"))
}

fn table1(g: &Global, trials: usize, k: usize, n: usize, kp: &[usize], trials_json: Option<&Path>) -> Result<()> {
    let cfg = Table1Config::new(trials, k, n, kp.to_vec(), g.seed);
    let pool = exec::TrialPool::new(workers(g))?;
    let res = pool.install(|| spectral::table1_experiment(&cfg))?;
    if let Some(p) = trials_json {
        fs::write(p, serde_json::to_string_pretty(&res.trials)?)?;
    }
    emit(g.out.as_deref(), &res.to_csv())
}

fn run_bench(
    g: &Global,
    matrix: &Path,
    methods: &[BenchMethod],
    worker_list: &[usize],
    repeats: usize,
    json: Option<&Path>,
    residuals_dir: Option<&Path>,
) -> Result<()> {
    let a = load_chain(matrix)?;
    let ell = g.block_size.context("--block-size is required")?;
    let id = matrix.file_stem().map_or_else(|| "matrix".into(), |s| s.to_string_lossy().into_owned());
    let mut cfg = BenchConfig::new(id, methods.to_vec(), ell, worker_list.to_vec());
    cfg.solve = SolveOptions { tol: g.tol, maxit: g.maxit, ..Default::default() };
    cfg.repeats = repeats;
    let mut hist = Vec::new();
    let records = bench::run_bench(&a, &cfg, residuals_dir.map(|_| &mut hist))?;
    if let Some(dir) = residuals_dir {
        fs::create_dir_all(dir)?;
        for h in &hist {
            let name = format!("{}_m{}.csv", h.method.replace(':', "-"), h.m);
            fs::write(dir.join(name), residual_csv(&h.residuals))?;
        }
    }
    if let Some(p) = json {
        bench::emit_json(&records, p)?;
    }
    emit(g.out.as_deref(), &bench::records_to_csv(&records))
}
