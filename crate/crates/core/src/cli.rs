//! Command-line front end over CSV files.
//!
//! Exit codes: 0 on success, 1 when an algorithm or IO step fails, 2 for
//! usage errors (bad flags, unknown ids, options that do not fit the method).

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::bench::{self, BenchConfig};
use crate::error::DimError;
use crate::estimate::Estimator;
use crate::generate::{self, Model};
use crate::graph::{Neighborhood, Symmetrization};
use crate::kernels::KernelSpec;
use crate::preprocess::{PreprocessKind, PreprocessRecord};
use crate::reduce::{self, Method, ReducerConfig};
use crate::{validate, DataMatrix, Labels, ReductionResult};

pub const THREADS_ENV: &str = "DIMKIT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "dimkit", version, about = "Dimension reduction and intrinsic dimension estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed a data CSV into `--dim` dimensions.
    Reduce(ReduceArgs),
    /// Estimate the intrinsic dimension of a data CSV.
    Estimate(EstimateArgs),
    /// Sample a synthetic data set.
    Generate(GenerateArgs),
    /// Time covariance-based against SVD-based PCA.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[arg(long)]
    pub method: Method,
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value = "center")]
    pub preprocess: PreprocessKind,
    #[arg(long, conflicts_with = "eps")]
    pub k: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, requires = "k")]
    pub sym: Option<Symmetrization>,
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub bandwidth: Option<f64>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Write a `y1..yd` header row.
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub method: String,
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write per-point estimates (bottom-up methods only).
    #[arg(long)]
    pub local: Option<PathBuf>,
    #[arg(long)]
    pub k1: Option<usize>,
    #[arg(long)]
    pub k2: Option<usize>,
    #[arg(long)]
    pub radii: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub model: Model,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated sample counts; may be empty.
    #[arg(long)]
    pub sizes: String,
    #[arg(long, default_value_t = 72)]
    pub p: usize,
    #[arg(long, default_value_t = 12)]
    pub d: usize,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Threads available inside timed regions.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Algorithm(DimError),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Algorithm(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Algorithm(e) => write!(f, "{e}"),
        }
    }
}

impl From<DimError> for CliError {
    fn from(e: DimError) -> Self {
        CliError::Algorithm(e)
    }
}

fn io_error(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    let stdout = io::stdout();
    match execute(cli.command, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    // a pool may already exist when called repeatedly in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Runs a parsed command, writing any console output to `out`.
pub fn execute(command: Command, out: &mut impl Write) -> Result<(), CliError> {
    match command {
        Command::Reduce(args) => cmd_reduce(args),
        Command::Estimate(args) => cmd_estimate(args, out),
        Command::Generate(args) => cmd_generate(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

/// Shortest decimal text that parses back to the same `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v:?}")
}

fn parse_field(field: &str, path: &Path, line: usize) -> Result<f64, CliError> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| CliError::Usage(format!("{}:{line}: '{field}' is not a number", path.display())))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>, CliError> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    Ok(csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).flexible(true).from_reader(file))
}

/// Reads a numeric CSV. A first row that does not parse as numbers is
/// treated as a header.
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>, CliError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in csv_reader(path)?.records().enumerate() {
        let record = record.map_err(|e| io_error(path, e))?;
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let parsed: Result<Vec<f64>, CliError> = record.iter().map(|f| parse_field(f, path, i + 1)).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(e),
        }
    }
    let p = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().position(|r| r.len() != p) {
        return Err(CliError::Usage(format!(
            "{}: row {} has {} fields, expected {p}",
            path.display(),
            bad + 1,
            rows[bad].len()
        )));
    }
    Ok(DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]))
}

pub fn read_data(path: &Path) -> Result<DataMatrix, CliError> {
    Ok(validate(read_matrix(path)?)?)
}

/// Reads a single column of integer class labels, with optional header.
pub fn read_labels(path: &Path) -> Result<Labels, CliError> {
    let mut labels = Vec::new();
    for (i, record) in csv_reader(path)?.records().enumerate() {
        let record = record.map_err(|e| io_error(path, e))?;
        let Some(field) = record.get(0).map(str::trim).filter(|f| !f.is_empty()) else { continue };
        match field.parse::<i64>() {
            Ok(v) => labels.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(CliError::Usage(format!("{}:{}: '{field}' is not an integer label", path.display(), i + 1)))
            }
        }
    }
    Ok(Labels::new(labels))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path).map_err(|e| io_error(path, e))?))
}

/// Writes a matrix as CSV, optionally preceded by `comment` and a header.
pub fn write_matrix(
    path: &Path,
    m: &DMatrix<f64>,
    header: Option<&[String]>,
    comment: Option<&str>,
) -> Result<(), CliError> {
    let mut w = create(path)?;
    let mut write = || -> io::Result<()> {
        if let Some(c) = comment {
            writeln!(w, "# {c}")?;
        }
        if let Some(h) = header {
            writeln!(w, "{}", h.join(","))?;
        }
        for row in m.row_iter() {
            let fields: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
            writeln!(w, "{}", fields.join(","))?;
        }
        w.flush()
    };
    write().map_err(|e| io_error(path, e))
}

fn build_reducer_config(args: &ReduceArgs, n: usize) -> Result<ReducerConfig, CliError> {
    let mut config = ReducerConfig::new(args.method, args.dim).with_preprocess(args.preprocess);
    match (args.k, args.eps) {
        (Some(k), _) => {
            let symmetrization = args.sym.unwrap_or_default();
            config = config.with_neighborhood(Neighborhood::Knn { k, symmetrization });
        }
        (None, Some(eps)) => config = config.with_neighborhood(Neighborhood::Eps { eps }),
        (None, None) => {}
    }
    match (&args.kernel, args.bandwidth) {
        (Some(id), bw) => config = config.with_kernel(KernelSpec::from_id(id, bw).map_err(usage)?),
        (None, Some(bw)) if args.method == Method::Kpca => {
            config = config.with_kernel(KernelSpec::Gaussian { bandwidth: Some(bw) })
        }
        (None, Some(_)) => return Err(CliError::Usage("--bandwidth needs --kernel or --method kpca".into())),
        (None, None) => {}
    }
    if let Some(path) = &args.labels {
        config = config.with_labels(read_labels(path)?);
    }
    config.check(n).map_err(usage)?;
    Ok(config)
}

fn usage(e: DimError) -> CliError {
    CliError::Usage(e.to_string())
}

fn matrix_rows(m: &DMatrix<f64>) -> Value {
    Value::Array(m.row_iter().map(|r| json!(r.iter().collect::<Vec<_>>())).collect())
}

fn record_json(r: &PreprocessRecord) -> Value {
    json!({
        "kind": r.kind.id(),
        "column_means": r.column_means,
        "column_scales": r.column_scales,
        "rotation": matrix_rows(&r.rotation),
        "component_scales": r.component_scales,
    })
}

/// Metadata document written by `reduce --meta`.
pub fn reduction_metadata(args: &ReduceArgs, config: &ReducerConfig, result: &ReductionResult) -> Value {
    json!({
        "method": result.method,
        "kind": args.method.kind(),
        "d": result.dim(),
        "preprocess": record_json(&result.preprocess),
        "projection": result.projection.as_ref().map(matrix_rows),
        "selected_features": result.selected_features,
        "eigenvalues": result.eigenvalues,
        "explained_variance_ratio": result.explained_variance_ratio,
        "parameters": {
            "k": args.k,
            "eps": args.eps,
            "sym": args.k.map(|_| args.sym.unwrap_or_default().id()),
            "kernel": config.kernel.map(|k| k.id()),
            "bandwidth": args.bandwidth,
        },
    })
}

fn cmd_reduce(args: ReduceArgs) -> Result<(), CliError> {
    let data = read_data(&args.input)?;
    let config = build_reducer_config(&args, data.nrows())?;
    let result = reduce::reduce(&data, &config)?;
    let header: Option<Vec<String>> = args.header.then(|| (1..=result.dim()).map(|i| format!("y{i}")).collect());
    write_matrix(&args.output, &result.embedding, header.as_deref(), None)?;
    if let Some(path) = &args.meta {
        let meta = reduction_metadata(&args, &config, &result);
        let mut w = create(path)?;
        serde_json::to_writer_pretty(&mut w, &meta)
            .map_err(|e| io_error(path, e))
            .and_then(|_| writeln!(w).and_then(|_| w.flush()).map_err(|e| io_error(path, e)))?;
    }
    Ok(())
}

fn build_estimator(args: &EstimateArgs) -> Result<Estimator, CliError> {
    let mut est = Estimator::from_id(&args.method).map_err(usage)?;
    let misplaced = |flag: &str| CliError::Usage(format!("--{flag} does not apply to estimator '{}'", args.method));
    match &mut est {
        Estimator::Mle { k1, k2 } => {
            *k1 = args.k1.unwrap_or(*k1);
            *k2 = args.k2.unwrap_or(*k2);
        }
        _ if args.k1.is_some() => return Err(misplaced("k1")),
        _ if args.k2.is_some() => return Err(misplaced("k2")),
        _ => {}
    }
    match &mut est {
        Estimator::CorrDim { num_radii } => *num_radii = args.radii.unwrap_or(*num_radii),
        _ if args.radii.is_some() => return Err(misplaced("radii")),
        _ => {}
    }
    match &mut est {
        Estimator::PcaDim { threshold } => *threshold = args.threshold.unwrap_or(*threshold),
        _ if args.threshold.is_some() => return Err(misplaced("threshold")),
        _ => {}
    }
    if args.local.is_some() && !est.is_bottom_up() {
        return Err(CliError::Usage(format!(
            "estimator '{}' reports no local estimates; --local needs a bottom-up method (mle)",
            args.method
        )));
    }
    Ok(est)
}

fn cmd_estimate(args: EstimateArgs, out: &mut impl Write) -> Result<(), CliError> {
    let est = build_estimator(&args)?;
    let data = read_data(&args.input)?;
    let result = est.estimate(&data)?;
    writeln!(out, "estdim={}", result.estdim).map_err(|e| CliError::Io(format!("stdout: {e}")))?;
    if let Some(path) = &args.local {
        let local = result.local_estimates.expect("bottom-up estimators report local estimates");
        write_matrix(path, &DMatrix::from_column_slice(local.len(), 1, &local), None, None)?;
    }
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let (data, truth) = generate::generate(args.model, args.n, args.noise, args.seed)?;
    write_matrix(&args.output, data.values(), None, None)?;
    if let Some(path) = &args.truth {
        let comment = format!("intrinsic_dim={}", truth.intrinsic_dim);
        write_matrix(path, &truth.latent, None, Some(&comment))?;
    }
    Ok(())
}

/// Parses a comma-separated size list; blank input means no sizes.
pub fn parse_sizes(raw: &str) -> Result<Vec<usize>, CliError> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::Usage(format!("invalid size '{s}' in --sizes"))))
        .collect()
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let config = BenchConfig {
        sizes: parse_sizes(&args.sizes)?,
        p: args.p,
        d: args.d,
        repeats: args.repeats,
        seed: args.seed,
        threads: args.threads,
        ..BenchConfig::default()
    };
    let records = bench::run_bench(&config)?;
    let w = create(&args.output)?;
    bench::write_csv(&records, w).map_err(|e| io_error(&args.output, e))
}
