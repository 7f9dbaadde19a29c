//! Timing harness comparing PCA through the covariance eigendecomposition
//! with PCA through the SVD of the centered data.

use std::io::Write;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{DimError, Result};
use crate::generate::{generate, Model};
use crate::preprocess::PreprocessKind;
use crate::reduce::{pca, pca_svd};
use crate::ReductionResult;

pub const DEFAULT_MEMORY_CAP: u64 = 4 << 30;
pub const CSV_HEADER: &str = "method,n,p,d,wall_time_seconds,mismatch,threads";
const BENCH_NOISE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BenchMethod {
    #[serde(rename = "pca-cov")]
    PcaCov,
    #[serde(rename = "pca-svd")]
    PcaSvd,
}

impl BenchMethod {
    pub fn id(self) -> &'static str {
        match self {
            BenchMethod::PcaCov => "pca-cov",
            BenchMethod::PcaSvd => "pca-svd",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub method: BenchMethod,
    pub n: usize,
    pub p: usize,
    pub d: usize,
    pub wall_time_seconds: f64,
    pub mismatch: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub p: usize,
    pub d: usize,
    pub repeats: usize,
    pub seed: u64,
    /// Worker threads available inside timed regions.
    pub threads: usize,
    pub memory_cap: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { sizes: Vec::new(), p: 72, d: 12, repeats: 3, seed: 0, threads: 1, memory_cap: DEFAULT_MEMORY_CAP }
    }
}

/// Bytes held at peak: the data, its preprocessed copy, the SVD working
/// copy and both embeddings.
pub fn estimated_working_set(n: usize, p: usize, d: usize) -> u64 {
    let words = 3 * n as u128 * p as u128 + 2 * n as u128 * d as u128 + 4 * p as u128 * p as u128;
    (words * 8).min(u64::MAX as u128) as u64
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 { xs[m] } else { 0.5 * (xs[m - 1] + xs[m]) }
}

/// Largest entrywise difference after flipping each column of `b` to agree
/// in sign with the matching column of `a`.
pub fn sign_aligned_mismatch(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .zip(b.column_iter())
        .map(|(ca, cb)| {
            let s = if ca.dot(&cb) < 0.0 { -1.0 } else { 1.0 };
            ca.iter().zip(cb.iter()).map(|(x, y)| (x - s * y).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

fn time_runs(
    repeats: usize,
    f: impl Fn() -> Result<ReductionResult>,
) -> Result<(f64, ReductionResult)> {
    let mut times = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats {
        let start = Instant::now();
        let out = f()?;
        times.push(start.elapsed().as_secs_f64().max(f64::MIN_POSITIVE));
        last = Some(out);
    }
    Ok((median(times), last.expect("repeats >= 1")))
}

/// Runs both PCA paths on low-rank data for each size, returning a
/// `(pca-cov, pca-svd)` pair of records per size in ascending `n`.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRecord>> {
    let BenchConfig { p, d, repeats, seed, threads, memory_cap, .. } = *config;
    if repeats == 0 {
        return Err(DimError::InvalidParameter("repeats must be at least 1".into()));
    }
    if threads == 0 {
        return Err(DimError::InvalidParameter("threads must be at least 1".into()));
    }
    if d == 0 || d >= p {
        return Err(DimError::DimensionTooLarge { d, limit: p.saturating_sub(1) });
    }
    let mut sizes = config.sizes.clone();
    sizes.sort_unstable();
    for &n in &sizes {
        if n < 2 * d {
            return Err(DimError::InvalidParameter(format!("n = {n} is below 2d = {}", 2 * d)));
        }
        let estimated = estimated_working_set(n, p, d);
        if estimated > memory_cap {
            return Err(DimError::OutOfMemoryGuard { estimated, cap: memory_cap });
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| DimError::InvalidParameter(format!("thread pool: {e}")))?;
    let mut records = Vec::with_capacity(2 * sizes.len());
    for n in sizes {
        let (data, _) = generate(Model::LowRank { ambient: p, intrinsic: d }, n, BENCH_NOISE, seed)?;
        let (cov_time, cov) = pool.install(|| time_runs(repeats, || pca(&data, d, PreprocessKind::Center)))?;
        let (svd_time, svd) = pool.install(|| time_runs(repeats, || pca_svd(&data, d, PreprocessKind::Center)))?;
        let mismatch = sign_aligned_mismatch(&cov.embedding, &svd.embedding);
        for (method, wall_time_seconds) in [(BenchMethod::PcaCov, cov_time), (BenchMethod::PcaSvd, svd_time)] {
            records.push(BenchRecord { method, n, p, d, wall_time_seconds, mismatch, threads });
        }
    }
    Ok(records)
}

/// Writes records as CSV under [`CSV_HEADER`].
pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in records {
        w.write_record([
            r.method.id().to_string(),
            r.n.to_string(),
            r.p.to_string(),
            r.d.to_string(),
            r.wall_time_seconds.to_string(),
            r.mismatch.to_string(),
            r.threads.to_string(),
        ])?;
    }
    w.flush()
}
