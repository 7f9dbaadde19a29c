//! Kernel (Gram) matrices for a fixed catalog of kernel functions, plus the
//! double-centering used by kernel PCA.

use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::data::DataMatrix;
use crate::error::{DimError, Result};
use crate::linalg::sq_euclidean;

/// A kernel function and its parameters. Bandwidth-type parameters left as
/// `None` are resolved with the median heuristic (median of the nonzero
/// pairwise Euclidean distances).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Linear,
    /// `(x·y + offset)^degree`
    Polynomial { offset: f64, degree: u32 },
    /// `exp(-|x-y|² / (2σ²))`
    Gaussian { bandwidth: Option<f64> },
    /// `exp(-|x-y|₁ / σ)`
    Laplacian { bandwidth: Option<f64> },
    /// `tanh(slope·x·y + offset)`; not positive definite in general.
    Sigmoid { slope: f64, offset: f64 },
    Cosine,
    /// `1 / (1 + |x-y|²/σ²)`
    Cauchy { bandwidth: Option<f64> },
    /// `1 / sqrt(|x-y|² + c²)`
    InverseMultiquadric { shift: Option<f64> },
    /// `Σ 2·x_t·y_t / (x_t + y_t)`, nonnegative data only.
    ChiSquare,
    /// `Σ min(x_t, y_t)`, nonnegative data only.
    HistogramIntersection,
}

impl KernelSpec {
    pub const IDS: [&'static str; 10] = [
        "linear",
        "polynomial",
        "gaussian",
        "laplacian",
        "sigmoid",
        "cosine",
        "cauchy",
        "inverse-multiquadric",
        "chi-square",
        "histogram-intersection",
    ];

    pub fn id(&self) -> &'static str {
        match self {
            KernelSpec::Linear => "linear",
            KernelSpec::Polynomial { .. } => "polynomial",
            KernelSpec::Gaussian { .. } => "gaussian",
            KernelSpec::Laplacian { .. } => "laplacian",
            KernelSpec::Sigmoid { .. } => "sigmoid",
            KernelSpec::Cosine => "cosine",
            KernelSpec::Cauchy { .. } => "cauchy",
            KernelSpec::InverseMultiquadric { .. } => "inverse-multiquadric",
            KernelSpec::ChiSquare => "chi-square",
            KernelSpec::HistogramIntersection => "histogram-intersection",
        }
    }

    /// Default-parameterized kernel for an id. `scale` sets the bandwidth
    /// (or shift for the inverse multiquadric) where the kernel has one.
    pub fn from_id(id: &str, scale: Option<f64>) -> Result<Self> {
        let spec = match id {
            "linear" => KernelSpec::Linear,
            "polynomial" => KernelSpec::Polynomial { offset: 1.0, degree: 2 },
            "gaussian" => KernelSpec::Gaussian { bandwidth: scale },
            "laplacian" => KernelSpec::Laplacian { bandwidth: scale },
            "sigmoid" => KernelSpec::Sigmoid { slope: 1.0, offset: 0.0 },
            "cosine" => KernelSpec::Cosine,
            "cauchy" => KernelSpec::Cauchy { bandwidth: scale },
            "inverse-multiquadric" => KernelSpec::InverseMultiquadric { shift: scale },
            "chi-square" => KernelSpec::ChiSquare,
            "histogram-intersection" => KernelSpec::HistogramIntersection,
            _ => return Err(DimError::InvalidParameter(format!("unknown kernel '{id}'"))),
        };
        spec.check()?;
        Ok(spec)
    }

    /// Whether the Gram matrix is guaranteed positive semidefinite.
    pub fn is_positive_definite(&self) -> bool {
        matches!(
            self,
            KernelSpec::Linear
                | KernelSpec::Polynomial { .. }
                | KernelSpec::Gaussian { .. }
                | KernelSpec::Laplacian { .. }
                | KernelSpec::Cosine
                | KernelSpec::Cauchy { .. }
                | KernelSpec::InverseMultiquadric { .. }
        )
    }

    fn scale_parameter(&self) -> Option<Option<f64>> {
        match *self {
            KernelSpec::Gaussian { bandwidth }
            | KernelSpec::Laplacian { bandwidth }
            | KernelSpec::Cauchy { bandwidth } => Some(bandwidth),
            KernelSpec::InverseMultiquadric { shift } => Some(shift),
            _ => None,
        }
    }

    fn with_scale(self, s: f64) -> Self {
        match self {
            KernelSpec::Gaussian { .. } => KernelSpec::Gaussian { bandwidth: Some(s) },
            KernelSpec::Laplacian { .. } => KernelSpec::Laplacian { bandwidth: Some(s) },
            KernelSpec::Cauchy { .. } => KernelSpec::Cauchy { bandwidth: Some(s) },
            KernelSpec::InverseMultiquadric { .. } => KernelSpec::InverseMultiquadric { shift: Some(s) },
            other => other,
        }
    }

    pub fn check(&self) -> Result<()> {
        if let Some(Some(s)) = self.scale_parameter() {
            if !(s > 0.0 && s.is_finite()) {
                return Err(DimError::InvalidParameter(format!("{} bandwidth must be positive, got {s}", self.id())));
            }
        }
        match *self {
            KernelSpec::Polynomial { offset, degree } => {
                if degree == 0 || !offset.is_finite() {
                    return Err(DimError::InvalidParameter("polynomial degree must be a positive integer".into()));
                }
            }
            KernelSpec::Sigmoid { slope, offset }
                if !(slope.is_finite() && offset.is_finite()) => {
                    return Err(DimError::InvalidParameter("sigmoid parameters must be finite".into()));
                }
            _ => {}
        }
        Ok(())
    }

    /// Evaluates the kernel on one pair. Bandwidth parameters must already be
    /// resolved.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let dot = || x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        let resolved = |s: Option<f64>| s.expect("bandwidth resolved");
        match *self {
            KernelSpec::Linear => dot(),
            KernelSpec::Polynomial { offset, degree } => (dot() + offset).powi(degree as i32),
            KernelSpec::Gaussian { bandwidth } => {
                let s = resolved(bandwidth);
                (-sq_euclidean(x, y) / (2.0 * s * s)).exp()
            }
            KernelSpec::Laplacian { bandwidth } => {
                let l1: f64 = x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum();
                (-l1 / resolved(bandwidth)).exp()
            }
            KernelSpec::Sigmoid { slope, offset } => (slope * dot() + offset).tanh(),
            KernelSpec::Cosine => {
                let nx = x.iter().map(|a| a * a).sum::<f64>().sqrt();
                let ny = y.iter().map(|a| a * a).sum::<f64>().sqrt();
                dot() / (nx * ny)
            }
            KernelSpec::Cauchy { bandwidth } => {
                let s = resolved(bandwidth);
                1.0 / (1.0 + sq_euclidean(x, y) / (s * s))
            }
            KernelSpec::InverseMultiquadric { shift } => {
                let c = resolved(shift);
                1.0 / (sq_euclidean(x, y) + c * c).sqrt()
            }
            KernelSpec::ChiSquare => x
                .iter()
                .zip(y)
                .map(|(a, b)| if a + b == 0.0 { 0.0 } else { 2.0 * a * b / (a + b) })
                .sum(),
            KernelSpec::HistogramIntersection => x.iter().zip(y).map(|(a, b)| a.min(*b)).sum(),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Symmetric `n x n` Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    gram: DMatrix<f64>,
}

impl KernelMatrix {
    /// Wraps a matrix, checking squareness and exact symmetry.
    pub fn new(gram: DMatrix<f64>) -> Result<Self> {
        if !gram.is_square() {
            return Err(DimError::DimensionMismatch { expected: gram.nrows(), found: gram.ncols() });
        }
        if gram != gram.transpose() {
            return Err(DimError::InvalidParameter("Gram matrix is not symmetric".into()));
        }
        Ok(Self { gram })
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.gram
    }
}

/// Median of the nonzero pairwise Euclidean distances between rows.
pub fn median_heuristic(rows: &[f64], n: usize, p: usize) -> Option<f64> {
    let mut d: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            (i + 1..n).map(move |j| sq_euclidean(&rows[i * p..(i + 1) * p], &rows[j * p..(j + 1) * p]).sqrt())
        })
        .filter(|v| *v > 0.0)
        .collect();
    if d.is_empty() {
        return None;
    }
    d.sort_by(f64::total_cmp);
    let m = d.len();
    Some(if m % 2 == 1 { d[m / 2] } else { 0.5 * (d[m / 2 - 1] + d[m / 2]) })
}

/// Resolves any median-heuristic parameter of `spec` against `data`.
pub fn resolve(spec: KernelSpec, data: &DataMatrix) -> Result<KernelSpec> {
    spec.check()?;
    match spec.scale_parameter() {
        Some(None) => {
            let rows = data.to_row_major();
            let s = median_heuristic(&rows, data.nrows(), data.ncols()).ok_or_else(|| {
                DimError::InvalidParameter("all points coincide; bandwidth heuristic undefined".into())
            })?;
            Ok(spec.with_scale(s))
        }
        _ => Ok(spec),
    }
}

/// Gram matrix of `spec` over the rows of `data`. Each unordered pair is
/// evaluated once, so the result is exactly symmetric.
pub fn kernel_matrix(data: &DataMatrix, spec: KernelSpec) -> Result<KernelMatrix> {
    let spec = resolve(spec, data)?;
    let (n, p) = (data.nrows(), data.ncols());
    let rows = data.to_row_major();
    if matches!(spec, KernelSpec::ChiSquare | KernelSpec::HistogramIntersection) {
        if let Some(pos) = rows.iter().position(|v| *v < 0.0) {
            return Err(DimError::NegativeEntries { row: pos / p, col: pos % p, value: rows[pos] });
        }
    }
    if spec == KernelSpec::Cosine {
        if let Some(i) = (0..n).find(|&i| rows[i * p..(i + 1) * p].iter().all(|v| *v == 0.0)) {
            return Err(DimError::ZeroVector(i));
        }
    }
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = &rows[i * p..(i + 1) * p];
            (i..n).map(|j| spec.eval(xi, &rows[j * p..(j + 1) * p])).collect()
        })
        .collect();
    let mut gram = DMatrix::zeros(n, n);
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            gram[(i, i + off)] = v;
            gram[(i + off, i)] = v;
        }
    }
    Ok(KernelMatrix { gram })
}

/// Double centering `K - 1K - K1 + 1K1` with `1` the matrix of `1/n`.
pub fn center_kernel(gram: &KernelMatrix) -> KernelMatrix {
    let k = &gram.gram;
    let n = k.nrows();
    let nf = n as f64;
    let row_means: Vec<f64> = k.row_iter().map(|r| r.sum() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = k[(i, j)] - (row_means[i] + row_means[j]) + grand;
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    KernelMatrix { gram: out }
}
