//! Intrinsic dimension estimators.
//!
//! * `mle`: Levina–Bickel maximum likelihood, bottom-up (per-point local
//!   estimates averaged over a range of neighborhood sizes).
//! * `corrdim`: Grassberger–Procaccia correlation dimension.
//! * `pcadim`: number of principal components reaching a variance share.
//! * `twonn`: ratio of second to first nearest-neighbor distance.

use std::fmt;

use rayon::prelude::*;

use crate::data::{DataMatrix, IdeResult};
use crate::error::{DimError, Result};
use crate::linalg::{self, sq_euclidean, SortOrder};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    Mle { k1: usize, k2: usize },
    CorrDim { num_radii: usize },
    PcaDim { threshold: f64 },
    TwoNn,
}

impl Estimator {
    pub const IDS: [&'static str; 4] = ["mle", "corrdim", "pcadim", "twonn"];

    /// Estimator with default parameters.
    pub fn from_id(id: &str) -> Result<Self> {
        Ok(match id {
            "mle" => Estimator::Mle { k1: 6, k2: 12 },
            "corrdim" => Estimator::CorrDim { num_radii: 20 },
            "pcadim" => Estimator::PcaDim { threshold: 0.95 },
            "twonn" => Estimator::TwoNn,
            other => return Err(DimError::UnknownMethod(other.to_string())),
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            Estimator::Mle { .. } => "mle",
            Estimator::CorrDim { .. } => "corrdim",
            Estimator::PcaDim { .. } => "pcadim",
            Estimator::TwoNn => "twonn",
        }
    }

    /// Whether the estimator reports per-point local estimates.
    pub fn is_bottom_up(&self) -> bool {
        matches!(self, Estimator::Mle { .. })
    }

    pub fn estimate(&self, data: &DataMatrix) -> Result<IdeResult> {
        match *self {
            Estimator::Mle { k1, k2 } => est_mle(data, k1, k2),
            Estimator::CorrDim { num_radii } => est_corr_dim(data, num_radii),
            Estimator::PcaDim { threshold } => est_pca_dim(data, threshold),
            Estimator::TwoNn => est_two_nn(data),
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Ascending distances from every point to its `k` nearest points at
/// positive distance. Coincident points are skipped; a point left with
/// fewer than `k` distinct neighbors is an error.
fn positive_neighbor_distances(data: &DataMatrix, k: usize) -> Result<Vec<Vec<f64>>> {
    let (n, p) = (data.nrows(), data.ncols());
    let rows = data.to_row_major();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = &rows[i * p..(i + 1) * p];
            let mut d: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| sq_euclidean(xi, &rows[j * p..(j + 1) * p]).sqrt())
                .filter(|v| *v > 0.0)
                .collect();
            if d.len() < k {
                return Err(DimError::DuplicatePoints(i));
            }
            if k < d.len() {
                d.select_nth_unstable_by(k - 1, f64::total_cmp);
                d.truncate(k);
            }
            d.sort_by(f64::total_cmp);
            Ok(d)
        })
        .collect()
}

/// Levina–Bickel estimator over neighborhood sizes `k1..=k2`.
///
/// For each `k` the per-point estimates are combined by averaging their
/// inverses; the global estimate is the mean of those over `k`. Local
/// estimates are the arithmetic mean over `k` of each point's estimate.
pub fn est_mle(data: &DataMatrix, k1: usize, k2: usize) -> Result<IdeResult> {
    if k1 < 2 || k1 > k2 {
        return Err(DimError::InvalidParameter(format!("need 2 <= k1 <= k2, got k1={k1}, k2={k2}")));
    }
    let n = data.nrows();
    if n <= k2 {
        return Err(DimError::TooFewPoints { n, needed: k2 });
    }
    let dists = positive_neighbor_distances(data, k2)?;
    let num_k = (k2 - k1 + 1) as f64;
    let mut local = vec![0.0; n];
    let mut global = 0.0;
    for k in k1..=k2 {
        let mut inverse_sum = 0.0;
        for (i, t) in dists.iter().enumerate() {
            let log_tk = t[k - 1].ln();
            let s: f64 = t[..k - 1].iter().map(|tj| log_tk - tj.ln()).sum();
            if !(s > 0.0) {
                return Err(DimError::DegenerateDistances(format!(
                    "point {i} has {k} equidistant nearest neighbors"
                )));
            }
            let inv = s / (k - 1) as f64;
            inverse_sum += inv;
            local[i] += 1.0 / inv / num_k;
        }
        global += n as f64 / inverse_sum;
    }
    Ok(IdeResult { estdim: global / num_k, local_estimates: Some(local) })
}

/// Linear-interpolated percentile of sorted values, `q` in `[0, 1]`.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Correlation dimension: least-squares slope of `log C(r)` against
/// `log r` over `num_radii` radii log-spaced between the 5th and 50th
/// percentiles of the nonzero pairwise distances.
pub fn est_corr_dim(data: &DataMatrix, num_radii: usize) -> Result<IdeResult> {
    let n = data.nrows();
    if n < 10 {
        return Err(DimError::TooFewPoints { n, needed: 9 });
    }
    if num_radii < 2 {
        return Err(DimError::InvalidParameter("need at least 2 radii".into()));
    }
    let p = data.ncols();
    let rows = data.to_row_major();
    let mut all: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let rows = &rows;
            (i + 1..n).map(move |j| sq_euclidean(&rows[i * p..(i + 1) * p], &rows[j * p..(j + 1) * p]).sqrt())
        })
        .collect();
    all.sort_by(f64::total_cmp);
    let first_nonzero = all.partition_point(|v| *v == 0.0);
    let nonzero = &all[first_nonzero..];
    if nonzero.is_empty() || nonzero[0] == nonzero[nonzero.len() - 1] {
        return Err(DimError::DegenerateDistances("all pairwise distances are equal or zero".into()));
    }
    let (r_lo, r_hi) = (percentile(nonzero, 0.05), percentile(nonzero, 0.50));
    if !(r_lo > 0.0 && r_hi > r_lo) {
        return Err(DimError::DegenerateDistances("percentile window is empty".into()));
    }
    let total = all.len() as f64;
    let (log_lo, log_hi) = (r_lo.ln(), r_hi.ln());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for m in 0..num_radii {
        let log_r = log_lo + (log_hi - log_lo) * m as f64 / (num_radii - 1) as f64;
        let r = log_r.exp();
        let c = all.partition_point(|v| *v < r) as f64 / total;
        if c > 0.0 && c < 1.0 {
            xs.push(log_r);
            ys.push(c.ln());
        }
    }
    if xs.len() < 2 {
        return Err(DimError::DegenerateDistances("fewer than 2 radii with 0 < C(r) < 1".into()));
    }
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(IdeResult { estdim: sxy / sxx, local_estimates: None })
}

/// Smallest number of principal components whose cumulative variance share
/// reaches `threshold`.
pub fn est_pca_dim(data: &DataMatrix, threshold: f64) -> Result<IdeResult> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(DimError::InvalidParameter(format!("threshold must lie in (0, 1], got {threshold}")));
    }
    let x = data.values();
    let constant = x.column_iter().all(|c| c.iter().all(|v| *v == c[0]));
    let (_, cov) = linalg::covariance(x);
    let eig = linalg::symmetric_eigen(&cov, SortOrder::Descending);
    let cumulative: Vec<f64> = eig
        .values
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v.max(0.0);
            Some(*acc)
        })
        .collect();
    let total = *cumulative.last().expect("p >= 1");
    if constant || !(total > 0.0) {
        return Err(DimError::ZeroTotalVariance);
    }
    let d = cumulative.iter().position(|c| c / total >= threshold).expect("last share is 1") + 1;
    Ok(IdeResult { estdim: d as f64, local_estimates: None })
}

/// Two-NN fit together with the number of points dropped because their
/// two nearest distances tie.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoNnFit {
    pub result: IdeResult,
    pub excluded: usize,
}

/// Two-NN maximum-likelihood estimate `(m - 1) / Σ log μ_i` over the `m`
/// points with `μ_i = r₂/r₁ > 1`.
pub fn est_two_nn_detailed(data: &DataMatrix) -> Result<TwoNnFit> {
    let n = data.nrows();
    if n < 10 {
        return Err(DimError::TooFewPoints { n, needed: 9 });
    }
    let (p, rows) = (data.ncols(), data.to_row_major());
    let pairs: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = &rows[i * p..(i + 1) * p];
            let (mut r1, mut r2) = (f64::INFINITY, f64::INFINITY);
            for j in (0..n).filter(|&j| j != i) {
                let d = sq_euclidean(xi, &rows[j * p..(j + 1) * p]).sqrt();
                if d < r1 {
                    r2 = r1;
                    r1 = d;
                } else if d < r2 {
                    r2 = d;
                }
            }
            (r1, r2)
        })
        .collect();
    if let Some(i) = pairs.iter().position(|&(r1, _)| r1 == 0.0) {
        return Err(DimError::DuplicatePoints(i));
    }
    let logs: Vec<f64> = pairs.iter().map(|&(r1, r2)| r2 / r1).filter(|mu| *mu > 1.0).map(f64::ln).collect();
    if logs.is_empty() {
        return Err(DimError::AllRatiosOne);
    }
    if logs.len() < 2 {
        return Err(DimError::DegenerateDistances("only one point has distinct neighbor distances".into()));
    }
    let estdim = (logs.len() - 1) as f64 / logs.iter().sum::<f64>();
    Ok(TwoNnFit { result: IdeResult { estdim, local_estimates: None }, excluded: n - logs.len() })
}

pub fn est_two_nn(data: &DataMatrix) -> Result<IdeResult> {
    est_two_nn_detailed(data).map(|f| f.result)
}
