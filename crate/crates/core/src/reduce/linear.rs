//! Linear reducers: PCA through the covariance spectrum or through the SVD,
//! Fisher LDA, and locality preserving projections.

use nalgebra::{DMatrix, SVD};

use super::heat_kernel_edges;
use crate::data::{DataMatrix, Labels, ReductionResult, TargetDim};
use crate::error::{DimError, Result};
use crate::graph::{require_connected, Neighborhood};
use crate::linalg::{self, SortOrder};
use crate::preprocess::{preprocess, PreprocessKind};

fn linear_result(
    method: &str,
    x: &DataMatrix,
    projection: DMatrix<f64>,
    record: crate::preprocess::PreprocessRecord,
    eigenvalues: Vec<f64>,
) -> ReductionResult {
    ReductionResult {
        embedding: x.values() * &projection,
        projection: Some(projection),
        selected_features: None,
        preprocess: record,
        method: method.to_string(),
        eigenvalues: Some(eigenvalues),
        explained_variance_ratio: None,
    }
}

fn explained_ratios(all: &[f64], d: usize) -> Vec<f64> {
    let total: f64 = all.iter().map(|v| v.max(0.0)).sum();
    all[..d].iter().map(|v| if total > 0.0 { v.max(0.0) / total } else { 0.0 }).collect()
}

/// PCA from the eigendecomposition of the `p x p` sample covariance.
pub fn pca(data: &DataMatrix, d: usize, kind: PreprocessKind) -> Result<ReductionResult> {
    let d = TargetDim::new(d, data.ncols())?.get();
    let (x, record) = preprocess(data, kind)?;
    let (_, cov) = linalg::covariance(x.values());
    let eig = linalg::symmetric_eigen(&cov, SortOrder::Descending);
    let ratios = explained_ratios(&eig.values, d);
    let eig = eig.truncate(d);
    let mut out = linear_result("pca", &x, eig.vectors, record, eig.values);
    out.explained_variance_ratio = Some(ratios);
    Ok(out)
}

/// PCA from the singular value decomposition of the centered `n x p` data.
pub fn pca_svd(data: &DataMatrix, d: usize, kind: PreprocessKind) -> Result<ReductionResult> {
    let d = TargetDim::new(d, data.ncols())?.get();
    let (x, record) = preprocess(data, kind)?;
    let n = x.nrows();
    let means = linalg::column_means(x.values());
    let centered = linalg::center_columns(x.values(), &means);
    let svd = SVD::new(centered, false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| DimError::SingularMatrix("SVD did not produce right singular vectors".into()))?;
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let p = x.ncols();
    let mut v = DMatrix::from_fn(p, d, |r, c| v_t[(order[c], r)]);
    linalg::normalize_signs(&mut v);
    let variances: Vec<f64> = order.iter().map(|&i| sv[i] * sv[i] / (n - 1) as f64).collect();
    let ratios = explained_ratios(&variances, d);
    let mut out = linear_result("pcasvd", &x, v, record, variances[..d].to_vec());
    out.explained_variance_ratio = Some(ratios);
    Ok(out)
}

/// Fisher discriminant: top eigenvectors of `S_b a = λ S_w a` with a small
/// unconditional ridge on `S_w`, orthonormalized afterwards.
pub fn lda(data: &DataMatrix, labels: &Labels, d: usize, kind: PreprocessKind) -> Result<ReductionResult> {
    labels.check_supervised(data.nrows())?;
    let (classes, idx) = labels.class_indices();
    let c = classes.len();
    if d > c - 1 {
        return Err(DimError::TooManyDims { d, max: c - 1 });
    }
    let d = TargetDim::new(d, data.ncols())?.get();
    let mut counts = vec![0usize; c];
    for &k in &idx {
        counts[k] += 1;
    }
    if let Some(k) = counts.iter().position(|&m| m < 2) {
        return Err(DimError::InvalidParameter(format!("class {} has fewer than 2 samples", classes[k])));
    }
    let (x, record) = preprocess(data, kind)?;
    let xv = x.values();
    let (n, p) = xv.shape();
    let overall = linalg::column_means(xv);
    let mut class_means = DMatrix::<f64>::zeros(c, p);
    for i in 0..n {
        for j in 0..p {
            class_means[(idx[i], j)] += xv[(i, j)];
        }
    }
    for k in 0..c {
        for j in 0..p {
            class_means[(k, j)] /= counts[k] as f64;
        }
    }
    let within_dev = DMatrix::from_fn(n, p, |i, j| xv[(i, j)] - class_means[(idx[i], j)]);
    let mut sw = linalg::gram_of_columns(&within_dev);
    let between_dev = DMatrix::from_fn(c, p, |k, j| (counts[k] as f64).sqrt() * (class_means[(k, j)] - overall[j]));
    let sb = linalg::gram_of_columns(&between_dev);
    let ridge = 1e-8 * sw.trace() / p as f64;
    for j in 0..p {
        sw[(j, j)] += ridge;
    }
    let eig = linalg::generalized_symmetric_eigen(&sb, &sw, SortOrder::Descending)
        .map_err(|_| DimError::SingularWithinScatter)?
        .truncate(d);
    let mut projection = linalg::orthonormalize_columns(&eig.vectors);
    linalg::normalize_signs(&mut projection);
    Ok(linear_result("lda", &x, projection, record, eig.values))
}

/// Locality preserving projections: smallest generalized eigenvectors of
/// `XᵀLX a = λ XᵀDX a`, normalized so `aᵀXᵀDXa = 1`.
///
/// When `XᵀDX` is rank deficient (data confined to a subspace) the problem
/// is solved on the range of `XᵀDX`.
pub fn lpp(data: &DataMatrix, d: usize, nbhd: Neighborhood, kind: PreprocessKind) -> Result<ReductionResult> {
    let d = TargetDim::new(d, data.ncols())?.get();
    let (x, record) = preprocess(data, kind)?;
    let graph = nbhd.build(&x)?;
    require_connected(&graph)?;
    let (edges, _) = heat_kernel_edges(&graph);
    let (a, b) = lpp_matrices(&x, &edges);
    let eig = solve_on_range(&a, &b, d)?;
    Ok(linear_result("lpp", &x, eig.vectors, record, eig.values))
}

/// `XᵀLX` and `XᵀDX` for symmetric heat-kernel edges, without forming the
/// `n x n` Laplacian.
pub(crate) fn lpp_matrices(x: &DataMatrix, edges: &[(usize, usize, f64)]) -> (DMatrix<f64>, DMatrix<f64>) {
    let xv = x.values();
    let (n, p) = xv.shape();
    let mut degree = vec![0.0; n];
    let mut diffs = DMatrix::zeros(edges.len(), p);
    for (e, &(i, j, w)) in edges.iter().enumerate() {
        degree[i] += w;
        degree[j] += w;
        let s = w.sqrt();
        for c in 0..p {
            diffs[(e, c)] = s * (xv[(i, c)] - xv[(j, c)]);
        }
    }
    let xtlx = linalg::gram_of_columns(&diffs);
    let scaled = DMatrix::from_fn(n, p, |i, c| degree[i].sqrt() * xv[(i, c)]);
    (xtlx, linalg::gram_of_columns(&scaled))
}

fn solve_on_range(a: &DMatrix<f64>, b: &DMatrix<f64>, d: usize) -> Result<linalg::EigenPairs> {
    let b_eig = linalg::symmetric_eigen(b, SortOrder::Descending);
    let max = b_eig.values[0];
    let rank = b_eig.values.iter().filter(|v| **v > 1e-12 * max).count();
    if max <= 0.0 || rank < d {
        return Err(DimError::InsufficientPositiveEigenvalues { requested: d, available: rank });
    }
    if rank == b.nrows() {
        return Ok(linalg::generalized_symmetric_eigen(a, b, SortOrder::Ascending)?.truncate(d));
    }
    let basis = b_eig.vectors.columns(0, rank).into_owned();
    let ra = basis.transpose() * a * &basis;
    let rb = basis.transpose() * b * &basis;
    let reduced = linalg::generalized_symmetric_eigen(&ra, &rb, SortOrder::Ascending)?.truncate(d);
    let mut vectors = basis * reduced.vectors;
    linalg::normalize_signs(&mut vectors);
    Ok(linalg::EigenPairs { values: reduced.values, vectors })
}
