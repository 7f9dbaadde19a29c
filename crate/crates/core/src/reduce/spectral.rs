//! Nonlinear (and distance-based) reducers built on dense spectral
//! decompositions of `n x n` matrices.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::heat_kernel_affinity;
use crate::data::{DataMatrix, ReductionResult, TargetDim};
use crate::error::{DimError, Result};
use crate::graph::{self, require_connected, Neighborhood};
use crate::kernels::{center_kernel, kernel_matrix, KernelMatrix, KernelSpec};
use crate::linalg::{self, sq_euclidean, SortOrder};
use crate::preprocess::{preprocess, PreprocessKind, PreprocessRecord};

fn nonlinear_result(method: &str, embedding: DMatrix<f64>, record: PreprocessRecord, eigenvalues: Vec<f64>) -> ReductionResult {
    ReductionResult {
        embedding,
        projection: None,
        selected_features: None,
        preprocess: record,
        method: method.to_string(),
        eigenvalues: Some(eigenvalues),
        explained_variance_ratio: None,
    }
}

/// Top-`d` spectral embedding `√λ_j v_j` of a symmetric inner-product
/// matrix. Fails when fewer than `d` eigenvalues are positive.
fn top_positive_embedding(b: &DMatrix<f64>, d: usize) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let eig = linalg::symmetric_eigen(b, SortOrder::Descending);
    let max = eig.values.first().copied().unwrap_or(0.0);
    let available = if max > 0.0 { eig.values.iter().filter(|v| **v > 1e-12 * max).count() } else { 0 };
    if available < d {
        return Err(DimError::InsufficientPositiveEigenvalues { requested: d, available });
    }
    let eig = eig.truncate(d);
    let mut y = eig.vectors;
    for (j, mut col) in y.column_iter_mut().enumerate() {
        col *= eig.values[j].sqrt();
    }
    Ok((y, eig.values))
}

/// Classical MDS on a matrix of pairwise distances: double-center
/// `-D²/2` and embed with the top `d` positive eigenpairs. Accepts any
/// `d`, including the full dimension of the generating space.
pub fn mds_from_distances(dist: &DMatrix<f64>, d: usize) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let n = dist.nrows();
    if !dist.is_square() {
        return Err(DimError::DimensionMismatch { expected: n, found: dist.ncols() });
    }
    if let Some(v) = dist.iter().find(|v| !v.is_finite()) {
        return Err(DimError::InvalidParameter(format!("distance matrix contains {v}")));
    }
    if d == 0 {
        return Err(DimError::DimensionTooLarge { d, limit: n });
    }
    let half_sq = DMatrix::from_fn(n, n, |i, j| {
        let s = 0.5 * (dist[(i, j)] + dist[(j, i)]);
        -0.5 * s * s
    });
    let b = center_kernel(&KernelMatrix::new(half_sq)?);
    top_positive_embedding(b.as_matrix(), d)
}

fn euclidean_distances(x: &DataMatrix) -> DMatrix<f64> {
    let (n, p) = (x.nrows(), x.ncols());
    let rows = x.to_row_major();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| sq_euclidean(&rows[i * p..(i + 1) * p], &rows[j * p..(j + 1) * p]).sqrt()).collect())
        .collect();
    DMatrix::from_fn(n, n, |i, j| upper[i.min(j)][i.max(j)])
}

/// Classical (Torgerson) MDS on Euclidean distances of the preprocessed data.
pub fn classical_mds(data: &DataMatrix, d: usize, kind: PreprocessKind) -> Result<ReductionResult> {
    let d = TargetDim::new(d, data.ncols())?.get();
    let (x, record) = preprocess(data, kind)?;
    let (y, values) = mds_from_distances(&euclidean_distances(&x), d)?;
    Ok(nonlinear_result("mds", y, record, values))
}

/// Isomap: classical MDS on shortest-path distances of the neighbor graph.
pub fn isomap(data: &DataMatrix, d: usize, nbhd: Neighborhood, kind: PreprocessKind) -> Result<ReductionResult> {
    let d = TargetDim::new(d, data.ncols())?.get();
    let (x, record) = preprocess(data, kind)?;
    let graph = nbhd.build(&x)?;
    require_connected(&graph)?;
    let geodesics = graph::floyd_warshall(&graph)?;
    let (y, values) = mds_from_distances(geodesics.as_matrix(), d)?;
    Ok(nonlinear_result("isomap", y, record, values))
}

/// Barycentric reconstruction weights of each point from its neighbors.
///
/// Row `i` minimizes `|x_i - Σ_j w_ij x_j|²` subject to `Σ_j w_ij = 1`. The
/// local Gram matrix gets a ridge of `1e-3 · trace(G) / k` when the point
/// has more neighbors than dimensions or `G` has condition number above
/// `1e12`.
pub fn lle_weights(x: &DataMatrix, neighbors: &[Vec<usize>]) -> Result<Vec<Vec<(usize, f64)>>> {
    let xv = x.values();
    let p = xv.ncols();
    neighbors
        .par_iter()
        .enumerate()
        .map(|(i, nb)| {
            let k = nb.len();
            if k == 0 {
                return Err(DimError::SingularLocalGram(i));
            }
            let z = DMatrix::from_fn(k, p, |a, c| xv[(nb[a], c)] - xv[(i, c)]);
            let mut g = &z * z.transpose();
            let needs_ridge = k > p || {
                let eig = linalg::symmetric_eigen(&g, SortOrder::Descending);
                let (max, min) = (eig.values[0], eig.values[k - 1]);
                min <= 0.0 || max / min > 1e12
            };
            if needs_ridge {
                let ridge = 1e-3 * g.trace() / k as f64;
                for a in 0..k {
                    g[(a, a)] += ridge;
                }
            }
            let ones = DVector::from_element(k, 1.0);
            let w = match g.clone().cholesky() {
                Some(ch) => ch.solve(&ones),
                None => g.lu().solve(&ones).ok_or(DimError::SingularLocalGram(i))?,
            };
            let total = w.sum();
            if !(total.is_finite() && total != 0.0) || w.iter().any(|v| !v.is_finite()) {
                return Err(DimError::SingularLocalGram(i));
            }
            Ok(nb.iter().zip(w.iter()).map(|(&j, wj)| (j, wj / total)).collect())
        })
        .collect()
}

/// Neighbor lists used for reconstruction: the `k` nearest points for a
/// k-NN rule, the eps-ball for a radius rule.
fn reconstruction_neighbors(x: &DataMatrix, nbhd: Neighborhood) -> Result<Vec<Vec<usize>>> {
    Ok(match nbhd {
        Neighborhood::Knn { k, .. } => graph::knn_lists(x, k)?
            .into_iter()
            .map(|l| l.into_iter().map(|(j, _)| j).collect())
            .collect(),
        Neighborhood::Eps { eps } => graph::eps_graph(x, eps)?
            .undirected_adjacency()
            .into_iter()
            .map(|l| l.into_iter().map(|(j, _)| j).collect())
            .collect(),
    })
}

/// Locally linear embedding.
pub fn lle(data: &DataMatrix, d: usize, nbhd: Neighborhood, kind: PreprocessKind) -> Result<ReductionResult> {
    let d = TargetDim::new(d, data.ncols())?.get();
    let (x, record) = preprocess(data, kind)?;
    let n = x.nrows();
    if n < d + 2 {
        return Err(DimError::InsufficientPositiveEigenvalues { requested: d, available: n.saturating_sub(2) });
    }
    require_connected(&nbhd.build(&x)?)?;
    let weights = lle_weights(&x, &reconstruction_neighbors(&x, nbhd)?)?;
    let mut iw = DMatrix::<f64>::identity(n, n);
    for (i, row) in weights.iter().enumerate() {
        for &(j, w) in row {
            iw[(i, j)] -= w;
        }
    }
    let m = iw.tr_mul(&iw);
    let eig = linalg::symmetric_eigen(&m, SortOrder::Ascending);
    let scale = (n as f64).sqrt();
    let y = DMatrix::from_fn(n, d, |i, j| eig.vectors[(i, j + 1)] * scale);
    Ok(nonlinear_result("lle", y, record, eig.values[1..=d].to_vec()))
}

/// Dense graph Laplacian `L = D - W` and degree matrix `D` of the
/// heat-kernel affinity.
pub fn heat_kernel_laplacian(graph: &graph::NeighborGraph) -> (DMatrix<f64>, DMatrix<f64>) {
    let (w, degree) = heat_kernel_affinity(graph);
    let dmat = DMatrix::from_diagonal(&DVector::from_vec(degree));
    (&dmat - w, dmat)
}

/// Laplacian eigenmaps: generalized eigenvectors of `L f = λ D f` for the
/// `d` smallest nonzero eigenvalues (the constant vector is dropped).
pub fn laplacian_eigenmaps(
    data: &DataMatrix,
    d: usize,
    nbhd: Neighborhood,
    kind: PreprocessKind,
) -> Result<ReductionResult> {
    let d = TargetDim::new(d, data.ncols())?.get();
    let (x, record) = preprocess(data, kind)?;
    let n = x.nrows();
    if n < d + 1 {
        return Err(DimError::InsufficientPositiveEigenvalues { requested: d, available: n - 1 });
    }
    let graph = nbhd.build(&x)?;
    require_connected(&graph)?;
    let (l, dmat) = heat_kernel_laplacian(&graph);
    let eig = linalg::generalized_symmetric_eigen(&l, &dmat, SortOrder::Ascending)?;
    let y = eig.vectors.columns(1, d).into_owned();
    Ok(nonlinear_result("lapeig", y, record, eig.values[1..=d].to_vec()))
}

/// Kernel PCA: embedding column `j` is `√λ_j v_j` for the descending
/// eigenpairs of the double-centered Gram matrix.
pub fn kernel_pca(data: &DataMatrix, d: usize, kernel: KernelSpec, kind: PreprocessKind) -> Result<ReductionResult> {
    let d = TargetDim::new(d, data.ncols())?.get();
    let (x, record) = preprocess(data, kind)?;
    let gram = center_kernel(&kernel_matrix(&x, kernel)?);
    let (y, values) = top_positive_embedding(gram.as_matrix(), d)?;
    Ok(nonlinear_result("kpca", y, record, values))
}
