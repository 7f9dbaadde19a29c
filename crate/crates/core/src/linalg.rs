//! Dense linear-algebra helpers shared by the reducers: moments, sorted
//! symmetric eigendecompositions with a fixed sign convention, and the
//! Cholesky reduction for symmetric-definite generalized problems.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::error::{DimError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortOrder {
    Ascending,
    Descending,
}

/// Eigenvalues with matching eigenvectors stored column-wise.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenPairs {
    /// Keeps the first `k` pairs.
    pub fn truncate(mut self, k: usize) -> Self {
        self.values.truncate(k);
        self.vectors = self.vectors.columns(0, k).into_owned();
        self
    }
}

pub fn column_means(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows() as f64;
    m.column_iter().map(|c| c.iter().sum::<f64>() / n).collect()
}

pub fn center_columns(m: &DMatrix<f64>, means: &[f64]) -> DMatrix<f64> {
    let mut out = m.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        let mu = means[j];
        col.iter_mut().for_each(|v| *v -= mu);
    }
    out
}

/// `XᵀX` for a column-major matrix, computed one unordered column pair at a
/// time so the result is exactly symmetric.
pub fn gram_of_columns(x: &DMatrix<f64>) -> DMatrix<f64> {
    let p = x.ncols();
    let mut g = DMatrix::zeros(p, p);
    for a in 0..p {
        let ca = x.column(a);
        for b in a..p {
            let v = ca.dot(&x.column(b));
            g[(a, b)] = v;
            g[(b, a)] = v;
        }
    }
    g
}

/// Column means and sample covariance (denominator `n - 1`).
pub fn covariance(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let means = column_means(m);
    let centered = center_columns(m, &means);
    let denom = (m.nrows() - 1) as f64;
    (means, gram_of_columns(&centered) / denom)
}

/// Flips each column so its largest-magnitude entry is positive; ties go to
/// the lowest row index.
pub fn normalize_signs(vectors: &mut DMatrix<f64>) {
    for mut col in vectors.column_iter_mut() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if !col.is_empty() && col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

fn sorted_pairs(values: &[f64], vectors: &DMatrix<f64>, order: SortOrder) -> EigenPairs {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    match order {
        SortOrder::Ascending => idx.sort_by(|&a, &b| values[a].total_cmp(&values[b])),
        SortOrder::Descending => idx.sort_by(|&a, &b| values[b].total_cmp(&values[a])),
    }
    let sorted_values = idx.iter().map(|&i| values[i]).collect();
    let mut sorted_vectors = DMatrix::from_fn(vectors.nrows(), idx.len(), |r, c| vectors[(r, idx[c])]);
    normalize_signs(&mut sorted_vectors);
    EigenPairs { values: sorted_values, vectors: sorted_vectors }
}

fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Full eigendecomposition of a symmetric matrix. Only the symmetric part of
/// `m` is used.
pub fn symmetric_eigen(m: &DMatrix<f64>, order: SortOrder) -> EigenPairs {
    let eig = SymmetricEigen::new(symmetrized(m));
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    sorted_pairs(&values, &eig.eigenvectors, order)
}

/// Cholesky factor of `b`, retrying once with a ridge of
/// `1e-10 * trace(b) / n` on the diagonal.
pub fn cholesky_with_ridge(b: &DMatrix<f64>) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    let b = symmetrized(b);
    if let Some(c) = Cholesky::new(b.clone()) {
        return Ok(c);
    }
    let n = b.nrows();
    let ridge = 1e-10 * b.trace().abs() / n as f64;
    let mut ridged = b;
    for i in 0..n {
        ridged[(i, i)] += ridge;
    }
    Cholesky::new(ridged)
        .ok_or_else(|| DimError::SingularMatrix("right-hand matrix is not positive definite".into()))
}

/// Solves `A x = λ B x` for symmetric `A` and symmetric positive definite
/// `B`. Eigenvectors are `B`-orthonormal: `xᵀ B x = 1`.
pub fn generalized_symmetric_eigen(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    order: SortOrder,
) -> Result<EigenPairs> {
    let chol = cholesky_with_ridge(b)?;
    let l = chol.l();
    let singular = || DimError::SingularMatrix("triangular solve failed".into());
    let a = symmetrized(a);
    // C = L⁻¹ A L⁻ᵀ = L⁻¹ (L⁻¹ A)ᵀ since A is symmetric.
    let la = l.solve_lower_triangular(&a).ok_or_else(singular)?;
    let c = l.solve_lower_triangular(&la.transpose()).ok_or_else(singular)?;
    let eig = SymmetricEigen::new(symmetrized(&c));
    let lt = l.transpose();
    let x = lt.solve_upper_triangular(&eig.eigenvectors).ok_or_else(singular)?;
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    Ok(sorted_pairs(&values, &x, order))
}

/// Orthonormal basis for the column span of `m` via thin QR, with the
/// diagonal of R made nonnegative.
pub fn orthonormalize_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        if r[(j, j)] < 0.0 {
            col.neg_mut();
        }
    }
    q
}

pub fn sq_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Pearson correlation of two equally long samples.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}
