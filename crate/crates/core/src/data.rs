//! Shared data model: the observed matrix, labels, target dimension and the
//! result records every reducer and estimator returns.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{DimError, Result};
use crate::preprocess::PreprocessRecord;

/// Observed data, `n` rows (observations) by `p` columns (variables).
///
/// Construction goes through [`validate`], so a `DataMatrix` always has at
/// least two rows, at least one column and only finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        validate(values)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != p) {
            return Err(DimError::DimensionMismatch { expected: p, found: bad.len() });
        }
        validate(DMatrix::from_fn(n, p, |i, j| rows[i][j]))
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.values
    }

    /// Row-major copy of the entries, used by the distance kernels.
    pub fn to_row_major(&self) -> Vec<f64> {
        let (n, p) = self.values.shape();
        let mut out = Vec::with_capacity(n * p);
        for i in 0..n {
            for j in 0..p {
                out.push(self.values[(i, j)]);
            }
        }
        out
    }

    /// Returns a new matrix with rows reordered so that row `i` of the
    /// result is row `order[i]` of `self`.
    pub fn permute_rows(&self, order: &[usize]) -> Self {
        let p = self.ncols();
        let values = DMatrix::from_fn(order.len(), p, |i, j| self.values[(order[i], j)]);
        Self { values }
    }
}

/// Checks the data-matrix invariants and wraps the matrix on success.
pub fn validate(values: DMatrix<f64>) -> Result<DataMatrix> {
    let (n, p) = values.shape();
    if p < 1 {
        return Err(DimError::EmptyColumns);
    }
    if n < 2 {
        return Err(DimError::TooFewRows(n));
    }
    for i in 0..n {
        for j in 0..p {
            if !values[(i, j)].is_finite() {
                return Err(DimError::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(DataMatrix { values })
}

/// Integer class identifiers, one per observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    classes: Vec<i64>,
}

impl Labels {
    pub fn new(classes: Vec<i64>) -> Self {
        Self { classes }
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Distinct class identifiers in ascending order.
    pub fn distinct(&self) -> Vec<i64> {
        let mut c = self.classes.clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// Maps each observation to the position of its class in [`Labels::distinct`].
    pub fn class_indices(&self) -> (Vec<i64>, Vec<usize>) {
        let distinct = self.distinct();
        let idx = self
            .classes
            .iter()
            .map(|c| distinct.binary_search(c).expect("class present"))
            .collect();
        (distinct, idx)
    }

    /// Checks the pairing with a data matrix and the two-class minimum.
    pub fn check_supervised(&self, n: usize) -> Result<()> {
        if self.classes.len() != n {
            return Err(DimError::DimensionMismatch { expected: n, found: self.classes.len() });
        }
        if self.distinct().len() < 2 {
            return Err(DimError::InvalidParameter(
                "supervised methods need at least 2 distinct classes".into(),
            ));
        }
        Ok(())
    }
}

/// Target embedding dimension, `1 <= d < p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TargetDim(usize);

impl TargetDim {
    pub fn new(d: usize, p: usize) -> Result<Self> {
        if d == 0 || d >= p {
            return Err(DimError::DimensionTooLarge { d, limit: p });
        }
        Ok(Self(d))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// Projection type of a reduction method, which fixes which optional
/// fields of [`ReductionResult`] are populated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    Linear,
    Nonlinear,
    FeatureSelection,
}

/// Output of a dimension reduction method.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionResult {
    pub embedding: DMatrix<f64>,
    /// `p x d`, present for linear and feature-selection methods.
    pub projection: Option<DMatrix<f64>>,
    /// 0-based column indices, present for feature-selection methods.
    pub selected_features: Option<Vec<usize>>,
    pub preprocess: PreprocessRecord,
    pub method: String,
    /// Spectral values associated with the embedding columns, when the
    /// method is eigen-based.
    pub eigenvalues: Option<Vec<f64>>,
    /// Fraction of total variance captured per component (PCA only).
    pub explained_variance_ratio: Option<Vec<f64>>,
}

impl ReductionResult {
    pub fn dim(&self) -> usize {
        self.embedding.ncols()
    }

    /// Verifies the field-presence rules for a method of the given kind
    /// trained on `p` variables. Returns a description of the first
    /// violation.
    pub fn check_contract(&self, kind: MethodKind, p: usize) -> std::result::Result<(), String> {
        let d = self.embedding.ncols();
        if d == 0 {
            return Err("embedding has no columns".into());
        }
        if self.embedding.iter().any(|v| !v.is_finite()) {
            return Err("embedding has non-finite entries".into());
        }
        if self.preprocess.dim() != p {
            return Err(format!("preprocess record has dimension {}, expected {p}", self.preprocess.dim()));
        }
        let has_linear = matches!(kind, MethodKind::Linear | MethodKind::FeatureSelection);
        match (&self.projection, has_linear) {
            (Some(proj), true) => {
                if proj.shape() != (p, d) {
                    return Err(format!("projection shape {:?}, expected ({p}, {d})", proj.shape()));
                }
            }
            (None, false) => {}
            (Some(_), false) => return Err("projection present for a nonlinear method".into()),
            (None, true) => return Err("projection missing for a linear method".into()),
        }
        match (&self.selected_features, kind == MethodKind::FeatureSelection) {
            (Some(sel), true) => {
                if sel.len() != d {
                    return Err(format!("{} selected features, expected {d}", sel.len()));
                }
                let mut seen = vec![false; p];
                for &s in sel {
                    if s >= p || seen[s] {
                        return Err(format!("selected feature index {s} is out of range or repeated"));
                    }
                    seen[s] = true;
                }
                let proj = self.projection.as_ref().expect("checked above");
                for (c, &s) in sel.iter().enumerate() {
                    for r in 0..p {
                        let want = if r == s { 1.0 } else { 0.0 };
                        if proj[(r, c)] != want {
                            return Err("projection is not the selector matrix of the selected features".into());
                        }
                    }
                }
            }
            (None, false) => {}
            (Some(_), false) => return Err("selected features present for a non-selection method".into()),
            (None, true) => return Err("selected features missing for a feature-selection method".into()),
        }
        Ok(())
    }
}

/// Output of an intrinsic dimension estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct IdeResult {
    pub estdim: f64,
    /// Per-point estimates, only for bottom-up estimators.
    pub local_estimates: Option<Vec<f64>>,
}

impl IdeResult {
    pub fn check_contract(&self, bottom_up: bool, n: usize) -> std::result::Result<(), String> {
        if !(self.estdim.is_finite() && self.estdim > 0.0) {
            return Err(format!("estdim {} is not a positive real", self.estdim));
        }
        match (&self.local_estimates, bottom_up) {
            (Some(local), true) => {
                if local.len() != n {
                    return Err(format!("{} local estimates, expected {n}", local.len()));
                }
                if let Some(v) = local.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                    return Err(format!("local estimate {v} is not positive"));
                }
                Ok(())
            }
            (None, false) => Ok(()),
            (Some(_), false) => Err("local estimates present for a global estimator".into()),
            (None, true) => Err("local estimates missing for a bottom-up estimator".into()),
        }
    }
}

/// Out-of-sample extension for linear methods: transforms `new_data` with
/// the stored preprocessing record and multiplies by the projection.
pub fn apply_to_new(
    record: &PreprocessRecord,
    projection: &DMatrix<f64>,
    new_data: &DataMatrix,
) -> Result<DMatrix<f64>> {
    let p = record.dim();
    if new_data.ncols() != p {
        return Err(DimError::DimensionMismatch { expected: p, found: new_data.ncols() });
    }
    if projection.nrows() != p {
        return Err(DimError::DimensionMismatch { expected: p, found: projection.nrows() });
    }
    if projection.ncols() < 1 {
        return Err(DimError::InvalidParameter("projection has no columns".into()));
    }
    let transformed = record.transform(new_data.values())?;
    Ok(transformed * projection)
}
