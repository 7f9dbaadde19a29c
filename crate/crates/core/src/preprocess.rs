//! The five preprocessing operations and the record that replays them on
//! new data.
//!
//! A record stores the affine part (column means and scales) and an optional
//! rotation followed by per-component scaling. Applying it computes
//! `((x - means) / scales) * rotation / component_scales`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::data::DataMatrix;
use crate::error::{DimError, Result};
use crate::linalg::{self, SortOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PreprocessKind {
    None,
    #[default]
    Center,
    /// Unit variance per column, means left in place.
    Scale,
    /// Center then scale.
    Cscale,
    Decorrelate,
    Whiten,
}

impl PreprocessKind {
    pub const ALL: [PreprocessKind; 6] = [
        PreprocessKind::None,
        PreprocessKind::Center,
        PreprocessKind::Scale,
        PreprocessKind::Cscale,
        PreprocessKind::Decorrelate,
        PreprocessKind::Whiten,
    ];

    pub fn id(self) -> &'static str {
        match self {
            PreprocessKind::None => "none",
            PreprocessKind::Center => "center",
            PreprocessKind::Scale => "scale",
            PreprocessKind::Cscale => "cscale",
            PreprocessKind::Decorrelate => "decorrelate",
            PreprocessKind::Whiten => "whiten",
        }
    }

    fn centers(self) -> bool {
        matches!(
            self,
            PreprocessKind::Center | PreprocessKind::Cscale | PreprocessKind::Decorrelate | PreprocessKind::Whiten
        )
    }

    fn rotates(self) -> bool {
        matches!(self, PreprocessKind::Decorrelate | PreprocessKind::Whiten)
    }
}

impl fmt::Display for PreprocessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for PreprocessKind {
    type Err = DimError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| DimError::InvalidParameter(format!("unknown preprocessing kind '{s}'")))
    }
}

/// Saved preprocessing transformation.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessRecord {
    pub kind: PreprocessKind,
    pub column_means: Vec<f64>,
    pub column_scales: Vec<f64>,
    /// `p x p`; identity unless the kind rotates.
    pub rotation: DMatrix<f64>,
    /// Divisors applied after the rotation; all ones except for whitening.
    pub component_scales: Vec<f64>,
}

impl PreprocessRecord {
    pub fn identity(p: usize) -> Self {
        Self {
            kind: PreprocessKind::None,
            column_means: vec![0.0; p],
            column_scales: vec![1.0; p],
            rotation: DMatrix::identity(p, p),
            component_scales: vec![1.0; p],
        }
    }

    pub fn dim(&self) -> usize {
        self.column_means.len()
    }

    /// Applies the saved transformation to an `m x p` matrix.
    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let p = self.dim();
        if x.ncols() != p {
            return Err(DimError::DimensionMismatch { expected: p, found: x.ncols() });
        }
        let mut out = x.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            let (mu, s) = (self.column_means[j], self.column_scales[j]);
            col.iter_mut().for_each(|v| *v = (*v - mu) / s);
        }
        if self.kind.rotates() {
            out *= &self.rotation;
            for (j, mut col) in out.column_iter_mut().enumerate() {
                let s = self.component_scales[j];
                col.iter_mut().for_each(|v| *v /= s);
            }
        }
        Ok(out)
    }
}

fn column_variance(col: &[f64], mean: f64) -> f64 {
    let n = col.len() as f64;
    col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}

fn is_zero_variance(var: f64, mean: f64) -> bool {
    var <= (1e-12 * mean.abs()).powi(2)
}

/// Transforms `data` according to `kind` and returns the matching record.
pub fn preprocess(data: &DataMatrix, kind: PreprocessKind) -> Result<(DataMatrix, PreprocessRecord)> {
    let x = data.values();
    let p = x.ncols();
    let raw_means = linalg::column_means(x);
    let mut record = PreprocessRecord::identity(p);
    record.kind = kind;

    if matches!(kind, PreprocessKind::Scale | PreprocessKind::Cscale | PreprocessKind::Whiten) {
        for (j, col) in x.column_iter().enumerate() {
            let col: Vec<f64> = col.iter().copied().collect();
            let var = column_variance(&col, raw_means[j]);
            if is_zero_variance(var, raw_means[j]) {
                return Err(DimError::ZeroVariance(j));
            }
            if matches!(kind, PreprocessKind::Scale | PreprocessKind::Cscale) {
                record.column_scales[j] = var.sqrt();
            }
        }
    }
    if kind.centers() {
        record.column_means = raw_means;
    }
    if kind.rotates() {
        let centered = linalg::center_columns(x, &record.column_means);
        let cov = linalg::gram_of_columns(&centered) / (x.nrows() - 1) as f64;
        let eig = linalg::symmetric_eigen(&cov, SortOrder::Descending);
        let max = eig.values[0];
        let min = eig.values[p - 1];
        if !(max > 0.0) || min < 1e-12 * max {
            let ratio = if max > 0.0 { min / max } else { 0.0 };
            return Err(DimError::RankDeficient(ratio));
        }
        if kind == PreprocessKind::Whiten {
            record.component_scales = eig.values.iter().map(|v| v.sqrt()).collect();
        }
        record.rotation = eig.vectors;
    }
    let transformed = DataMatrix::new(record.transform(x)?)?;
    Ok((transformed, record))
}
