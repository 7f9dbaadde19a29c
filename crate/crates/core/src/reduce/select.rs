//! Feature-selection reducers: the embedding is a subset of the
//! (preprocessed) columns and the projection is the matching 0/1 selector.

use std::cmp::Ordering;

use super::{heat_kernel_edges, selector};
use crate::data::{DataMatrix, Labels, ReductionResult, TargetDim};
use crate::error::{DimError, Result};
use crate::graph::{Neighborhood, NeighborGraph};
use crate::preprocess::{preprocess, PreprocessKind, PreprocessRecord};

fn selection_result(method: &str, x: &DataMatrix, record: PreprocessRecord, selected: Vec<usize>) -> ReductionResult {
    let projection = selector(x.ncols(), &selected);
    ReductionResult {
        embedding: x.values().select_columns(&selected),
        projection: Some(projection),
        selected_features: Some(selected),
        preprocess: record,
        method: method.to_string(),
        eigenvalues: None,
        explained_variance_ratio: None,
    }
}

/// Indices of the `d` best scores. `better` orders a preferred score first;
/// ties keep the lower index.
fn top_indices(scores: &[f64], d: usize, better: impl Fn(f64, f64) -> Ordering) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| better(scores[a], scores[b]).then(a.cmp(&b)));
    idx.truncate(d);
    idx
}

/// Per-feature Fisher scores `Σ_c n_c (μ_cr - μ_r)² / Σ_c n_c σ²_cr`, with
/// class variances taken about the class mean (denominator `n_c`). A feature
/// with zero within-class spread but nonzero separation scores `+inf`.
pub fn fisher_scores(x: &DataMatrix, labels: &Labels) -> Result<Vec<f64>> {
    labels.check_supervised(x.nrows())?;
    let (classes, idx) = labels.class_indices();
    let c = classes.len();
    let xv = x.values();
    let n = xv.nrows();
    let mut counts = vec![0.0; c];
    for &k in &idx {
        counts[k] += 1.0;
    }
    let mut scores = Vec::with_capacity(xv.ncols());
    for (r, col) in xv.column_iter().enumerate() {
        let (lo, hi) = col.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        if lo == hi {
            return Err(DimError::DegenerateVariance(r));
        }
        let mean = col.sum() / n as f64;
        let mut class_mean = vec![0.0; c];
        for i in 0..n {
            class_mean[idx[i]] += col[i];
        }
        for k in 0..c {
            class_mean[k] /= counts[k];
        }
        let mut within = 0.0;
        for i in 0..n {
            within += (col[i] - class_mean[idx[i]]).powi(2);
        }
        let between: f64 = (0..c).map(|k| counts[k] * (class_mean[k] - mean).powi(2)).sum();
        let score = if within > 0.0 {
            between / within
        } else if between > 0.0 {
            f64::INFINITY
        } else {
            return Err(DimError::DegenerateVariance(r));
        };
        scores.push(score);
    }
    Ok(scores)
}

/// Selects the `d` features with the largest Fisher score.
pub fn fisher_score(data: &DataMatrix, labels: &Labels, d: usize, kind: PreprocessKind) -> Result<ReductionResult> {
    let d = TargetDim::new(d, data.ncols())?.get();
    let (x, record) = preprocess(data, kind)?;
    let scores = fisher_scores(&x, labels)?;
    let selected = top_indices(&scores, d, |a, b| b.total_cmp(&a));
    Ok(selection_result("fscore", &x, record, selected))
}

/// Laplacian scores `f̃ᵀLf̃ / f̃ᵀDf̃` of every column on the heat-kernel graph,
/// where `f̃` removes the degree-weighted mean.
pub fn laplacian_scores(x: &DataMatrix, graph: &NeighborGraph) -> Result<Vec<f64>> {
    let xv = x.values();
    let n = xv.nrows();
    let (edges, _) = heat_kernel_edges(graph);
    let mut degree = vec![0.0; n];
    for &(i, j, w) in &edges {
        degree[i] += w;
        degree[j] += w;
    }
    let total_degree: f64 = degree.iter().sum();
    if total_degree <= 0.0 {
        return Err(DimError::ZeroWeightedVariance(0));
    }
    let mut scores = Vec::with_capacity(xv.ncols());
    for (r, col) in xv.column_iter().enumerate() {
        let weighted_mean = col.iter().zip(&degree).map(|(f, dg)| f * dg).sum::<f64>() / total_degree;
        let ft: Vec<f64> = col.iter().map(|f| f - weighted_mean).collect();
        let raw: f64 = col.iter().zip(&degree).map(|(f, dg)| dg * f * f).sum();
        let den: f64 = ft.iter().zip(&degree).map(|(f, dg)| dg * f * f).sum();
        if den <= 1e-20 * raw || den == 0.0 {
            return Err(DimError::ZeroWeightedVariance(r));
        }
        let num: f64 = edges.iter().map(|&(i, j, w)| w * (ft[i] - ft[j]).powi(2)).sum();
        scores.push(num / den);
    }
    Ok(scores)
}

/// Selects the `d` features with the smallest Laplacian score.
pub fn laplacian_score(
    data: &DataMatrix,
    d: usize,
    nbhd: Neighborhood,
    kind: PreprocessKind,
) -> Result<ReductionResult> {
    let d = TargetDim::new(d, data.ncols())?.get();
    let (x, record) = preprocess(data, kind)?;
    let graph = nbhd.build(&x)?;
    let scores = laplacian_scores(&x, &graph)?;
    let selected = top_indices(&scores, d, |a, b| a.total_cmp(&b));
    Ok(selection_result("lscore", &x, record, selected))
}
