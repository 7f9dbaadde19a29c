//! Dimension reduction methods under the common pipeline: preprocess the
//! data, run the algorithm on the transformed matrix, return the embedding
//! together with the preprocessing record (and the projection for linear
//! methods).

mod linear;
mod select;
mod spectral;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::data::{DataMatrix, Labels, MethodKind, ReductionResult};
use crate::error::{DimError, Result};
use crate::graph::{NeighborGraph, Neighborhood};
use crate::kernels::KernelSpec;
use crate::preprocess::PreprocessKind;

pub use linear::{lda, lpp, pca, pca_svd};
pub use select::{fisher_score, fisher_scores, laplacian_score, laplacian_scores};
pub use spectral::{
    classical_mds, isomap, kernel_pca, laplacian_eigenmaps, lle, lle_weights, mds_from_distances,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Pca,
    PcaSvd,
    Mds,
    Lda,
    Lpp,
    Isomap,
    Lle,
    LapEig,
    Kpca,
    FisherScore,
    LaplacianScore,
}

impl Method {
    pub const ALL: [Method; 11] = [
        Method::Pca,
        Method::PcaSvd,
        Method::Mds,
        Method::Lda,
        Method::Lpp,
        Method::Isomap,
        Method::Lle,
        Method::LapEig,
        Method::Kpca,
        Method::FisherScore,
        Method::LaplacianScore,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Method::Pca => "pca",
            Method::PcaSvd => "pcasvd",
            Method::Mds => "mds",
            Method::Lda => "lda",
            Method::Lpp => "lpp",
            Method::Isomap => "isomap",
            Method::Lle => "lle",
            Method::LapEig => "lapeig",
            Method::Kpca => "kpca",
            Method::FisherScore => "fscore",
            Method::LaplacianScore => "lscore",
        }
    }

    pub fn kind(self) -> MethodKind {
        match self {
            Method::Pca | Method::PcaSvd | Method::Lda | Method::Lpp => MethodKind::Linear,
            Method::FisherScore | Method::LaplacianScore => MethodKind::FeatureSelection,
            Method::Mds | Method::Isomap | Method::Lle | Method::LapEig | Method::Kpca => MethodKind::Nonlinear,
        }
    }

    pub fn is_supervised(self) -> bool {
        matches!(self, Method::Lda | Method::FisherScore)
    }

    pub fn needs_neighborhood(self) -> bool {
        matches!(
            self,
            Method::Lpp | Method::Isomap | Method::Lle | Method::LapEig | Method::LaplacianScore
        )
    }

    pub fn uses_kernel(self) -> bool {
        self == Method::Kpca
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = DimError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| DimError::UnknownMethod(s.to_string()))
    }
}

/// Everything a reducer needs besides the data.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducerConfig {
    pub method: Method,
    pub d: usize,
    pub preprocess: PreprocessKind,
    pub neighborhood: Option<Neighborhood>,
    /// Kernel for kernel PCA; defaults to a Gaussian with median-heuristic
    /// bandwidth.
    pub kernel: Option<KernelSpec>,
    pub labels: Option<Labels>,
}

impl ReducerConfig {
    pub fn new(method: Method, d: usize) -> Self {
        Self { method, d, preprocess: PreprocessKind::Center, neighborhood: None, kernel: None, labels: None }
    }

    pub fn with_neighborhood(mut self, nbhd: Neighborhood) -> Self {
        self.neighborhood = Some(nbhd);
        self
    }

    pub fn with_kernel(mut self, kernel: KernelSpec) -> Self {
        self.kernel = Some(kernel);
        self
    }

    pub fn with_labels(mut self, labels: Labels) -> Self {
        self.labels = Some(labels);
        self
    }

    pub fn with_preprocess(mut self, kind: PreprocessKind) -> Self {
        self.preprocess = kind;
        self
    }

    /// Checks that the options fit the method: labels exactly for supervised
    /// methods, a neighborhood exactly for graph-based ones, a kernel only
    /// for kernel PCA.
    pub fn check(&self, n: usize) -> Result<()> {
        let m = self.method;
        match (&self.labels, m.is_supervised()) {
            (Some(labels), true) => labels.check_supervised(n)?,
            (None, true) => return Err(DimError::InvalidParameter(format!("method '{m}' requires labels"))),
            (Some(_), false) => {
                return Err(DimError::InvalidParameter(format!("method '{m}' is unsupervised and takes no labels")))
            }
            (None, false) => {}
        }
        match (&self.neighborhood, m.needs_neighborhood()) {
            (None, true) => {
                return Err(DimError::InvalidParameter(format!("method '{m}' requires a neighborhood (k or eps)")))
            }
            (Some(_), false) => {
                return Err(DimError::InvalidParameter(format!("method '{m}' does not use a neighborhood")))
            }
            _ => {}
        }
        if self.kernel.is_some() && !m.uses_kernel() {
            return Err(DimError::InvalidParameter(format!("method '{m}' does not use a kernel")));
        }
        if let Some(k) = &self.kernel {
            k.check()?;
        }
        Ok(())
    }
}

/// Runs the configured method.
pub fn reduce(data: &DataMatrix, config: &ReducerConfig) -> Result<ReductionResult> {
    config.check(data.nrows())?;
    let d = config.d;
    let kind = config.preprocess;
    let nbhd = || config.neighborhood.expect("checked");
    let labels = || config.labels.as_ref().expect("checked");
    match config.method {
        Method::Pca => pca(data, d, kind),
        Method::PcaSvd => pca_svd(data, d, kind),
        Method::Mds => classical_mds(data, d, kind),
        Method::Lda => lda(data, labels(), d, kind),
        Method::Lpp => lpp(data, d, nbhd(), kind),
        Method::Isomap => isomap(data, d, nbhd(), kind),
        Method::Lle => lle(data, d, nbhd(), kind),
        Method::LapEig => laplacian_eigenmaps(data, d, nbhd(), kind),
        Method::Kpca => {
            let kernel = config.kernel.unwrap_or(KernelSpec::Gaussian { bandwidth: None });
            kernel_pca(data, d, kernel, kind)
        }
        Method::FisherScore => fisher_score(data, labels(), d, kind),
        Method::LaplacianScore => laplacian_score(data, d, nbhd(), kind),
    }
}

/// Heat-kernel weights `exp(-|xi - xj|² / t)` on the undirected version of
/// `graph`, with `t` the mean squared edge length. Returns the weighted
/// undirected edges (each once, `i < j`) and `t`.
pub fn heat_kernel_edges(graph: &NeighborGraph) -> (Vec<(usize, usize, f64)>, f64) {
    let adj = graph.undirected_adjacency();
    let mut edges = Vec::new();
    for (i, list) in adj.iter().enumerate() {
        for &(j, w) in list {
            if i < j {
                edges.push((i, j, w));
            }
        }
    }
    let t = if edges.is_empty() {
        1.0
    } else {
        edges.iter().map(|e| e.2 * e.2).sum::<f64>() / edges.len() as f64
    };
    let t = if t > 0.0 { t } else { 1.0 };
    let weighted = edges.into_iter().map(|(i, j, w)| (i, j, (-w * w / t).exp())).collect();
    (weighted, t)
}

/// Dense heat-kernel affinity `W` and degree vector for a graph.
pub fn heat_kernel_affinity(graph: &NeighborGraph) -> (DMatrix<f64>, Vec<f64>) {
    let n = graph.n();
    let (edges, _) = heat_kernel_edges(graph);
    let mut w = DMatrix::zeros(n, n);
    for (i, j, v) in edges {
        w[(i, j)] = v;
        w[(j, i)] = v;
    }
    let degree = w.row_iter().map(|r| r.sum()).collect();
    (w, degree)
}

fn selector(p: usize, selected: &[usize]) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(p, selected.len());
    for (c, &r) in selected.iter().enumerate() {
        s[(r, c)] = 1.0;
    }
    s
}
