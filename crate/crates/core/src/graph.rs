//! Nearest-neighbor graphs over the rows of a data matrix and all-pairs
//! shortest paths (geodesic distances) on them.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::data::DataMatrix;
use crate::error::{DimError, Result};
use crate::linalg::sq_euclidean;

/// How directed k-NN relations become the final edge set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Symmetrization {
    /// Keep `i - j` if either direction is present.
    #[default]
    Union,
    /// Keep `i - j` only if both directions are present.
    Intersect,
    /// Keep the directed edges as they are.
    Asymmetric,
}

impl Symmetrization {
    pub fn id(self) -> &'static str {
        match self {
            Symmetrization::Union => "union",
            Symmetrization::Intersect => "intersect",
            Symmetrization::Asymmetric => "asymmetric",
        }
    }
}

impl fmt::Display for Symmetrization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Symmetrization {
    type Err = DimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "union" => Ok(Symmetrization::Union),
            "intersect" => Ok(Symmetrization::Intersect),
            "asymmetric" => Ok(Symmetrization::Asymmetric),
            _ => Err(DimError::InvalidParameter(format!("unknown symmetrization '{s}'"))),
        }
    }
}

/// Neighborhood rule used by the graph-based reducers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Neighborhood {
    Knn { k: usize, symmetrization: Symmetrization },
    Eps { eps: f64 },
}

impl Neighborhood {
    pub fn knn(k: usize) -> Self {
        Neighborhood::Knn { k, symmetrization: Symmetrization::Union }
    }

    pub fn build(&self, data: &DataMatrix) -> Result<NeighborGraph> {
        match *self {
            Neighborhood::Knn { k, symmetrization } => knn_graph(data, k, symmetrization),
            Neighborhood::Eps { eps } => eps_graph(data, eps),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// Weighted neighbor graph. Undirected graphs store each edge once with
/// `from < to`; directed graphs store one entry per arc. Edges are sorted by
/// `(from, to)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    n: usize,
    edges: Vec<Edge>,
    directed: bool,
    symmetrization: Symmetrization,
    has_duplicates: bool,
}

impl NeighborGraph {
    /// Builds a graph from explicit edges. Undirected edges are normalized to
    /// `from < to`; self-loops are dropped.
    pub fn from_edges(n: usize, edges: Vec<Edge>, directed: bool) -> Result<Self> {
        let mut out = Vec::with_capacity(edges.len());
        for e in edges {
            if e.from >= n || e.to >= n {
                return Err(DimError::InvalidParameter(format!(
                    "edge ({}, {}) references a node outside 0..{n}",
                    e.from, e.to
                )));
            }
            if e.from == e.to {
                continue;
            }
            if directed || e.from < e.to {
                out.push(e);
            } else {
                out.push(Edge { from: e.to, to: e.from, weight: e.weight });
            }
        }
        out.sort_by_key(|a| (a.from, a.to));
        let has_duplicates = out.iter().any(|e| e.weight == 0.0);
        Ok(Self {
            n,
            edges: out,
            directed,
            symmetrization: if directed { Symmetrization::Asymmetric } else { Symmetrization::Union },
            has_duplicates,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn symmetrization(&self) -> Symmetrization {
        self.symmetrization
    }

    /// Set when some edge joins two identical points (weight 0).
    pub fn has_duplicates(&self) -> bool {
        self.has_duplicates
    }

    /// Adjacency lists treating every edge as undirected. Parallel arcs
    /// between the same pair collapse to the smaller weight.
    pub fn undirected_adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.from].push((e.to, e.weight));
            adj[e.to].push((e.from, e.weight));
        }
        for list in &mut adj {
            list.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
            list.dedup_by_key(|x| x.0);
        }
        adj
    }

    /// Outgoing adjacency lists respecting direction.
    pub fn out_adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        if !self.directed {
            return self.undirected_adjacency();
        }
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.from].push((e.to, e.weight));
        }
        adj
    }
}

fn by_distance_then_index(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))
}

/// For every point, its `k` nearest other points as `(index, distance)`
/// sorted by distance with ties broken by lower index.
pub fn knn_lists(data: &DataMatrix, k: usize) -> Result<Vec<Vec<(usize, f64)>>> {
    let n = data.nrows();
    if k == 0 {
        return Err(DimError::InvalidParameter("k must be at least 1".into()));
    }
    if k >= n {
        return Err(DimError::KTooLarge { k, max: n - 1 });
    }
    let p = data.ncols();
    let rows = data.to_row_major();
    let lists = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = &rows[i * p..(i + 1) * p];
            let mut cand: Vec<(usize, f64)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (j, sq_euclidean(xi, &rows[j * p..(j + 1) * p]).sqrt()))
                .collect();
            if k < cand.len() {
                cand.select_nth_unstable_by(k - 1, by_distance_then_index);
                cand.truncate(k);
            }
            cand.sort_by(by_distance_then_index);
            cand
        })
        .collect();
    Ok(lists)
}

/// k-nearest-neighbor graph with the given symmetrization.
pub fn knn_graph(data: &DataMatrix, k: usize, symmetrization: Symmetrization) -> Result<NeighborGraph> {
    let n = data.nrows();
    let lists = knn_lists(data, k)?;
    let mut edges = Vec::new();
    match symmetrization {
        Symmetrization::Asymmetric => {
            for (i, list) in lists.iter().enumerate() {
                for &(j, w) in list {
                    edges.push(Edge { from: i, to: j, weight: w });
                }
            }
        }
        Symmetrization::Union | Symmetrization::Intersect => {
            let contains = |a: usize, b: usize| lists[a].iter().any(|&(j, _)| j == b);
            for (i, list) in lists.iter().enumerate() {
                for &(j, w) in list {
                    let reverse = contains(j, i);
                    let keep = match symmetrization {
                        Symmetrization::Union => !reverse || i < j,
                        _ => reverse && i < j,
                    };
                    if keep {
                        edges.push(Edge { from: i.min(j), to: i.max(j), weight: w });
                    }
                }
            }
        }
    }
    let directed = symmetrization == Symmetrization::Asymmetric;
    let mut graph = NeighborGraph::from_edges(n, edges, directed)?;
    graph.symmetrization = symmetrization;
    Ok(graph)
}

/// Undirected graph joining every pair within Euclidean distance `eps`.
pub fn eps_graph(data: &DataMatrix, eps: f64) -> Result<NeighborGraph> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(DimError::NonPositiveRadius(eps));
    }
    let n = data.nrows();
    let p = data.ncols();
    let rows = data.to_row_major();
    let edges: Vec<Edge> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let xi = &rows[i * p..(i + 1) * p];
            let rows = &rows;
            (i + 1..n).filter_map(move |j| {
                let d = sq_euclidean(xi, &rows[j * p..(j + 1) * p]).sqrt();
                (d <= eps).then_some(Edge { from: i, to: j, weight: d })
            })
        })
        .collect();
    NeighborGraph::from_edges(n, edges, false)
}

/// All-pairs shortest-path lengths; unreachable pairs hold `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicMatrix {
    dist: DMatrix<f64>,
}

impl GeodesicMatrix {
    pub fn n(&self) -> usize {
        self.dist.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dist[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.dist
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.dist
    }
}

/// Floyd-Warshall over the graph's edges. Rows are relaxed in parallel for
/// each pivot; pivot order is sequential.
pub fn floyd_warshall(graph: &NeighborGraph) -> Result<GeodesicMatrix> {
    let n = graph.n();
    let mut d = vec![f64::INFINITY; n * n];
    for i in 0..n {
        d[i * n + i] = 0.0;
    }
    for e in graph.edges() {
        if e.weight < 0.0 || e.weight.is_nan() {
            return Err(DimError::NegativeWeight(e.from, e.to, e.weight));
        }
        let ij = e.from * n + e.to;
        d[ij] = d[ij].min(e.weight);
        if !graph.is_directed() {
            let ji = e.to * n + e.from;
            d[ji] = d[ji].min(e.weight);
        }
    }
    for k in 0..n {
        let pivot_row: Vec<f64> = d[k * n..(k + 1) * n].to_vec();
        d.par_chunks_mut(n).for_each(|row| {
            let dik = row[k];
            if dik == f64::INFINITY {
                return;
            }
            for (dij, dkj) in row.iter_mut().zip(&pivot_row) {
                let via = dik + dkj;
                if via < *dij {
                    *dij = via;
                }
            }
        });
    }
    Ok(GeodesicMatrix { dist: DMatrix::from_row_slice(n, n, &d) })
}

/// Connected components, treating edges as undirected. Components are
/// listed in order of their smallest member; members are ascending.
pub fn connected_components(graph: &NeighborGraph) -> Vec<Vec<usize>> {
    let adj = graph.undirected_adjacency();
    let mut seen = vec![false; graph.n()];
    let mut components = Vec::new();
    for start in 0..graph.n() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut members = Vec::new();
        while let Some(u) = stack.pop() {
            members.push(u);
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}

/// Errors with `DisconnectedGraph` unless the graph has one component.
pub fn require_connected(graph: &NeighborGraph) -> Result<()> {
    let comps = connected_components(graph);
    if comps.len() > 1 {
        return Err(DimError::DisconnectedGraph { sizes: comps.iter().map(Vec::len).collect() });
    }
    Ok(())
}
