//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use dimkit::bench::{run_bench, BenchConfig, BenchMethod};
use dimkit::cli::read_matrix;
use dimkit::estimate::{est_corr_dim, est_mle, est_pca_dim, est_two_nn, Estimator};
use dimkit::generate::{generate, Model};
use dimkit::graph::{floyd_warshall, knn_graph, Edge, NeighborGraph, Neighborhood, Symmetrization};
use dimkit::kernels::{center_kernel, kernel_matrix, KernelSpec};
use dimkit::linalg::pearson;
use dimkit::reduce::{lle_weights, pca, pca_svd, reduce, Method, ReducerConfig};
use dimkit::{apply_to_new, preprocess, DataMatrix, Labels, MethodKind, PreprocessKind};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal))
}

fn random_orthogonal(rng: &mut ChaCha8Rng, p: usize) -> DMatrix<f64> {
    gaussian(rng, p, p).qr().q()
}

/// Two-pass column means and sample covariance.
fn covariance_oracle(x: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, p) = x.shape();
    let means: Vec<f64> = (0..p).map(|j| (0..n).map(|i| x[(i, j)]).sum::<f64>() / n as f64).collect();
    DMatrix::from_fn(p, p, |a, b| {
        (0..n).map(|i| (x[(i, a)] - means[a]) * (x[(i, b)] - means[b])).sum::<f64>() / (n - 1) as f64
    })
}

/// Cyclic Jacobi eigendecomposition; eigenpairs sorted by descending value.
fn jacobi_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let p = m.nrows();
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(p, p);
    for _ in 0..100 {
        let off: f64 = (0..p).flat_map(|i| (0..p).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[(i, j)].powi(2)).sum();
        if off < 1e-30 * a.norm_squared() {
            break;
        }
        for r in 0..p {
            for s in r + 1..p {
                if a[(r, s)] == 0.0 {
                    continue;
                }
                let theta = (a[(s, s)] - a[(r, r)]) / (2.0 * a[(r, s)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..p {
                    let (akr, aks) = (a[(k, r)], a[(k, s)]);
                    a[(k, r)] = c * akr - sn * aks;
                    a[(k, s)] = sn * akr + c * aks;
                }
                for k in 0..p {
                    let (ark, ask) = (a[(r, k)], a[(s, k)]);
                    a[(r, k)] = c * ark - sn * ask;
                    a[(s, k)] = sn * ark + c * ask;
                }
                for k in 0..p {
                    let (vkr, vks) = (v[(k, r)], v[(k, s)]);
                    v[(k, r)] = c * vkr - sn * vks;
                    v[(k, s)] = sn * vkr + c * vks;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| a[(y, y)].total_cmp(&a[(x, x)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DMatrix::from_fn(p, p, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// Sine of the largest principal angle bound: `‖(I − QQᵀ)P‖_F` with `Q`
/// orthonormal.
fn subspace_gap(q: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
    (p - q * (q.transpose() * p)).norm()
}

fn sign_aligned_max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .zip(b.column_iter())
        .map(|(ca, cb)| {
            let s = if ca.dot(&cb) < 0.0 { -1.0 } else { 1.0 };
            (ca - cb * s).amax()
        })
        .fold(0.0, f64::max)
}

fn criterion_pca() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut worst_angle, mut worst_diff) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let p = rng.random_range(2..=12);
        let n = rng.random_range(3 * p.max(10)..=300);
        let d = rng.random_range(1..p);
        let spreads: Vec<f64> = (0..p).map(|j| (p - j) as f64 * 1.5 + rng.random::<f64>()).collect();
        let mut z = gaussian(&mut rng, n, p);
        for (j, s) in spreads.iter().enumerate() {
            z.column_mut(j).scale_mut(*s);
        }
        let shift = DMatrix::from_fn(1, p, |_, _| 5.0 * rng.random::<f64>());
        let mut x = z * random_orthogonal(&mut rng, p);
        for mut row in x.row_iter_mut() {
            row += &shift;
        }
        let data = DataMatrix::new(x.clone()).unwrap();
        let (values, vectors) = jacobi_eigen(&covariance_oracle(&x));
        ensure!(values.windows(2).all(|w| w[0] - w[1] > 1e-6 * values[0]), "oracle eigenvalues not distinct");
        let oracle = vectors.columns(0, d).into_owned();
        let cov = pca(&data, d, PreprocessKind::Center).map_err(|e| e.to_string())?;
        let svd = pca_svd(&data, d, PreprocessKind::Center).map_err(|e| e.to_string())?;
        let angle = subspace_gap(&oracle, cov.projection.as_ref().unwrap());
        let diff = sign_aligned_max_diff(&cov.embedding, &svd.embedding);
        worst_angle = worst_angle.max(angle);
        worst_diff = worst_diff.max(diff);
        ensure!(angle <= 1e-8, "principal angle bound {angle:e} (n={n}, p={p}, d={d})");
        ensure!(diff <= 1e-8, "pca vs pcasvd {diff:e} (n={n}, p={p}, d={d})");
    }
    Ok(format!("max angle bound {worst_angle:.2e}, max pca/pcasvd diff {worst_diff:.2e}"))
}

#[derive(PartialEq)]
struct State(f64, usize);

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(self.1.cmp(&other.1))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], src: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    dist[src] = 0.0;
    let mut heap = BinaryHeap::from([State(0.0, src)]);
    while let Some(State(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            if d + w < dist[v] {
                dist[v] = d + w;
                heap.push(State(dist[v], v));
            }
        }
    }
    dist
}

fn criterion_geodesics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    let mut disconnected = 0;
    for g in 0..100 {
        let n = rng.random_range(2..=50);
        let directed = g % 2 == 1;
        let density = rng.random_range(0.02..0.3);
        let mut edges = Vec::new();
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if i == j || (!directed && j < i) || rng.random::<f64>() >= density {
                    continue;
                }
                let w = rng.random_range(0.1..10.0);
                edges.push(Edge { from: i, to: j, weight: w });
                adj[i].push((j, w));
                if !directed {
                    adj[j].push((i, w));
                }
            }
        }
        let graph = NeighborGraph::from_edges(n, edges, directed).map_err(|e| e.to_string())?;
        let fw = floyd_warshall(&graph).map_err(|e| e.to_string())?;
        for s in 0..n {
            let oracle = dijkstra(&adj, s);
            for t in 0..n {
                let (a, b) = (fw.get(s, t), oracle[t]);
                if b.is_infinite() {
                    disconnected += 1;
                    ensure!(a == f64::INFINITY, "graph {g}: ({s},{t}) expected +inf, got {a}");
                } else {
                    worst = worst.max((a - b).abs());
                    ensure!((a - b).abs() <= 1e-12, "graph {g}: ({s},{t}) {a} vs {b}");
                }
            }
        }
    }
    Ok(format!("max deviation {worst:.2e}, {disconnected} unreachable pairs matched"))
}

fn criterion_preprocess() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (mut w_err, mut s_err, mut r_err) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let p = rng.random_range(2..=8);
        let n = rng.random_range(40..=200);
        let mix = gaussian(&mut rng, p, p) + DMatrix::<f64>::identity(p, p) * 2.0;
        let mut x = gaussian(&mut rng, n, p) * mix;
        for (j, mut col) in x.column_iter_mut().enumerate() {
            col.apply(|v| *v = *v * (j + 1) as f64 + 10.0 * j as f64);
        }
        let data = DataMatrix::new(x.clone()).unwrap();
        for kind in PreprocessKind::ALL {
            let (out, rec) = preprocess(&data, kind).map_err(|e| format!("{kind:?}: {e}"))?;
            let manual = DMatrix::from_fn(n, p, |i, j| (x[(i, j)] - rec.column_means[j]) / rec.column_scales[j]);
            let manual = if matches!(kind, PreprocessKind::Decorrelate | PreprocessKind::Whiten) {
                let mut r = manual * &rec.rotation;
                for (j, mut col) in r.column_iter_mut().enumerate() {
                    col /= rec.component_scales[j];
                }
                r
            } else {
                manual
            };
            let fidelity = (&manual - out.values()).amax();
            r_err = r_err.max(fidelity);
            ensure!(fidelity <= 1e-10, "{kind:?} record fidelity {fidelity:e}");
            let cov = covariance_oracle(out.values());
            match kind {
                PreprocessKind::Whiten => {
                    let e = (cov - DMatrix::<f64>::identity(p, p)).amax();
                    w_err = w_err.max(e);
                    ensure!(e <= 1e-8, "whiten |cov - I| = {e:e}");
                }
                PreprocessKind::Cscale => {
                    let e = (0..p).map(|j| (cov[(j, j)] - 1.0).abs()).fold(0.0, f64::max);
                    s_err = s_err.max(e);
                    ensure!(e <= 1e-10, "cscale variance error {e:e}");
                }
                _ => {}
            }
        }
    }
    Ok(format!("whiten {w_err:.2e}, cscale {s_err:.2e}, record {r_err:.2e}"))
}

fn criterion_kernels() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let data = DataMatrix::new(DMatrix::from_fn(100, 6, |_, _| rng.random::<f64>() + 0.01)).unwrap();
    let mut worst_neg = 0.0f64;
    let mut worst_sum = 0.0f64;
    for id in KernelSpec::IDS {
        let spec = KernelSpec::from_id(id, None).map_err(|e| e.to_string())?;
        let k = kernel_matrix(&data, spec).map_err(|e| format!("{id}: {e}"))?;
        let g = k.as_matrix();
        ensure!(g == &g.transpose(), "{id}: gram not exactly symmetric");
        if spec.is_positive_definite() {
            let eig = g.clone().symmetric_eigen().eigenvalues;
            let (min, max) = (eig.min(), eig.max());
            worst_neg = worst_neg.max(-min / max);
            ensure!(min >= -1e-8 * max, "{id}: min eigenvalue {min:e}, max {max:e}");
        }
        let c = center_kernel(&k);
        let cm = c.as_matrix();
        ensure!(cm == &cm.transpose(), "{id}: centered gram not symmetric");
        let sums = cm.row_sum().amax().max(cm.column_sum().amax());
        worst_sum = worst_sum.max(sums);
        ensure!(sums <= 1e-8, "{id}: centered row/column sum {sums:e}");
    }
    Ok(format!("{} kernels, worst -min/max {worst_neg:.2e}, worst centered sum {worst_sum:.2e}", KernelSpec::IDS.len()))
}

fn criterion_isomap() -> Outcome {
    let start = Instant::now();
    let (data, _) = generate(Model::SwissRoll, 800, 0.0, 2024).map_err(|e| e.to_string())?;
    let config = ReducerConfig::new(Method::Isomap, 2).with_neighborhood(Neighborhood::knn(10));
    let result = reduce(&data, &config).map_err(|e| e.to_string())?;
    let geo = floyd_warshall(&knn_graph(&data, 10, Symmetrization::Union).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let y = &result.embedding;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for i in 0..800 {
        for j in i + 1..800 {
            a.push((y.row(i) - y.row(j)).norm());
            b.push(geo.get(i, j));
        }
    }
    let r = pearson(&a, &b);
    let secs = start.elapsed().as_secs_f64();
    ensure!(r >= 0.95, "Pearson {r:.4} < 0.95");
    ensure!(secs < 30.0, "took {secs:.1}s");
    Ok(format!("Pearson {r:.4}, {secs:.2}s"))
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let m = b.len();
    for c in 0..m {
        let piv = (c..m).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..m {
            let f = a[r][c] / a[c][c];
            for k in c..m {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        x[r] = (b[r] - (r + 1..m).map(|k| a[r][k] * x[k]).sum::<f64>()) / a[r][r];
    }
    x
}

fn criterion_lle() -> Outcome {
    let (roll, _) = generate(Model::SwissRoll, 800, 0.0, 7).map_err(|e| e.to_string())?;
    let rows = roll.to_row_major();
    let lists = brute_knn(&rows, 800, 3, 10);
    let weights = lle_weights(&roll, &lists).map_err(|e| e.to_string())?;
    let worst_sum = weights.iter().map(|r| (r.iter().map(|(_, w)| w).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
    ensure!(worst_sum <= 1e-10, "weight row sum off by {worst_sum:e}");

    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (n, p, k) = (12, 5, 4);
    let x = gaussian(&mut rng, n, p);
    let data = DataMatrix::new(x.clone()).unwrap();
    let lists = brute_knn(&data.to_row_major(), n, p, k);
    let weights = lle_weights(&data, &lists).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for i in 0..n {
        // KKT system of min wᵀGw subject to Σw = 1
        let mut a = vec![vec![0.0; k + 1]; k + 1];
        for r in 0..k {
            for c in 0..k {
                a[r][c] = (0..p).map(|t| (x[(i, t)] - x[(lists[i][r], t)]) * (x[(i, t)] - x[(lists[i][c], t)])).sum();
            }
            a[r][k] = 1.0;
            a[k][r] = 1.0;
        }
        let mut b = vec![0.0; k + 1];
        b[k] = 1.0;
        let w = gauss_solve(a, b);
        for (r, &(j, wj)) in weights[i].iter().enumerate() {
            ensure!(j == lists[i][r], "neighbor order changed");
            worst = worst.max((wj - w[r]).abs());
        }
    }
    ensure!(worst <= 1e-8, "n=12 oracle deviation {worst:e}");
    Ok(format!("row sums within {worst_sum:.2e}, oracle deviation {worst:.2e}"))
}

fn brute_knn(rows: &[f64], n: usize, p: usize, k: usize) -> Vec<Vec<usize>> {
    (0..n)
        .map(|i| {
            let mut d: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| ((0..p).map(|t| (rows[i * p + t] - rows[j * p + t]).powi(2)).sum(), j))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

fn uniform_embedded(n: usize, intrinsic: usize, ambient: usize, seed: u64) -> DataMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = DMatrix::from_fn(n, intrinsic, |_, _| rng.random::<f64>());
    let q = random_orthogonal(&mut rng, ambient);
    DataMatrix::new(z * q.rows(0, intrinsic)).unwrap()
}

fn criterion_ide() -> Outcome {
    let start = Instant::now();
    let line = uniform_embedded(2000, 1, 10, 707);
    let mle = est_mle(&line, 6, 12).map_err(|e| e.to_string())?.estdim;
    let two = est_two_nn(&line).map_err(|e| e.to_string())?.estdim;
    let corr = est_corr_dim(&line, 20).map_err(|e| e.to_string())?.estdim;
    for (name, v) in [("mle", mle), ("twonn", two), ("corrdim", corr)] {
        ensure!((0.8..=1.3).contains(&v), "line {name} = {v}");
    }
    let cube = uniform_embedded(2000, 5, 10, 708);
    let cube_mle = est_mle(&cube, 6, 12).map_err(|e| e.to_string())?.estdim;
    ensure!((4.0..=6.0).contains(&cube_mle), "hypercube mle = {cube_mle}");
    let (low, _) = generate(Model::LowRank { ambient: 72, intrinsic: 12 }, 2000, 0.0, 709).map_err(|e| e.to_string())?;
    let pcadim = est_pca_dim(&low, 0.95).map_err(|e| e.to_string())?.estdim;
    ensure!(pcadim == 12.0, "lowrank pcadim = {pcadim}");
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 60.0, "took {secs:.1}s");
    Ok(format!(
        "line mle {mle:.3} twonn {two:.3} corrdim {corr:.3}; cube mle {cube_mle:.3}; lowrank pcadim {pcadim}; {secs:.2}s"
    ))
}

fn criterion_bench() -> Outcome {
    let config = BenchConfig { sizes: vec![100_000], repeats: 3, seed: 808, ..BenchConfig::default() };
    let records = run_bench(&config).map_err(|e| e.to_string())?;
    let time = |m: BenchMethod| records.iter().find(|r| r.method == m).map(|r| r.wall_time_seconds).unwrap();
    let (cov, svd) = (time(BenchMethod::PcaCov), time(BenchMethod::PcaSvd));
    let mismatch = records[0].mismatch;
    ensure!(cov <= svd, "pca-cov {cov:.4}s slower than pca-svd {svd:.4}s");
    ensure!(mismatch <= 1e-6, "mismatch {mismatch:e}");
    Ok(format!("pca-cov {cov:.4}s <= pca-svd {svd:.4}s, mismatch {mismatch:.2e}"))
}

fn criterion_contracts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let (n, p) = (90, 5);
    let mut x = gaussian(&mut rng, n, p);
    let labels: Vec<i64> = (0..n).map(|i| (i % 3) as i64).collect();
    for i in 0..n {
        x[(i, labels[i] as usize)] += 4.0;
    }
    let data = DataMatrix::new(x).unwrap();
    let mut ids: Vec<&str> = Method::ALL.iter().map(|m| m.id()).collect();
    ids.sort_unstable();
    ids.dedup();
    ensure!(ids.len() == Method::ALL.len(), "duplicate method ids");
    for m in Method::ALL {
        ensure!(m.id().parse::<Method>().ok() == Some(m), "{m} does not round-trip its id");
        let mut config = ReducerConfig::new(m, 2);
        if m.is_supervised() {
            config = config.with_labels(Labels::new(labels.clone()));
        }
        if m.needs_neighborhood() {
            config = config.with_neighborhood(Neighborhood::knn(8));
        }
        let r = reduce(&data, &config).map_err(|e| format!("{m}: {e}"))?;
        r.check_contract(m.kind(), p).map_err(|e| format!("{m}: {e}"))?;
        ensure!(r.embedding.shape() == (n, 2), "{m}: embedding shape {:?}", r.embedding.shape());
        if m.kind() != MethodKind::Nonlinear {
            let again = apply_to_new(&r.preprocess, r.projection.as_ref().unwrap(), &data).map_err(|e| e.to_string())?;
            let diff = (again - &r.embedding).amax();
            ensure!(diff <= 1e-10, "{m}: apply_to_new deviates by {diff:e}");
        }
    }
    for id in Estimator::IDS {
        let e = Estimator::from_id(id).unwrap();
        let r = e.estimate(&data).map_err(|err| format!("{id}: {err}"))?;
        r.check_contract(e.is_bottom_up(), n).map_err(|err| format!("{id}: {err}"))?;
    }
    Ok(format!("{} methods, {} estimators", Method::ALL.len(), Estimator::IDS.len()))
}

fn dimkit(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dimkit")).args(args).env_remove("DIMKIT_THREADS").output().unwrap()
}

fn same_bits(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    a.shape() == b.shape() && a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn criterion_cli() -> Outcome {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let at = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let (input, truth, emb, local, bench) = (at("x.csv"), at("t.csv"), at("y.csv"), at("l.csv"), at("b.csv"));

    let o = dimkit(&["generate", "--model", "scurve", "--n", "300", "--noise", "0.01", "--seed", "11", "--output", &input, "--truth", &truth]);
    ensure!(o.status.code() == Some(0), "generate exit {:?}", o.status.code());
    let (lib_data, lib_truth) = generate(Model::SCurve, 300, 0.01, 11).unwrap();
    let cli_data = read_matrix(input.as_ref()).map_err(|e| e.to_string())?;
    ensure!(same_bits(&cli_data, lib_data.values()), "generate output differs from library");
    ensure!(same_bits(&read_matrix(truth.as_ref()).map_err(|e| e.to_string())?, &lib_truth.latent), "truth differs");

    let parsed = DataMatrix::new(cli_data).unwrap();
    let o = dimkit(&["reduce", "--method", "lle", "--dim", "2", "--k", "12", "--input", &input, "--output", &emb]);
    ensure!(o.status.code() == Some(0), "reduce exit {:?}", o.status.code());
    let lib = reduce(&parsed, &ReducerConfig::new(Method::Lle, 2).with_neighborhood(Neighborhood::knn(12))).unwrap();
    ensure!(same_bits(&read_matrix(emb.as_ref()).map_err(|e| e.to_string())?, &lib.embedding), "reduce output differs");

    let o = dimkit(&["estimate", "--method", "mle", "--input", &input, "--local", &local]);
    ensure!(o.status.code() == Some(0), "estimate exit {:?}", o.status.code());
    let lib = est_mle(&parsed, 6, 12).unwrap();
    let stdout = String::from_utf8_lossy(&o.stdout);
    let printed: f64 = stdout.trim().strip_prefix("estdim=").and_then(|v| v.parse().ok()).ok_or("bad estimate output")?;
    ensure!(printed.to_bits() == lib.estdim.to_bits(), "estdim {printed} vs {}", lib.estdim);
    let local_lib = lib.local_estimates.unwrap();
    let local_cli = read_matrix(local.as_ref()).map_err(|e| e.to_string())?;
    ensure!(same_bits(&local_cli, &DMatrix::from_column_slice(local_lib.len(), 1, &local_lib)), "local estimates differ");

    let o = dimkit(&["bench", "--sizes", "500,200", "--repeats", "1", "--seed", "3", "--output", &bench]);
    ensure!(o.status.code() == Some(0), "bench exit {:?}", o.status.code());
    let lib = run_bench(&BenchConfig { sizes: vec![500, 200], repeats: 1, seed: 3, ..BenchConfig::default() }).unwrap();
    let text = fs::read_to_string(&bench).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<String>> = text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    ensure!(rows.len() == lib.len(), "bench rows {} vs {}", rows.len(), lib.len());
    for (row, rec) in rows.iter().zip(&lib) {
        let mismatch: f64 = row[5].parse().map_err(|_| "bad mismatch")?;
        ensure!(
            row[0] == rec.method.id() && row[1] == rec.n.to_string() && row[6] == rec.threads.to_string()
                && mismatch.to_bits() == rec.mismatch.to_bits(),
            "bench row {row:?} vs {rec:?}"
        );
    }

    let disconnected = at("two.csv");
    let mut two = String::new();
    for i in 0..20 {
        let x = if i < 10 { i as f64 } else { 1e4 + i as f64 };
        two.push_str(&format!("{x},{}\n", (i % 3) as f64));
    }
    fs::write(&disconnected, two).map_err(|e| e.to_string())?;
    let o = dimkit(&["reduce", "--method", "isomap", "--dim", "1", "--k", "3", "--input", &disconnected, "--output", &emb]);
    ensure!(o.status.code() == Some(1), "algorithm error exit {:?}", o.status.code());
    let o = dimkit(&["reduce", "--method", "nosuch", "--dim", "1", "--input", &input, "--output", &emb]);
    ensure!(o.status.code() == Some(2), "usage error exit {:?}", o.status.code());
    Ok("generate/reduce/estimate/bench match library bits; exit codes 0/1/2".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("PCA oracle equivalence", criterion_pca),
        ("geodesic oracle equivalence", criterion_geodesics),
        ("preprocessing invariants", criterion_preprocess),
        ("kernel invariants", criterion_kernels),
        ("Isomap swissroll recovery", criterion_isomap),
        ("LLE weight constraints", criterion_lle),
        ("intrinsic dimension bands", criterion_ide),
        ("covariance PCA not slower than SVD at n=100000", criterion_bench),
        ("registry contract exhaustiveness", criterion_contracts),
        ("CLI equivalence and exit codes", criterion_cli),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail})", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {}: {name} ({detail})", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
