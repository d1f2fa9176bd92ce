//! Reference computations for the integration tests.
//!
//! Everything here works on plain `Vec<Vec<f64>>` so that the oracles share no
//! arithmetic with the library.

#![allow(dead_code)]

use graphsim::{GraphMatrices, SquareMatrix, WeightedGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

pub fn dense(m: &SquareMatrix) -> Dense {
    m.rows()
}

pub fn identity(n: usize) -> Dense {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

pub fn max_abs(a: &Dense) -> f64 {
    a.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `Σ_k M^k` for nonnegative `M` with spectral radius below one, summed until
/// the term is negligible against the running sum.
pub fn neumann(m: &Dense) -> Dense {
    let n = m.len();
    let mut sum = identity(n);
    let mut term = identity(n);
    for _ in 0..200_000 {
        term = matmul(&term, m);
        for i in 0..n {
            for j in 0..n {
                sum[i][j] += term[i][j];
            }
        }
        if max_abs(&term) < 1e-18 * max_abs(&sum) {
            return sum;
        }
    }
    panic!("Neumann series did not converge");
}

fn scale(a: &Dense, s: f64) -> Dense {
    a.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

fn weights(gm: &GraphMatrices) -> Dense {
    dense(&gm.adjacency)
}

/// `Σ (αW)^k`.
pub fn katz_series(gm: &GraphMatrices, alpha: f64) -> Dense {
    neumann(&scale(&weights(gm), alpha))
}

/// `(I + tL)^{-1}`; see [`absorption_series`] with unit rates and `t⁻¹`.
pub fn forest_series(gm: &GraphMatrices, t: f64) -> Dense {
    let n = gm.n();
    scale(&absorption_series(gm, &vec![1.0; n], 1.0 / t), 1.0 / t)
}

/// `(tA + L)^{-1} = h⁻¹ Σ M^k` with `h = max_i (t a_i + d_i)` and
/// `M = (hI − tA − D + W)/h`, which is nonnegative.
pub fn absorption_series(gm: &GraphMatrices, rates: &[f64], t: f64) -> Dense {
    let n = gm.n();
    let w = weights(gm);
    let diag: Vec<f64> = (0..n).map(|i| t * rates[i] + gm.degrees[i]).collect();
    let h = diag.iter().cloned().fold(0.0, f64::max);
    let m: Dense = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { (h - diag[i]) / h } else { w[i][j] / h })
                .collect()
        })
        .collect();
    scale(&neumann(&m), 1.0 / h)
}

/// `Σ (αP)^k`.
pub fn ppr_series(gm: &GraphMatrices, alpha: f64) -> Dense {
    let n = gm.n();
    let w = weights(gm);
    let p: Dense = (0..n)
        .map(|i| (0..n).map(|j| alpha * w[i][j] / gm.degrees[i]).collect())
        .collect();
    neumann(&p)
}

/// `(D − αW)^{-1} = d_max⁻¹ Σ M^k` with `M = (d_max I − D + αW)/d_max`.
pub fn modified_ppr_series(gm: &GraphMatrices, alpha: f64) -> Dense {
    let n = gm.n();
    let w = weights(gm);
    let dmax = gm.degrees.iter().cloned().fold(0.0, f64::max);
    let m: Dense = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        (dmax - gm.degrees[i]) / dmax
                    } else {
                        alpha * w[i][j] / dmax
                    }
                })
                .collect()
        })
        .collect();
    scale(&neumann(&m), 1.0 / dmax)
}

/// Raw Taylor series of `exp(m)`; only accurate when `m` has no large
/// negative entries.
pub fn taylor_exp(m: &Dense) -> Dense {
    let n = m.len();
    let mut sum = identity(n);
    let mut term = identity(n);
    for k in 1..400 {
        term = scale(&matmul(&term, m), 1.0 / k as f64);
        for i in 0..n {
            for j in 0..n {
                sum[i][j] += term[i][j];
            }
        }
        if max_abs(&term) < 1e-18 * max_abs(&sum) {
            break;
        }
    }
    sum
}

/// Every simple path from `i` to `k`, as vertex sequences.
pub fn simple_paths(g: &WeightedGraph, i: usize, k: usize) -> Vec<Vec<usize>> {
    fn extend(g: &WeightedGraph, path: &mut Vec<usize>, target: usize, out: &mut Vec<Vec<usize>>) {
        let at = *path.last().unwrap();
        if at == target {
            out.push(path.clone());
            return;
        }
        for next in 0..g.n() {
            if g.weight(at, next) > 0.0 && !path.contains(&next) {
                path.push(next);
                extend(g, path, target, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(g, &mut vec![i], k, &mut out);
    out
}

/// Whether every simple path from `i` to `k` passes through `j`.
pub fn all_paths_visit(g: &WeightedGraph, i: usize, j: usize, k: usize) -> bool {
    simple_paths(g, i, k).iter().all(|p| p.contains(&j))
}

pub fn triangle() -> WeightedGraph {
    graphsim::load_graph("1 2 1\n2 3 1\n1 3 1\n").unwrap()
}

/// Connected graph on `n` vertices: a random spanning tree plus each
/// remaining pair with probability `density`, weights in `(0, 3]`.
#[allow(clippy::needless_range_loop)]
pub fn random_connected(rng: &mut impl Rng, n: usize, density: f64) -> WeightedGraph {
    let mut w = vec![vec![0.0; n]; n];
    let weight = |rng: &mut dyn rand::RngCore| 3.0 - rng.gen_range(0.0..3.0);
    for v in 1..n {
        let u = rng.gen_range(0..v);
        let x = weight(rng);
        w[u][v] = x;
        w[v][u] = x;
    }
    for u in 0..n {
        for v in u + 1..n {
            if w[u][v] == 0.0 && rng.gen_bool(density) {
                let x = weight(rng);
                w[u][v] = x;
                w[v][u] = x;
            }
        }
    }
    let m = SquareMatrix::from_rows(&w).unwrap();
    WeightedGraph::from_weights(m).unwrap()
}

pub const RANDOM_GRAPH_SEED: u64 = 0x5eed_2013;

/// Twenty random connected graphs with 3 to 7 vertices.
pub fn random_graphs() -> Vec<WeightedGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_GRAPH_SEED);
    (0..20)
        .map(|_| {
            let n = rng.gen_range(3..=7);
            random_connected(&mut rng, n, 0.3)
        })
        .collect()
}

/// path4, path5, the unit triangle and the random graphs, labelled.
pub fn graph_suite() -> Vec<(String, WeightedGraph)> {
    let mut out = vec![
        ("path4".to_string(), graphsim::path4()),
        ("path5".to_string(), graphsim::path5()),
        ("triangle".to_string(), triangle()),
    ];
    out.extend(
        random_graphs()
            .into_iter()
            .enumerate()
            .map(|(i, g)| (format!("random#{i}"), g)),
    );
    out
}
