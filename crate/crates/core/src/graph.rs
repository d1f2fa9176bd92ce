//! Weighted undirected graphs and their fundamental matrices.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;

/// Edge list of the weighted path 1–2–3–4 with weights 2, 1, 2.
pub const PATH4_EDGES: &str = "1 2 2\n2 3 1\n3 4 2\n";
/// Edge list of the weighted path 1–2–3–4–5 with weights 2, 1, 1, 2.
pub const PATH5_EDGES: &str = "1 2 2\n2 3 1\n3 4 1\n4 5 2\n";

/// A connected, undirected graph with positive edge weights and no loops.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    weights: SquareMatrix,
}

/// One undirected edge, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

impl WeightedGraph {
    /// Validates a weight matrix: symmetric, nonnegative, zero diagonal,
    /// connected.
    pub fn from_weights(weights: SquareMatrix) -> Result<Self> {
        let n = weights.n();
        if n == 0 {
            return Err(Error::Validation("graph has no vertices".into()));
        }
        for i in 0..n {
            if weights.get(i, i) != 0.0 {
                return Err(Error::Validation(format!("self-loop at vertex {}", i + 1)));
            }
            for j in 0..n {
                let w = weights.get(i, j);
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::Validation(format!(
                        "weight {w} between vertices {} and {} is not a nonnegative number",
                        i + 1,
                        j + 1
                    )));
                }
                if w != weights.get(j, i) {
                    return Err(Error::Validation(format!(
                        "weights between vertices {} and {} are not symmetric",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let graph = Self { weights };
        if let Some(unreachable) = graph.first_unreachable() {
            return Err(Error::Disconnected {
                unreachable: unreachable + 1,
            });
        }
        Ok(graph)
    }

    pub fn from_edges(n: usize, edges: &[Edge]) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for e in edges {
            for idx in [e.u, e.v] {
                if idx == 0 || idx > n {
                    return Err(Error::IndexOutOfRange { index: idx, n });
                }
            }
            let (i, j) = (e.u - 1, e.v - 1);
            data[i * n + j] = e.weight;
            data[j * n + i] = e.weight;
        }
        Self::from_weights(SquareMatrix::new(n, data)?)
    }

    pub fn n(&self) -> usize {
        self.weights.n()
    }

    pub fn weights(&self) -> &SquareMatrix {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights.get(i, j)
    }

    pub fn edges(&self) -> Vec<Edge> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.weights.get(i, j);
                if w > 0.0 {
                    out.push(Edge {
                        u: i + 1,
                        v: j + 1,
                        weight: w,
                    });
                }
            }
        }
        out
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.weights
            .row(i)
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(j, _)| j)
    }

    /// BFS from vertex 0 over the nonzero pattern, optionally with one vertex
    /// deleted. Returns the visited set.
    fn reachable(&self, start: usize, removed: Option<usize>) -> Vec<bool> {
        let n = self.n();
        let mut seen = vec![false; n];
        if Some(start) == removed {
            return seen;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for v in self.neighbors(u) {
                if !seen[v] && Some(v) != removed {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    fn first_unreachable(&self) -> Option<usize> {
        self.reachable(0, None).iter().position(|&s| !s)
    }

    /// True iff every path from `i` to `k` visits `j` (0-based, distinct).
    pub fn is_cut_between(&self, j: usize, i: usize, k: usize) -> Result<bool> {
        let n = self.n();
        for idx in [i, j, k] {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx + 1, n });
            }
        }
        if i == j || j == k || i == k {
            return Err(Error::InvalidArgument(format!(
                "is_cut_between needs distinct vertices, got j={}, i={}, k={}",
                j + 1,
                i + 1,
                k + 1
            )));
        }
        Ok(!self.reachable(i, Some(j))[k])
    }

    /// Separation predicate extended to every ordered triple: `j` equal to an
    /// endpoint trivially lies on every path, and a closed walk from `i` back
    /// to `i` never has to leave `i`.
    pub fn separates(&self, j: usize, i: usize, k: usize) -> bool {
        if j == i || j == k {
            true
        } else if i == k {
            false
        } else {
            !self.reachable(i, Some(j))[k]
        }
    }
}

/// Parses an edge list: one `i j w` triple per line, 1-based vertices,
/// `#` comment lines, blank lines ignored.
pub fn load_graph(source: &str) -> Result<WeightedGraph> {
    let mut edges: Vec<Edge> = Vec::new();
    let mut n = 0;
    for (lineno, raw) in source.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `i j w`, found {} field(s)", fields.len()),
            });
        }
        let parse_vertex = |s: &str| -> Result<usize> {
            let v: usize = s.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("`{s}` is not a vertex index"),
            })?;
            if v == 0 {
                return Err(Error::Parse {
                    line: line_no,
                    message: "vertex indices are 1-based".into(),
                });
            }
            Ok(v)
        };
        let u = parse_vertex(fields[0])?;
        let v = parse_vertex(fields[1])?;
        let weight: f64 = fields[2].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("`{}` is not a number", fields[2]),
        })?;
        if u == v {
            return Err(Error::Validation(format!("line {line_no}: self-loop at vertex {u}")));
        }
        if !weight.is_finite() || weight <= 0.0 {
            return Err(Error::Validation(format!(
                "line {line_no}: weight must be positive, found {weight}"
            )));
        }
        if edges
            .iter()
            .any(|e| (e.u == u && e.v == v) || (e.u == v && e.v == u))
        {
            return Err(Error::Validation(format!(
                "line {line_no}: duplicate edge {u}-{v}"
            )));
        }
        n = n.max(u).max(v);
        edges.push(Edge { u, v, weight });
    }
    if edges.is_empty() {
        return Err(Error::Validation("edge list is empty".into()));
    }
    WeightedGraph::from_edges(n, &edges)
}

/// Built-in graphs addressable as `paper:path4` and `paper:path5`.
pub fn named_graph(name: &str) -> Option<WeightedGraph> {
    let source = match name {
        "paper:path4" => PATH4_EDGES,
        "paper:path5" => PATH5_EDGES,
        _ => return None,
    };
    Some(load_graph(source).expect("built-in graph is valid"))
}

pub fn path4() -> WeightedGraph {
    load_graph(PATH4_EDGES).expect("built-in graph is valid")
}

pub fn path5() -> WeightedGraph {
    load_graph(PATH5_EDGES).expect("built-in graph is valid")
}

/// `W`, `D`, `L = D − W`, `𝓛 = D^{-1/2} L D^{-1/2}` and `P = D^{-1} W`.
#[derive(Debug, Clone)]
pub struct GraphMatrices {
    pub degrees: Vec<f64>,
    pub adjacency: SquareMatrix,
    pub degree: SquareMatrix,
    pub laplacian: SquareMatrix,
    pub normalized_laplacian: SquareMatrix,
    pub markov: SquareMatrix,
}

impl GraphMatrices {
    pub fn n(&self) -> usize {
        self.adjacency.n()
    }

    pub fn max_degree(&self) -> f64 {
        self.degrees.iter().copied().fold(0.0, f64::max)
    }
}

pub fn build_matrices(g: &WeightedGraph) -> GraphMatrices {
    let w = g.weights().clone();
    let n = w.n();
    let degrees = w.row_sums();
    let degree = SquareMatrix::from_diagonal(&degrees);
    let laplacian = &degree - &w;
    let inv_sqrt: Vec<f64> = degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
    let normalized_laplacian =
        SquareMatrix::from_fn(n, |i, j| inv_sqrt[i] * laplacian.get(i, j) * inv_sqrt[j]).symmetrized();
    let markov = SquareMatrix::from_fn(n, |i, j| w.get(i, j) / degrees[i]);
    GraphMatrices {
        degrees,
        adjacency: w,
        degree,
        laplacian,
        normalized_laplacian,
        markov,
    }
}
