//! Maps between similarity matrices, proximities and distance matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gram_factor, SquareMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    /// Output of the kernel-to-distance map; Euclidean only if the kernel is PSD.
    SquaredEuclideanCandidate,
    /// Expected to be a metric; not verified here.
    DistanceCandidate,
}

/// Symmetric, zero-diagonal dissimilarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub matrix: SquareMatrix,
    pub kind: DistanceKind,
}

impl DistanceMatrix {
    pub fn new(matrix: SquareMatrix, kind: DistanceKind) -> Self {
        Self { matrix, kind }
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    /// `d(i, j)`, 0-based.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }
}

/// Proximity candidate, with the common row sum `Σ` when it was built to have
/// one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityMatrix {
    pub matrix: SquareMatrix,
    pub sigma: Option<f64>,
}

/// `𝓓 = ½(diag(K)𝟏ᵀ + 𝟏 diag(K)ᵀ) − K` for symmetric `K`.
pub fn kernel_to_sq_dist(k: &SquareMatrix) -> Result<DistanceMatrix> {
    k.require_symmetric()?;
    Ok(DistanceMatrix::new(
        half_diag_sum_minus(&k.symmetrized()),
        DistanceKind::SquaredEuclideanCandidate,
    ))
}

/// `d(x, y) = ½(κ(x,x) + κ(y,y) − κ(x,y) − κ(y,x))`, defined for any square
/// `K`. Coincides with [`kernel_to_sq_dist`] when `K` is symmetric.
pub fn pair_to_dist(k: &SquareMatrix) -> DistanceMatrix {
    DistanceMatrix::new(half_diag_sum_minus(&k.symmetrized()), DistanceKind::DistanceCandidate)
}

fn half_diag_sum_minus(sym: &SquareMatrix) -> SquareMatrix {
    let diag = sym.diagonal();
    SquareMatrix::from_fn(sym.n(), |i, j| {
        if i == j {
            0.0
        } else {
            0.5 * (diag[i] + diag[j]) - sym.get(i, j)
        }
    })
    .symmetrized()
}

/// `K = −H𝓓H + ΣJ` with `J = 𝟏𝟏ᵀ/n` and `H = I − J`.
///
/// Entrywise this is `d(x,·) + d(y,·) − d(x,y) − d(·,·) + Σ/n`, so every row
/// sums to `Σ`. The input is not required to be a metric.
pub fn dist_to_sigma_prox(d: &DistanceMatrix, sigma: f64) -> ProximityMatrix {
    let n = d.n();
    let nf = n as f64;
    let m = &d.matrix;
    let row_means: Vec<f64> = m.row_sums().iter().map(|s| s / nf).collect();
    let grand_mean = row_means.iter().sum::<f64>() / nf;
    let k = SquareMatrix::from_fn(n, |x, y| {
        row_means[x] + row_means[y] - m.get(x, y) - grand_mean + sigma / nf
    })
    .symmetrized();
    ProximityMatrix {
        matrix: k,
        sigma: Some(sigma),
    }
}

fn first_non_positive(s: &SquareMatrix) -> Option<Error> {
    let n = s.n();
    for i in 0..n {
        for j in 0..n {
            let value = s.get(i, j);
            if !(value > 0.0) {
                return Some(Error::NonPositiveEntry {
                    row: i + 1,
                    col: j + 1,
                    value,
                });
            }
        }
    }
    None
}

/// `d(i, j) = ½ ln(s_ii s_jj / (s_ij s_ji))` for a strictly positive measure.
pub fn log_distance(s: &SquareMatrix) -> Result<DistanceMatrix> {
    if let Some(err) = first_non_positive(s) {
        return Err(err);
    }
    let ln = s.map(f64::ln);
    let n = s.n();
    let d = SquareMatrix::from_fn(n, |i, j| {
        if i == j {
            0.0
        } else {
            0.5 * (ln.get(i, i) + ln.get(j, j) - ln.get(i, j) - ln.get(j, i))
        }
    })
    .symmetrized();
    Ok(DistanceMatrix::new(d, DistanceKind::DistanceCandidate))
}

/// Entrywise `ln s`, the logarithmic similarity.
pub fn log_similarity(s: &SquareMatrix) -> Result<SquareMatrix> {
    if let Some(err) = first_non_positive(s) {
        return Err(err);
    }
    Ok(s.map(f64::ln))
}

/// `k̃_ij = √(k_ij k_ji)`.
pub fn symmetrize_geometric(k: &SquareMatrix) -> Result<SquareMatrix> {
    if let Some(err) = first_non_positive(k) {
        return Err(err);
    }
    Ok(SquareMatrix::from_fn(k.n(), |i, j| (k.get(i, j) * k.get(j, i)).sqrt()).symmetrized())
}

/// Points `x_1, …, x_n` with `‖x_i − x_j‖² = 𝓓_ij` for the distance of
/// [`kernel_to_sq_dist`].
///
/// These are the columns of the PSD square root of `k` scaled by `1/√2`, so
/// their Gram matrix is `k/2`; the factor matches the `½` in `𝓓`.
pub fn embed(k: &SquareMatrix) -> Result<Vec<Vec<f64>>> {
    let b = gram_factor(k)?;
    let n = b.n();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok((0..n).map(|c| (0..n).map(|r| s * b.get(r, c)).collect()).collect())
}

pub fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}
