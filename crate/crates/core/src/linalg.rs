//! Dense real matrices and the handful of factorizations the measures need.
//!
//! Everything here works on small dense `n × n` matrices stored row-major.
//! The eigensolver is a cyclic Jacobi sweep, the inverse goes through a
//! partial-pivot LU factorization and the exponential uses scaling and
//! squaring around a truncated Taylor series.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use crate::error::{Error, Result};

/// Entrywise asymmetry tolerated by the symmetry flag, relative to
/// `max(1, max |m_ij|)`.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Pivots below this magnitude make [`invert`] report a singular matrix.
pub const PIVOT_TOL: f64 = 1e-12;

/// Eigenvalues down to `-PSD_CLAMP_TOL` are treated as roundoff and clamped to
/// zero by [`gram_factor`].
pub const PSD_CLAMP_TOL: f64 = 1e-9;

const JACOBI_REL_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;
const POWER_MAX_ITERS: usize = 100_000;
const POWER_STEP_TOL: f64 = 1e-12;
const EXP_SCALED_NORM: f64 = 0.5;
const EXP_TERM_TOL: f64 = 1e-18;

/// Dense real square matrix with a symmetry flag.
///
/// The flag is computed whenever a matrix is built, so it always reflects the
/// entries. Operations that are symmetric by construction (inverting or
/// exponentiating a symmetric matrix) average the result with its transpose so
/// the flag survives roundoff.
#[derive(Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
    symmetric: bool,
}

impl SquareMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        Ok(Self::from_vec_unchecked(n, data))
    }

    fn from_vec_unchecked(n: usize, data: Vec<f64>) -> Self {
        let mut m = Self {
            n,
            data,
            symmetric: false,
        };
        m.symmetric = m.detect_symmetry();
        m
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self::from_vec_unchecked(n, data))
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self::from_vec_unchecked(n, data)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
            symmetric: true,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    /// `c · 𝟏𝟏ᵀ`.
    pub fn constant(n: usize, c: f64) -> Self {
        Self {
            n,
            data: vec![c; n * n],
            symmetric: true,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    fn detect_symmetry(&self) -> bool {
        let (_, _, diff) = self.max_asymmetry();
        diff <= SYMMETRY_TOL * self.max_abs().max(1.0)
    }

    /// Largest `|m_ij - m_ji|` together with its (0-based) position.
    pub fn max_asymmetry(&self) -> (usize, usize, f64) {
        let mut worst = (0, 0, 0.0);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = (self.get(i, j) - self.get(j, i)).abs();
                if d > worst.2 || d.is_nan() {
                    worst = (i, j, d);
                }
            }
        }
        worst
    }

    /// Errors with [`Error::NotSymmetric`] unless the symmetry flag is set.
    pub fn require_symmetric(&self) -> Result<()> {
        if self.symmetric {
            Ok(())
        } else {
            let (row, col, difference) = self.max_asymmetry();
            Err(Error::NotSymmetric {
                row,
                col,
                difference,
            })
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    /// Maximum absolute row sum (the induced ∞-norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &SquareMatrix) -> f64 {
        assert_eq!(self.n, other.n, "matrix dimensions differ");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> SquareMatrix {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    /// `½(M + Mᵀ)`, flagged symmetric.
    pub fn symmetrized(&self) -> SquareMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self {
            n,
            data,
            symmetric: true,
        }
    }

    pub fn scaled(&self, c: f64) -> SquareMatrix {
        Self::from_vec_unchecked(self.n, self.data.iter().map(|x| c * x).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SquareMatrix {
        Self::from_vec_unchecked(self.n, self.data.iter().map(|&x| f(x)).collect())
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SquareMatrix {}x{} (symmetric: {})", self.n, self.n, self.symmetric)?;
        for i in 0..self.n {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

impl Add for &SquareMatrix {
    type Output = SquareMatrix;

    fn add(self, rhs: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, rhs.n, "matrix dimensions differ");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        SquareMatrix::from_vec_unchecked(self.n, data)
    }
}

impl Sub for &SquareMatrix {
    type Output = SquareMatrix;

    fn sub(self, rhs: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, rhs.n, "matrix dimensions differ");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        SquareMatrix::from_vec_unchecked(self.n, data)
    }
}

impl Mul for &SquareMatrix {
    type Output = SquareMatrix;

    fn mul(self, rhs: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, rhs.n, "matrix dimensions differ");
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        SquareMatrix::from_vec_unchecked(n, data)
    }
}

/// Inverse via partial-pivot LU factorization.
///
/// A symmetric input yields a result that is symmetrized and flagged.
pub fn invert(m: &SquareMatrix) -> Result<SquareMatrix> {
    let n = m.n;
    let mut lu = m.data.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, lu[r * n + col].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pivot_abs > PIVOT_TOL) {
            return Err(Error::Singular {
                pivot: col,
                magnitude: pivot_abs.max(0.0),
            });
        }
        if pivot_row != col {
            for j in 0..n {
                lu.swap(col * n + j, pivot_row * n + j);
            }
            perm.swap(col, pivot_row);
        }
        let pivot = lu[col * n + col];
        for r in (col + 1)..n {
            let factor = lu[r * n + col] / pivot;
            lu[r * n + col] = factor;
            if factor != 0.0 {
                for j in (col + 1)..n {
                    lu[r * n + j] -= factor * lu[col * n + j];
                }
            }
        }
    }

    // Solve L U x = P e_c for every unit vector e_c.
    let mut inv = vec![0.0; n * n];
    let mut x = vec![0.0; n];
    for c in 0..n {
        for i in 0..n {
            x[i] = if perm[i] == c { 1.0 } else { 0.0 };
        }
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= lu[i * n + k] * x[k];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= lu[i * n + k] * x[k];
            }
            x[i] = s / lu[i * n + i];
        }
        for i in 0..n {
            inv[i * n + c] = x[i];
        }
    }

    let inv = SquareMatrix::from_vec_unchecked(n, inv);
    if !inv.is_finite() {
        return Err(Error::Overflow("matrix inverse"));
    }
    Ok(if m.symmetric { inv.symmetrized() } else { inv })
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// stored as columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: SquareMatrix,
}

impl EigenDecomposition {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `U f(Λ) Uᵀ`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> SquareMatrix {
        let n = self.eigenvalues.len();
        let u = &self.eigenvectors;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v: f64 = (0..n).map(|k| u.get(i, k) * fl[k] * u.get(j, k)).sum();
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        SquareMatrix {
            n,
            data,
            symmetric: true,
        }
    }

    pub fn reconstruct(&self) -> SquareMatrix {
        self.apply(|l| l)
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps stop once the off-diagonal Frobenius norm drops below
/// `1e-12 · ‖m‖_F`.
pub fn sym_eigen(m: &SquareMatrix) -> Result<EigenDecomposition> {
    m.require_symmetric()?;
    let n = m.n;
    // Work on the exactly symmetric part so rotations stay consistent.
    let mut a = m.symmetrized().data;
    let mut v = SquareMatrix::identity(n).data;
    let target = JACOBI_REL_TOL * m.norm_frobenius();

    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_norm(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged && off_norm(&a) > target {
        return Err(Error::NotConverged {
            iterations: JACOBI_MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let eigenvalues = order.iter().map(|&i| a[i * n + i]).collect();
    let eigenvectors = SquareMatrix::from_fn(n, |r, c| v[r * n + order[c]]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Largest eigenvalue modulus.
///
/// Symmetric input goes through [`sym_eigen`]. Otherwise power iteration runs
/// on `m²`, which keeps a ±ρ pair (bipartite Markov matrices) from
/// oscillating.
pub fn spectral_radius(m: &SquareMatrix) -> Result<f64> {
    if m.symmetric {
        let eig = sym_eigen(m)?;
        return Ok(eig.min_eigenvalue().abs().max(eig.max_eigenvalue().abs()));
    }
    let n = m.n;
    if n == 0 {
        return Ok(0.0);
    }
    let sq = m * m;
    // Deterministic, non-constant start so no eigenvector is missed by symmetry.
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.25 * ((i * 7 % 11) as f64) / 11.0).collect();
    normalize(&mut x);
    let mut estimate = f64::NAN;
    for _ in 0..POWER_MAX_ITERS {
        let mut y = sq.matvec(&x);
        let norm = normalize(&mut y);
        if norm == 0.0 {
            return Ok(0.0);
        }
        let next = norm.sqrt();
        if (next - estimate).abs() <= POWER_STEP_TOL * next.max(1.0) {
            return Ok(next);
        }
        estimate = next;
        x = y;
    }
    Err(Error::NotConverged {
        iterations: POWER_MAX_ITERS,
    })
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

/// Matrix exponential by scaling and squaring.
///
/// The input is scaled by `2^-s` until its ∞-norm is at most 0.5, the Taylor
/// series is summed until a term drops below 1e-18 in max-norm, and the sum is
/// squared `s` times.
pub fn matrix_exp(m: &SquareMatrix) -> Result<SquareMatrix> {
    let n = m.n;
    let norm = m.norm_inf();
    if !norm.is_finite() {
        return Err(Error::Overflow("matrix exponential"));
    }
    let squarings = if norm > EXP_SCALED_NORM {
        (norm / EXP_SCALED_NORM).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m.scaled(0.5f64.powi(squarings));

    let mut sum = SquareMatrix::identity(n);
    let mut term = SquareMatrix::identity(n);
    for k in 1..=200 {
        term = (&term * &scaled).scaled(1.0 / k as f64);
        sum = &sum + &term;
        if term.max_abs() < EXP_TERM_TOL {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
        if !sum.is_finite() {
            return Err(Error::Overflow("matrix exponential"));
        }
    }
    if !sum.is_finite() {
        return Err(Error::Overflow("matrix exponential"));
    }
    Ok(if m.symmetric { sum.symmetrized() } else { sum })
}

/// The unique symmetric PSD square root `B = U Λ^{1/2} Uᵀ` of a PSD matrix.
///
/// Columns of `B` are vectors whose Gram matrix is `k`.
pub fn gram_factor(k: &SquareMatrix) -> Result<SquareMatrix> {
    let eig = sym_eigen(k)?;
    let min = eig.min_eigenvalue();
    if min < -PSD_CLAMP_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(eig.apply(|l| l.max(0.0).sqrt()))
}
