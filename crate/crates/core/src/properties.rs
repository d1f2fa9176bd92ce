//! Property checks with explicit witnesses.
//!
//! Every check scans the defining inequalities and keeps the worst one. A
//! witness carries 1-based vertex indices and the signed margin of the
//! inequality at those vertices: negative means violated, and a strict
//! inequality additionally needs a margin above the tolerance.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::linalg::{sym_eigen, SquareMatrix};
use crate::transforms::DistanceMatrix;

/// Default absolute tolerance for inequality slack.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Ordered vertex triple, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triple(pub usize, pub usize, pub usize);

impl Triple {
    /// Builds a triple from 1-based indices.
    pub fn one_based(a: usize, b: usize, c: usize) -> Result<Self> {
        if a == 0 || b == 0 || c == 0 {
            return Err(Error::InvalidArgument("vertex indices are 1-based".into()));
        }
        Ok(Triple(a - 1, b - 1, c - 1))
    }

    fn check_bounds(&self, n: usize) -> Result<()> {
        for idx in [self.0, self.1, self.2] {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx + 1, n });
            }
        }
        Ok(())
    }

    fn vertices(&self) -> Vec<usize> {
        vec![self.0 + 1, self.1 + 1, self.2 + 1]
    }
}

/// Every property the audit knows how to evaluate.
///
/// Properties prefixed `log_` apply to the logarithmic similarity or its
/// distance; `metric`, `sq_euclidean`, `distance_order` and friends apply to
/// the pairwise distance `½(κ(x,x) + κ(y,y) − κ(x,y) − κ(y,x))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Property {
    Psd,
    /// PSD of `½(K + Kᵀ)`.
    SymmetrizedPsd,
    Proximity,
    /// Triangle inequality for proximities at one `(x, y, z)`.
    ProximityAt(Triple),
    SigmaProximity,
    Egocentrism,
    Metric,
    /// `d(i,j) + d(j,k) ≥ d(i,k)` at one `(i, j, k)`.
    TriangleAt(Triple),
    SqEuclidean,
    SqrtMetric,
    Transitional,
    CutpointAdditive,
    DistanceOrder,
    /// `d(i,j) < d(i,k)` for one `(i, j, k)`.
    CloserAt(Triple),
    LogMetric,
    LogProximity,
    LogPsd,
    LogDistanceOrder,
}

impl Property {
    /// What `--check all` expands to.
    pub const ALL: [Property; 10] = [
        Property::Psd,
        Property::Proximity,
        Property::SigmaProximity,
        Property::Egocentrism,
        Property::Metric,
        Property::SqEuclidean,
        Property::SqrtMetric,
        Property::Transitional,
        Property::CutpointAdditive,
        Property::DistanceOrder,
    ];

    fn base_name(&self) -> &'static str {
        match self {
            Property::Psd => "psd",
            Property::SymmetrizedPsd => "sym_psd",
            Property::Proximity | Property::ProximityAt(_) => "proximity",
            Property::SigmaProximity => "sigma",
            Property::Egocentrism => "egocentrism",
            Property::Metric | Property::TriangleAt(_) => "metric",
            Property::SqEuclidean => "sq_euclidean",
            Property::SqrtMetric => "sqrt_metric",
            Property::Transitional => "transitional",
            Property::CutpointAdditive => "cutpoint_additive",
            Property::DistanceOrder => "distance_order",
            Property::CloserAt(_) => "closer",
            Property::LogMetric => "log_metric",
            Property::LogProximity => "log_proximity",
            Property::LogPsd => "log_psd",
            Property::LogDistanceOrder => "log_distance_order",
        }
    }

    fn triple(&self) -> Option<Triple> {
        match self {
            Property::ProximityAt(t) | Property::TriangleAt(t) | Property::CloserAt(t) => Some(*t),
            _ => None,
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.base_name())?;
        if let Some(Triple(a, b, c)) = self.triple() {
            write!(f, "@{},{},{}", a + 1, b + 1, c + 1)?;
        }
        Ok(())
    }
}

impl FromStr for Property {
    type Err = Error;

    /// Accepts `name` or `name@a,b,c` with 1-based vertices.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, triple) = match s.split_once('@') {
            Some((name, rest)) => {
                let idx: Vec<usize> = rest
                    .split(',')
                    .map(|v| v.trim().parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::UnknownProperty(s.to_string()))?;
                if idx.len() != 3 {
                    return Err(Error::UnknownProperty(s.to_string()));
                }
                (name, Some(Triple::one_based(idx[0], idx[1], idx[2])?))
            }
            None => (s, None),
        };
        let p = match (name.to_ascii_lowercase().as_str(), triple) {
            ("psd", None) => Property::Psd,
            ("sym_psd", None) => Property::SymmetrizedPsd,
            ("proximity", None) => Property::Proximity,
            ("proximity", Some(t)) => Property::ProximityAt(t),
            ("sigma" | "sigma_proximity", None) => Property::SigmaProximity,
            ("egocentrism", None) => Property::Egocentrism,
            ("metric", None) => Property::Metric,
            ("metric" | "triangle", Some(t)) => Property::TriangleAt(t),
            ("sq_euclidean", None) => Property::SqEuclidean,
            ("sqrt_metric", None) => Property::SqrtMetric,
            ("transitional", None) => Property::Transitional,
            ("cutpoint_additive", None) => Property::CutpointAdditive,
            ("distance_order", None) => Property::DistanceOrder,
            ("closer", Some(t)) => Property::CloserAt(t),
            ("log_metric", None) => Property::LogMetric,
            ("log_proximity", None) => Property::LogProximity,
            ("log_psd", None) => Property::LogPsd,
            ("log_distance_order", None) => Property::LogDistanceOrder,
            _ => return Err(Error::UnknownProperty(s.to_string())),
        };
        Ok(p)
    }
}

impl From<Property> for String {
    fn from(p: Property) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for Property {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// 1-based vertex indices; empty for spectral properties.
    pub vertices: Vec<usize>,
    /// Signed margin of the defining inequality at the witness.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: Property,
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub tolerance: f64,
    /// The deciding margin sits within the tolerance band, so the verdict
    /// depends on the tolerance rather than on the measure.
    #[serde(default)]
    pub indeterminate: bool,
    /// Minimum eigenvalue for spectral checks, common row sum for `sigma`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl PropertyReport {
    fn new(property: Property, tolerance: f64) -> Self {
        Self {
            property,
            holds: true,
            witness: None,
            tolerance,
            indeterminate: false,
            value: None,
            note: None,
        }
    }

    fn fail(mut self, vertices: Vec<usize>, slack: f64, note: impl Into<Option<String>>) -> Self {
        self.holds = false;
        self.witness = Some(Witness { vertices, slack });
        self.note = note.into();
        self
    }

    /// The same verdict relabelled, e.g. a metric check run on a log distance.
    pub fn relabel(mut self, property: Property) -> Self {
        self.property = property;
        self
    }
}

/// Tracks the worst constraint seen while scanning inequalities.
struct Scan {
    tol: f64,
    failure: Option<(Vec<usize>, f64)>,
    indeterminate: bool,
}

impl Scan {
    fn new(tol: f64) -> Self {
        Self {
            tol,
            failure: None,
            indeterminate: false,
        }
    }

    /// `margin ≥ 0` required, violations beyond `tol` count.
    fn weak(&mut self, vertices: impl FnOnce() -> Vec<usize>, margin: f64) {
        if margin < 0.0 && margin >= -self.tol {
            self.indeterminate = true;
        }
        if margin < -self.tol || margin.is_nan() {
            self.record(vertices, margin);
        }
    }

    /// `value = 0` required up to `tol`.
    fn zero(&mut self, vertices: impl FnOnce() -> Vec<usize>, value: f64) {
        if !(value.abs() <= self.tol) {
            self.record(vertices, -value.abs());
        }
    }

    /// `margin > 0` required and must clear `tol`.
    fn strict(&mut self, vertices: impl FnOnce() -> Vec<usize>, margin: f64) {
        if margin.abs() <= self.tol {
            self.indeterminate = true;
        }
        if !(margin > self.tol) {
            self.record(vertices, margin);
        }
    }

    fn record(&mut self, vertices: impl FnOnce() -> Vec<usize>, margin: f64) {
        let worse = match &self.failure {
            None => true,
            Some((_, m)) => margin < *m || (margin.is_nan() && !m.is_nan()),
        };
        if worse {
            self.failure = Some((vertices(), margin));
        }
    }

    fn finish(self, property: Property, note: Option<String>) -> PropertyReport {
        let mut report = PropertyReport::new(property, self.tol);
        report.indeterminate = self.indeterminate;
        match self.failure {
            Some((vertices, slack)) => report.fail(vertices, slack, note),
            None => report,
        }
    }
}

fn asymmetric_report(property: Property, k: &SquareMatrix, tol: f64) -> PropertyReport {
    let (i, j, diff) = k.max_asymmetry();
    PropertyReport::new(property, tol).fail(
        vec![i + 1, j + 1],
        -diff,
        Some("matrix is not symmetric".to_string()),
    )
}

/// `scale` is the magnitude of the entries the matrix was computed from;
/// eigenvalue roundoff grows with it.
fn spectral_report(property: Property, m: &SquareMatrix, scale: f64, tol: f64) -> Result<PropertyReport> {
    let eig = sym_eigen(m)?;
    let min = eig.min_eigenvalue();
    let scaled_tol = tol * scale.max(m.max_abs()).max(1.0);
    let mut report = PropertyReport::new(property, tol);
    report.value = Some(min);
    report.indeterminate = min < 0.0 && min >= -scaled_tol;
    if min < -scaled_tol {
        let negatives = eig.eigenvalues.iter().filter(|&&l| l < -scaled_tol).count();
        report = report.fail(vec![], min, Some(format!("{negatives} negative eigenvalue(s)")));
    }
    Ok(report)
}

/// PSD test on the minimum eigenvalue, with `tol` relative to
/// `max(1, max |k_ij|)`.
///
/// Asymmetric input is not PSD by definition and is reported with the most
/// asymmetric pair as the witness; it is never symmetrized silently.
pub fn check_psd(k: &SquareMatrix, tol: f64) -> Result<PropertyReport> {
    if !k.is_symmetric() {
        return Ok(asymmetric_report(Property::Psd, k, tol));
    }
    spectral_report(Property::Psd, k, 0.0, tol)
}

/// Triangle inequality for proximities over all ordered triples of distinct
/// vertices, plus the strict `z = y ≠ x` cases.
pub fn check_proximity(k: &SquareMatrix, tol: f64) -> Result<PropertyReport> {
    k.require_symmetric()?;
    let n = k.n();
    let mut scan = Scan::new(tol);
    for x in 0..n {
        for y in 0..n {
            if y == x {
                continue;
            }
            for z in 0..n {
                if z == x {
                    continue;
                }
                let margin = k.get(x, x) - k.get(x, y) - k.get(x, z) + k.get(y, z);
                let vertices = || vec![x + 1, y + 1, z + 1];
                if z == y {
                    scan.strict(vertices, margin);
                } else {
                    scan.weak(vertices, margin);
                }
            }
        }
    }
    Ok(scan.finish(Property::Proximity, None))
}

/// Triangle inequality for proximities at a single `(x, y, z)`.
pub fn check_proximity_at(k: &SquareMatrix, triple: Triple, tol: f64) -> Result<PropertyReport> {
    triple.check_bounds(k.n())?;
    let Triple(x, y, z) = triple;
    let margin = k.get(x, x) - k.get(x, y) - k.get(x, z) + k.get(y, z);
    let mut scan = Scan::new(tol);
    if y == z && y != x {
        scan.strict(|| triple.vertices(), margin);
    } else {
        scan.weak(|| triple.vertices(), margin);
    }
    Ok(scan.finish(Property::ProximityAt(triple), None))
}

/// Proximity whose rows all sum to the same `Σ` (reported in `value`).
pub fn check_sigma_proximity(k: &SquareMatrix, tol: f64) -> Result<PropertyReport> {
    let proximity = check_proximity(k, tol)?;
    let sums = k.row_sums();
    let (imin, min) = sums
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let (imax, max) = sums
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let spread = max - min;
    let mut report = proximity.relabel(Property::SigmaProximity);
    report.value = Some(sums.iter().sum::<f64>() / sums.len() as f64);
    if report.holds && spread > tol {
        report = report.fail(
            vec![imax + 1, imin + 1],
            -spread,
            Some(format!("row sums range from {min} to {max}")),
        );
    }
    Ok(report)
}

/// Strict entrywise diagonal dominance: `k_xx > k_xy` for all `x ≠ y`.
pub fn check_egocentrism(k: &SquareMatrix, tol: f64) -> Result<PropertyReport> {
    let n = k.n();
    let mut scan = Scan::new(tol);
    for x in 0..n {
        for y in 0..n {
            if x != y {
                scan.strict(|| vec![x + 1, y + 1], k.get(x, x) - k.get(x, y));
            }
        }
    }
    Ok(scan.finish(Property::Egocentrism, None))
}

/// Nonnegativity, symmetry, identity of indiscernibles and the triangle
/// inequality over all ordered triples of distinct vertices.
pub fn check_metric(d: &DistanceMatrix, tol: f64) -> Result<PropertyReport> {
    Ok(metric_scan(&d.matrix, tol).finish(Property::Metric, None))
}

fn metric_scan(m: &SquareMatrix, tol: f64) -> Scan {
    let mut scan = Scan::new(tol);
    let n = m.n();
    for i in 0..n {
        scan.zero(|| vec![i + 1], m.get(i, i));
        for j in 0..n {
            if i != j {
                scan.strict(|| vec![i + 1, j + 1], m.get(i, j));
            }
        }
    }
    triangle_scan(m, scan)
}

/// Symmetry and the triangle inequality, without identity of indiscernibles.
fn triangle_scan(m: &SquareMatrix, mut scan: Scan) -> Scan {
    let n = m.n();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            scan.zero(|| vec![i + 1, j + 1], m.get(i, j) - m.get(j, i));
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                scan.weak(
                    || vec![i + 1, j + 1, k + 1],
                    m.get(i, j) + m.get(j, k) - m.get(i, k),
                );
            }
        }
    }
    scan
}

/// `d(i,j) + d(j,k) ≥ d(i,k)` at a single triple.
pub fn check_triangle_at(d: &DistanceMatrix, triple: Triple, tol: f64) -> Result<PropertyReport> {
    triple.check_bounds(d.n())?;
    let Triple(i, j, k) = triple;
    let mut scan = Scan::new(tol);
    scan.weak(|| triple.vertices(), d.get(i, j) + d.get(j, k) - d.get(i, k));
    Ok(scan.finish(Property::TriangleAt(triple), None))
}

/// Euclidean realizability of a squared-distance matrix: `−H𝓓H` is PSD.
pub fn check_sq_euclidean(d: &DistanceMatrix, tol: f64) -> Result<PropertyReport> {
    let n = d.n();
    let m = d.matrix.symmetrized();
    let nf = n as f64;
    let row_means: Vec<f64> = m.row_sums().iter().map(|s| s / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    let centered = SquareMatrix::from_fn(n, |i, j| -(m.get(i, j) - row_means[i] - row_means[j] + grand));
    // The all-ones direction is always in the kernel of the centered matrix;
    // lifting it by `s·J` leaves the other eigenvalues untouched.
    let lift = centered.max_abs().max(1.0) / nf;
    let lifted = centered.map(|x| x + lift).symmetrized();
    spectral_report(Property::SqEuclidean, &lifted, m.max_abs(), tol)
}

/// Whether the gap classification would flip for a tolerance ten times
/// larger or smaller.
fn near_tolerance(gap: f64, tol: f64) -> bool {
    let g = gap.abs();
    g > tol / 10.0 && g <= tol * 10.0
}

/// `s_ij s_jk ≤ s_ik s_jj` for all triples, with equality exactly when `j`
/// separates `i` from `k`.
///
/// The gap is measured relative to `s_ik s_jj`. Triples with `j` equal to an
/// endpoint are identities and skipped.
pub fn check_transitional(s: &SquareMatrix, g: &WeightedGraph, tol: f64) -> Result<PropertyReport> {
    let n = s.n();
    if g.n() != n {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            found: n,
        });
    }
    for i in 0..n {
        for j in 0..n {
            let value = s.get(i, j);
            if !(value > 0.0) {
                return Err(Error::NonPositiveEntry {
                    row: i + 1,
                    col: j + 1,
                    value,
                });
            }
        }
    }
    let gaps = triples_excluding_middle(n).map(|(i, j, k)| {
        let rhs = s.get(i, k) * s.get(j, j);
        let lhs = s.get(i, j) * s.get(j, k);
        ((i, j, k), (rhs - lhs) / rhs)
    });
    Ok(separation_scan(gaps, g, tol, Property::Transitional))
}

/// `d(i,j) + d(j,k) = d(i,k)` exactly when `j` separates `i` from `k`, and
/// `≥` otherwise.
pub fn check_cutpoint_additive(d: &DistanceMatrix, g: &WeightedGraph, tol: f64) -> Result<PropertyReport> {
    let n = d.n();
    if g.n() != n {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            found: n,
        });
    }
    let gaps = triples_excluding_middle(n)
        .map(|(i, j, k)| ((i, j, k), d.get(i, j) + d.get(j, k) - d.get(i, k)));
    Ok(separation_scan(gaps, g, tol, Property::CutpointAdditive))
}

fn triples_excluding_middle(n: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..n).flat_map(move |i| {
        (0..n).flat_map(move |j| {
            (0..n)
                .filter(move |&k| j != i && j != k)
                .map(move |k| (i, j, k))
        })
    })
}

fn separation_scan(
    gaps: impl Iterator<Item = ((usize, usize, usize), f64)>,
    g: &WeightedGraph,
    tol: f64,
    property: Property,
) -> PropertyReport {
    let mut scan = Scan::new(tol);
    let mut mismatch: Option<(Vec<usize>, f64, String)> = None;
    let mut indeterminate = false;
    for ((i, j, k), gap) in gaps {
        let vertices = || vec![i + 1, j + 1, k + 1];
        if gap < -tol || gap.is_nan() {
            scan.record(vertices, gap);
            continue;
        }
        indeterminate |= near_tolerance(gap, tol);
        let equal = gap.abs() <= tol;
        let separated = g.separates(j, i, k);
        if equal != separated && mismatch.is_none() {
            let why = if separated {
                format!("vertex {} separates {} from {} but the inequality is strict", j + 1, i + 1, k + 1)
            } else {
                format!("equality holds but vertex {} does not separate {} from {}", j + 1, i + 1, k + 1)
            };
            mismatch = Some((vertices(), gap, why));
        }
    }
    let mut report = match scan.failure {
        Some(_) => scan.finish(property, Some("inequality violated".to_string())),
        None => match mismatch {
            Some((v, gap, why)) => PropertyReport::new(property, tol).fail(v, gap, Some(why)),
            None => PropertyReport::new(property, tol),
        },
    };
    report.indeterminate = indeterminate;
    report
}

/// `d(1,2) < d(1,3) < d(1,4)` on a four-vertex distance.
pub fn check_distance_order(d: &DistanceMatrix) -> Result<PropertyReport> {
    if d.n() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: d.n(),
        });
    }
    let mut report = PropertyReport::new(Property::DistanceOrder, 0.0);
    for (a, b) in [(1, 2), (2, 3)] {
        let margin = d.get(0, b) - d.get(0, a);
        if !(margin > 0.0) {
            report = report.fail(
                vec![1, a + 1, b + 1],
                margin,
                Some(format!("d(1,{}) >= d(1,{})", a + 1, b + 1)),
            );
            break;
        }
    }
    Ok(report)
}

/// `d(i,j) < d(i,k)` for a single triple.
pub fn check_closer_at(d: &DistanceMatrix, triple: Triple) -> Result<PropertyReport> {
    triple.check_bounds(d.n())?;
    let Triple(i, j, k) = triple;
    let margin = d.get(i, k) - d.get(i, j);
    let report = PropertyReport::new(Property::CloserAt(triple), 0.0);
    Ok(if margin > 0.0 {
        report
    } else {
        report.fail(triple.vertices(), margin, None)
    })
}

/// Necessary condition for a proximity: `d` has no negative entry and `√d`
/// is symmetric and satisfies the triangle inequality. Coinciding points are
/// allowed, so `d = 0` passes.
pub fn check_sqrt_distance(d: &DistanceMatrix, tol: f64) -> Result<PropertyReport> {
    let n = d.n();
    let mut worst: Option<(usize, usize, f64)> = None;
    for i in 0..n {
        for j in 0..n {
            let v = d.get(i, j);
            if v < -tol && !worst.is_some_and(|w| v >= w.2) {
                worst = Some((i, j, v));
            }
        }
    }
    if let Some((i, j, v)) = worst {
        return Ok(PropertyReport::new(Property::SqrtMetric, tol).fail(
            vec![i + 1, j + 1],
            v,
            Some("negative squared distance".to_string()),
        ));
    }
    let root = d.matrix.map(|x| x.max(0.0).sqrt());
    Ok(triangle_scan(&root, Scan::new(tol)).finish(Property::SqrtMetric, None))
}

/// Re-evaluates a witness against the defining inequality of `property`.
/// Returns the recomputed margin; used to confirm reported violations.
pub fn witness_margin(property: Property, k: &SquareMatrix, witness: &Witness) -> Option<f64> {
    let v: Vec<usize> = witness.vertices.iter().map(|x| x - 1).collect();
    match (property, v.as_slice()) {
        (Property::Proximity | Property::ProximityAt(_), [x, y, z]) => {
            Some(k.get(*x, *x) - k.get(*x, *y) - k.get(*x, *z) + k.get(*y, *z))
        }
        (Property::Egocentrism, [x, y]) => Some(k.get(*x, *x) - k.get(*x, *y)),
        _ => None,
    }
}
