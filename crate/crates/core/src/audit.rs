//! End-to-end audits: compute measures, apply the matching transforms, run
//! the requested checks, locate parameter thresholds by bisection and export
//! embeddings.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_matrices, Edge, GraphMatrices, WeightedGraph};
use crate::kernels::{compute, default_grid, AbsorptionRates, KernelResult, Measure};
use crate::linalg::SquareMatrix;
use crate::properties::{
    check_closer_at, check_cutpoint_additive, check_distance_order, check_egocentrism, check_metric,
    check_proximity, check_proximity_at, check_psd, check_sigma_proximity, check_sq_euclidean,
    check_sqrt_distance, check_transitional, check_triangle_at, Property, PropertyReport, Witness,
    DEFAULT_TOL,
};
use crate::transforms::{
    kernel_to_sq_dist, log_distance, log_similarity, pair_to_dist, squared_distance,
    symmetrize_geometric, embed,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Pairwise squared distances of an exported embedding must match the
/// kernel's distance matrix to this accuracy.
pub const EMBEDDING_TOL: f64 = 1e-7;

/// One measure at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub measure: Measure,
    pub param: f64,
}

/// A measure with an optional parameter; a missing parameter expands to the
/// measure's default grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureRequest {
    pub measure: Measure,
    pub param: Option<f64>,
}

/// Parses `name[:param][,name[:param]…]`.
pub fn parse_measures(list: &str) -> Result<Vec<MeasureRequest>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (name, param) = match item.split_once(':') {
                Some((name, p)) => {
                    let value: f64 = p.trim().parse().map_err(|_| {
                        Error::InvalidArgument(format!("`{p}` is not a parameter value in `{item}`"))
                    })?;
                    (name, Some(value))
                }
                None => (item, None),
            };
            Ok(MeasureRequest {
                measure: name.trim().parse()?,
                param,
            })
        })
        .collect()
}

/// Parses a comma-separated property list for a graph with `n` vertices.
/// Triple-restricted names such as `proximity@2,1,3` may appear in the list.
/// `all` expands to [`Property::ALL`], minus `distance_order` unless `n == 4`.
pub fn parse_checks(list: &str, n: usize) -> Result<Vec<Property>> {
    let mut items: Vec<String> = Vec::new();
    for token in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let continues_triple = token.bytes().all(|b| b.is_ascii_digit())
            && items
                .last()
                .is_some_and(|prev| prev.contains('@') && prev.matches(',').count() < 2);
        match items.last_mut() {
            Some(prev) if continues_triple => {
                prev.push(',');
                prev.push_str(token);
            }
            _ => items.push(token.to_string()),
        }
    }
    let mut out = Vec::new();
    for item in items {
        if item.eq_ignore_ascii_case("all") {
            out.extend(
                Property::ALL
                    .into_iter()
                    .filter(|&p| n == 4 || p != Property::DistanceOrder),
            );
        } else {
            out.push(item.parse()?);
        }
    }
    Ok(out)
}

pub fn expand_requests(requests: &[MeasureRequest], gm: &GraphMatrices) -> Result<Vec<MeasureSpec>> {
    let mut out = Vec::new();
    for r in requests {
        match r.param {
            Some(param) => out.push(MeasureSpec {
                measure: r.measure,
                param,
            }),
            None => out.extend(
                default_grid(r.measure, gm)?
                    .into_iter()
                    .map(|param| MeasureSpec {
                        measure: r.measure,
                        param,
                    }),
            ),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditOptions {
    pub tol: f64,
    /// Row sum required by the `sigma` check.
    pub sigma: f64,
    /// Absorption rates; unit rates when absent.
    pub rates: Option<AbsorptionRates>,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            sigma: 1.0,
            rates: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDescriptor {
    pub name: String,
    pub n: usize,
    pub edges: Vec<Edge>,
}

impl GraphDescriptor {
    pub fn new(name: impl Into<String>, g: &WeightedGraph) -> Self {
        Self {
            name: name.into(),
            n: g.n(),
            edges: g.edges(),
        }
    }
}

/// Summary of one computed measure with its property verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureAudit {
    pub measure: Measure,
    pub param: f64,
    pub domain_low: f64,
    /// `None` for an unbounded domain.
    pub domain_high: Option<f64>,
    pub symmetric: bool,
    pub reports: Vec<PropertyReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub graph: GraphDescriptor,
    pub tolerance: f64,
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<f64>>,
    pub results: Vec<MeasureAudit>,
}

impl AuditReport {
    pub fn all_hold(&self) -> bool {
        self.results
            .iter()
            .all(|m| m.reports.iter().all(|r| r.holds))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Human-readable table, one row per (measure, property).
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "graph {} (n = {}), tolerance {:e}",
            self.graph.name, self.graph.n, self.tolerance
        );
        let _ = writeln!(
            out,
            "{:<9} {:>12}  {:<20} {:<6} witness",
            "measure", "param", "property", "result"
        );
        for m in &self.results {
            for r in &m.reports {
                let verdict = match (r.holds, r.indeterminate) {
                    (true, false) => "ok",
                    (true, true) => "ok?",
                    (false, false) => "FAIL",
                    (false, true) => "FAIL?",
                };
                let mut detail = String::new();
                if let Some(w) = &r.witness {
                    if !w.vertices.is_empty() {
                        let v: Vec<String> = w.vertices.iter().map(|x| x.to_string()).collect();
                        let _ = write!(detail, "({}) ", v.join(","));
                    }
                    let _ = write!(detail, "slack {:.6e}", w.slack);
                }
                if let Some(value) = r.value {
                    if !detail.is_empty() {
                        detail.push_str("; ");
                    }
                    let label = if r.property == Property::SigmaProximity {
                        "sigma"
                    } else {
                        "min eig"
                    };
                    let _ = write!(detail, "{label} {value:.6e}");
                }
                if let Some(note) = &r.note {
                    let _ = write!(detail, " [{note}]");
                }
                let _ = writeln!(
                    out,
                    "{:<9} {:>12.6}  {:<20} {:<6} {}",
                    m.measure.name(),
                    m.param,
                    r.property.to_string(),
                    verdict,
                    detail
                );
            }
        }
        out
    }
}

fn asymmetric(property: Property, k: &SquareMatrix, tol: f64) -> PropertyReport {
    let (i, j, diff) = k.max_asymmetry();
    PropertyReport {
        property,
        holds: false,
        witness: Some(Witness {
            vertices: vec![i + 1, j + 1],
            slack: -diff,
        }),
        tolerance: tol,
        indeterminate: false,
        value: None,
        note: Some("matrix is not symmetric".to_string()),
    }
}

/// The symmetric matrix the logarithmic similarity is taken of: the measure
/// itself, or its entrywise geometric symmetrization.
fn log_base(k: &SquareMatrix) -> Result<SquareMatrix> {
    if k.is_symmetric() {
        Ok(k.clone())
    } else {
        symmetrize_geometric(k)
    }
}

/// Evaluates one property of a similarity matrix.
pub fn evaluate(
    property: Property,
    k: &SquareMatrix,
    g: &WeightedGraph,
    opts: &AuditOptions,
) -> Result<PropertyReport> {
    let tol = opts.tol;
    let report = match property {
        Property::Psd => check_psd(k, tol)?,
        Property::SymmetrizedPsd => check_psd(&k.symmetrized(), tol)?,
        Property::Proximity if !k.is_symmetric() => asymmetric(property, k, tol),
        Property::Proximity => check_proximity(k, tol)?,
        Property::ProximityAt(t) => check_proximity_at(k, t, tol)?,
        Property::SigmaProximity if !k.is_symmetric() => asymmetric(property, k, tol),
        Property::SigmaProximity => {
            let mut r = check_sigma_proximity(k, tol)?;
            let sigma = r.value.unwrap_or(f64::NAN);
            let diff = (sigma - opts.sigma).abs();
            if r.holds && !(diff <= tol * opts.sigma.abs().max(1.0)) {
                r.holds = false;
                r.witness = Some(Witness {
                    vertices: vec![],
                    slack: -diff,
                });
                r.note = Some(format!("row sums equal {sigma}, expected {}", opts.sigma));
            }
            r
        }
        Property::Egocentrism => check_egocentrism(k, tol)?,
        Property::Metric => check_metric(&pair_to_dist(k), tol)?,
        Property::TriangleAt(t) => check_triangle_at(&pair_to_dist(k), t, tol)?,
        Property::SqEuclidean => check_sq_euclidean(&pair_to_dist(k), tol)?,
        Property::SqrtMetric => check_sqrt_distance(&pair_to_dist(k), tol)?,
        Property::Transitional => check_transitional(k, g, tol)?,
        Property::CutpointAdditive => check_cutpoint_additive(&log_distance(k)?, g, tol)?,
        Property::DistanceOrder => check_distance_order(&pair_to_dist(k))?,
        Property::CloserAt(t) => check_closer_at(&pair_to_dist(k), t)?,
        Property::LogMetric => check_metric(&log_distance(k)?, tol)?,
        Property::LogProximity => check_proximity(&log_similarity(&log_base(k)?)?, tol)?,
        Property::LogPsd => check_psd(&log_similarity(&log_base(k)?)?, tol)?,
        Property::LogDistanceOrder => check_distance_order(&log_distance(k)?)?,
    };
    Ok(report.relabel(property))
}

fn audit_one(
    spec: MeasureSpec,
    g: &WeightedGraph,
    gm: &GraphMatrices,
    checks: &[Property],
    opts: &AuditOptions,
) -> Result<MeasureAudit> {
    let kernel = compute(spec.measure, gm, spec.param, opts.rates.as_ref())?;
    let reports = checks
        .iter()
        .map(|&p| evaluate(p, &kernel.matrix, g, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(&kernel, reports))
}

fn summarize(kernel: &KernelResult, reports: Vec<PropertyReport>) -> MeasureAudit {
    MeasureAudit {
        measure: kernel.measure,
        param: kernel.param,
        domain_low: kernel.domain.low,
        domain_high: kernel.domain.high.is_finite().then_some(kernel.domain.high),
        symmetric: kernel.matrix.is_symmetric(),
        reports,
    }
}

/// Computes each measure, runs every requested check and collects the
/// witnessed reports. Measures are evaluated in parallel; the result order
/// follows `measures`.
pub fn run_audit(
    graph_name: &str,
    g: &WeightedGraph,
    measures: &[MeasureSpec],
    checks: &[Property],
    opts: &AuditOptions,
) -> Result<AuditReport> {
    let gm = build_matrices(g);
    let results = measures
        .par_iter()
        .map(|&spec| audit_one(spec, g, &gm, checks, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(AuditReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        graph: GraphDescriptor::new(graph_name, g),
        tolerance: opts.tol,
        sigma: opts.sigma,
        rates: opts.rates.as_ref().map(|r| r.as_slice().to_vec()),
        results,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HoldsBelow,
    HoldsAbove,
}

/// A parameter interval bracketing a change in a property's status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub measure: Measure,
    pub property: Property,
    pub bracket_low: f64,
    pub bracket_high: f64,
    pub direction: Direction,
    pub evaluations: usize,
    /// Bisection assumes a single status change inside the range; it is not
    /// verified.
    pub monotonicity_assumed: bool,
}

impl ThresholdResult {
    pub fn contains(&self, value: f64) -> bool {
        self.bracket_low <= value && value <= self.bracket_high
    }

    pub fn width(&self) -> f64 {
        self.bracket_high - self.bracket_low
    }

    /// Re-evaluates the property at both bracket ends and confirms the
    /// statuses differ in the recorded direction.
    pub fn recheck(&self, g: &WeightedGraph, opts: &AuditOptions) -> Result<bool> {
        let gm = build_matrices(g);
        let low = property_holds(g, &gm, self.measure, self.property, self.bracket_low, opts)?;
        let high = property_holds(g, &gm, self.measure, self.property, self.bracket_high, opts)?;
        Ok(match self.direction {
            Direction::HoldsBelow => low && !high,
            Direction::HoldsAbove => !low && high,
        })
    }
}

fn property_holds(
    g: &WeightedGraph,
    gm: &GraphMatrices,
    measure: Measure,
    property: Property,
    param: f64,
    opts: &AuditOptions,
) -> Result<bool> {
    let kernel = compute(measure, gm, param, opts.rates.as_ref())?;
    Ok(evaluate(property, &kernel.matrix, g, opts)?.holds)
}

/// Bisects `range` until the bracket is no wider than `resolution`.
pub fn find_threshold(
    g: &WeightedGraph,
    measure: Measure,
    property: Property,
    range: (f64, f64),
    resolution: f64,
    opts: &AuditOptions,
) -> Result<ThresholdResult> {
    let (mut lo, mut hi) = range;
    if !(resolution > 0.0) {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!("empty range ({lo}, {hi})")));
    }
    let gm = build_matrices(g);
    let holds_low = property_holds(g, &gm, measure, property, lo, opts)?;
    let holds_high = property_holds(g, &gm, measure, property, hi, opts)?;
    let mut evaluations = 2;
    if holds_low == holds_high {
        return Err(Error::SameStatusAtEndpoints {
            property: property.to_string(),
            holds: holds_low,
        });
    }
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        evaluations += 1;
        if property_holds(g, &gm, measure, property, mid, opts)? == holds_low {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdResult {
        measure,
        property,
        bracket_low: lo,
        bracket_high: hi,
        direction: if holds_low {
            Direction::HoldsBelow
        } else {
            Direction::HoldsAbove
        },
        evaluations,
        monotonicity_assumed: true,
    })
}

/// Vertex coordinates whose Gram matrix is the measure; one point per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub points: Vec<Vec<f64>>,
    /// Largest deviation between `‖x_i − x_j‖²` and the kernel distance.
    pub max_error: f64,
}

impl Embedding {
    /// CSV with header `x1,…,xn` and one point per row.
    pub fn to_csv(&self) -> String {
        let dim = self.points.first().map_or(0, Vec::len);
        let mut out = (1..=dim)
            .map(|i| format!("x{i}"))
            .collect::<Vec<_>>()
            .join(",");
        out.push('\n');
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|x| format!("{x:e}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        lines.next().ok_or_else(|| Error::InvalidArgument("empty embedding file".into()))?;
        let points = lines
            .enumerate()
            .map(|(i, line)| {
                line.split(',')
                    .map(|v| {
                        v.trim().parse::<f64>().map_err(|_| Error::Parse {
                            line: i + 2,
                            message: format!("`{v}` is not a number"),
                        })
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            points,
            max_error: 0.0,
        })
    }
}

/// Embeds the vertices using the PSD square root of the measure and checks
/// that pairwise squared distances reproduce the kernel distance.
pub fn export_embedding(
    g: &WeightedGraph,
    measure: Measure,
    param: f64,
    opts: &AuditOptions,
) -> Result<Embedding> {
    let gm = build_matrices(g);
    let kernel = compute(measure, &gm, param, opts.rates.as_ref())?;
    let d = kernel_to_sq_dist(&kernel.matrix)?;
    let points = embed(&kernel.matrix)?;
    let n = points.len();
    let mut max_error: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            max_error = max_error.max((squared_distance(&points[i], &points[j]) - d.get(i, j)).abs());
        }
    }
    if max_error > EMBEDDING_TOL {
        return Err(Error::Reconstruction { error: max_error });
    }
    Ok(Embedding { points, max_error })
}
