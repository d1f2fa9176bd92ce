//! The ten similarity measures, each a function of the graph matrices and a
//! single parameter (`α` for resolvent-type measures, `t` for the rest).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphMatrices;
use crate::linalg::{invert, matrix_exp, spectral_radius, SquareMatrix};

/// Parameters closer than this to a domain boundary are rejected.
pub const BOUNDARY_MARGIN: f64 = 1e-12;

const DFACT_TERM_TOL: f64 = 1e-16;
const DFACT_MAX_TERMS: usize = 10_000;
const DFACT_DECREASING_RUN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Measure {
    #[serde(rename = "katz")]
    Katz,
    #[serde(rename = "comm")]
    Communicability,
    #[serde(rename = "dfact")]
    DoubleFactorial,
    #[serde(rename = "heat")]
    Heat,
    #[serde(rename = "nheat")]
    NormalizedHeat,
    #[serde(rename = "regL")]
    RegularizedLaplacian,
    #[serde(rename = "absorp")]
    Absorption,
    #[serde(rename = "ppr")]
    PersonalizedPageRank,
    #[serde(rename = "modifppr")]
    ModifiedPageRank,
    #[serde(rename = "heatppr")]
    PageRankHeat,
}

impl Measure {
    pub const ALL: [Measure; 10] = [
        Measure::Katz,
        Measure::Communicability,
        Measure::DoubleFactorial,
        Measure::Heat,
        Measure::NormalizedHeat,
        Measure::RegularizedLaplacian,
        Measure::Absorption,
        Measure::PersonalizedPageRank,
        Measure::ModifiedPageRank,
        Measure::PageRankHeat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Katz => "katz",
            Measure::Communicability => "comm",
            Measure::DoubleFactorial => "dfact",
            Measure::Heat => "heat",
            Measure::NormalizedHeat => "nheat",
            Measure::RegularizedLaplacian => "regL",
            Measure::Absorption => "absorp",
            Measure::PersonalizedPageRank => "ppr",
            Measure::ModifiedPageRank => "modifppr",
            Measure::PageRankHeat => "heatppr",
        }
    }

    /// Whether the matrix is symmetric for every graph.
    pub fn is_symmetric(self) -> bool {
        !matches!(self, Measure::PersonalizedPageRank | Measure::PageRankHeat)
    }

    /// Katz, regularized Laplacian, absorption and both PageRank resolvents
    /// are matrices of walk weights and therefore transitional.
    pub fn is_transitional(self) -> bool {
        matches!(
            self,
            Measure::Katz
                | Measure::RegularizedLaplacian
                | Measure::Absorption
                | Measure::PersonalizedPageRank
                | Measure::ModifiedPageRank
        )
    }

    /// Measures parameterized by `α` rather than `t`.
    pub fn uses_alpha(self) -> bool {
        matches!(
            self,
            Measure::Katz | Measure::PersonalizedPageRank | Measure::ModifiedPageRank
        )
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let m = match s.to_ascii_lowercase().as_str() {
            "katz" | "walk" => Measure::Katz,
            "comm" | "communicability" => Measure::Communicability,
            "dfact" | "df" | "double-factorial" => Measure::DoubleFactorial,
            "heat" => Measure::Heat,
            "nheat" | "n-heat" | "normalized-heat" => Measure::NormalizedHeat,
            "regl" | "forest" | "regularized-laplacian" => Measure::RegularizedLaplacian,
            "absorp" | "absorption" => Measure::Absorption,
            "ppr" | "pagerank" => Measure::PersonalizedPageRank,
            "modifppr" | "modified-ppr" => Measure::ModifiedPageRank,
            "heatppr" | "pagerank-heat" => Measure::PageRankHeat,
            _ => return Err(Error::UnknownMeasure(s.to_string())),
        };
        Ok(m)
    }
}

/// Open parameter interval `(low, high)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamDomain {
    pub low: f64,
    pub high: f64,
}

impl ParamDomain {
    pub fn contains(&self, p: f64) -> bool {
        p > self.low + BOUNDARY_MARGIN && p < self.high - BOUNDARY_MARGIN
    }
}

/// Positive absorption rates, one per vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionRates(Vec<f64>);

impl AbsorptionRates {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if let Some((i, a)) = rates.iter().enumerate().find(|(_, a)| !(**a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "absorption rate {} for vertex {} must be positive",
                a,
                i + 1
            )));
        }
        Ok(Self(rates))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// A similarity matrix tagged with the measure and parameter that produced it.
#[derive(Debug, Clone)]
pub struct KernelResult {
    pub measure: Measure,
    pub param: f64,
    pub matrix: SquareMatrix,
    pub domain: ParamDomain,
}

pub fn param_domain(measure: Measure, gm: &GraphMatrices) -> Result<ParamDomain> {
    let high = match measure {
        Measure::Katz => 1.0 / spectral_radius(&gm.adjacency)?,
        Measure::PersonalizedPageRank | Measure::ModifiedPageRank => 1.0,
        _ => f64::INFINITY,
    };
    Ok(ParamDomain { low: 0.0, high })
}

fn checked_domain(measure: Measure, gm: &GraphMatrices, param: f64) -> Result<ParamDomain> {
    let domain = param_domain(measure, gm)?;
    if !domain.contains(param) {
        return Err(Error::ParameterOutOfDomain {
            measure: measure.name().to_string(),
            param,
            low: domain.low,
            high: domain.high,
        });
    }
    Ok(domain)
}

fn result(measure: Measure, param: f64, domain: ParamDomain, matrix: SquareMatrix) -> KernelResult {
    KernelResult {
        measure,
        param,
        matrix,
        domain,
    }
}

/// `[I − αW]^{-1}` for `0 < α < 1/ρ(W)`.
pub fn katz(gm: &GraphMatrices, alpha: f64) -> Result<KernelResult> {
    let domain = checked_domain(Measure::Katz, gm, alpha)?;
    let n = gm.n();
    let m = &SquareMatrix::identity(n) - &gm.adjacency.scaled(alpha);
    Ok(result(Measure::Katz, alpha, domain, invert(&m)?))
}

/// `exp(tW)`.
pub fn communicability(gm: &GraphMatrices, t: f64) -> Result<KernelResult> {
    let domain = checked_domain(Measure::Communicability, gm, t)?;
    let k = matrix_exp(&gm.adjacency.scaled(t))?;
    Ok(result(Measure::Communicability, t, domain, k))
}

/// `Σ_k t^k / k!! · W^k` with `0!! = 1!! = 1`.
///
/// Even and odd powers are accumulated as two chains, each advanced by
/// `(tW)² / k`, so `W^k` and `k!!` never appear separately.
pub fn double_factorial(gm: &GraphMatrices, t: f64) -> Result<KernelResult> {
    let domain = checked_domain(Measure::DoubleFactorial, gm, t)?;
    let n = gm.n();
    let tw = gm.adjacency.scaled(t);
    let tw2 = &tw * &tw;

    let mut even = SquareMatrix::identity(n);
    let mut odd = tw.clone();
    let mut sum = &even + &odd;
    let mut prev_norm = odd.max_abs();
    let mut decreasing = usize::from(prev_norm < 1.0);
    let mut k = 1;
    loop {
        k += 1;
        if k > DFACT_MAX_TERMS {
            return Err(Error::NotConverged {
                iterations: DFACT_MAX_TERMS,
            });
        }
        let term = if k % 2 == 0 {
            even = (&even * &tw2).scaled(1.0 / k as f64);
            &even
        } else {
            odd = (&odd * &tw2).scaled(1.0 / k as f64);
            &odd
        };
        sum = &sum + term;
        if !sum.is_finite() {
            return Err(Error::Overflow("double-factorial series"));
        }
        let norm = term.max_abs();
        decreasing = if norm < prev_norm { decreasing + 1 } else { 0 };
        prev_norm = norm;
        if norm < DFACT_TERM_TOL && decreasing >= DFACT_DECREASING_RUN {
            break;
        }
    }
    Ok(result(Measure::DoubleFactorial, t, domain, sum))
}

/// `exp(−tM)` for a matrix with nonpositive off-diagonal entries, evaluated
/// as `e^{−tc} exp(t(cI − M))` with `c = max_i M_ii` so every Taylor term is
/// entrywise nonnegative.
fn exp_negative_generator(generator: &SquareMatrix, t: f64) -> Result<SquareMatrix> {
    let n = generator.n();
    let shift = generator.diagonal().into_iter().fold(0.0, f64::max);
    let shifted = &SquareMatrix::identity(n).scaled(shift) - generator;
    let e = matrix_exp(&shifted.scaled(t))?;
    let k = e.scaled((-t * shift).exp());
    if !k.is_finite() {
        return Err(Error::Overflow("matrix exponential"));
    }
    Ok(k)
}

/// `exp(−tL)`.
pub fn heat(gm: &GraphMatrices, t: f64) -> Result<KernelResult> {
    let domain = checked_domain(Measure::Heat, gm, t)?;
    let k = exp_negative_generator(&gm.laplacian, t)?;
    Ok(result(Measure::Heat, t, domain, k))
}

/// `exp(−t𝓛)` with the normalized Laplacian `𝓛 = D^{-1/2} L D^{-1/2}`.
pub fn normalized_heat(gm: &GraphMatrices, t: f64) -> Result<KernelResult> {
    let domain = checked_domain(Measure::NormalizedHeat, gm, t)?;
    let k = exp_negative_generator(&gm.normalized_laplacian, t)?;
    Ok(result(Measure::NormalizedHeat, t, domain, k))
}

/// `[I + tL]^{-1}`, the forest kernel.
pub fn regularized_laplacian(gm: &GraphMatrices, t: f64) -> Result<KernelResult> {
    let domain = checked_domain(Measure::RegularizedLaplacian, gm, t)?;
    let m = &SquareMatrix::identity(gm.n()) + &gm.laplacian.scaled(t);
    Ok(result(Measure::RegularizedLaplacian, t, domain, invert(&m)?))
}

/// `[tA + L]^{-1}` with `A = Diag(rates)`.
pub fn absorption(gm: &GraphMatrices, rates: &AbsorptionRates, t: f64) -> Result<KernelResult> {
    let domain = checked_domain(Measure::Absorption, gm, t)?;
    if rates.as_slice().len() != gm.n() {
        return Err(Error::DimensionMismatch {
            expected: gm.n(),
            found: rates.as_slice().len(),
        });
    }
    let a = SquareMatrix::from_diagonal(rates.as_slice());
    let m = &a.scaled(t) + &gm.laplacian;
    Ok(result(Measure::Absorption, t, domain, invert(&m)?))
}

/// `[I − αP]^{-1}`; not symmetric in general.
pub fn ppr(gm: &GraphMatrices, alpha: f64) -> Result<KernelResult> {
    let domain = checked_domain(Measure::PersonalizedPageRank, gm, alpha)?;
    let m = &SquareMatrix::identity(gm.n()) - &gm.markov.scaled(alpha);
    Ok(result(Measure::PersonalizedPageRank, alpha, domain, invert(&m)?))
}

/// `[D − αW]^{-1} = [I − αP]^{-1} D^{-1}`.
pub fn modified_ppr(gm: &GraphMatrices, alpha: f64) -> Result<KernelResult> {
    let domain = checked_domain(Measure::ModifiedPageRank, gm, alpha)?;
    let m = &gm.degree - &gm.adjacency.scaled(alpha);
    Ok(result(Measure::ModifiedPageRank, alpha, domain, invert(&m)?))
}

/// `exp(−t(I − P))`; rows sum to one.
pub fn pagerank_heat(gm: &GraphMatrices, t: f64) -> Result<KernelResult> {
    let domain = checked_domain(Measure::PageRankHeat, gm, t)?;
    let generator = &SquareMatrix::identity(gm.n()) - &gm.markov;
    let k = exp_negative_generator(&generator, t)?;
    Ok(result(Measure::PageRankHeat, t, domain, k))
}

/// Dispatches on `measure`. Absorption falls back to unit rates.
pub fn compute(
    measure: Measure,
    gm: &GraphMatrices,
    param: f64,
    rates: Option<&AbsorptionRates>,
) -> Result<KernelResult> {
    match measure {
        Measure::Katz => katz(gm, param),
        Measure::Communicability => communicability(gm, param),
        Measure::DoubleFactorial => double_factorial(gm, param),
        Measure::Heat => heat(gm, param),
        Measure::NormalizedHeat => normalized_heat(gm, param),
        Measure::RegularizedLaplacian => regularized_laplacian(gm, param),
        Measure::Absorption => match rates {
            Some(r) => absorption(gm, r, param),
            None => absorption(gm, &AbsorptionRates::ones(gm.n()), param),
        },
        Measure::PersonalizedPageRank => ppr(gm, param),
        Measure::ModifiedPageRank => modified_ppr(gm, param),
        Measure::PageRankHeat => pagerank_heat(gm, param),
    }
}

pub const DEFAULT_TIMES: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 5.0];
pub const DEFAULT_FRACTIONS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Default parameter grid: fractions 0.1..0.9 of the `α` domain, or
/// `t ∈ {0.1, 0.5, 1, 2, 5}`.
pub fn default_grid(measure: Measure, gm: &GraphMatrices) -> Result<Vec<f64>> {
    if measure.uses_alpha() {
        let high = param_domain(measure, gm)?.high;
        Ok(DEFAULT_FRACTIONS.iter().map(|f| f * high).collect())
    } else {
        Ok(DEFAULT_TIMES.to_vec())
    }
}
