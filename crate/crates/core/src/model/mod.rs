//! Domain types and the closed-form mathematics of the access model.
//!
//! A [`Scenario`] describes `k` locations, each with a population and a
//! disadvantaged share `beta`. An [`Allocation`] splits the available
//! resource across locations as fractions on the simplex. Acquisition
//! functions turn an allocation into the share `rho` that the
//! disadvantaged actually acquire, and [`disparity`] turns that into the
//! rate disparity between the two subpopulations.

mod acquisition;
pub mod binomial;
mod disparity;

pub use acquisition::{approx_rho, exact_rho, naive_rho, saturation_split};
pub(crate) use acquisition::naive_rho_unchecked;
pub use disparity::{
    acquisition_outcome, disparity, disparity_coefficients, distance, distance_l1, distance_linf,
    is_feasible, rate_disparity, Feasibility, Violation,
};

use crate::error::{check_len, invalid, Error, Result};

/// Absolute tolerance for comparisons between fractions.
pub const FRACTION_TOL: f64 = 1e-9;

/// Tolerance on the sum of a discrete distribution over access gaps.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// One location: its population size and the fraction that is disadvantaged.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationProfile {
    id: String,
    population: u64,
    beta: f64,
}

impl LocationProfile {
    pub fn new(id: impl Into<String>, population: u64, beta: f64) -> Result<Self> {
        if population == 0 {
            return Err(invalid("population", "must be at least 1"));
        }
        check_unit("beta", beta)?;
        Ok(Self {
            id: id.into(),
            population,
            beta,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn population(&self) -> u64 {
        self.population
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Distance used to bound the deviation from proportional allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Distance {
    /// Absolute l1 distance `sum |n_j - p_j|`.
    L1,
    /// Relative l-infinity distance `max |n_j / p_j - 1|`.
    LInf,
}

/// What is known about the access gap `eta`.
#[derive(Debug, Clone, PartialEq)]
pub enum EtaSpec {
    Point(f64),
    Grid(Vec<f64>),
    /// Pairs of `(eta, probability)`.
    Distribution(Vec<(f64, f64)>),
}

impl EtaSpec {
    pub fn validate(&self) -> Result<()> {
        let values = self.values();
        if values.is_empty() {
            return Err(invalid("eta", "at least one value is required"));
        }
        for &eta in &values {
            check_eta(eta)?;
        }
        if let EtaSpec::Distribution(pairs) = self {
            let mut total = 0.0;
            for &(_, w) in pairs {
                if !(w >= 0.0) || !w.is_finite() {
                    return Err(invalid("eta", format!("weight {w} is not a probability")));
                }
                total += w;
            }
            if (total - 1.0).abs() > WEIGHT_SUM_TOL {
                return Err(invalid("eta", format!("weights sum to {total}, not 1")));
            }
        }
        Ok(())
    }

    /// The eta values, in order.
    pub fn values(&self) -> Vec<f64> {
        match self {
            EtaSpec::Point(eta) => vec![*eta],
            EtaSpec::Grid(grid) => grid.clone(),
            EtaSpec::Distribution(pairs) => pairs.iter().map(|&(eta, _)| eta).collect(),
        }
    }

    /// Probabilities attached to [`values`](Self::values); uniform for grids.
    pub fn weights(&self) -> Vec<f64> {
        match self {
            EtaSpec::Point(_) => vec![1.0],
            EtaSpec::Grid(grid) => vec![1.0 / grid.len() as f64; grid.len()],
            EtaSpec::Distribution(pairs) => pairs.iter().map(|&(_, w)| w).collect(),
        }
    }
}

/// A full problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    locations: Vec<LocationProfile>,
    alpha: f64,
    epsilon: f64,
    distance: Distance,
    eta: EtaSpec,
    shares: Vec<f64>,
    total_population: u64,
}

impl Scenario {
    pub fn new(
        locations: Vec<LocationProfile>,
        alpha: f64,
        epsilon: f64,
        distance: Distance,
        eta: EtaSpec,
    ) -> Result<Self> {
        if locations.is_empty() {
            return Err(invalid("locations", "at least one location is required"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid("alpha", format!("{alpha} is not in (0, 1)")));
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(invalid("epsilon", format!("{epsilon} is not a nonnegative number")));
        }
        eta.validate()?;
        let total_population: u64 = locations.iter().map(|l| l.population).sum();
        let shares = locations
            .iter()
            .map(|l| l.population as f64 / total_population as f64)
            .collect();
        Ok(Self {
            locations,
            alpha,
            epsilon,
            distance,
            eta,
            shares,
            total_population,
        })
    }

    /// Same instance with a different access-gap specification.
    pub fn with_eta(&self, eta: EtaSpec) -> Result<Self> {
        eta.validate()?;
        Ok(Self {
            eta,
            ..self.clone()
        })
    }

    pub fn with_distance(&self, distance: Distance, epsilon: f64) -> Result<Self> {
        Self::new(
            self.locations.clone(),
            self.alpha,
            epsilon,
            distance,
            self.eta.clone(),
        )
    }

    pub fn locations(&self) -> &[LocationProfile] {
        &self.locations
    }

    pub fn k(&self) -> usize {
        self.locations.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn distance(&self) -> Distance {
        self.distance
    }

    pub fn eta(&self) -> &EtaSpec {
        &self.eta
    }

    /// Population shares `p_j`.
    pub fn shares(&self) -> &[f64] {
        &self.shares
    }

    pub fn betas(&self) -> Vec<f64> {
        self.locations.iter().map(|l| l.beta).collect()
    }

    pub fn total_population(&self) -> u64 {
        self.total_population
    }

    /// Total resources `N = alpha * P`.
    pub fn total_resources(&self) -> f64 {
        self.alpha * self.total_population as f64
    }

    /// Aggregate disadvantaged share `sum beta_j p_j`.
    pub fn disadvantaged_share(&self) -> f64 {
        self.locations
            .iter()
            .zip(&self.shares)
            .map(|(l, p)| l.beta * p)
            .sum()
    }

    /// Aggregate advantaged share `sum (1 - beta_j) p_j`.
    pub fn advantaged_share(&self) -> f64 {
        self.locations
            .iter()
            .zip(&self.shares)
            .map(|(l, p)| (1.0 - l.beta) * p)
            .sum()
    }
}

/// Fractions of the total resource sent to each location.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation(Vec<f64>);

impl Allocation {
    /// Validates simplex membership; entries within tolerance below zero are clamped.
    pub fn new(n: Vec<f64>) -> Result<Self> {
        if n.is_empty() {
            return Err(invalid("allocation", "empty"));
        }
        let mut sum = 0.0;
        for (j, &v) in n.iter().enumerate() {
            if !v.is_finite() || v < -FRACTION_TOL {
                return Err(invalid("allocation", format!("entry {j} is {v}")));
            }
            sum += v;
        }
        if (sum - 1.0).abs() > FRACTION_TOL {
            return Err(invalid("allocation", format!("entries sum to {sum}")));
        }
        Ok(Self(n.into_iter().map(|v| v.max(0.0)).collect()))
    }

    /// The proportional allocation `n = p`.
    pub fn proportional(scenario: &Scenario) -> Self {
        Self(scenario.shares().to_vec())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Largest coordinate difference to another allocation.
    pub fn max_abs_diff(&self, other: &Allocation) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for Allocation {
    type Output = f64;
    fn index(&self, j: usize) -> &f64 {
        &self.0[j]
    }
}

/// Which acquisition function produced a `rho` vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AcquisitionModel {
    Naive,
    Approx,
    Exact,
    Simulated,
}

/// Per-location share of the allocated resource acquired by the disadvantaged.
#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionOutcome {
    rho: Vec<f64>,
    model: AcquisitionModel,
    eta: f64,
}

impl AcquisitionOutcome {
    pub fn new(rho: Vec<f64>, model: AcquisitionModel, eta: f64) -> Result<Self> {
        for &r in &rho {
            check_unit("rho", r)?;
        }
        check_eta(eta)?;
        Ok(Self { rho, model, eta })
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn model(&self) -> AcquisitionModel {
        self.model
    }

    /// The access gap the outcome was evaluated at.
    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// Rate disparity of an allocation together with its linear decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityReport {
    /// Advantaged minus disadvantaged acquisition rate. Negative values are meaningful.
    pub rd: f64,
    /// Coefficients `c_j` with `rd = sum c_j n_j`.
    pub c: Vec<f64>,
    pub d1: f64,
    pub dinf: f64,
    /// Disparity of the proportional allocation under the same acquisition model.
    pub rd_proportional: f64,
}

pub(crate) fn check_unit(name: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(invalid(name, format!("{v} is not in [0, 1]")))
    }
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(invalid("eta", format!("{eta} is not in (0, 1]")))
    }
}

pub(crate) fn check_k(scenario: &Scenario, name: &'static str, got: usize) -> Result<()> {
    check_len(name, scenario.k(), got)
}

impl From<Allocation> for Vec<f64> {
    fn from(a: Allocation) -> Self {
        a.0
    }
}

impl TryFrom<Vec<f64>> for Allocation {
    type Error = Error;
    fn try_from(n: Vec<f64>) -> Result<Self> {
        Allocation::new(n)
    }
}
