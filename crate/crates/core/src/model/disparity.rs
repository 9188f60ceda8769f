use super::acquisition::{approx_rho_unchecked, exact_rho, naive_rho_unchecked};
use super::{
    check_eta, check_k, AcquisitionModel, AcquisitionOutcome, Allocation, Distance,
    DisparityReport, Scenario, FRACTION_TOL,
};
use crate::error::{check_len, invalid, Error, Result};

/// Evaluates an acquisition function at every location of an allocation.
///
/// For [`AcquisitionModel::Exact`] the per-location resource count
/// `alpha * n_j * P` is rounded to an integer; empty locations fall back
/// to the naive share. [`AcquisitionModel::Simulated`] is not an analytic
/// model and is rejected here.
pub fn acquisition_outcome(
    scenario: &Scenario,
    allocation: &[f64],
    eta: f64,
    model: AcquisitionModel,
) -> Result<AcquisitionOutcome> {
    check_k(scenario, "allocation", allocation.len())?;
    check_eta(eta)?;
    let alpha = scenario.alpha();
    let total = scenario.total_resources();
    let rho = scenario
        .locations()
        .iter()
        .zip(scenario.shares())
        .zip(allocation)
        .map(|((loc, &p), &n)| {
            let rho0 = naive_rho_unchecked(loc.beta(), eta);
            match model {
                AcquisitionModel::Naive => Ok(rho0),
                AcquisitionModel::Approx => {
                    let coverage = alpha * n / p;
                    if coverage > 1.0 + FRACTION_TOL {
                        return Err(Error::NoWaste {
                            allocated: alpha * n,
                            population: p,
                        });
                    }
                    Ok(approx_rho_unchecked(coverage, loc.beta(), rho0))
                }
                AcquisitionModel::Exact => {
                    let units = ((n * total).round() as u64).min(loc.population());
                    if units == 0 {
                        Ok(rho0)
                    } else {
                        exact_rho(units, loc.population(), loc.beta(), eta)
                    }
                }
                AcquisitionModel::Simulated => Err(invalid(
                    "model",
                    "simulated outcomes come from the sim module",
                )),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AcquisitionOutcome { rho, model, eta })
}

fn aggregate_shares(scenario: &Scenario) -> Result<(f64, f64)> {
    let dis = scenario.disadvantaged_share();
    let adv = scenario.advantaged_share();
    if !(dis > 0.0) {
        return Err(Error::DegenerateSplit("no disadvantaged population"));
    }
    if !(adv > 0.0) {
        return Err(Error::DegenerateSplit("no advantaged population"));
    }
    Ok((dis, adv))
}

/// Rate disparity computed directly as the difference of the two
/// per-capita acquisition rates.
pub fn rate_disparity(scenario: &Scenario, allocation: &[f64], rho: &[f64]) -> Result<f64> {
    check_k(scenario, "allocation", allocation.len())?;
    check_k(scenario, "rho", rho.len())?;
    let (dis, adv) = aggregate_shares(scenario)?;
    let (mut to_adv, mut to_dis) = (0.0, 0.0);
    for (&n, &r) in allocation.iter().zip(rho) {
        to_adv += (1.0 - r) * n;
        to_dis += r * n;
    }
    let alpha = scenario.alpha();
    Ok(alpha * to_adv / adv - alpha * to_dis / dis)
}

/// Coefficients `c_j` such that the disparity equals `sum c_j n_j` for a
/// fixed `rho`.
pub fn disparity_coefficients(scenario: &Scenario, rho: &[f64]) -> Result<Vec<f64>> {
    check_k(scenario, "rho", rho.len())?;
    let (dis, adv) = aggregate_shares(scenario)?;
    let alpha = scenario.alpha();
    Ok(rho
        .iter()
        .map(|&r| alpha * ((1.0 - r) / adv - r / dis))
        .collect())
}

/// Full disparity report of an allocation.
///
/// The proportional baseline is re-evaluated under the outcome's model at
/// the same access gap; simulated outcomes use the exact model for it.
pub fn disparity(
    scenario: &Scenario,
    allocation: &Allocation,
    outcome: &AcquisitionOutcome,
) -> Result<DisparityReport> {
    let n = allocation.as_slice();
    let rd = rate_disparity(scenario, n, outcome.rho())?;
    let c = disparity_coefficients(scenario, outcome.rho())?;
    let p = scenario.shares();
    let baseline_model = match outcome.model() {
        AcquisitionModel::Simulated => AcquisitionModel::Exact,
        m => m,
    };
    let baseline = acquisition_outcome(scenario, p, outcome.eta(), baseline_model)?;
    let rd_proportional = rate_disparity(scenario, p, baseline.rho())?;
    Ok(DisparityReport {
        rd,
        c,
        d1: distance_l1(n, p)?,
        dinf: distance_linf(n, p)?,
        rd_proportional,
    })
}

/// `sum_j |n_j - p_j|`.
pub fn distance_l1(n: &[f64], p: &[f64]) -> Result<f64> {
    check_len("n", p.len(), n.len())?;
    Ok(n.iter().zip(p).map(|(a, b)| (a - b).abs()).sum())
}

/// `max_j |n_j / p_j - 1|`.
pub fn distance_linf(n: &[f64], p: &[f64]) -> Result<f64> {
    check_len("n", p.len(), n.len())?;
    n.iter().zip(p).try_fold(0.0f64, |acc, (&a, &b)| {
        if !(b > 0.0) {
            return Err(invalid("p", "relative distance needs positive shares"));
        }
        Ok(acc.max((a / b - 1.0).abs()))
    })
}

pub fn distance(kind: Distance, n: &[f64], p: &[f64]) -> Result<f64> {
    match kind {
        Distance::L1 => distance_l1(n, p),
        Distance::LInf => distance_linf(n, p),
    }
}

/// A single reason an allocation is outside the feasible set.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Length { expected: usize, got: usize },
    Negative { index: usize, value: f64 },
    Sum { total: f64 },
    Distance { kind: Distance, value: f64, bound: f64 },
    NoWaste { index: usize, coverage: f64 },
}

/// Result of a feasibility check: empty means feasible.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Feasibility {
    pub violations: Vec<Violation>,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks simplex membership, the distance bound and the no-waste cap.
pub fn is_feasible(scenario: &Scenario, allocation: &[f64]) -> Feasibility {
    is_feasible_within(scenario, allocation, FRACTION_TOL)
}

pub(crate) fn is_feasible_within(scenario: &Scenario, allocation: &[f64], tol: f64) -> Feasibility {
    let mut violations = Vec::new();
    if allocation.len() != scenario.k() {
        violations.push(Violation::Length {
            expected: scenario.k(),
            got: allocation.len(),
        });
        return Feasibility { violations };
    }
    let p = scenario.shares();
    let alpha = scenario.alpha();
    for (index, (&n, &pj)) in allocation.iter().zip(p).enumerate() {
        if n < -tol {
            violations.push(Violation::Negative { index, value: n });
        }
        if alpha * n > pj + tol {
            violations.push(Violation::NoWaste {
                index,
                coverage: alpha * n / pj,
            });
        }
    }
    let total: f64 = allocation.iter().sum();
    if (total - 1.0).abs() > tol {
        violations.push(Violation::Sum { total });
    }
    let kind = scenario.distance();
    // shares are always positive, so the distance is defined
    let value = distance(kind, allocation, p).unwrap_or(f64::INFINITY);
    if value > scenario.epsilon() + tol {
        violations.push(Violation::Distance {
            kind,
            value,
            bound: scenario.epsilon(),
        });
    }
    Feasibility { violations }
}
