//! Downstream impact of an allocation and kernel smoothing of location data.

use crate::error::{invalid, Result};
use crate::model::{AcquisitionOutcome, Allocation, Scenario};

/// Relative tolerance on acquired counts exceeding a subpopulation.
const COUNT_TOL: f64 = 1e-6;

/// Risk model: the advantaged face an adverse outcome with probability `x`
/// and the disadvantaged with `(1 + delta) x`. Receiving the resource scales
/// these by `q` and `q_prime`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpactParams {
    x: f64,
    delta: f64,
    q: f64,
    q_prime: f64,
}

impl ImpactParams {
    /// `q` and `q_prime` may equal 1, a resource with no effect.
    pub fn new(x: f64, delta: f64, q: f64, q_prime: f64) -> Result<Self> {
        if !(x > 0.0 && x <= 1.0) {
            return Err(invalid("x", format!("{x} is not in (0, 1]")));
        }
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(invalid("delta", format!("{delta} must be nonnegative")));
        }
        if (1.0 + delta) * x > 1.0 + 1e-12 {
            return Err(invalid("delta", "(1 + delta) x exceeds 1"));
        }
        for (name, v) in [("q", q), ("q_prime", q_prime)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(invalid(name, format!("{v} is not in (0, 1]")));
            }
        }
        Ok(Self {
            x,
            delta,
            q,
            q_prime,
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn q_prime(&self) -> f64 {
        self.q_prime
    }
}

/// Expected adverse count from group sizes `a`, `d` and acquired counts `v_a`, `v_d`.
///
/// Works for any coverage, including the full-coverage case `v_a = a`, `v_d = d`.
pub fn expected_adverse_counts(
    impact: &ImpactParams,
    a: f64,
    d: f64,
    v_a: f64,
    v_d: f64,
) -> Result<f64> {
    let slack = COUNT_TOL * (a + d).max(1.0);
    if v_a < -slack || v_d < -slack {
        return Err(invalid("acquired", "negative acquired count"));
    }
    if v_d > d + slack {
        return Err(invalid("acquired", format!("{v_d} acquired by a group of {d}")));
    }
    if v_a > a + slack {
        return Err(invalid("acquired", format!("{v_a} acquired by a group of {a}")));
    }
    let ImpactParams {
        x,
        delta,
        q,
        q_prime,
    } = *impact;
    Ok(x * ((a - v_a) + q * v_a) + (1.0 + delta) * x * ((d - v_d) + q_prime * v_d))
}

/// Expected number of adverse outcomes across all locations.
pub fn expected_adverse(
    impact: &ImpactParams,
    scenario: &Scenario,
    allocation: &Allocation,
    outcome: &AcquisitionOutcome,
) -> Result<f64> {
    crate::error::check_len("allocation", scenario.k(), allocation.len())?;
    crate::error::check_len("rho", scenario.k(), outcome.rho().len())?;
    let (a, d) = group_sizes(scenario);
    let total = scenario.total_resources();
    let v_d: f64 = allocation
        .as_slice()
        .iter()
        .zip(outcome.rho())
        .map(|(n, r)| r * n * total)
        .sum();
    expected_adverse_counts(impact, a, d, total - v_d, v_d)
}

/// Advantaged and disadvantaged head counts `(A, D)`.
fn group_sizes(scenario: &Scenario) -> (f64, f64) {
    scenario.locations().iter().fold((0.0, 0.0), |(a, d), loc| {
        let p = loc.population() as f64;
        (a + (1.0 - loc.beta()) * p, d + loc.beta() * p)
    })
}

/// Slope and intercept of expected adverse count as a function of the
/// rate disparity, for a fixed total supply.
pub fn adverse_rd_line(impact: &ImpactParams, scenario: &Scenario) -> (f64, f64) {
    let (a, d) = group_sizes(scenario);
    let total = scenario.total_resources();
    let ImpactParams {
        x,
        delta,
        q,
        q_prime,
    } = *impact;
    // rd = total / a - v_d (1/a + 1/d), so v_d = (total / a - rd) / (1/a + 1/d)
    let scale = 1.0 / a + 1.0 / d;
    let per_vd = x * (1.0 - q) - (1.0 + delta) * x * (1.0 - q_prime);
    let base = x * (a - (1.0 - q) * total) + (1.0 + delta) * x * d;
    (-per_vd / scale, base + per_vd * total / a / scale)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeCondition {
    pub threshold: f64,
    /// Whether lowering disparity lowers the expected adverse count.
    pub positive_slope: bool,
}

/// Excess-risk level above which adverse outcomes increase with disparity.
pub fn slope_condition(delta: f64, q: f64, q_prime: f64) -> Result<SlopeCondition> {
    if !(q_prime < 1.0) {
        return Err(invalid(
            "q_prime",
            "a resource with q_prime >= 1 does not help the disadvantaged",
        ));
    }
    if !(q > 0.0 && q <= 1.0) || !(q_prime > 0.0) {
        return Err(invalid("q", "risk factors must lie in (0, 1]"));
    }
    let threshold = (q_prime - q) / (1.0 - q_prime);
    Ok(SlopeCondition {
        threshold,
        positive_slope: delta > threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub beta: f64,
    pub y: f64,
    pub weight: f64,
}

impl Observation {
    pub fn new(beta: f64, y: f64) -> Self {
        Self {
            beta,
            y,
            weight: 1.0,
        }
    }

    pub fn weighted(beta: f64, y: f64, weight: f64) -> Self {
        Self { beta, y, weight }
    }
}

/// Kernel average `sum w y exp(-lambda |b - b_j|) / sum w exp(-lambda |b - b_j|)`
/// at each query point.
pub fn soft_nn_interpolate(points: &[Observation], lambda: f64, queries: &[f64]) -> Result<Vec<f64>> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda", format!("{lambda} must be positive")));
    }
    for o in points {
        if !o.beta.is_finite() || !o.y.is_finite() {
            return Err(invalid("points", "coordinates must be finite"));
        }
        if !(o.weight >= 0.0) || !o.weight.is_finite() {
            return Err(invalid("points", format!("weight {} is negative", o.weight)));
        }
    }
    let active: Vec<&Observation> = points.iter().filter(|o| o.weight > 0.0).collect();
    if active.is_empty() {
        return Err(invalid("points", "at least one point with positive weight is required"));
    }
    queries
        .iter()
        .map(|&b| {
            if !b.is_finite() {
                return Err(invalid("queries", "query must be finite"));
            }
            // shift by the nearest distance so the largest kernel is 1
            let nearest = active
                .iter()
                .map(|o| (b - o.beta).abs())
                .fold(f64::INFINITY, f64::min);
            let (mut num, mut den) = (0.0, 0.0);
            for o in &active {
                let k = o.weight * (-lambda * ((b - o.beta).abs() - nearest)).exp();
                num += k * o.y;
                den += k;
            }
            Ok(num / den)
        })
        .collect()
}
