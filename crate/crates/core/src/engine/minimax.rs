//! Allocation against the worst access gap on a grid, through the maximin dual.

use super::{approx_rd, solve_weighted, EngineConfig};
use crate::error::{invalid, Result};
use crate::model::{Allocation, EtaSpec, Scenario};

/// Ascent steps before the dual search gives up.
pub const MINIMAX_STEP_BUDGET: usize = 500;
const FD_STEP: f64 = 1e-4;
const BASE_STEP: f64 = 0.1;
const STALL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxSolution {
    pub etas: Vec<f64>,
    /// Maximising distribution over `etas`.
    pub distribution: Vec<f64>,
    /// Allocation that attains the inner minimum at `distribution`.
    pub allocation: Allocation,
    /// Dual value `g(P*) = min_n sum_i P*_i RD(n, eta_i)`.
    pub value: f64,
    /// `[g, L g]`. Only meaningful as a containment claim when `g >= 0`.
    pub bound: (f64, f64),
    /// `max_i RD(n*, eta_i)`, the primal objective at the returned allocation.
    pub primal: f64,
    pub steps: usize,
    /// False when the step budget ran out before the distribution settled.
    pub converged: bool,
}

/// The dual function `g(P)`; weights need not sum to one.
pub fn dual_value(
    scenario: &Scenario,
    etas: &[f64],
    weights: &[f64],
    config: &EngineConfig,
) -> Result<(f64, Allocation)> {
    let (allocation, value, _) = solve_weighted(scenario, etas, weights, config)?;
    Ok((value, allocation))
}

/// Projected gradient ascent on the dual over the probability simplex,
/// with finite-difference gradients and step `0.1 / sqrt(t)`.
pub fn solve_minimax(scenario: &Scenario, config: &EngineConfig) -> Result<MinimaxSolution> {
    let etas = match scenario.eta() {
        EtaSpec::Grid(g) => g.clone(),
        other => other.values(),
    };
    let l = etas.len();
    if l < 2 {
        return Err(invalid("eta", "minimax needs at least two gap values"));
    }
    scenario.eta().validate()?;
    let g = |w: &[f64]| dual_value(scenario, &etas, w, config);

    let mut p = vec![1.0 / l as f64; l];
    let (mut value, mut allocation) = g(&p)?;
    let mut best = (value, p.clone(), allocation.clone());
    let mut converged = false;
    let mut steps = 0;
    while steps < MINIMAX_STEP_BUDGET {
        steps += 1;
        let mut grad = vec![0.0; l];
        for i in 0..l {
            let mut up = p.clone();
            up[i] += FD_STEP;
            let (g_up, _) = g(&up)?;
            grad[i] = if p[i] >= FD_STEP {
                let mut down = p.clone();
                down[i] -= FD_STEP;
                let (g_down, _) = g(&down)?;
                (g_up - g_down) / (2.0 * FD_STEP)
            } else {
                (g_up - value) / FD_STEP
            };
        }
        let rate = BASE_STEP / (steps as f64).sqrt();
        let moved: Vec<f64> = p.iter().zip(&grad).map(|(x, d)| x + rate * d).collect();
        let next = project_simplex(&moved);
        let shift = next
            .iter()
            .zip(&p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        p = next;
        (value, allocation) = g(&p)?;
        if value > best.0 {
            best = (value, p.clone(), allocation.clone());
        }
        if shift <= STALL_TOL {
            converged = true;
            break;
        }
    }

    let (value, distribution, allocation) = best;
    let mut primal = f64::NEG_INFINITY;
    for &eta in &etas {
        primal = primal.max(approx_rd(scenario, allocation.as_slice(), eta)?);
    }
    Ok(MinimaxSolution {
        bound: (value, l as f64 * value),
        etas,
        distribution,
        allocation,
        value,
        primal,
        steps,
        converged,
    })
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}
