//! Allocation algorithms built on the linear programs.
//!
//! The access-aware solver is a fixed-point iteration: solve the program
//! with coefficients from the current acquisition shares, find the
//! locations whose coverage is high enough for the disadvantaged to
//! saturate, update their shares with the approximate model and solve
//! again. The same loop handles a distribution over the access gap by
//! keeping one share vector per gap value and averaging the coefficients.

mod minimax;

pub use minimax::{dual_value, solve_minimax, MinimaxSolution, MINIMAX_STEP_BUDGET};

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::model::{
    acquisition_outcome, check_eta, disparity, disparity_coefficients, is_feasible,
    naive_rho_unchecked, rate_disparity, AcquisitionModel, Allocation, DisparityReport, EtaSpec,
    Scenario,
};
use crate::optimize::{build_lp, solve, LpStatus};
use crate::sim::trial_rng;

/// Coverage margin above the branch switch before a location counts as saturated.
pub const SATURATION_TOL: f64 = 1e-12;

/// Two allocations closer than this in l-infinity are treated as the same
/// allocation by [`sweep_eta`].
pub const STABILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub restarts: usize,
    pub restart_noise_sigma: f64,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            convergence_tol: 1e-9,
            restarts: 0,
            restart_noise_sigma: 1.0,
            seed: 0,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations", "must be at least 1"));
        }
        if !(self.convergence_tol >= 0.0) {
            return Err(invalid("convergence_tol", "must be nonnegative"));
        }
        if !(self.restart_noise_sigma >= 0.0) || !self.restart_noise_sigma.is_finite() {
            return Err(invalid("restart_noise_sigma", "must be a nonnegative number"));
        }
        Ok(())
    }
}

/// One pass of the fixed-point loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub allocation: Allocation,
    /// Disparity under the approximate model (expected over the gap distribution).
    pub rd: f64,
    /// Saturated locations, sorted. With several gap values a location is
    /// listed if it saturates for any of them.
    pub saturated: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The allocation (or the coefficient vector) stopped changing.
    Converged,
    /// A saturation pattern seen two or more iterations earlier came back.
    Cycle,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    pub iterations: Vec<Iterate>,
    pub converged: bool,
    pub stop: StopReason,
    /// Index into `iterations` of the allocation that was returned.
    pub best_iteration: usize,
    /// Restart that produced the returned allocation; 0 is the un-noised run.
    pub restart_index_of_best: usize,
}

impl SolveTrace {
    pub fn best(&self) -> &Iterate {
        &self.iterations[self.best_iteration]
    }
}

/// The proportional baseline `n = p`.
pub fn proportional(scenario: &Scenario) -> Allocation {
    Allocation::proportional(scenario)
}

/// Disparity of an allocation under the approximate acquisition model.
pub fn approx_rd(scenario: &Scenario, allocation: &[f64], eta: f64) -> Result<f64> {
    let outcome = acquisition_outcome(scenario, allocation, eta, AcquisitionModel::Approx)?;
    rate_disparity(scenario, allocation, outcome.rho())
}

/// Solves the program with the naive acquisition shares, which do not
/// depend on the allocation.
pub fn solve_naive(scenario: &Scenario, eta: f64) -> Result<(Allocation, DisparityReport)> {
    check_eta(eta)?;
    let outcome = acquisition_outcome(scenario, scenario.shares(), eta, AcquisitionModel::Naive)?;
    let c = disparity_coefficients(scenario, outcome.rho())?;
    let allocation = solve_program(scenario, &c)?;
    let report = disparity(scenario, &allocation, &outcome)?;
    Ok((allocation, report))
}

fn solve_program(scenario: &Scenario, c: &[f64]) -> Result<Allocation> {
    let sol = solve(&build_lp(scenario, c)?);
    match sol.status {
        LpStatus::Optimal => {}
        // n = p is always feasible, so this points at numerical trouble.
        LpStatus::Infeasible => return Err(Error::LpFailure("infeasible")),
        LpStatus::Unbounded => return Err(Error::LpFailure("unbounded")),
    }
    let mut n = sol.x[..scenario.k()].to_vec();
    n.iter_mut().for_each(|v| *v = v.max(0.0));
    let sum: f64 = n.iter().sum();
    n.iter_mut().for_each(|v| *v /= sum);
    Allocation::new(n)
}

/// Access-aware allocation at a single access gap.
pub fn solve_access_aware(
    scenario: &Scenario,
    eta: f64,
    config: &EngineConfig,
) -> Result<(Allocation, SolveTrace)> {
    check_eta(eta)?;
    let (allocation, _, trace) = solve_weighted(scenario, &[eta], &[1.0], config)?;
    Ok((allocation, trace))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BayesianSolution {
    pub allocation: Allocation,
    /// `sum_i P(eta_i) RD(n, eta_i)` under the approximate model.
    pub expected_rd: f64,
    pub trace: SolveTrace,
}

/// Minimises the expected disparity over the scenario's gap specification.
/// Grids are treated as uniform distributions.
pub fn solve_bayesian(scenario: &Scenario, config: &EngineConfig) -> Result<BayesianSolution> {
    let eta = scenario.eta();
    eta.validate()?;
    let (allocation, expected_rd, trace) =
        solve_weighted(scenario, &eta.values(), &eta.weights(), config)?;
    Ok(BayesianSolution {
        allocation,
        expected_rd,
        trace,
    })
}

/// Shared driver: validates, drops zero-weight gaps, runs all restarts
/// and keeps the lowest disparity (ties go to the lower restart index).
pub(crate) fn solve_weighted(
    scenario: &Scenario,
    etas: &[f64],
    weights: &[f64],
    config: &EngineConfig,
) -> Result<(Allocation, f64, SolveTrace)> {
    config.validate()?;
    crate::error::check_len("weights", etas.len(), weights.len())?;
    let mut gaps = Vec::with_capacity(etas.len());
    for (&eta, &w) in etas.iter().zip(weights) {
        check_eta(eta)?;
        if !(w >= 0.0) || !w.is_finite() {
            return Err(invalid("weights", format!("{w} is not a nonnegative weight")));
        }
        if w > 0.0 {
            gaps.push(Gap::new(scenario, eta, w));
        }
    }
    if gaps.is_empty() {
        return Err(invalid("weights", "no gap value carries positive weight"));
    }
    let runs: Vec<Result<Run>> = (0..=config.restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                gaps.iter().map(|g| g.rho0.clone()).collect()
            } else {
                perturbed_start(&gaps, config, r)
            };
            iterate(scenario, &gaps, start, config)
        })
        .collect();
    let mut best: Option<(usize, Run)> = None;
    for (r, run) in runs.into_iter().enumerate() {
        let run = run?;
        let better = match &best {
            None => true,
            Some((_, b)) => run.rd() < b.rd(),
        };
        if better {
            best = Some((r, run));
        }
    }
    let (index, run) = best.expect("restart 0 always runs");
    let mut trace = run.trace;
    trace.restart_index_of_best = index;
    let best = trace.best().clone();
    Ok((best.allocation, best.rd, trace))
}

struct Gap {
    weight: f64,
    rho0: Vec<f64>,
    /// Coverage `alpha n_j / p_j` above which location `j` saturates.
    switch: Vec<f64>,
}

impl Gap {
    fn new(scenario: &Scenario, eta: f64, weight: f64) -> Self {
        let betas = scenario.betas();
        Self {
            weight,
            rho0: betas.iter().map(|&b| naive_rho_unchecked(b, eta)).collect(),
            switch: betas.iter().map(|&b| eta * b + 1.0 - b).collect(),
        }
    }
}

/// Naive shares with one standard-normal draw per location, shared across
/// gap values, scaled and clamped to `[0, 1]`.
fn perturbed_start(gaps: &[Gap], config: &EngineConfig, restart: usize) -> Vec<Vec<f64>> {
    let mut rng = trial_rng(config.seed, restart as u64);
    let k = gaps[0].rho0.len();
    let noise: Vec<f64> = (0..k)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            config.restart_noise_sigma * z
        })
        .collect();
    gaps.iter()
        .map(|g| {
            g.rho0
                .iter()
                .zip(&noise)
                .map(|(r, z)| (r + z).clamp(0.0, 1.0))
                .collect()
        })
        .collect()
}

struct Run {
    trace: SolveTrace,
}

impl Run {
    fn rd(&self) -> f64 {
        self.trace.best().rd
    }
}

/// Locations whose coverage passes the saturation switch at gap `eta`.
pub fn saturated_locations(scenario: &Scenario, allocation: &[f64], eta: f64) -> Result<Vec<usize>> {
    check_eta(eta)?;
    crate::error::check_len("allocation", scenario.k(), allocation.len())?;
    let gap = Gap::new(scenario, eta, 1.0);
    let (_, flags) = corrected_shares(scenario, &gap, allocation);
    Ok((0..flags.len()).filter(|&j| flags[j]).collect())
}

/// Approximate-model shares at `n` for one gap, plus the saturated flags.
fn corrected_shares(scenario: &Scenario, gap: &Gap, n: &[f64]) -> (Vec<f64>, Vec<bool>) {
    let alpha = scenario.alpha();
    let mut rho = Vec::with_capacity(n.len());
    let mut saturated = Vec::with_capacity(n.len());
    for (j, loc) in scenario.locations().iter().enumerate() {
        let coverage = alpha * n[j] / scenario.shares()[j];
        let sat = coverage > gap.switch[j] + SATURATION_TOL;
        saturated.push(sat);
        rho.push(if sat {
            (1.0 - (1.0 - loc.beta()) / coverage).clamp(0.0, 1.0)
        } else {
            gap.rho0[j]
        });
    }
    (rho, saturated)
}

fn effective_c(scenario: &Scenario, gaps: &[Gap], shares: &[Vec<f64>]) -> Result<Vec<f64>> {
    let mut c = vec![0.0; scenario.k()];
    for (gap, rho) in gaps.iter().zip(shares) {
        for (cj, v) in c.iter_mut().zip(disparity_coefficients(scenario, rho)?) {
            *cj += gap.weight * v;
        }
    }
    Ok(c)
}

fn iterate(
    scenario: &Scenario,
    gaps: &[Gap],
    start: Vec<Vec<f64>>,
    config: &EngineConfig,
) -> Result<Run> {
    let mut c = effective_c(scenario, gaps, &start)?;
    let mut iterations: Vec<Iterate> = Vec::new();
    let mut signatures: Vec<Vec<Vec<bool>>> = Vec::new();
    let stop = loop {
        let allocation = solve_program(scenario, &c)?;
        let n = allocation.as_slice();
        debug_assert!(is_feasible(scenario, n).is_feasible());

        let mut shares = Vec::with_capacity(gaps.len());
        let mut signature = Vec::with_capacity(gaps.len());
        let mut rd = 0.0;
        for gap in gaps {
            let (rho, sat) = corrected_shares(scenario, gap, n);
            rd += gap.weight * rate_disparity(scenario, n, &rho)?;
            shares.push(rho);
            signature.push(sat);
        }
        let saturated = (0..scenario.k())
            .filter(|&j| signature.iter().any(|s| s[j]))
            .collect();
        let moved = iterations
            .last()
            .map(|prev| prev.allocation.max_abs_diff(&allocation));
        iterations.push(Iterate {
            allocation,
            rd,
            saturated,
        });
        if moved.is_some_and(|d| d < config.convergence_tol) {
            break StopReason::Converged;
        }
        // a pattern from before the previous pass means the loop is cycling
        let len = signatures.len();
        if len >= 2 && signatures[..len - 1].contains(&signature) {
            break StopReason::Cycle;
        }
        signatures.push(signature);

        let next = effective_c(scenario, gaps, &shares)?;
        let same = next.iter().zip(&c).all(|(a, b)| a == b);
        if same {
            break StopReason::Converged;
        }
        if iterations.len() >= config.max_iterations {
            break StopReason::IterationLimit;
        }
        c = next;
    };
    let best_iteration = iterations
        .iter()
        .enumerate()
        .fold(0, |best, (i, it)| if it.rd < iterations[best].rd { i } else { best });
    Ok(Run {
        trace: SolveTrace {
            iterations,
            converged: stop == StopReason::Converged,
            stop,
            best_iteration,
            restart_index_of_best: 0,
        },
    })
}

/// One grid point of an access-gap sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eta: f64,
    pub allocation: Allocation,
    pub rd_access_aware: f64,
    /// Proportional allocation under the approximate model at the same gap.
    pub rd_proportional: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SweepRow {
    pub fn improvement(&self) -> f64 {
        self.rd_proportional - self.rd_access_aware
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    /// Whether every row's allocation is within [`STABILITY_TOL`] of the first.
    pub stable: bool,
}

/// Runs the access-aware solver at every gap value of the scenario.
pub fn sweep_eta(scenario: &Scenario, config: &EngineConfig) -> Result<Sweep> {
    let etas = match scenario.eta() {
        EtaSpec::Grid(g) => g.clone(),
        other => other.values(),
    };
    if etas.is_empty() {
        return Err(invalid("eta", "the sweep grid is empty"));
    }
    let rows = etas
        .par_iter()
        .map(|&eta| {
            let (allocation, trace) = solve_access_aware(scenario, eta, config)?;
            Ok(SweepRow {
                eta,
                rd_access_aware: trace.best().rd,
                rd_proportional: approx_rd(scenario, scenario.shares(), eta)?,
                iterations: trace.iterations.len(),
                converged: trace.converged,
                allocation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let first = &rows[0].allocation;
    let stable = rows
        .iter()
        .all(|r| r.allocation.max_abs_diff(first) <= STABILITY_TOL);
    Ok(Sweep { rows, stable })
}
