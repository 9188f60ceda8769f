//! Stochastic oracles for the acquisition process at a single location.
//!
//! Two routes are provided that do not go through the closed-form
//! expression in [`crate::model::exact_rho`]: a Monte Carlo simulation of
//! the embedded jump chain, and a forward dynamic program over the
//! `(disadvantaged, advantaged)` count lattice. A continuous-time
//! simulation produces trajectory statistics.
//!
//! Trial `i` draws from its own generator seeded with `mix(seed) ^ i`, so
//! results do not depend on thread scheduling.

mod synth;

pub use synth::{synthetic_locations, SynthProfile};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::model::{check_eta, check_unit, naive_rho_unchecked, saturation_split};

/// Name of the per-trial random generator, recorded in run metadata.
pub const RNG_ALGORITHM: &str =
    "ChaCha8Rng (rand_chacha 0.9), seed_from_u64(splitmix64(seed) ^ trial)";

/// Largest population accepted by [`dp_exact_rho`].
pub const DP_POPULATION_LIMIT: u64 = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    /// Number of sample times for trajectories.
    pub time_resolution: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            trials: 10_000,
            seed: 0,
            time_resolution: 101,
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if self.time_resolution == 0 {
            return Err(invalid("time_resolution", "must be at least 1"));
        }
        Ok(())
    }
}

/// Generator for trial (or restart) `trial` of a run seeded with `seed`.
///
/// The run seed is scrambled first so that nearby seeds do not share
/// trial streams.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed) ^ trial)
}

fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub rho: f64,
    pub std_error: f64,
}

struct Instance {
    resources: u64,
    disadvantaged: u64,
    advantaged: u64,
    /// Probability that the next unit goes to the disadvantaged while both are active.
    step_prob: f64,
}

fn instance(resources: u64, population: u64, beta: f64, eta: f64) -> Result<Instance> {
    check_unit("beta", beta)?;
    check_eta(eta)?;
    if resources == 0 {
        return Err(invalid("resources", "must be at least 1"));
    }
    if resources > population {
        return Err(Error::NoWaste {
            allocated: resources as f64,
            population: population as f64,
        });
    }
    let (disadvantaged, advantaged) = saturation_split(population, beta);
    Ok(Instance {
        resources,
        disadvantaged,
        advantaged,
        step_prob: naive_rho_unchecked(disadvantaged as f64 / population as f64, eta),
    })
}

/// Monte Carlo estimate of the disadvantaged acquisition share.
///
/// Each trial hands out units one at a time: while both groups are below
/// their sizes the next unit goes to the disadvantaged with probability
/// `lambda- / (lambda- + lambda+)`; once one group is saturated every
/// remaining unit goes to the other.
pub fn simulate_acquisition(
    resources: u64,
    population: u64,
    beta: f64,
    eta: f64,
    config: &SimConfig,
) -> Result<MonteCarloEstimate> {
    config.validate()?;
    let inst = instance(resources, population, beta, eta)?;
    let counts: Vec<u64> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(config.seed, trial);
            run_jump_chain(&inst, &mut rng)
        })
        .collect();
    // integer moments keep the estimate exact when every trial agrees
    let trials = counts.len() as u128;
    let sum: u128 = counts.iter().map(|&u| u as u128).sum();
    let sum_sq: u128 = counts.iter().map(|&u| (u as u128) * (u as u128)).sum();
    let n = inst.resources as f64;
    let mean = sum as f64 / (trials as f64 * n);
    let std_error = if trials > 1 {
        let spread = (trials * sum_sq - sum * sum) as f64;
        (spread / ((trials * trials * (trials - 1)) as f64 * n * n)).sqrt()
    } else {
        0.0
    };
    Ok(MonteCarloEstimate {
        rho: mean,
        std_error,
    })
}

fn run_jump_chain<R: Rng>(inst: &Instance, rng: &mut R) -> u64 {
    let (mut u, mut v) = (0u64, 0u64);
    while u + v < inst.resources {
        if u == inst.disadvantaged {
            // everything left goes to the advantaged
            return u;
        }
        if v == inst.advantaged {
            return inst.resources - v;
        }
        if rng.random::<f64>() < inst.step_prob {
            u += 1;
        } else {
            v += 1;
        }
    }
    u
}

/// Exact acquisition share by forward dynamic programming over the jump chain.
///
/// After `t` units the state is the disadvantaged count `u` (the advantaged
/// hold `t - u`), so the table has one row of `disadvantaged + 1` entries.
pub fn dp_exact_rho(resources: u64, population: u64, beta: f64, eta: f64) -> Result<f64> {
    if population > DP_POPULATION_LIMIT {
        return Err(Error::ScaleLimit {
            what: "population",
            size: population as usize,
            limit: DP_POPULATION_LIMIT as usize,
        });
    }
    let inst = instance(resources, population, beta, eta)?;
    let dmax = inst.disadvantaged as usize;
    let amax = inst.advantaged as usize;
    let q = inst.step_prob;
    let mut dist = vec![0.0f64; dmax + 1];
    let mut next = vec![0.0f64; dmax + 1];
    dist[0] = 1.0;
    for t in 0..inst.resources as usize {
        next.iter_mut().for_each(|x| *x = 0.0);
        for u in 0..=dmax.min(t) {
            let mass = dist[u];
            if mass == 0.0 {
                continue;
            }
            let v = t - u;
            if u == dmax {
                next[u] += mass;
            } else if v == amax {
                next[u + 1] += mass;
            } else {
                next[u + 1] += mass * q;
                next[u] += mass * (1.0 - q);
            }
        }
        std::mem::swap(&mut dist, &mut next);
    }
    let expected: f64 = dist.iter().enumerate().map(|(u, m)| u as f64 * m).sum();
    Ok(expected / inst.resources as f64)
}

/// Per-time summaries of the continuous-time acquisition trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStats {
    pub times: Vec<f64>,
    /// Mean of `U_t + V_t`.
    pub mean_total: Vec<f64>,
    /// Mean of `V_t`.
    pub mean_advantaged: Vec<f64>,
    pub p5_total: Vec<f64>,
    pub p95_total: Vec<f64>,
    pub p5_advantaged: Vec<f64>,
    pub p95_advantaged: Vec<f64>,
}

impl TrajectoryStats {
    /// Mean of `U_t`.
    pub fn mean_disadvantaged(&self) -> Vec<f64> {
        self.mean_total
            .iter()
            .zip(&self.mean_advantaged)
            .map(|(t, a)| t - a)
            .collect()
    }
}

/// Simulates the stopped Poisson processes with unlimited resources up to
/// `max(1, 1/eta)`, the later of the two expected saturation times.
pub fn trajectories(
    population: u64,
    beta: f64,
    eta: f64,
    config: &SimConfig,
) -> Result<TrajectoryStats> {
    config.validate()?;
    check_unit("beta", beta)?;
    check_eta(eta)?;
    if population == 0 {
        return Err(invalid("population", "must be at least 1"));
    }
    let (dis, adv) = saturation_split(population, beta);
    let rate_dis = eta * dis as f64;
    let rate_adv = adv as f64;
    let horizon = (1.0f64 / eta).max(1.0);
    let res = config.time_resolution;
    let times: Vec<f64> = if res == 1 {
        vec![horizon]
    } else {
        (0..res)
            .map(|i| horizon * i as f64 / (res - 1) as f64)
            .collect()
    };

    let paths: Vec<(Vec<u32>, Vec<u32>)> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(config.seed, trial);
            let mut total = Vec::with_capacity(res);
            let mut advantaged = Vec::with_capacity(res);
            let (mut u, mut v) = (0u64, 0u64);
            let mut t = 0.0;
            let mut grid = 0;
            loop {
                let active_dis = if u < dis { rate_dis } else { 0.0 };
                let active_adv = if v < adv { rate_adv } else { 0.0 };
                let rate = active_dis + active_adv;
                let next_t = if rate > 0.0 {
                    t + rng.sample::<f64, _>(Exp1) / rate
                } else {
                    f64::INFINITY
                };
                while grid < res && times[grid] < next_t {
                    total.push((u + v) as u32);
                    advantaged.push(v as u32);
                    grid += 1;
                }
                if grid == res {
                    break;
                }
                t = next_t;
                if rng.random::<f64>() * rate < active_dis {
                    u += 1;
                } else {
                    v += 1;
                }
            }
            (total, advantaged)
        })
        .collect();

    let mut stats = TrajectoryStats {
        times,
        mean_total: Vec::with_capacity(res),
        mean_advantaged: Vec::with_capacity(res),
        p5_total: Vec::with_capacity(res),
        p95_total: Vec::with_capacity(res),
        p5_advantaged: Vec::with_capacity(res),
        p95_advantaged: Vec::with_capacity(res),
    };
    let mut column = vec![0u32; paths.len()];
    for i in 0..res {
        for (slot, path) in column.iter_mut().zip(&paths) {
            *slot = path.0[i];
        }
        let (mean, p5, p95) = summarize(&mut column);
        stats.mean_total.push(mean);
        stats.p5_total.push(p5);
        stats.p95_total.push(p95);
        for (slot, path) in column.iter_mut().zip(&paths) {
            *slot = path.1[i];
        }
        let (mean, p5, p95) = summarize(&mut column);
        stats.mean_advantaged.push(mean);
        stats.p5_advantaged.push(p5);
        stats.p95_advantaged.push(p95);
    }
    Ok(stats)
}

fn summarize(values: &mut [u32]) -> (f64, f64, f64) {
    let mean = values.iter().map(|&v| v as f64).sum::<f64>() / values.len() as f64;
    values.sort_unstable();
    (
        mean,
        nearest_rank(values, 5.0) as f64,
        nearest_rank(values, 95.0) as f64,
    )
}

/// Nearest-rank percentile of sorted values.
pub fn nearest_rank<T: Copy>(sorted: &[T], percent: f64) -> T {
    let n = sorted.len();
    let rank = ((percent / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

#[cfg(test)]
mod tests;
