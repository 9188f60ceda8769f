//! Seeded synthetic location sets for experiments and fixtures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::model::LocationProfile;

const MIN_POPULATION: f64 = 1e3;
const MAX_POPULATION: f64 = 1e6;
const CLUSTER_CENTERS: [f64; 3] = [0.15, 0.5, 0.85];
const CLUSTER_SPREAD: f64 = 0.05;

/// How disadvantaged shares are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthProfile {
    /// `beta ~ U(0, 1)`.
    Uniform,
    /// One of three centers (0.15, 0.5, 0.85) chosen uniformly, plus
    /// `N(0, 0.05)` noise, clipped to `[0, 1]`.
    Clustered,
}

/// `k` locations with log-uniform populations in `[10^3, 10^6]`.
///
/// Ids are `loc0001`, `loc0002`, and so on. The generator is
/// `ChaCha8Rng::seed_from_u64(seed)`.
pub fn synthetic_locations(
    k: usize,
    seed: u64,
    profile: SynthProfile,
) -> Result<Vec<LocationProfile>> {
    if k == 0 {
        return Err(invalid("k", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, CLUSTER_SPREAD).expect("positive spread");
    let (lo, hi) = (MIN_POPULATION.ln(), MAX_POPULATION.ln());
    (0..k)
        .map(|j| {
            let population = rng.random_range(lo..=hi).exp().round() as u64;
            let beta = match profile {
                SynthProfile::Uniform => rng.random::<f64>(),
                SynthProfile::Clustered => {
                    let center = CLUSTER_CENTERS[rng.random_range(0..CLUSTER_CENTERS.len())];
                    (center + noise.sample(&mut rng)).clamp(0.0, 1.0)
                }
            };
            LocationProfile::new(format!("loc{:04}", j + 1), population, beta)
        })
        .collect()
}
