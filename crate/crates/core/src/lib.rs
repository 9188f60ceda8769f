//! Access-aware allocation of a scarce, divisible resource across locations.
//!
//! The crate is organised in layers:
//!
//! * [`model`]: domain types, acquisition functions, disparity and feasibility.
//! * [`sim`]: stochastic and dynamic-programming oracles for the acquisition process.
//! * [`optimize`]: the allocation linear programs, a dense simplex solver and
//!   vertex enumeration of the constraint polytope.
//! * [`engine`]: naive and access-aware allocation, sweeps over the access gap,
//!   and allocation under an unknown gap.
//! * [`analysis`]: downstream-impact model and soft nearest-neighbour smoothing.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod engine;
pub mod error;
pub mod model;
pub mod optimize;
pub mod sim;

pub use error::{Error, Result};
pub use model::{
    AcquisitionModel, AcquisitionOutcome, Allocation, DisparityReport, Distance, EtaSpec,
    LocationProfile, Scenario,
};
pub use analysis::{ImpactParams, Observation};
pub use engine::{EngineConfig, SolveTrace};
pub use optimize::{LinearProgram, LpSolution, LpStatus};
