use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "accessalloc", version, about = "Access-aware allocation of a scarce resource")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for an allocation and write allocation.csv and report.txt.
    Allocate(RunArgs),
    /// Solve at every gap value of a grid.
    Sweep(SweepArgs),
    /// Simulate acquisition at a single location.
    Simulate(SimulateArgs),
    /// Compare the heuristic with every vertex of the constraint polytope.
    Verify(RunArgs),
    /// Generate a synthetic locations file.
    Synth(SynthArgs),
    /// Expected adverse outcomes for proportional and access-aware allocations.
    Impact(ImpactArgs),
    /// Soft nearest-neighbour smoothing of observations.
    Interpolate(InterpolateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceArg {
    L1,
    Linf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Naive,
    Approx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    Uniform,
    Clustered,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// CSV with columns id,population,beta.
    #[arg(long)]
    pub locations: PathBuf,
    /// Resource availability, total resources over total population.
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = DistanceArg::L1)]
    pub distance: DistanceArg,
    /// Access gap: `0.5`, a grid `0.1,0.5,0.9`, or `dist:0.2:0.5,0.8:0.5`.
    #[arg(long)]
    pub eta: String,
    #[arg(long, value_enum, default_value_t = ModelArg::Approx)]
    pub model: ModelArg,
    #[arg(long, default_value_t = 0)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub max_iterations: usize,
    /// Standard deviation of the restart noise.
    #[arg(long, default_value_t = 1.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Also render sweep.svg.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub resources: u64,
    #[arg(long)]
    pub population: u64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub eta: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 101)]
    pub time_resolution: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ProfileArg::Uniform)]
    pub profile: ProfileArg,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ImpactArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Adverse-outcome probability for the advantaged.
    #[arg(long)]
    pub x: f64,
    /// Excess risk of the disadvantaged.
    #[arg(long)]
    pub delta: f64,
    /// Risk factor for advantaged recipients.
    #[arg(long)]
    pub q: f64,
    /// Risk factor for disadvantaged recipients.
    #[arg(long)]
    pub q_prime: f64,
}

#[derive(Debug, Clone, Args)]
pub struct InterpolateArgs {
    /// CSV with columns beta,y and an optional weight.
    #[arg(long)]
    pub observations: PathBuf,
    #[arg(long, default_value_t = 20.0)]
    pub lambda: f64,
    /// Query points: `start:stop:count` or a comma list.
    #[arg(long, default_value = "0:1:101")]
    pub grid: String,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}
