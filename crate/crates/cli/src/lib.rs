pub mod args;
mod commands;
pub mod error;
pub mod format;
pub mod input;
mod svg;

use args::{Cli, Command};
pub use error::{CliError, CliResult};

pub fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Allocate(a) => commands::allocate(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Verify(a) => commands::verify(a),
        Command::Synth(a) => commands::synth(a),
        Command::Impact(a) => commands::impact(a),
        Command::Interpolate(a) => commands::interpolate(a),
    }
}
