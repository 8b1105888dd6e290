//! The `doe` command line: validate specs, generate designs and run plans,
//! execute them against a runner process, analyse the results, and a
//! scripted screening walkthrough of the bundled example system.
//!
//! Exit codes: 0 success, 2 validation error, 3 execution error, 4 analysis
//! error.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;
pub mod pipeline;

pub use args::Cli;
pub use error::{CliError, EXIT_ANALYSIS, EXIT_EXECUTION, EXIT_VALIDATION};

use args::Command;

/// Runs one parsed command line.
pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Validate { paths } => commands::validate::cmd_validate(paths, g).map(drop),
        Command::Design(a) => commands::design::cmd_design(a, g).map(drop),
        Command::Run(a) => commands::run::cmd_run(a, g).map(drop),
        Command::Analyze(a) => commands::analyze::cmd_analyze(a, g).map(drop),
        Command::ScreenDemo(a) => commands::screen::cmd_screen_demo(a, g).map(drop),
        Command::Recommend(a) => commands::recommend::cmd_recommend(a, g).map(drop),
    }
}
