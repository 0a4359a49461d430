//! Experiment runner: configuration, checkpoint cache and the `zeta`,
//! `sweep` and `cook` commands.
//!
//! Exit codes: [`EXIT_OK`] when every scientific check matches its
//! prediction, [`EXIT_MISMATCH`] when a run completed but a verdict or fit
//! disagrees, [`EXIT_FAILURE`] for configuration, I/O or numerical errors.

pub mod cache;
pub mod commands;
pub mod config;
pub mod output;

use std::path::Path;

pub use commands::{cmd_cook, cmd_sweep, cmd_zeta, Outcome, SweepOutcome, COOK_SLOPE_TOLERANCE};
pub use config::{ConfigError, Diagnostic, ExperimentConfig, Overrides, Resolved};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] critscat::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Zeta,
    Sweep,
    Cook,
}

/// Loads `config` (defaults when `None`), applies `overrides` and
/// validates the result.
pub fn load(config: Option<&Path>, overrides: &Overrides) -> Result<Resolved, ConfigError> {
    let (mut cfg, src, name) = match config {
        Some(p) => {
            let (cfg, src) = ExperimentConfig::load(p)?;
            (cfg, src, p.display().to_string())
        }
        None => (ExperimentConfig::default(), String::new(), "<defaults>".to_string()),
    };
    cfg.apply(overrides);
    cfg.resolve(&src, &name)
}

/// Runs `command` and returns the exit code with the outcome, if any.
pub fn run(command: Command, resolved: &Resolved, jobs: usize) -> Result<(i32, Outcome), CliError> {
    let outcome = match command {
        Command::Zeta => cmd_zeta(resolved)?,
        Command::Cook => cmd_cook(resolved)?,
        Command::Sweep => {
            let s = cmd_sweep(resolved, jobs)?;
            if s.failed > 0 {
                return Ok((EXIT_FAILURE, s.outcome));
            }
            s.outcome
        }
    };
    Ok((if outcome.matches { EXIT_OK } else { EXIT_MISMATCH }, outcome))
}
