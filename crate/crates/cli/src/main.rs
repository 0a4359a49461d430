use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use critscat_cli::{load, run, Command, Overrides, EXIT_FAILURE};

#[derive(Parser)]
#[command(name = "critscat", version, about = "Wave-operator diagnostics for the critical time-decaying oscillator")]
struct Cli {
    /// TOML experiment configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Neither read nor write the checkpoint cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Override `evolution.tau_max`.
    #[arg(long, global = true)]
    tau_max: Option<f64>,
    /// Override `grid.points`.
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classical solutions zeta_1, zeta_2 and their asymptotic fit.
    Zeta,
    /// Threshold sweep over kappa with verdicts.
    Sweep,
    /// Cook integrand samples for the configured potential.
    Cook,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        out: cli.out,
        no_cache: cli.no_cache,
        tau_max: cli.tau_max,
        grid_points: cli.grid_points,
    };
    let jobs = match cli.jobs {
        Some(0) => {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(EXIT_FAILURE as u8);
        }
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let command = match cli.command {
        Cmd::Zeta => Command::Zeta,
        Cmd::Sweep => Command::Sweep,
        Cmd::Cook => Command::Cook,
    };
    let resolved = match load(cli.config.as_deref(), &overrides) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAILURE as u8);
        }
    };
    match run(command, &resolved, jobs) {
        Ok((code, outcome)) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE as u8)
        }
    }
}
