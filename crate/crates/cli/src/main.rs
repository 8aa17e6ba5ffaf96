//! `cssr` — batch driver for ground states, evolutions, ε-sweeps and the
//! verification battery.
//!
//! Exit codes: 0 success, 1 validation error, 2 solver non-convergence,
//! 3 instability abort.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use cssr_cli::config::SimulationConfig;
use cssr_cli::{runner, CliError};

#[derive(Parser)]
#[command(
    name = "cssr",
    about = "Spectral solvers for a tightly confined gauged 2D Schrödinger system and its 1D quintic limit",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags mirror config keys; a flag beats the config file. CSSR_OUTPUT_DIR
/// beats both for the output directory.
#[derive(Args, Debug, Default)]
struct Overrides {
    /// Config file (flat dotted keys, e.g. "physics.beta = 1.0").
    #[arg(long)]
    config: Option<PathBuf>,
    /// physics.beta
    #[arg(long)]
    beta: Option<f64>,
    /// physics.epsilon
    #[arg(long)]
    epsilon: Option<f64>,
    /// time.dt
    #[arg(long)]
    dt: Option<f64>,
    /// time.t_final
    #[arg(long)]
    t_final: Option<f64>,
    /// output.dir
    #[arg(long)]
    output_dir: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the 1D quintic energy.
    Ground1d(Overrides),
    /// Minimize the gauged 2D energy in the rescaled frame.
    Ground2d(Overrides),
    /// Evolve the 1D quintic equation.
    Evolve1d(Overrides),
    /// Evolve the gauged 2D equation.
    Evolve2d(Overrides),
    /// Ground-state-energy sweep over sweep.epsilons.
    SweepGse(Overrides),
    /// Dynamics sweep over sweep.epsilons.
    SweepDyn(Overrides),
    /// Run the invariant battery; exit 0 iff all checks pass.
    Verify(Overrides),
}

fn build_config(overrides: &Overrides) -> Result<SimulationConfig, CliError> {
    let mut cfg = match &overrides.config {
        Some(path) => {
            let (cfg, warnings) = SimulationConfig::from_file(path)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            cfg
        }
        None => SimulationConfig::default(),
    };
    if let Some(beta) = overrides.beta {
        cfg.physics.beta = beta;
    }
    if let Some(epsilon) = overrides.epsilon {
        cfg.physics.epsilon = epsilon;
    }
    if let Some(dt) = overrides.dt {
        cfg.time.dt = dt;
    }
    if let Some(t_final) = overrides.t_final {
        cfg.time.t_final = t_final;
    }
    if let Some(dir) = &overrides.output_dir {
        cfg.output.dir = dir.clone();
    }
    if let Ok(dir) = std::env::var("CSSR_OUTPUT_DIR") {
        if !dir.is_empty() {
            cfg.output.dir = dir;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Ground1d(o) => runner::run_ground1d(&build_config(o)?),
        Command::Ground2d(o) => runner::run_ground2d(&build_config(o)?),
        Command::Evolve1d(o) => runner::run_evolve1d(&build_config(o)?),
        Command::Evolve2d(o) => runner::run_evolve2d(&build_config(o)?),
        Command::SweepGse(o) => runner::run_sweep_gse(&build_config(o)?),
        Command::SweepDyn(o) => runner::run_sweep_dyn(&build_config(o)?),
        Command::Verify(o) => runner::run_verify(&build_config(o)?),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Usage and parse problems all exit 1 (clap defaults to 2).
            let _ = err.print();
            std::process::exit(if err.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
