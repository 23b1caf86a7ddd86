use anyhow::Result;
use caging_cli::config::RunConfig;
use caging_cli::run::{run_ball, run_push, run_render, run_sweep, Options};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Open-loop pushing and ball handling by caging every possible state over
/// time.
#[derive(Parser)]
#[command(name = "caging", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write one PGM frame per step.
    #[arg(long, global = true)]
    render: bool,
    /// Oracle rollouts, or trials per sweep cell.
    #[arg(long, global = true)]
    trials: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Plan pushes along waypoints and check them against the push simulator.
    Push,
    /// Plan plate tilts for a ball task and check them against exact dynamics.
    Ball,
    /// Catching feasibility over speed, spread and rate-change bound.
    Sweep,
    /// Plan the configured task and write frames only.
    Render,
}

fn run(cli: &Cli) -> Result<i32> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let opts = Options::resolve(&cfg, cli.seed, cli.out.clone(), cli.render, cli.trials);
    let status = match cli.command {
        Command::Push => run_push(&cfg, &opts, true)?,
        Command::Ball => run_ball(&cfg, &opts, true)?,
        Command::Sweep => run_sweep(&cfg, &opts)?,
        Command::Render => run_render(&cfg, &opts)?,
    };
    Ok(status.code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
