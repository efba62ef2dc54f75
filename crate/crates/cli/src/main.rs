//! `lpharmonic`: p-harmonic functions, decompositions and inequality checks
//! on Cayley graphs.
//!
//! Exit status: 0 when the run passes its checks, 2 when an inequality or
//! acceptance check fails, 1 on any error (including usage errors).

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "lpharmonic", version, about = "p-harmonic analysis on Cayley graphs")]
struct Cli {
    /// TOML file with default parameters; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a ball of the Cayley graph.
    Ball(RunConfig),
    /// Solve the p-Dirichlet problem with given boundary values.
    Solve(RunConfig),
    /// Split f into a part vanishing on the boundary and a p-harmonic part.
    Decompose(RunConfig),
    /// Neumann-series harmonic function on a free group.
    Harmonic(RunConfig),
    /// Følner ratios and ‖f_k‖_{D(p)} for balls.
    Folner(RunConfig),
    /// Empirical constant of ‖u‖_p ≤ C ‖u‖_{D(p)}.
    Gerl(RunConfig),
    /// Empirical Sobolev constants (--kind sd or pd).
    Sobolev(RunConfig),
    /// Empirical constant of |A|^{d-1} ≤ C |∂A|^d.
    Isoperimetric(RunConfig),
    /// Random checks of the mean-value bound.
    Meanvalue(RunConfig),
    /// Partial sums for f(n) = n^{-1/p} on Z.
    Zexample(RunConfig),
    /// Run the acceptance battery.
    ReproduceAll(RunConfig),
}

fn run(cli: Cli) -> Result<bool> {
    let base = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let (flags, handler): (RunConfig, fn(&mut RunConfig) -> Result<output::Artifacts>) = match cli.command {
        Command::Ball(c) => (c, commands::ball_cmd),
        Command::Solve(c) => (c, commands::solve_cmd),
        Command::Decompose(c) => (c, commands::decompose_cmd),
        Command::Harmonic(c) => (c, commands::harmonic_cmd),
        Command::Folner(c) => (c, commands::folner_cmd),
        Command::Gerl(c) => (c, commands::gerl_cmd),
        Command::Sobolev(c) => (c, commands::sobolev_cmd),
        Command::Isoperimetric(c) => (c, commands::isoperimetric_cmd),
        Command::Meanvalue(c) => (c, commands::meanvalue_cmd),
        Command::Zexample(c) => (c, commands::zexample_cmd),
        Command::ReproduceAll(c) => (c, commands::reproduce_all_cmd),
    };
    let mut cfg = flags.over(base)?;
    let artifacts = handler(&mut cfg)?;
    output::emit(&cfg, &artifacts)?;
    Ok(artifacts.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
