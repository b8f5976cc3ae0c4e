//! `dwmix` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 model-validity or solver
//! failure, 4 internal error.

// `!(x > 0.0)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod manifest;
mod plot;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime};

use clap::{Parser, Subcommand};
use dwmix::Error;

use crate::commands::Outcome;
use crate::config::RunConfig;
use crate::manifest::{Artifact, RunRecord};

#[derive(Debug, Parser)]
#[command(
    name = "dwmix",
    version,
    about = "Two-mode simulator for a boson-fermion mixture in a double well"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (`section.key = value` lines); defaults if omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Also write a matplotlib script for the sweep CSV.
    #[arg(long, global = true)]
    plot: bool,

    /// Fermion basis scheme, overriding `model.fermion_basis`.
    #[arg(long, global = true, value_name = "antisymmetric|paper_four_state")]
    fermion_basis: Option<String>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Solve the single-particle doublets and write the mode functions.
    SolveModes,
    /// Evolve the both-right state and estimate regime metrics.
    Evolve,
    /// Ground-state fidelity over a coupling plane.
    FidelityMap,
    /// Species entanglement entropy along a λ_FF line.
    EntropyScan,
    /// Check a config and the two-mode validity without writing anything.
    ValidateConfig,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::SolveModes => "solve-modes",
            Command::Evolve => "evolve",
            Command::FidelityMap => "fidelity-map",
            Command::EntropyScan => "entropy-scan",
            Command::ValidateConfig => "validate-config",
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Config(_) | Error::InvalidArgument(_) => 2,
        Error::ModelValidity(_) | Error::Solver(_) => 3,
        _ => 4,
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let mut overrides = Vec::new();
    if let Some(out) = &cli.out {
        overrides.push(("output.dir", out.to_string_lossy().into_owned()));
    }
    if let Some(fb) = &cli.fermion_basis {
        overrides.push(("model.fermion_basis", fb.clone()));
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    let workers = match cli.workers {
        Some(0) => return Err(Error::config("--workers must be at least 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };

    let started = SystemTime::now();
    let clock = Instant::now();
    let outcome: Outcome = match cli.command {
        Command::ValidateConfig => {
            print!("{}", commands::validate(&cfg)?);
            return Ok(());
        }
        Command::SolveModes => commands::solve_modes(&cfg)?,
        Command::Evolve => commands::evolve(&cfg)?,
        Command::FidelityMap => commands::fidelity_map(&cfg, workers, cli.plot)?,
        Command::EntropyScan => commands::entropy_scan(&cfg, workers, cli.plot)?,
    };
    let record = RunRecord {
        command: cli.command.name(),
        config: &cfg,
        derived: Some(manifest::derived(&cfg, &outcome.model)),
        results: outcome.results,
        workers,
        started,
        elapsed: clock.elapsed(),
    };
    let manifest = Artifact::new("manifest.json", manifest::manifest(&record, &outcome.artifacts));

    fs::create_dir_all(&cfg.output_dir)?;
    for a in outcome.artifacts.iter().chain([&manifest]) {
        fs::write(cfg.output_dir.join(&a.name), &a.bytes)?;
    }
    log::info!(
        "{}: wrote {} files to {}",
        cli.command.name(),
        outcome.artifacts.len() + 1,
        cfg.output_dir.display()
    );
    println!("{}", cfg.output_dir.join("manifest.json").display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
