//! Command-line front end for `front-forge-core`.
//!
//! Each subcommand reads a JSON config, runs to completion, then writes its
//! CSV artifacts, a `report.json` and gnuplot-ready `.dat` files into the
//! output directory. Nothing is written when the command fails.

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;

use std::fs;
use std::path::{Path, PathBuf};

pub use config::{Overrides, RunConfig};
pub use error::CliError;
pub use plot::emit_plotdata;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CheckPotential,
    ShockCurve,
    SolveFront,
    DecayRate,
    SimulateChain,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckPotential => "check-potential",
            Command::ShockCurve => "shock-curve",
            Command::SolveFront => "solve-front",
            Command::DecayRate => "decay-rate",
            Command::SimulateChain => "simulate-chain",
        }
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub exit: u8,
    pub message: String,
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

/// Loads `config`, applies the overrides and runs `command`.
pub fn run(command: Command, config: &Path, overrides: &Overrides) -> Result<RunSummary, CliError> {
    let mut cfg = RunConfig::load(config)?;
    cfg.apply(command.name(), overrides)?;
    run_config(command, &cfg)
}

pub fn run_config(command: Command, cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let out = match command {
        Command::CheckPotential => commands::check_potential(cfg)?,
        Command::ShockCurve => commands::shock_curve(cfg)?,
        Command::SolveFront => commands::solve(cfg)?,
        Command::DecayRate => commands::decay(cfg)?,
        Command::SimulateChain => commands::simulate_chain(cfg)?,
    };
    let dir = cfg.output_dir();
    fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    for (name, body) in &out.files {
        let path = dir.join(name);
        fs::write(&path, body)?;
        files.push(path);
    }
    let path = dir.join("report.json");
    fs::write(&path, serde_json::to_string_pretty(&out.report)? + "\n")?;
    files.push(path);
    files.extend(emit_plotdata(&dir)?);
    Ok(RunSummary {
        exit: out.exit,
        message: out.summary,
        output_dir: dir,
        files,
    })
}

/// Sizes the global rayon pool from `FRONT_FORGE_THREADS`, if set.
pub fn configure_threads(value: Option<&str>) -> Result<(), CliError> {
    let Some(v) = value else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("FRONT_FORGE_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(format!("cannot size thread pool: {e}")))
}
