use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use front_forge_cli::{configure_threads, run, Command, Overrides};

#[derive(Parser)]
#[command(name = "front-forge", version, about = "Subsonic fronts in nonconvex FPU chains")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Normalize the potential and report the structural assumptions.
    CheckPotential(Args),
    /// Trace conservative-shock curves from turning points or given seeds.
    ShockCurve(Args),
    /// Solve for the front profile by gradient flow.
    SolveFront(Args),
    /// Tail decay rates from the characteristic equation.
    DecayRate(Args),
    /// Run the discrete chain from a solved front or Riemann data.
    SimulateChain(Args),
}

#[derive(clap::Args)]
struct Args {
    /// JSON run configuration.
    #[arg(short, long)]
    config: PathBuf,
    /// Gradient-flow step size.
    #[arg(long)]
    lambda: Option<f64>,
    /// Residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Grid spacing, 1/(2k).
    #[arg(long)]
    h: Option<f64>,
    /// Half-width of the computational window.
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(short, long)]
    output_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::CheckPotential(a) => (Command::CheckPotential, a),
        Cmd::ShockCurve(a) => (Command::ShockCurve, a),
        Cmd::SolveFront(a) => (Command::SolveFront, a),
        Cmd::DecayRate(a) => (Command::DecayRate, a),
        Cmd::SimulateChain(a) => (Command::SimulateChain, a),
    };
    let threads = std::env::var("FRONT_FORGE_THREADS").ok();
    if let Err(e) = configure_threads(threads.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    let overrides = Overrides {
        lambda: args.lambda,
        tol: args.tol,
        h: args.h,
        m: args.m,
        output_dir: args.output_dir,
    };
    match run(command, &args.config, &overrides) {
        Ok(s) => {
            println!("{}: {}", command.name(), s.message);
            println!("wrote {} files to {}", s.files.len(), s.output_dir.display());
            if s.exit != 0 {
                eprintln!("error: no convergence within the iteration limit");
            }
            ExitCode::from(s.exit)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
