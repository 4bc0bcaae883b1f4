use clap::{Parser, Subcommand};
use heatbasis_cli::config::CommandName;
use std::path::PathBuf;

/// Config-driven experiments for caloric-function bases: doubly orthogonal
/// systems, density runs, continuation, Green-formula checks and Bessel
/// zero tables, all emitted as CSV.
#[derive(Parser)]
#[command(name = "heatbasis", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Table of Bessel function (or derivative) zeros
    BesselZeros(RunArgs),
    /// Reproduction residuals of the parabolic Green formula
    GreenCheck(RunArgs),
    /// Doubly orthogonal basis: eigenvalues and diagnostics
    Basis(RunArgs),
    /// Least-squares density experiment (residual curve)
    Density(RunArgs),
    /// Continuation error against the truncation level
    Continue(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON experiment configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing)
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::BesselZeros(a) => (CommandName::BesselZeros, a),
        Command::GreenCheck(a) => (CommandName::GreenCheck, a),
        Command::Basis(a) => (CommandName::Basis, a),
        Command::Density(a) => (CommandName::Density, a),
        Command::Continue(a) => (CommandName::Continue, a),
    };
    match heatbasis_cli::run(Some(name), &args.config, &args.out) {
        Ok(paths) => {
            for path in paths {
                println!("{}", path.display());
            }
        }
        Err(e) => {
            eprintln!("{}", e.machine_line());
            std::process::exit(e.exit_code());
        }
    }
}
