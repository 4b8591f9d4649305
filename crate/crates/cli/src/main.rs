//! Command-line front end: dark-line atlases, mode tables, delay-equation
//! runs, classification, parameter sweeps and decoherence-free exchange.
//!
//! Exit status: 0 on success, 1 for usage errors, 2 for numerical failures.

mod angle;
mod commands;
mod failure;
mod output;
mod scenario;

use clap::{Parser, Subcommand};

use commands::Ctx;

#[derive(Parser, Debug)]
#[command(name = "giant-bic", version, about = "Bound states of two giant atoms in a waveguide")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dark-state lines and their intersections in an Omega window.
    DarkLines(commands::DarkLinesArgs),
    /// Pole table (dark, quasi-dark, lossy) for both branches.
    Modes(commands::ModesArgs),
    /// Integrate the delay equations and write the trajectory.
    Evolve(commands::EvolveArgs),
    /// Integrate and write field-intensity snapshots.
    Field(commands::FieldArgs),
    /// Bound-state class at an intersection or configuration.
    Classify(commands::ClassifyArgs),
    /// Evaluate a metric over an (Omega, gamma) grid in parallel.
    Sweep(commands::SweepArgs),
    /// Markovian exchange quantities for braided atoms.
    Dfi(commands::DfiArgs),
}

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { failure::USAGE } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let ctx = Ctx { hash: output::args_hash(&argv[1..]) };
    let result = match &cli.command {
        Command::DarkLines(a) => commands::dark_lines(&ctx, a),
        Command::Modes(a) => commands::modes(&ctx, a),
        Command::Evolve(a) => commands::evolve_cmd(&ctx, a),
        Command::Field(a) => commands::field(&ctx, a),
        Command::Classify(a) => commands::classify_cmd(&ctx, a),
        Command::Sweep(a) => commands::sweep(&ctx, a),
        Command::Dfi(a) => commands::dfi(&ctx, a),
    };
    if let Err(f) = result {
        eprintln!("error: {f}");
        std::process::exit(f.code);
    }
}
