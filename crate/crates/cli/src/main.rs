//! `wlp`: batch driver for the weighted-lp lab.
//!
//! Every subcommand writes deterministic CSV/JSON artifacts and a
//! `manifest.json` into the output directory. Exit codes: 0 when the checks
//! meet `--expect`, 1 when they do not, 2 for configuration errors, 3 for
//! computation errors.

mod commands;
mod config;
mod descriptor;
mod error;
mod report;

use clap::{Parser, Subcommand};

use crate::error::{CliError, EXIT_CHECK_FAILED, EXIT_CONFIG};
use crate::report::Run;

#[derive(Parser, Debug)]
#[command(name = "wlp", version, about = "Weighted L^p convolution algebra experiments", args_override_self = true)]
#[command(after_help = "Use --config FILE to read `key = value` flags (and an optional `command`) from a file.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Weight axioms and the (LPAlg) ratio scan.
    CheckWeight(commands::CheckWeight),
    /// GRS / S / o-exp / BDna verdict table.
    Conditions(commands::Conditions),
    /// Spectral radius estimates, character domains and finite spectra.
    Spectral(commands::Spectral),
    /// Bump construction, ψ{f} and the spectral mapping error.
    Funcalc(commands::Funcalc),
    /// Laplace-type integral tables and case-4 sums.
    Laplace(commands::Laplace),
    /// Operator weight, representation and commutator sweep.
    Operator(commands::Operator),
    /// Ball counts and the fitted growth degree.
    Growth(commands::Growth),
}

fn dispatch(cmd: &Command) -> Result<Run, CliError> {
    match cmd {
        Command::CheckWeight(a) => commands::check_weight(a),
        Command::Conditions(a) => commands::conditions(a),
        Command::Spectral(a) => commands::spectral(a),
        Command::Funcalc(a) => commands::funcalc(a),
        Command::Laplace(a) => commands::laplace(a),
        Command::Operator(a) => commands::operator(a),
        Command::Growth(a) => commands::growth(a),
    }
}

fn run() -> i32 {
    let args = match config::expand_args(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("wlp: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = dispatch(&cli.command).and_then(|run| {
        let manifest = run.finish()?;
        Ok((run, manifest))
    });
    match outcome {
        Ok((run, manifest)) => {
            for c in run.checks() {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("manifest: {}", manifest.display());
            if run.succeeded() {
                0
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("wlp: {e}");
            e.exit_code()
        }
    }
}

fn main() {
    std::process::exit(run());
}
