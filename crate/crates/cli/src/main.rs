//! `mpnc`: validate scenarios, run the dynamics and baselines, check
//! gradients, and compare methods.
//!
//! Exit codes: 0 ok, 1 invalid scenario, 2 unreadable or malformed input,
//! 3 a run did not converge or a check failed, 4 any other failure.

mod commands;
mod output;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "mpnc", version, about = "Multipath traffic splitting with reverse-carpooling network coding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file and list every violation.
    Validate { file: PathBuf },
    /// Run one method (or all) and write trajectory CSV and summary JSON.
    Run {
        #[arg(long, value_enum)]
        method: MethodArg,
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// JSON file with an initial state `{"x": [[..]], "y": [..]}`.
        #[arg(long)]
        init: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Compare analytic gradients with central finite differences.
    Gradcheck {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = -8.0, allow_negative_numbers = true)]
        r: f64,
        /// Number of random interior states.
        #[arg(long, default_value_t = 100)]
        states: usize,
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Write the report as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run all four methods and write a comparison table.
    Compare {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Directory for comparison.csv and comparison.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the built-in three-flow scenario.
    Fig2 {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a seeded random scenario.
    Generate {
        #[arg(long, value_enum, default_value = "small")]
        kind: RandomKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Dd,
    Cd,
    Nocoding,
    Oracle,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum RandomKind {
    /// Up to five flows with one to three paths.
    Small,
    /// Thirty nodes, six flows, two or three paths.
    Thirty,
}

/// Where the scenario comes from; the built-in three-flow scenario if neither
/// `--scenario` nor `--random` is given.
#[derive(Args, Clone, Debug)]
struct SourceArgs {
    #[arg(long, conflicts_with = "random")]
    scenario: Option<PathBuf>,
    #[arg(long, value_enum)]
    random: Option<RandomKind>,
    /// Seed for `--random`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Overrides for the scenario's run parameters.
#[derive(Args, Clone, Debug, Default)]
struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// Length of one large time unit.
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    steps_large: Option<usize>,
    #[arg(long)]
    steps_small: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { file } => commands::validate(&file),
        Command::Run {
            method,
            source,
            params,
            init,
            out,
        } => commands::run(method, &source, &params, init.as_deref(), &out),
        Command::Gradcheck {
            source,
            r,
            states,
            step,
            tol,
            out,
        } => commands::gradcheck(&source, r, states, step, tol, out.as_deref()),
        Command::Compare { source, params, out } => commands::compare(&source, &params, out.as_deref()),
        Command::Fig2 { out } => commands::fig2(out.as_deref()),
        Command::Generate { kind, seed, out } => commands::generate(kind, seed, out.as_deref()),
    };
    match result {
        Ok(code) => code.into(),
        Err(e) => {
            eprintln!("error: {e:#}");
            commands::Exit::of_error(&e).into()
        }
    }
}
