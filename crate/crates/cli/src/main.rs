//! `dlab` — reproducible experiments over D[0,1]: metric brackets,
//! process sampling, convergence sweeps, exact rate-bound reports, the
//! deterministic composition check and the obstruction example.
//!
//! Every run is a pure function of its resolved configuration: outputs
//! embed the configuration, its hash and the seed, and the data section
//! of any two runs with the same configuration is byte-identical.
//!
//! Exit codes: 0 success, 1 model/hypothesis violation, 2 I/O or schema
//! error.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "dlab", version, about = "Numerical laboratory for cadlag limit experiments")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GlobalArgs {
    /// Root seed for all randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for replicate-level parallelism (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output file path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,

    /// JSON config file supplying defaults for the flags above
    /// (precedence: explicit flag > config file > built-in default).
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Metric bracket between two function files.
    Distance(commands::DistanceArgs),
    /// Sample one process trajectory to JSON.
    Sample(commands::SampleArgs),
    /// KS convergence sweep over scales.
    Sweep(commands::SweepArgs),
    /// Exact rational rate-bound report.
    RateBound(commands::RateBoundArgs),
    /// Obstruction example table over n.
    Counterexample(commands::CounterexampleArgs),
    /// Deterministic composition convergence check.
    LemmaCheck(commands::LemmaCheckArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let resolved = match config::resolve_globals(&cli.global) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };

    let run = || -> Result<(), commands::RunError> {
        match &cli.command {
            Command::Distance(args) => commands::run_distance(args, &resolved),
            Command::Sample(args) => commands::run_sample(args, &resolved),
            Command::Sweep(args) => commands::run_sweep(args, &resolved),
            Command::RateBound(args) => commands::run_rate_bound(args, &resolved),
            Command::Counterexample(args) => commands::run_counterexample(args, &resolved),
            Command::LemmaCheck(args) => commands::run_lemma_check(args, &resolved),
        }
    };

    let outcome = match resolved.threads {
        #[cfg(feature = "parallel")]
        Some(t) => {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: failed to build thread pool: {e}");
                    return ExitCode::from(2);
                }
            };
            pool.install(run)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => run(),
        None => run(),
    };

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
