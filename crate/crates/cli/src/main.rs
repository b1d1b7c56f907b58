mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Overrides;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "exsplit", version, about = "Exact splitting of quadratic semigroups")]
struct Cli {
    /// Worker threads for the FFT engine (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a splitting program and write it with its verification report.
    #[command(allow_negative_numbers = true)]
    Factor(Overrides),
    /// Evolve an initial field with a splitting program.
    #[command(allow_negative_numbers = true)]
    Solve(Overrides),
    /// Print the verification report of a program.
    #[command(allow_negative_numbers = true)]
    Verify(Overrides),
    /// Compare exact and Strang splitting on the harmonic oscillator.
    #[command(allow_negative_numbers = true)]
    Bench {
        #[command(flatten)]
        over: Overrides,
        /// CSV output file (stdout when absent).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Factor(o) => commands::factor(&config::load(&o)?, &o),
        Command::Solve(o) => commands::solve(&config::load(&o)?, &o),
        Command::Verify(o) => commands::verify(&config::load(&o)?, &o),
        Command::Bench { over, csv } => commands::bench(&config::load(&over)?, csv.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
