use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use evbox_core::engine::run_pipeline;

/// Runs an ingest, transform and analysis pipeline from a JSON config and
/// writes the declared reports and EventBox artifacts.
#[derive(Debug, Parser)]
#[command(name = "evbox", version)]
struct Args {
    /// Pipeline config: `{ingest?, actions[], outputs[]}`.
    #[arg(long)]
    config: PathBuf,
    /// Directory the outputs are written to.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Replaces the seed of every synthetic step.
    #[arg(long)]
    seed: Option<u64>,
    /// Log each action with its timing.
    #[arg(long, short)]
    verbose: bool,
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_VALIDATION) } else { ExitCode::SUCCESS };
        }
    };
    let level = if args.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run_pipeline(&args.config, &args.out, args.seed) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("evbox: {} ({})", e, e.code());
            ExitCode::from(if e.is_validation() { EXIT_VALIDATION } else { EXIT_RUNTIME })
        }
    }
}
