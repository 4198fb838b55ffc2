use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use intrinsic_metrics_cli::commands::{execute, Cli, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = cli.command.run_args().clone();
    let workers = run
        .workers
        .map(|w| w as usize)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
    {
        eprintln!("imetric: could not start thread pool: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    eprintln!(
        "imetric: seed={} samples={} workers={}",
        run.seed, run.samples, workers
    );
    let outcome = match execute(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let written = match &run.out {
        Some(path) => std::fs::write(path, &outcome.text),
        None => std::io::stdout().write_all(outcome.text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: could not write output: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    ExitCode::from(outcome.exit)
}
