//! Command-line front end: `fit`, `simulate`, `benchmark` and `score`.

mod commands;
mod config;
mod csv_io;
mod design;
mod error;

use std::ffi::OsString;

use clap::Parser;

use config::{Cli, Command};
use error::{CliError, CliResult};

fn run(cli: Cli) -> CliResult<()> {
    let (flags, handler): (_, fn(&config::Flags) -> CliResult<()>) = match cli.command {
        Command::Fit(f) => (f, commands::fit),
        Command::Simulate(f) => (f, commands::simulate),
        Command::Benchmark(f) => (f, commands::benchmark),
        Command::Score(f) => (f, commands::score),
    };
    let flags = flags.resolve()?;
    let threads = match flags.threads {
        Some(0) => return Err(CliError::Config("--threads must be at least 1".into())),
        Some(t) => t,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(|| handler(&flags))
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors are reported on stderr.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let _ = e.print();
            return 3;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code() as u8
        }
    }
}
