//! Command implementations behind the `skinseg` binary.
//!
//! Each `cmd_*` function does the work of one subcommand and returns a typed
//! result; [`run`] parses arguments, dispatches and maps errors to exit codes.

pub mod args;
pub mod batch;
pub mod bench;
pub mod compare;
pub mod error;
pub mod phantom;
pub mod segment;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::Path;

use clap::Parser;
use serde::Serialize;

pub use args::{Cli, Command};
pub use batch::cmd_batch;
pub use bench::cmd_bench;
pub use compare::cmd_compare;
pub use error::{exit, CliError, CliResult};
pub use phantom::cmd_phantom;
pub use segment::cmd_segment;

/// Pretty JSON with a trailing newline.
pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn summary<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("report serializes")
}

/// Runs one subcommand and returns the summary printed on stdout.
fn dispatch(command: &Command) -> CliResult<serde_json::Value> {
    Ok(match command {
        Command::Segment(a) => summary(&cmd_segment(a)?.report),
        Command::Compare(a) => summary(&cmd_compare(a)?.report),
        Command::Batch(a) => summary(&cmd_batch(a)?.aggregate),
        Command::Phantom(a) => summary(&cmd_phantom(a)?.truth),
        Command::Bench(a) => summary(&cmd_bench(a)?),
    })
}

/// Runs an already parsed command line inside a pool of `cli.jobs` threads.
pub fn run_cli(cli: &Cli) -> CliResult<()> {
    if cli.jobs == Some(0) {
        return Err(CliError::Config("--jobs must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let value = pool.install(|| dispatch(&cli.command))?;
    if !cli.quiet {
        let text = serde_json::to_string_pretty(&value).expect("summary serializes");
        // A closed pipe on stdout is not an error; the files are already written.
        let _ = writeln!(std::io::stdout().lock(), "{text}");
    }
    Ok(())
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::CONFIG } else { exit::OK };
        }
    };
    match run_cli(&cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
