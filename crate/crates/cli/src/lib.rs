//! `annealing-lab`: every library capability as a reproducible subcommand.
//!
//! Exit codes: 0 on success, 2 on usage or input errors, 1 on internal errors.

mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

pub use output::Output;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "annealing-lab", version, about = "Cooling-schedule experiments for simulated annealing")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads for parallel sections.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// JSON object of flag values, overridden by flags given on the command line.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Writes the effective flags as a config file.
    #[arg(long, global = true)]
    pub save_config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: commands::Command,
}

/// A problem with the invocation or its inputs (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<annealing_core::Error>() {
            return if e.is_input_error() { 2 } else { 1 };
        }
        if cause.is::<UsageError>() || cause.is::<serde_json::Error>() {
            return 2;
        }
    }
    1
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let raw: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let args = match config::merge(raw) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return exit_code(&e);
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, &args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli, args: &[String]) -> anyhow::Result<()> {
    if cli.threads == 0 {
        return Err(usage("--threads must be at least 1"));
    }
    if let Some(path) = &cli.save_config {
        config::save(path, args)?;
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build()?;
    let out = pool.install(|| commands::dispatch(cli))?;
    out.write(cli.format, cli.out.as_deref())
}
