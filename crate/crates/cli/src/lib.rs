//! Command-line front end: configuration loading and validation, dispatch to
//! one analysis per subcommand, and deterministic JSON reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;

pub use commands::{run, Command, Outcome};
pub use config::{validate, Diagnostic, RunConfig, KNOWN_KEYS};
pub use error::{CliError, EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_NUMERICAL, EXIT_OK};
pub use report::{canonical_json, write_atomic, RunReport};

#[derive(Debug, Parser)]
#[command(
    name = "imhyp",
    version,
    about = "Spectral diagnostics for inertial-manifold obstructions"
)]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON file with any of the flag values; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: RunConfig,
}

/// Runs one invocation and returns the report; errors carry the exit code.
pub fn execute(cli: &Cli) -> Result<(RunReport, bool), CliError> {
    let cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides).map_err(CliError::Config)?;
    if let Some(n) = cfg.threads {
        // fails only if a pool already exists, which leaves results unchanged
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let start = Instant::now();
    let outcome = run(cli.command, &cfg)?;
    let elapsed = start.elapsed().as_secs_f64();

    if let (Some(path), Some(bytes)) = (&cfg.csv, &outcome.csv) {
        write_atomic(path, bytes)?;
    }
    let report = RunReport {
        tool: report::TOOL,
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name().to_string(),
        elapsed_seconds: cfg.timing.then_some(elapsed),
        // thread count does not affect results, so it stays out of the echo
        config: RunConfig {
            threads: None,
            ..cfg.clone()
        },
        result: outcome.result,
        verdict: outcome.verdict,
    };
    let text = report.to_canonical_json();
    match &cfg.output {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok((report, outcome.hypothesis_met))
}

/// Parses arguments, runs, prints errors and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok((report, true)) => {
            eprintln!("{}", report.verdict);
            EXIT_OK
        }
        Ok((report, false)) => {
            eprintln!("hypothesis not met: {}", report.verdict);
            EXIT_HYPOTHESIS
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
