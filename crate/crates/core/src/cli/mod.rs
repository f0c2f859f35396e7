//! Command-line front end shared by the `evokan` binary and its tests.

pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::RunConfig;

use crate::error::{Error, Result};

pub const THREADS_ENV: &str = "EVOKAN_THREADS";

#[derive(Debug, Parser)]
#[command(name = "evokan", version, about = "Evolutionary KAN solvers and spectral references for time-dependent PDEs")]
pub struct Cli {
    /// JSON run configuration (or a manifest from an earlier run).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (file for `render` of a single snapshot or strip).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Only report errors.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the network to the initial condition and save it.
    FitIc,
    /// Fit, then evolve the network parameters to the final time.
    Evolve {
        /// Start from this EVKN file instead of fitting.
        #[arg(long, value_name = "PATH")]
        init: Option<PathBuf>,
    },
    /// Spectral reference trajectory at the evolution's snapshot times.
    Benchmark,
    /// Errors of run A against reference run B.
    Compare { run_a: PathBuf, run_b: PathBuf },
    /// Grayscale PGM of a snapshot, or of every snapshot in a directory.
    Render {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        component: usize,
        /// Render the vorticity of a 2D velocity field.
        #[arg(long)]
        vorticity: bool,
    },
    /// Merge comparison reports into one methods-by-parameter table.
    Table {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
}

/// Thread count from `EVOKAN_THREADS`, `None` when unset.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::validation(THREADS_ENV, format!("must be a positive integer, got {v:?}"))),
        },
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::validation("--config", "this command needs a run configuration"))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn output_dir(cli: &Cli, cfg: &RunConfig) -> Result<PathBuf> {
    cli.out
        .clone()
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| Error::validation("--out", "no output directory given and none configured"))
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::FitIc => {
            let cfg = load_config(cli)?;
            commands::fit_ic(&cfg, &output_dir(cli, &cfg)?, cli.quiet)
        }
        Command::Evolve { init } => {
            let cfg = load_config(cli)?;
            commands::evolve(&cfg, &output_dir(cli, &cfg)?, init.as_deref(), cli.quiet)
        }
        Command::Benchmark => {
            let cfg = load_config(cli)?;
            commands::benchmark(&cfg, &output_dir(cli, &cfg)?, cli.quiet)
        }
        Command::Compare { run_a, run_b } => commands::compare(run_a, run_b, cli.out.as_deref(), cli.quiet).map(|_| ()),
        Command::Render {
            input,
            component,
            vorticity,
        } => commands::render(input, cli.out.as_deref(), *component, *vorticity, cli.quiet).map(|_| ()),
        Command::Table { reports } => commands::table(reports, cli.out.as_deref(), cli.quiet).map(|_| ()),
    }
}

/// Parse arguments, configure logging and threads, run, and map the outcome
/// to a process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = if cli.quiet { "error" } else { "info" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    let outcome = threads_from_env().and_then(|threads| {
        if let Some(n) = threads {
            // Fails only if a pool already exists, which is harmless.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        execute(&cli)
    });
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Convenience for tests: the manifest of a finished run.
pub fn read_manifest(dir: &Path) -> Result<output::Manifest> {
    output::Manifest::read(dir)
}
