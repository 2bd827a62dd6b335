//! Command-line interface. Every subcommand writes its artifacts to `--out` and maps
//! its outcome onto the exit-code contract: 0 all certificates pass, 1 a certificate
//! fails, 2 configuration error, 3 numerical failure or flagged run.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use super::config::ExperimentConfig;
use super::report::{emit_report, exit_code, exit_code_for, read_manifest, Formats, RunReport};
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "halfwave", version, about = "Spectral simulator and verification harness for i∂tψ = (|p| + V)ψ")]
pub struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for the manifest, CSV series and SVG figures.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate the configured state and record position observables.
    Simulate {
        /// Also write the trajectory checkpoint here.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Run the static-estimate battery on the configured grid and potential.
    Certify,
    /// Propagation estimates for every configured shell.
    Propagation,
    /// Maximal-velocity decay and its shell decomposition.
    Maxvel,
    /// Minimal-velocity decay and its time integral.
    Minvel,
    /// Split-step against the dense propagator at steps 4dt, 2dt, dt.
    OracleCompare,
    /// Summarize a manifest; with `--out`, re-emit its artifacts there.
    Report {
        /// Path of a `manifest.json`.
        manifest: PathBuf,
    },
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("this subcommand needs --config <path>".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn summarize(reports: &[RunReport]) {
    for run in reports {
        let flag = if run.flagged { " [flagged]" } else { "" };
        println!("{}{flag}", run.experiment);
        for c in &run.certificates {
            println!("  {:<40} {}  measured={:e}", c.id, if c.pass { "PASS" } else { "FAIL" }, c.measured);
            for ch in c.checks.iter().filter(|ch| !ch.pass) {
                println!("    failed: {} = {:e} (want {})", ch.name, ch.value, ch.envelope);
            }
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let reports = match &cli.command {
        Command::Report { manifest } => {
            let m = read_manifest(manifest)?;
            summarize(&m.runs);
            let code = exit_code_for(&m.runs);
            if manifest.parent() != Some(cli.out.as_path()) {
                emit_report(&m.runs, &cli.out, Formats::default())?;
            }
            return Ok(code);
        }
        Command::Simulate { checkpoint } => vec![super::run_simulate(&load(cli)?, checkpoint.as_deref())?],
        Command::Certify => vec![super::run_certify(&load(cli)?)?],
        Command::Propagation => vec![super::run_propagation_estimate(&load(cli)?)?],
        Command::Maxvel => vec![super::run_maximal_velocity(&load(cli)?)?],
        Command::Minvel => vec![super::run_minimal_velocity(&load(cli)?)?],
        Command::OracleCompare => vec![super::run_oracle_compare(&load(cli)?)?],
    };
    summarize(&reports);
    let emitted = emit_report(&reports, &cli.out, Formats::default())?;
    println!("wrote {} files to {}", emitted.files.len(), cli.out.display());
    Ok(emitted.exit_code)
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let work = || match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_configuration() {
                exit_code::CONFIGURATION_ERROR
            } else {
                exit_code::NUMERICAL_FAILURE
            }
        }
    };
    match cli.threads {
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(work),
            Err(e) => {
                eprintln!("error: thread pool: {e}");
                exit_code::CONFIGURATION_ERROR
            }
        },
        None => work(),
    }
}

/// Parses `args` (including the program name) and runs them. Usage errors exit 2.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                exit_code::CONFIGURATION_ERROR
            } else {
                exit_code::SUCCESS
            }
        }
    }
}

/// True when `dir` holds a manifest.
pub fn has_manifest(dir: &Path) -> bool {
    dir.join("manifest.json").is_file()
}
