//! Command-line experiment runner.
//!
//! ```text
//! lab spectrum|marker-sweep|dichotomy|estimates --config <path> --out <dir> [--threads k]
//! ```
//!
//! Exit codes: 0 on success, 1 when a numerical invariant fails or a
//! computation breaks down, 2 on invalid input. Every run ends by writing
//! `manifest.json` into the output directory.

mod commands;
mod config;
mod manifest;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use commands::model_hash;
pub use config::{EstimateToggles, ExperimentConfig};
pub use manifest::{unix_now, CheckKind, CheckRecord, Checks, OutputEntry, Outputs, RunManifest};

use crate::error::{LabError, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "lab",
    version,
    about = "Fermi projectors, Wannier bases and Chern markers on finite lattices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Eigenvalues and kernel decay of the Fermi projector.
    Spectrum(RunArgs),
    /// Chern markers in both forms at every window, with the k-space oracle.
    MarkerSweep(RunArgs),
    /// Localization moments and markers across system sizes.
    Dichotomy(RunArgs),
    /// Scaling series of the truncation estimates.
    Estimates(RunArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory; falls back to `output_dir` from the config.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for dense linear algebra.
    #[arg(long, value_name = "K")]
    pub threads: Option<usize>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::MarkerSweep(_) => "marker-sweep",
            Command::Dichotomy(_) => "dichotomy",
            Command::Estimates(_) => "estimates",
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Spectrum(a) | Command::MarkerSweep(a) | Command::Dichotomy(a) | Command::Estimates(a) => a,
        }
    }
}

/// Outcome of a finished run.
#[derive(Debug)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.manifest.failures.is_empty() {
            EXIT_OK
        } else {
            EXIT_NUMERICAL
        }
    }
}

pub fn exit_code_for(err: &LabError) -> i32 {
    if err.is_input_error() {
        EXIT_INPUT
    } else {
        EXIT_NUMERICAL
    }
}

/// Runs one command. Input is validated before the output directory is
/// touched; an input error raised later removes the artifacts written so far.
pub fn run(command: &Command) -> Result<RunReport> {
    let args = command.args();
    let config = ExperimentConfig::load(&args.config)?;
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .ok_or_else(|| LabError::Config("no output directory: pass --out or set output_dir".into()))?;
    if let Some(k) = args.threads {
        if k == 0 {
            return Err(LabError::Config("--threads must be positive".into()));
        }
        faer::set_global_parallelism(if k == 1 { faer::Par::Seq } else { faer::Par::rayon(k) });
    }

    let started = unix_now();
    let mut outputs = Outputs::create(&out_dir)?;
    let mut checks = Checks::default();
    let result = match command {
        Command::Spectrum(_) => commands::spectrum(&config, &mut outputs, &mut checks),
        Command::MarkerSweep(_) => commands::marker_sweep(&config, &mut outputs, &mut checks),
        Command::Dichotomy(_) => commands::dichotomy(&config, &mut outputs, &mut checks),
        Command::Estimates(_) => commands::estimates(&config, &mut outputs, &mut checks),
    };
    if let Err(e) = result {
        if e.is_input_error() {
            remove_artifacts(&outputs);
        }
        return Err(e);
    }
    let manifest = RunManifest::finish(command.name(), config.hash(), started, &outputs, &checks)?;
    manifest.write(&out_dir)?;
    Ok(RunReport { out_dir, manifest })
}

fn remove_artifacts(outputs: &Outputs) {
    for rel in outputs.files() {
        let _ = std::fs::remove_file(outputs.dir().join(rel));
    }
    // Only succeeds if the directory is now empty.
    let _ = std::fs::remove_dir(outputs.dir());
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match run(&cli.command) {
        Ok(report) => {
            for name in &report.manifest.failures {
                eprintln!("invariant failed: {name}");
            }
            let claims = report
                .manifest
                .checks
                .iter()
                .filter(|c| c.kind == CheckKind::Claim && !c.passed);
            for c in claims {
                eprintln!("claim not met: {} ({})", c.name, c.detail);
            }
            println!("{}", Path::new(&report.out_dir).join("manifest.json").display());
            report.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
