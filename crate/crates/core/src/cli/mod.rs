//! Command-line front end: `analyze`, `switches`, `simulate`, `scan` and `triad`.

mod commands;
pub mod config;
pub mod scan;

pub use commands::{
    analyze, planar_reduction, simulate, switches, triad, AnalyzeReport, AuxiliaryAnalysis, PlanarReduction,
    SimulationSummary, SwitchesOutput, TriadReport, TrigAnalysis,
};
pub use config::{AxisRange, BaselineFilter, RunConfig, ScanConfig};
pub use scan::{run_scan, ScanResult};

use crate::model::ModelError;
use crate::sim::SimError;
use crate::spectral::SpectralError;
use crate::switch_analysis::SwitchError;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("non-generic input: {0}")]
    NonGeneric(String),
    #[error("verification disagreement: {0}")]
    Verification(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::NonGeneric(_) => 3,
            Self::Verification(_) => 4,
            Self::Io(_) | Self::Failed(_) => 1,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<SwitchError> for CliError {
    fn from(e: SwitchError) -> Self {
        match e {
            SwitchError::NonGeneric(m) => Self::NonGeneric(m),
            SwitchError::BadWindow { .. } | SwitchError::Model(_) => Self::Config(e.to_string()),
            other => Self::Failed(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Io { .. } => Self::Io(e.to_string()),
            other => Self::Config(other.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        Self::Failed(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "delayswitch",
    version,
    about = "Stability switches of linear systems with one common delay"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Baseline, quasi-polynomial, auxiliary analysis and regime of one system.
    Analyze(RunArgs),
    /// Switch delays with directions, checked against the spectral oracle.
    Switches(RunArgs),
    /// Integrate the delay system and write the trajectory.
    Simulate(RunArgs),
    /// Switch counts over a coefficient grid.
    Scan(RunArgs),
    /// Three-species analysis with the planar reduction when it applies.
    Triad(RunArgs),
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// JSON configuration file; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Coefficients a11,a12,a21,a22[,a23,a32,a33].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub matrix: Option<Vec<f64>>,
    #[arg(long)]
    pub placement: Option<String>,
    /// Undelayed own-state coefficient for mixed_self.
    #[arg(long, allow_hyphen_values = true)]
    pub a13: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub tau_min: Option<f64>,
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    /// Emit plot.gp next to the trajectory.
    #[arg(long)]
    pub plot: bool,
    /// Switch counts to collect witnesses for (scan).
    #[arg(long, value_delimiter = ',')]
    pub request: Option<Vec<usize>>,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! take {
            ($($f:ident),*) => { $( if self.$f.is_some() { c.$f = self.$f.clone(); } )* };
        }
        take!(matrix, placement, a13, tau, tau_min, tau_max, out, seed, horizon, step);
        if self.plot {
            c.plot = Some(true);
        }
        if let Some(r) = &self.request {
            c.scan.get_or_insert_with(ScanConfig::default).requested = r.clone();
        }
        Ok(c)
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", parent.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Run one command; the returned text goes to standard output.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Analyze(a) => analyze(&a.resolve()?).map(|(_, text)| text),
        Command::Switches(a) => switches(&a.resolve()?).map(|(_, text)| text),
        Command::Simulate(a) => simulate(&a.resolve()?).map(|(_, text)| text),
        Command::Scan(a) => run_scan(&a.resolve()?).map(|(_, text)| text),
        Command::Triad(a) => triad(&a.resolve()?).map(|(_, text)| text),
    }
}

/// Parse arguments and run; returns the exit code together with the text
/// meant for standard output and standard error.
pub fn execute<I, T>(args: I) -> (u8, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                (0, text, String::new())
            } else {
                (2, String::new(), text)
            };
        }
    };
    match run(&cli) {
        Ok(out) => (0, out, String::new()),
        Err(e) => (e.exit_code(), String::new(), format!("error: {e}\n")),
    }
}
