//! Experiment driver: config loading, the experiments, CSV output, run
//! manifests, series comparison and the property suite.

mod compare;
mod config;
mod experiments;
mod properties;
mod series;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub use compare::{compare_densities, compare_series, compare_vectors, ComparisonReport, DensityDeviation};
pub use config::{
    AnalyticSection, ClassicalSection, Experiment, ExperimentConfig, FieldsSection, OutputSection,
    PhaseSpaceSection, QuantumSection, OUTPUT_DIR_ENV,
};
pub use experiments::run_experiment;
pub use properties::{property_suite, PropertyResult, SuiteOptions, SuiteReport};
pub use series::{DensitySeries, Series, VectorSeries};

use crate::error::Error;

pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    /// Schema or range violation in a config; names the key.
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    /// Unusable input series or parameters rejected by the library.
    #[error("input error: {0}")]
    Input(String),
    /// The solvers ran but left their validity window.
    #[error("validity failure: {0}")]
    Physics(String),
}

impl HarnessError {
    /// 1 for validity failures, 2 for config and input problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Physics(_) => 1,
            _ => 2,
        }
    }
}

impl From<Error> for HarnessError {
    fn from(e: Error) -> Self {
        match e {
            Error::TooManyDivergent { .. } | Error::NotNormalized { .. } | Error::NonIntegrable => {
                HarnessError::Physics(e.to_string())
            }
            other => HarnessError::Input(other.to_string()),
        }
    }
}

pub(crate) fn io_error(path: &Path, e: std::io::Error) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}

/// What a completed run produced.
#[derive(Clone, Debug, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// Human-readable result lines.
    pub lines: Vec<String>,
}

/// Outputs of an experiment, including a partial set when it failed.
pub struct RunOutput {
    pub summary: RunSummary,
    pub result: Result<(), HarnessError>,
}

/// Load a config file, run its experiment and write the manifest.
pub fn run(path: &Path) -> RunOutput {
    match ExperimentConfig::load(path) {
        Ok(cfg) => run_config(&cfg),
        Err(e) => RunOutput {
            summary: RunSummary::default(),
            result: Err(e),
        },
    }
}

pub fn run_config(cfg: &ExperimentConfig) -> RunOutput {
    let dir = &cfg.output.dir;
    if let Err(e) = std::fs::create_dir_all(dir) {
        return RunOutput {
            summary: RunSummary::default(),
            result: Err(io_error(dir, e)),
        };
    }
    let started = SystemTime::now();
    let clock = Instant::now();
    let mut out = run_experiment(cfg);
    let manifest = manifest_text(cfg, &out, started, clock.elapsed().as_secs_f64());
    let path = dir.join(MANIFEST_FILE);
    match std::fs::write(&path, manifest) {
        Ok(()) => out.summary.files.push(path),
        Err(e) if out.result.is_ok() => out.result = Err(io_error(&path, e)),
        Err(_) => {}
    }
    out
}

/// Comment header (ignored by the TOML reader) followed by the resolved
/// config, so the manifest itself is a runnable config.
fn manifest_text(cfg: &ExperimentConfig, out: &RunOutput, started: SystemTime, wall: f64) -> String {
    let unix = started.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let status = match &out.result {
        Ok(()) => "ok".to_string(),
        Err(e) => e.to_string().replace('\n', " "),
    };
    let files: Vec<String> = out
        .summary
        .files
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    let mut text = format!(
        "# spinphase run manifest\n\
         # version = {}\n\
         # rustc_target = {}-{}\n\
         # seed = {}\n\
         # started_unix = {unix}\n\
         # wall_time_s = {wall:.3}\n\
         # status = {status}\n\
         # files = {}\n",
        env!("CARGO_PKG_VERSION"),
        std::env::consts::ARCH,
        std::env::consts::OS,
        cfg.classical.seed,
        files.join(", "),
    );
    for line in &out.summary.lines {
        text.push_str(&format!("# {line}\n"));
    }
    text.push('\n');
    text.push_str(&cfg.to_toml());
    text
}
