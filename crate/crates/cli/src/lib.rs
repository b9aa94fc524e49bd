//! Config-driven experiment runner: parses a flat config, farms replicates,
//! writes CSV tables and a JSON manifest into the output directory.

pub mod config;
pub mod experiments;
pub mod farm;
pub mod manifest;

use config::{ConfigError, ExperimentConfig};
use experiments::{run_experiment, RunError};
use farm::{default_parallelism, FarmOptions, Failure};
use manifest::{sha256_hex, OutputFile, RunManifest};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

pub const MANIFEST_FILE: &str = "manifest.json";

/// What a finished run left behind.
#[derive(Debug)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
    /// Replicates that failed without reaching the abort threshold.
    pub failures: Vec<Failure>,
    pub check_failure: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Run(#[from] RunError),
    #[error("i/o on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("manifest: {0}")]
    Manifest(#[from] manifest::ManifestError),
    #[error("replay mismatch: {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Manifest(_) => EXIT_CONFIG,
            CliError::Run(RunError::Domain(_)) => EXIT_CONFIG,
            CliError::Run(RunError::Farm(abort)) if abort.failures.iter().all(|f| f.domain) => EXIT_CONFIG,
            CliError::Run(RunError::Farm(_)) | CliError::Mismatch(_) => EXIT_NUMERIC,
            CliError::Io { .. } => EXIT_CONFIG,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Runs `config` and writes `<out>/<table>.csv` for each table plus the manifest.
pub fn run(config: &ExperimentConfig) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let opts = FarmOptions {
        parallelism: config.parallelism.unwrap_or_else(default_parallelism),
        inject_failure_rate: config.inject_failure_rate,
    };
    let outcome = run_experiment(config, opts)?;
    let dir = PathBuf::from(&config.out);
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let mut outputs = Vec::new();
    for t in &outcome.tables {
        let file = format!("{}.csv", t.name);
        let path = dir.join(&file);
        let csv = t.to_csv();
        std::fs::write(&path, &csv).map_err(io_err(&path))?;
        outputs.push(OutputFile {
            file,
            sha256: sha256_hex(csv.as_bytes()),
        });
    }
    let manifest = RunManifest {
        config: config.echo(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: config.seed,
        replicate_seeds: outcome.replicate_seeds,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        outputs,
        failed_replicates: outcome.failures.iter().map(|f| f.replicate).collect(),
    };
    let path = dir.join(MANIFEST_FILE);
    std::fs::write(&path, manifest.to_json()).map_err(io_err(&path))?;
    Ok(RunReport {
        out_dir: dir,
        manifest,
        failures: outcome.failures,
        check_failure: outcome.check_failure,
    })
}

/// Re-runs the config recorded in a manifest into `out` and checks that every
/// output has the recorded checksum.
pub fn replay(manifest_path: &Path, out: Option<&Path>) -> Result<RunReport, CliError> {
    let text = std::fs::read_to_string(manifest_path).map_err(io_err(manifest_path))?;
    let recorded = RunManifest::from_json(&text)?;
    let mut config = ExperimentConfig::from_pairs(recorded.config.clone())?;
    if let Some(o) = out {
        config.out = o.to_string_lossy().into_owned();
    }
    let report = run(&config)?;
    if report.manifest.outputs != recorded.outputs {
        let diff: Vec<String> = recorded
            .outputs
            .iter()
            .filter(|o| !report.manifest.outputs.contains(o))
            .map(|o| o.file.clone())
            .collect();
        return Err(CliError::Mismatch(format!("outputs differ: {}", diff.join(", "))));
    }
    Ok(report)
}
