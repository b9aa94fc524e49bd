use betaprufer_cli::config::{parse_pairs, ConfigError, ExperimentConfig, Kind};
use betaprufer_cli::experiments::RunError;
use betaprufer_cli::{replay, run, CliError, RunReport, EXIT_NUMERIC, EXIT_OK};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "betaprufer", version, about = "Monte-Carlo experiments on Gaussian beta-ensemble phases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Overrides {
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: available cores).
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Args)]
struct KindArgs {
    /// Base config file; `kind` in it must match the subcommand if present.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` settings, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Re-run a recorded manifest and verify its output checksums.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integral of squared normalized Hermite functions.
    HermiteCheck(KindArgs),
    /// Characteristic polynomial values from the tridiagonal recursion.
    CharpolySample(KindArgs),
    /// Prüfer phase trajectory with its counting check.
    PhaseTrace(KindArgs),
    /// Empirical covariance of the Gaussian field against theory.
    FieldsCov(KindArgs),
    /// Variance growth of the field and of log|Φ| against log N.
    VarianceSlope(KindArgs),
    /// Finite-N polynomial ratios next to limiting ζ samples.
    ZetaRatio(KindArgs),
    /// Sine SDE paths.
    SineSim(KindArgs),
    /// Point counts of the sine process in a window.
    SinePoints(KindArgs),
    /// Stochastic Airy function paths.
    AirySim(KindArgs),
    /// Edge-scaled polynomial against Ai.
    EdgeCompare(KindArgs),
    /// Ω_N samples across N.
    OmegaTightness(KindArgs),
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })
}

fn apply(mut pairs: std::collections::BTreeMap<String, String>, o: &Overrides) -> Result<ExperimentConfig, CliError> {
    if let Some(s) = o.seed {
        pairs.insert("seed".into(), s.to_string());
    }
    if let Some(r) = o.replicates {
        pairs.insert("replicates".into(), r.to_string());
    }
    if let Some(p) = &o.out {
        pairs.insert("out".into(), p.to_string_lossy().into_owned());
    }
    if let Some(p) = o.parallelism {
        pairs.insert("parallelism".into(), p.to_string());
    }
    Ok(ExperimentConfig::from_pairs(pairs)?)
}

fn kind_config(kind: Kind, a: &KindArgs) -> Result<ExperimentConfig, CliError> {
    let mut pairs = match &a.config {
        Some(p) => parse_pairs(&read(p)?)?,
        None => Default::default(),
    };
    if let Some(k) = pairs.get("kind") {
        if k != kind.name() {
            return Err(ConfigError::new("kind", format!("config says {k}, subcommand says {kind}")).into());
        }
    }
    pairs.insert("kind".into(), kind.name().into());
    for kv in &a.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| ConfigError::new("set", format!("expected key=value, got {kv:?}")))?;
        pairs.insert(k.trim().to_string(), v.trim().to_string());
    }
    apply(pairs, &a.overrides)
}

fn execute(cmd: Command) -> Result<RunReport, CliError> {
    let (kind, args) = match cmd {
        Command::Run { config, overrides } => {
            let pairs = parse_pairs(&read(&config)?)?;
            return run(&apply(pairs, &overrides)?);
        }
        Command::Replay { manifest, out } => return replay(&manifest, out.as_deref()),
        Command::HermiteCheck(a) => (Kind::HermiteCheck, a),
        Command::CharpolySample(a) => (Kind::CharpolySample, a),
        Command::PhaseTrace(a) => (Kind::PhaseTrace, a),
        Command::FieldsCov(a) => (Kind::FieldsCov, a),
        Command::VarianceSlope(a) => (Kind::VarianceSlope, a),
        Command::ZetaRatio(a) => (Kind::ZetaRatio, a),
        Command::SineSim(a) => (Kind::SineSim, a),
        Command::SinePoints(a) => (Kind::SinePoints, a),
        Command::AirySim(a) => (Kind::AirySim, a),
        Command::EdgeCompare(a) => (Kind::EdgeCompare, a),
        Command::OmegaTightness(a) => (Kind::OmegaTightness, a),
    };
    run(&kind_config(kind, &args)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(report) => {
            for o in &report.manifest.outputs {
                println!("{}", report.out_dir.join(&o.file).display());
            }
            for f in &report.failures {
                eprintln!("warning: replicate {} (seed {}) failed: {}", f.replicate, f.seed, f.message);
            }
            match report.check_failure {
                Some(msg) => {
                    eprintln!("check failed: {msg}");
                    ExitCode::from(EXIT_NUMERIC as u8)
                }
                None => ExitCode::from(EXIT_OK as u8),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Run(RunError::Farm(abort)) = &e {
                for f in &abort.failures {
                    eprintln!("  replicate {} (seed {}): {}", f.replicate, f.seed, f.message);
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
