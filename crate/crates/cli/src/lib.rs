//! Config-driven runner for the capwave experiments.
//!
//! A run reads one JSON config, executes the experiment and writes `manifest.json`,
//! CSV observables and optional SVG plots into its output directory.

pub mod catalog;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod plot;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use config::{Assertion, ExperimentConfig};
use error::CliError;
use experiments::{Context, Outcome};
use output::{grid_fingerprint, partition_fingerprint, write_atomic};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "CAPWAVE_OUT";
pub const DEFAULT_OUT_ROOT: &str = "capwave-out";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Output directory; overrides the config and the environment.
    pub out: Option<PathBuf>,
    pub plots: bool,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssertionResult {
    #[serde(flatten)]
    pub assertion: Assertion,
    pub value: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Passed,
    AssertionFailed,
    ConfigInvalid,
    NumericalFailure,
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Passed => 0,
            Status::AssertionFailed => 1,
            Status::ConfigInvalid => 2,
            Status::NumericalFailure => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Fingerprints {
    pub grid: String,
    pub partition: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub kind: &'static str,
    pub config: ExperimentConfig,
    pub config_path: PathBuf,
    pub fingerprints: Fingerprints,
    pub threads: usize,
    pub wall_time_s: f64,
    pub observables: std::collections::BTreeMap<String, f64>,
    pub details: std::collections::BTreeMap<String, Value>,
    pub assertions: Vec<AssertionResult>,
    pub status: Status,
    pub failure: Option<String>,
    pub artifacts: Vec<String>,
}

#[derive(Debug)]
pub struct RunResult {
    pub dir: PathBuf,
    pub manifest: RunManifest,
}

fn config_dir(path: &Path) -> PathBuf {
    path.parent().filter(|p| !p.as_os_str().is_empty()).map_or_else(|| PathBuf::from("."), Path::to_path_buf)
}

/// `--out`, then the config's `output`, then `$CAPWAVE_OUT/<name>`, then `capwave-out/<name>`.
pub fn output_dir(cfg: &ExperimentConfig, path: &Path, opts: &RunOptions) -> PathBuf {
    if let Some(o) = &opts.out {
        return o.clone();
    }
    if let Some(o) = &cfg.output {
        return if o.is_absolute() { o.clone() } else { config_dir(path).join(o) };
    }
    let name = cfg
        .name
        .clone()
        .or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "run".into());
    let root = std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from(DEFAULT_OUT_ROOT), PathBuf::from);
    root.join(name)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text)
}

fn check(assertions: &[Assertion], out: &Outcome) -> Result<Vec<AssertionResult>, CliError> {
    assertions
        .iter()
        .map(|a| {
            let value = out.observables.get(&a.observable).copied();
            let Some(v) = value else {
                let known: Vec<&str> = out.observables.keys().map(String::as_str).collect();
                return Err(CliError::Config(format!("unknown observable `{}`; this run produced: {}", a.observable, known.join(", "))));
            };
            let pass = v.is_finite() && a.min.map_or(true, |m| v >= m) && a.max.map_or(true, |m| v <= m);
            Ok(AssertionResult { assertion: a.clone(), value, pass })
        })
        .collect()
}

/// Runs a parsed config. Artifacts are written even when the run fails part way.
pub fn run_config(cfg: ExperimentConfig, path: &Path, opts: &RunOptions) -> Result<RunResult, CliError> {
    let grid = cfg.grid.build()?;
    let dir = output_dir(&cfg, path, opts);
    std::fs::create_dir_all(&dir)?;
    let base = config_dir(path);
    let ctx = Context { grid: grid.clone(), physics: cfg.physics, seed: cfg.seed, base: &base };
    let start = Instant::now();
    let mut out = Outcome::default();
    let result = experiments::run(&cfg.experiment, &ctx, &mut out);
    let wall_time_s = start.elapsed().as_secs_f64();

    let mut artifacts = Vec::new();
    for t in &out.tables {
        let name = format!("{}.csv", t.name);
        write_atomic(&dir, &name, &t.to_csv()?)?;
        artifacts.push(name);
    }
    if opts.plots {
        for p in &out.plots {
            let name = format!("{}.svg", p.name);
            write_atomic(&dir, &name, p.to_svg().as_bytes())?;
            artifacts.push(name);
        }
    }
    let (assertions, status, failure) = match result {
        Ok(()) => match check(&cfg.assertions, &out) {
            Ok(a) => {
                let status = if a.iter().all(|r| r.pass) { Status::Passed } else { Status::AssertionFailed };
                (a, status, None)
            }
            Err(e) => (Vec::new(), Status::ConfigInvalid, Some(e.to_string())),
        },
        Err(e) => {
            let status = if e.exit_code() == 2 { Status::ConfigInvalid } else { Status::NumericalFailure };
            (Vec::new(), status, Some(e.to_string()))
        }
    };
    artifacts.push("manifest.json".into());
    let manifest = RunManifest {
        tool: "capwave",
        version: env!("CARGO_PKG_VERSION"),
        kind: cfg.experiment.kind().name(),
        fingerprints: Fingerprints { grid: grid_fingerprint(&grid), partition: partition_fingerprint(&grid)? },
        config: cfg,
        config_path: path.to_path_buf(),
        threads: rayon::current_num_threads(),
        wall_time_s,
        observables: out.observables,
        details: out.details,
        assertions,
        status,
        failure,
        artifacts,
    };
    let json = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    write_atomic(&dir, "manifest.json", &json)?;
    Ok(RunResult { dir, manifest })
}
