//! Command-line front end: argument parsing, experiment dispatch and output files.

use std::ffi::OsString;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use sha2::Digest as _;

use crate::error::Error;
use crate::harness::output::hex;
use crate::harness::{
    bound_curves, render_csv, run_diagnostics, run_experiment, ArmSetSpec, FeedbackSpec, Metadata, SimulationConfig,
};
use crate::policy::{PhasedSchedule, PolicyKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_INPUT: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;

/// Seed used by presets when `--seed` is not given.
pub const PRESET_SEED: u64 = 20_190_101;

pub const CSV_FILE: &str = "trajectory.csv";
pub const METADATA_FILE: &str = "metadata.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.json";

const DEFAULT_OUT: &str = "linbandit-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// p = 30, Δ = 1, 5000 realizations, horizon 1000.
    PaperFigure,
}

#[derive(Debug, Parser)]
#[command(
    name = "linbandit",
    version,
    about = "Monte Carlo simulation of Bayesian linear bandits"
)]
struct Args {
    /// Dimension p.
    #[arg(long)]
    p: Option<usize>,
    /// Noise-to-signal ratio Δ = pσ².
    #[arg(long)]
    delta: Option<f64>,
    /// Number of steps T.
    #[arg(long)]
    horizon: Option<usize>,
    /// Number of realizations.
    #[arg(long)]
    reps: Option<usize>,
    /// ball-explore, smooth-explore, neighborhood, phased, greedy or oracle.
    #[arg(long, value_parser = parse_from_str::<PolicyKind>)]
    policy: Option<PolicyKind>,
    /// ball, cloud:M or catalog:PATH.
    #[arg(long = "arm-set", value_parser = parse_from_str::<ArmSetSpec>)]
    arm_set: Option<ArmSetSpec>,
    /// Master seed; required unless a preset is given.
    #[arg(long, required_unless_present = "preset")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record per-realization probes and check the posterior lemmas.
    #[arg(long)]
    diagnostics: bool,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Divide catalog vectors by the largest norm.
    #[arg(long)]
    renormalize: bool,
    /// Skip theorem hypothesis checks and bound curves.
    #[arg(long = "no-bounds")]
    no_bounds: bool,
    /// gaussian or quant:A (star ratings around user offset A).
    #[arg(long, value_parser = parse_from_str::<FeedbackSpec>)]
    feedback: Option<FeedbackSpec>,
    /// Radius of the inner subset used by smooth exploration on finite sets.
    #[arg(long = "inner-radius")]
    inner_radius: Option<f64>,
    /// Neighborhood radius of the finite-set exploration kernel.
    #[arg(long = "kernel-delta")]
    kernel_delta: Option<f64>,
    /// Phased baseline exploration length, in multiples of p.
    #[arg(long = "phased-explore")]
    phased_explore: Option<usize>,
    /// Phased baseline exploitation base length, in multiples of p.
    #[arg(long = "phased-exploit")]
    phased_exploit: Option<usize>,
    /// κ used for the bound curves.
    #[arg(long)]
    kappa: Option<f64>,
    /// γ used for the bound curves.
    #[arg(long)]
    gamma: Option<f64>,
    /// Extra diagnostic probe time (repeatable).
    #[arg(long = "probe")]
    probes: Vec<usize>,
    /// Worker threads, 0 for all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

fn parse_from_str<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parsed command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub config: SimulationConfig,
    pub out: PathBuf,
}

/// A failure with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn io(context: &Path, e: io::Error) -> Self {
        Self::new(EXIT_INPUT, format!("{}: {e}", context.display()))
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::new(exit_code(&e), e.to_string())
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter { .. }
        | Error::Hypothesis(_)
        | Error::Incompatible { .. }
        | Error::DimensionMismatch { .. }
        | Error::EmptyInnerSet
        | Error::KernelInfeasible(_) => EXIT_CONFIG,
        Error::CatalogRow { .. } | Error::Catalog(_) | Error::ArmOutsideBall { .. } => EXIT_INPUT,
        Error::Numerical(_) | Error::NonFinite(_) | Error::DegenerateFit(_) => EXIT_NUMERICAL,
    }
}

/// Parses `argv` (including the program name) and validates the resulting configuration.
pub fn parse_args<I, T>(argv: I) -> Result<Invocation, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| {
        let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        CliError::new(code, e.to_string())
    })?;

    let mut config = match args.preset {
        Some(Preset::PaperFigure) => SimulationConfig::paper_figure(PolicyKind::BallExplore, PRESET_SEED),
        None => SimulationConfig::new(30, 1.0, 1000, PolicyKind::BallExplore, 0),
    };
    if let Some(v) = args.p {
        config.p = v;
    }
    if let Some(v) = args.delta {
        config.delta = v;
    }
    if let Some(v) = args.horizon {
        config.horizon = v;
    }
    if let Some(v) = args.reps {
        config.reps = v;
    }
    if let Some(v) = args.policy {
        config.policy = v;
    }
    if let Some(v) = args.arm_set {
        config.arm_set = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.feedback {
        config.feedback = v;
    }
    if let Some(v) = args.kernel_delta {
        config.kernel_delta = v;
    }
    if let Some(v) = args.kappa {
        config.kappa = v;
    }
    if let Some(v) = args.gamma {
        config.gamma = v;
    }
    config.inner_radius = args.inner_radius;
    config.phased = PhasedSchedule {
        explore: args.phased_explore.unwrap_or(config.phased.explore),
        exploit: args.phased_exploit.unwrap_or(config.phased.exploit),
    };
    config.diagnostics = args.diagnostics;
    config.renormalize = args.renormalize;
    config.check_bounds = !args.no_bounds;
    config.probes = args.probes;
    config.workers = args.workers;
    config.validate()?;

    Ok(Invocation {
        config,
        out: args.out.unwrap_or_else(|| DEFAULT_OUT.into()),
    })
}

/// Command line that reproduces `config` exactly.
pub fn render(config: &SimulationConfig) -> Vec<String> {
    let mut argv = vec!["linbandit".to_string()];
    let mut push = |flag: &str, value: String| {
        argv.push(format!("--{flag}"));
        argv.push(value);
    };
    push("p", config.p.to_string());
    push("delta", config.delta.to_string());
    push("horizon", config.horizon.to_string());
    push("reps", config.reps.to_string());
    push("policy", config.policy.to_string());
    push("arm-set", config.arm_set.to_string());
    push("seed", config.seed.to_string());
    push("feedback", config.feedback.to_string());
    push("kernel-delta", config.kernel_delta.to_string());
    push("kappa", config.kappa.to_string());
    push("gamma", config.gamma.to_string());
    push("phased-explore", config.phased.explore.to_string());
    push("phased-exploit", config.phased.exploit.to_string());
    push("workers", config.workers.to_string());
    if let Some(r) = config.inner_radius {
        push("inner-radius", r.to_string());
    }
    for t in &config.probes {
        push("probe", t.to_string());
    }
    if config.diagnostics {
        argv.push("--diagnostics".into());
    }
    if config.renormalize {
        argv.push("--renormalize".into());
    }
    if !config.check_bounds {
        argv.push("--no-bounds".into());
    }
    argv
}

#[derive(Debug, Serialize)]
struct InputRecord {
    path: PathBuf,
    sha256: String,
    bytes: usize,
}

#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    version: &'static str,
    run_id: String,
    config: &'a SimulationConfig,
    command: Vec<String>,
    inputs: Vec<InputRecord>,
    outputs: Vec<PathBuf>,
    wall_clock_seconds: f64,
}

/// Files written so far; removed on drop unless committed.
struct Staged {
    paths: Vec<PathBuf>,
    committed: bool,
}

impl Staged {
    fn write(&mut self, path: PathBuf, contents: &[u8]) -> Result<(), CliError> {
        self.paths.push(path.clone());
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))
    }
}

impl Drop for Staged {
    fn drop(&mut self) {
        if !self.committed {
            for p in &self.paths {
                let _ = fs::remove_file(p);
            }
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("report types serialize");
    v.push(b'\n');
    v
}

/// Output of a successful run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub run_id: String,
    pub outputs: Vec<PathBuf>,
    pub diagnostics_failed: usize,
}

/// Runs the experiment and writes the CSV, metadata, manifest and optional diagnostics to `out`.
pub fn run(inv: &Invocation) -> Result<RunOutcome, CliError> {
    let started = Instant::now();
    let config = &inv.config;

    let mut inputs = Vec::new();
    let set = match &config.arm_set {
        ArmSetSpec::Catalog { path } => {
            let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
            inputs.push(InputRecord {
                path: path.clone(),
                sha256: hex(&sha2::Sha256::digest(&bytes)),
                bytes: bytes.len(),
            });
            let set = config.catalog_from_bytes(&bytes, &path.display().to_string())?;
            config.finish_arm_set(set)?
        }
        _ => config.build_arm_set()?,
    };

    let summary = run_experiment(config, &set)?;
    let curves = if config.check_bounds {
        Some(bound_curves(
            config.p,
            config.delta,
            config.kappa,
            config.gamma,
            config.horizon,
        )?)
    } else {
        None
    };
    let diagnostics = if config.diagnostics {
        Some(run_diagnostics(&summary, config)?)
    } else {
        None
    };

    fs::create_dir_all(&inv.out).map_err(|e| CliError::io(&inv.out, e))?;
    let mut staged = Staged {
        paths: Vec::new(),
        committed: false,
    };
    staged.write(inv.out.join(CSV_FILE), render_csv(&summary, curves.as_ref()).as_bytes())?;
    let metadata = Metadata::new(config, &summary, curves.as_ref());
    staged.write(inv.out.join(METADATA_FILE), &to_json(&metadata))?;
    let mut diagnostics_failed = 0;
    if let Some(report) = &diagnostics {
        diagnostics_failed = report.failures().count();
        staged.write(inv.out.join(DIAGNOSTICS_FILE), &to_json(report))?;
    }

    let outputs = staged.paths.clone();
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION"),
        run_id: metadata.run_id.clone(),
        config,
        command: render(config),
        inputs,
        outputs: outputs.clone(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    staged.write(inv.out.join(MANIFEST_FILE), &to_json(&manifest))?;
    staged.committed = true;

    Ok(RunOutcome {
        run_id: metadata.run_id,
        outputs: staged.paths.clone(),
        diagnostics_failed,
    })
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let inv = match parse_args(argv) {
        Ok(inv) => inv,
        Err(e) if e.code == EXIT_OK => {
            print!("{e}");
            return EXIT_OK;
        }
        Err(e) => {
            report(&e);
            return e.code;
        }
    };
    match run(&inv) {
        Ok(outcome) => {
            println!("run {} wrote {}", outcome.run_id, inv.out.display());
            if outcome.diagnostics_failed > 0 {
                eprintln!(
                    "warning: {} diagnostic checks outside their Monte Carlo tolerance, see {}",
                    outcome.diagnostics_failed, DIAGNOSTICS_FILE
                );
            }
            EXIT_OK
        }
        Err(e) => {
            report(&e);
            e.code
        }
    }
}

fn report(e: &CliError) {
    let first = e
        .message
        .lines()
        .find(|l| !l.trim().is_empty())
        .unwrap_or("unknown error");
    let first = first.trim_start_matches("error: ");
    eprintln!("error: {first}");
}
