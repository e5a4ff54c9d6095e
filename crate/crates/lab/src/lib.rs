//! Command-line harness: configuration-driven experiment runs with CSV, gnuplot and
//! manifest artifacts, plus the acceptance suite.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};
use crate::output::{Artifacts, Manifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subcommand {
    Scatter,
    Neumann,
    Rate,
    GpRun,
    EulerRun,
    EikonalRun,
    Modenergy,
    WkbSweep,
    PairCheck,
    Acceptance,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Self::Scatter => "scatter",
            Self::Neumann => "neumann",
            Self::Rate => "rate",
            Self::GpRun => "gp-run",
            Self::EulerRun => "euler-run",
            Self::EikonalRun => "eikonal-run",
            Self::Modenergy => "modenergy",
            Self::WkbSweep => "wkb-sweep",
            Self::PairCheck => "pair-check",
            Self::Acceptance => "acceptance",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bec-lab", version, about = "Scattering, condensate dynamics and semiclassical-limit experiments")]
pub struct Cli {
    #[arg(value_enum)]
    pub subcommand: Subcommand,
    /// Experiment configuration (TOML, or JSON by extension).
    #[arg(long)]
    pub config: PathBuf,
    /// Artifact directory; overrides `output_dir` in the configuration.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "BECLAB_JOBS")]
    pub jobs: Option<usize>,
}

/// Outcome of [`run`]: the artifact directory and the process exit status.
#[derive(Debug)]
pub struct RunOutcome {
    pub dir: Option<PathBuf>,
    pub exit_code: i32,
    pub error: Option<String>,
}

/// Derived parameters, plus the failing criteria of an acceptance run.
fn dispatch(sub: Subcommand, cfg: &ExperimentConfig, art: &mut Artifacts) -> LabResult<(Value, Vec<u32>)> {
    use commands as c;
    let derived = match sub {
        Subcommand::Scatter => c::scatter(&cfg.parse()?, art),
        Subcommand::Neumann => c::neumann(&cfg.parse()?, art),
        Subcommand::Rate => c::rate(&cfg.parse()?, art),
        Subcommand::GpRun => c::gp_run(&cfg.parse()?, art),
        Subcommand::EulerRun => c::euler_run(&cfg.parse()?, art),
        Subcommand::EikonalRun => c::eikonal_run(&cfg.parse()?, art),
        Subcommand::Modenergy => c::modenergy(&cfg.parse()?, art),
        Subcommand::WkbSweep => c::wkb_sweep(&cfg.parse()?, art),
        Subcommand::PairCheck => c::pair_check(&cfg.parse()?, art),
        Subcommand::Acceptance => {
            let a: config::AcceptanceConfig = cfg.parse()?;
            let rep = acceptance::run_suite(&a.criteria, art)?;
            return Ok((rep.derived, rep.failed));
        }
    }?;
    Ok((derived, Vec::new()))
}

fn status_of(err: Option<&LabError>) -> Value {
    match err {
        None => json!({ "state": "ok", "exit_code": 0 }),
        Some(e @ LabError::SolverFailure { kind, message }) => json!({
            "state": "solver_failure", "exit_code": e.exit_code(), "error_kind": kind, "message": message,
        }),
        Some(e @ LabError::AcceptanceFailure(ids)) => json!({
            "state": "acceptance_failure", "exit_code": e.exit_code(), "failed_criteria": ids,
        }),
        Some(e @ LabError::ConfigInvalid(m)) => json!({
            "state": "config_invalid", "exit_code": e.exit_code(), "message": m,
        }),
        Some(e) => json!({ "state": "io_error", "exit_code": e.exit_code(), "message": e.to_string() }),
    }
}

pub fn default_jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Runs one subcommand on a bounded worker pool and writes its manifest.
pub fn run(sub: Subcommand, config_path: &Path, out: Option<&Path>, jobs: Option<usize>) -> RunOutcome {
    let jobs = jobs.unwrap_or_else(default_jobs).max(1);
    let start = Instant::now();
    let cfg = match ExperimentConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            return RunOutcome {
                dir: None,
                exit_code: e.exit_code(),
                error: Some(e.to_string()),
            }
        }
    };
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir())
        .unwrap_or_else(|| PathBuf::from("out").join(sub.name()));
    let mut art = match Artifacts::create(&dir) {
        Ok(a) => a,
        Err(e) => {
            return RunOutcome {
                dir: None,
                exit_code: e.exit_code(),
                error: Some(e.to_string()),
            }
        }
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build();
    let result = match pool {
        Ok(p) => p.install(|| dispatch(sub, &cfg, &mut art)),
        Err(e) => Err(LabError::config(format!("cannot start {jobs} workers: {e}"))),
    };
    let (derived, err) = match result {
        Ok((v, failed)) if failed.is_empty() => (v, None),
        Ok((v, failed)) => (v, Some(LabError::AcceptanceFailure(failed))),
        Err(e) => (Value::Null, Some(e)),
    };
    let manifest = Manifest {
        subcommand: sub.name().to_string(),
        config_echo: cfg.tree.clone(),
        derived_params: derived,
        wall_seconds: start.elapsed().as_secs_f64(),
        jobs,
        status: status_of(err.as_ref()),
    };
    let written = art.write_manifest(&manifest);
    let err = err.or(written.err());
    RunOutcome {
        dir: Some(dir),
        exit_code: err.as_ref().map_or(0, LabError::exit_code),
        error: err.map(|e| e.to_string()),
    }
}
