//! Batch experiment runner. Each experiment reads its section of a
//! configuration file, writes CSV tables and a `summary.json` into the output
//! directory, and reports pass/fail per acceptance criterion.

pub mod config;
pub mod experiments;
pub mod report;

use clap::{Parser, ValueEnum};
use config::ConfigFile;
use report::Summary;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("output error: {0}")]
    Output(String),
    #[error("numerical error [{invariant}]: {source}")]
    Numerical {
        invariant: &'static str,
        #[source]
        source: mep_qlab::Error,
    },
}

impl From<mep_qlab::Error> for CliError {
    fn from(e: mep_qlab::Error) -> Self {
        use mep_qlab::Error as E;
        let invariant = match &e {
            E::Io(_) => return CliError::Output(e.to_string()),
            E::DimensionMismatch { .. } | E::InvalidSpace(_) => "dimension",
            E::NotHermitian(_) => "hermiticity",
            E::InvalidTrace(_) | E::NotNormalized(_) | E::NotNormalizedVector(_) => "normalization",
            E::NotPositive(_) | E::NotAnEffect { .. } => "positivity",
            E::NonCommuting(_) => "commutativity",
            E::ZeroVariance | E::NegativeVariance(_) => "variance",
            E::OrthogonalityViolated(_) => "orthogonality",
            E::PauliBlocked { .. } | E::PauliExclusion => "pauli-exclusion",
            E::Aliasing(_) => "grid-resolution",
            E::CutoffNotConverged(_) | E::TailTooLarge { .. } => "truncation",
            E::Integrator(_) => "integrator",
            E::InvalidParameter(_) | E::InvalidCells(_) | E::OutOfRange { .. } => "parameter-domain",
            _ => "numerical",
        };
        CliError::Numerical { invariant, source: e }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Numerical { .. } => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    MepacketEvolve,
    ChainScaling,
    BclReport,
    TriggerReport,
    JointqpConvergence,
    LocalityCheck,
    ClassicalLimitTable,
    EntanglementDemo,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::MepacketEvolve => "mepacket-evolve",
            Experiment::ChainScaling => "chain-scaling",
            Experiment::BclReport => "bcl-report",
            Experiment::TriggerReport => "trigger-report",
            Experiment::JointqpConvergence => "jointqp-convergence",
            Experiment::LocalityCheck => "locality-check",
            Experiment::ClassicalLimitTable => "classical-limit-table",
            Experiment::EntanglementDemo => "entanglement-demo",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, Experiment::MepacketEvolve | Experiment::BclReport | Experiment::TriggerReport)
    }
}

#[derive(Debug, Parser)]
#[command(name = "mep-qlab", version, about = "Run a named experiment and write CSV tables plus a JSON summary")]
pub struct Args {
    pub experiment: Experiment,
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides `[run] out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// RNG seed (overrides `[run] seed`).
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Output directory and seed handed to an experiment.
pub struct Context<'a> {
    pub out: &'a Path,
    pub seed: Option<u64>,
}

impl Context<'_> {
    pub fn path(&self, file: &str) -> PathBuf {
        self.out.join(file)
    }

    pub fn seed(&self) -> u64 {
        self.seed.expect("seed checked before dispatch")
    }
}

/// Caps the global worker pool at `MEPQLAB_THREADS` when it is set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("MEPQLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("MEPQLAB_THREADS must be a positive integer, got {raw:?}")))?;
    // a pool that already exists (repeated runs in one process) is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn run(args: &Args) -> Result<Summary, CliError> {
    let cfg = ConfigFile::load(&args.config)?;
    let seed = args.seed.or(cfg.run.seed);
    if args.experiment.is_stochastic() && seed.is_none() {
        return Err(CliError::Config(format!(
            "{} is stochastic: give --seed or set `seed` under [run]",
            args.experiment.name()
        )));
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.run.out.clone())
        .unwrap_or_else(|| PathBuf::from(format!("mep-qlab-out/{}", args.experiment.name())));
    std::fs::create_dir_all(&out).map_err(|e| CliError::Output(format!("{}: {e}", out.display())))?;
    let ctx = Context { out: &out, seed };
    let summary = experiments::dispatch(args.experiment, &cfg, &ctx)?;
    summary.write(&ctx.path("summary.json"))?;
    Ok(summary)
}
