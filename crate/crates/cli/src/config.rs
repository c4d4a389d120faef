use std::f64::consts::FRAC_PI_8;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qimage_core::mpe::EstimationMode;
use qimage_core::phasecore::DEFAULT_EPSILON;
use qimage_core::OperatorKind;
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "qimage", version, about = "Phase-encoded quantum image synthesis toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a PGM image as an image state and decode it back.
    Encode(RunArgs),
    /// Synthesize an embedder image into a carrier image.
    Synthesize(RunArgs),
    /// Report synthesis diagnostics without writing images.
    Analyze(RunArgs),
    /// Benchmark phase-estimation precision against the uncertainty bounds.
    MpeBench(RunArgs),
}

impl Command {
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let (command, args) = match self {
            Self::Encode(a) => (CommandKind::Encode, a),
            Self::Synthesize(a) => (CommandKind::Synthesize, a),
            Self::Analyze(a) => (CommandKind::Analyze, a),
            Self::MpeBench(a) => (CommandKind::MpeBench, a),
        };
        RunConfig::new(command, args)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Analytic,
    #[value(alias = "povm-oracle")]
    Povm,
    Exact,
}

impl From<ModeArg> for EstimationMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Analytic => Self::Analytic,
            ModeArg::Povm => Self::PovmOracle,
            ModeArg::Exact => Self::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorArg {
    Corrected,
    Naive,
    Both,
}

impl OperatorArg {
    pub fn kinds(self) -> Vec<OperatorKind> {
        match self {
            Self::Corrected => vec![OperatorKind::Corrected],
            Self::Naive => vec![OperatorKind::Naive],
            Self::Both => vec![OperatorKind::Corrected, OperatorKind::Naive],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PgmArg {
    P2,
    P5,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Carrier image (PGM).
    #[arg(long, env = "QIMG_CARRIER")]
    pub carrier: Option<PathBuf>,
    /// Embedder image (PGM).
    #[arg(long, env = "QIMG_EMBEDDER")]
    pub embedder: Option<PathBuf>,
    /// Output image path; with `--operator both` one file per operator is written.
    #[arg(long, env = "QIMG_OUT")]
    pub out: Option<PathBuf>,
    /// Report path (JSON). Printed to stdout when omitted.
    #[arg(long, env = "QIMG_REPORT")]
    pub report: Option<PathBuf>,
    /// Estimation resource for the carrier.
    #[arg(long, env = "QIMG_N1", default_value_t = 16)]
    pub n1: u32,
    /// Estimation resource for the embedder.
    #[arg(long, env = "QIMG_N2", default_value_t = 16)]
    pub n2: u32,
    #[arg(long, env = "QIMG_MODE", value_enum, default_value_t = ModeArg::Analytic)]
    pub mode: ModeArg,
    #[arg(long, env = "QIMG_OPERATOR", value_enum, default_value_t = OperatorArg::Corrected)]
    pub operator: OperatorArg,
    #[arg(long, env = "QIMG_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Guard band of the grey-level codec, in radians.
    #[arg(long, env = "QIMG_EPSILON", default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Resources benchmarked by `mpe-bench` (comma separated).
    #[arg(long, env = "QIMG_RESOURCES", value_delimiter = ',', default_value = "1,4,16")]
    pub resources: Vec<u32>,
    /// Draws per resource for `mpe-bench` and trend tables.
    #[arg(long, env = "QIMG_TRIALS", default_value_t = 100_000)]
    pub trials: usize,
    /// Encoding of written images.
    #[arg(long, env = "QIMG_FORMAT", value_enum, default_value_t = PgmArg::P5)]
    pub format: PgmArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Encode,
    Synthesize,
    Analyze,
    MpeBench,
}

/// Validated configuration of one invocation; echoed verbatim into the report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub carrier_path: Option<PathBuf>,
    pub embedder_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
    pub n1: u32,
    pub n2: u32,
    pub mode: EstimationMode,
    pub operator_kind: OperatorArg,
    pub seed: u64,
    pub epsilon: f64,
    pub resources: Vec<u32>,
    pub trials: usize,
    pub format: PgmArg,
}

impl RunConfig {
    pub fn new(command: CommandKind, args: RunArgs) -> Result<Self, CliError> {
        if args.n1 == 0 || args.n2 == 0 {
            return Err(CliError::Validation("--n1 and --n2 must be at least 1".into()));
        }
        if !(args.epsilon > 0.0 && args.epsilon < FRAC_PI_8) {
            return Err(CliError::Validation(format!(
                "--epsilon must lie in (0, π/8), got {}",
                args.epsilon
            )));
        }
        if command == CommandKind::MpeBench {
            if args.resources.is_empty() || args.resources.contains(&0) {
                return Err(CliError::Validation("--resources must be positive integers".into()));
            }
            if args.trials < 2 {
                return Err(CliError::Validation("--trials must be at least 2".into()));
            }
        }
        Ok(Self {
            command,
            carrier_path: args.carrier,
            embedder_path: args.embedder,
            output_path: args.out,
            report_path: args.report,
            n1: args.n1,
            n2: args.n2,
            mode: args.mode.into(),
            operator_kind: args.operator,
            seed: args.seed,
            epsilon: args.epsilon,
            resources: args.resources,
            trials: args.trials,
            format: args.format,
        })
    }
}
