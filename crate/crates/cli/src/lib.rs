//! The `sarc` command line: preprocessing, training, evaluation,
//! prediction, attention analysis and the feature-based baseline.
//!
//! Machine-readable results go to `--out` or stdout; logs go to stderr.
//! Exit codes: 0 success, 1 usage error, 2 data error.

pub mod commands;
pub mod config;
pub mod data;
pub mod manifest;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::RunConfig;
pub use manifest::RunManifest;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] sarc_core::Error),
}

impl CliError {
    /// 1 for bad invocations and configurations, 2 for everything the
    /// input data or files are to blame for.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Core(sarc_core::Error::Config(_)) => 1,
            CliError::Core(_) => 2,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn data_error(msg: impl Into<String>) -> CliError {
    CliError::Core(sarc_core::Error::Data(msg.into()))
}

#[derive(Debug, Parser)]
#[command(name = "sarc", version, about = "Sarcasm detection with conversation context")]
pub struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tokenize, split and encode a dataset; writes vocabulary, splits and encoded instances.
    Prep(PrepArgs),
    /// Train a neural model; writes checkpoint, metrics and a run manifest.
    Train(TrainArgs),
    /// Score a checkpoint on labeled data.
    Eval(EvalArgs),
    /// Labels and class probabilities for records (labels optional).
    Predict(PredictArgs),
    /// Attention records, heatmaps and, with annotations, overlap and agreement.
    Analyze(AnalyzeArgs),
    /// Baseline feature matrices.
    Features(FeaturesArgs),
    /// Train and evaluate the linear baseline.
    Baseline(BaselineArgs),
}

/// Settings shared by every command that reads a config.
#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Config override, `key=value` (repeatable; applied after --config).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// JSONL dataset (relative paths resolve against $SARC_DATA_DIR when set).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// JSON file with `train`, `dev` and `test` id lists.
    #[arg(long)]
    pub splits: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Part {
    All,
    Train,
    Dev,
    Test,
}

#[derive(Debug, Args)]
pub struct PrepArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[command(flatten)]
    pub data: DataArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[command(flatten)]
    pub data: DataArgs,
    /// Pretrained vectors, one `token v1 v2 ...` per line.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub arch: Option<String>,
    /// none, pt, st or pt+st.
    #[arg(long)]
    pub context: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// Which split to score; defaults to `test` with --splits, `all` otherwise.
    #[arg(long, value_enum)]
    pub part: Option<Part>,
    /// Write the report as JSON here instead of only printing the table.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub part: Option<Part>,
    /// JSONL output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub part: Option<Part>,
    /// Annotation JSONL (one annotator answer per line).
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[command(flatten)]
    pub data: DataArgs,
    /// Context turns whose features are added to the current turn's.
    #[arg(long)]
    pub context: Option<String>,
    /// Directory with `category/`, `sentiment/` and word-list files.
    #[arg(long)]
    pub lexicons: Option<PathBuf>,
    /// JSONL output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub context: Option<String>,
    #[arg(long)]
    pub lexicons: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (program name first) and runs the command, writing
/// primary output to `stdout`. Returns the process exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default())
        .filter_level(level)
        .format_timestamp(None)
        .try_init();
    match commands::dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let kind = if e.exit_code() == 1 { "usage error" } else { "error" };
            eprintln!("sarc: {kind}: {}", e.message());
            e.exit_code()
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let code = run_with(args, &mut lock);
    let _ = lock.flush();
    code
}
