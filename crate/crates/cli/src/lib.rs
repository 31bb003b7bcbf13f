//! Command-line pipeline: build a semantic space, classify reviews against measurement
//! scales, score the predictions, and sweep over corpus variants and weightings.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use lsaqu_core::classifier::{DEFAULT_TOP_N, DEFAULT_VARIANCE_THRESHOLD};
use lsaqu_core::space::DEFAULT_K;
use lsaqu_core::{DocumentFormat, LsaError, SchemeKind, SvdMethod};

mod commands;

pub use commands::{build_space_cmd, classify_cmd, evaluate_cmd, sweep_cmd, EvaluationReport, SweepRow};

/// Environment variable that, when set, replaces the `--seed` value.
pub const SEED_ENV: &str = "LSAQU_SEED";
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] LsaError),

    #[error("cannot read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Usage(String),

    #[error("cannot serialize output: {0}")]
    Serialize(serde_json::Error),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for bad inputs or arguments, 2 for internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_input_error() => 2,
            CliError::Serialize(_) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "lsaqu",
    version,
    about = "Classify software reviews into quality-in-use indicators with LSA"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a semantic space from one or more corpus files.
    BuildSpace(BuildSpaceArgs),
    /// Classify reviews against labeled measurement scales.
    Classify(ClassifyArgs),
    /// Score predictions against gold labels.
    Evaluate(EvaluateArgs),
    /// Evaluate every corpus variant × weighting × k combination and write a CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// JSON Lines with `text`, optional `id` and optional `label`.
    Jsonl,
    /// One document per line.
    Text,
}

impl From<Format> for DocumentFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Jsonl => DocumentFormat::JsonLines,
            Format::Text => DocumentFormat::Text,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, ValueEnum)]
pub enum Weighting {
    LogEntropy,
    Tfidf,
}

impl From<Weighting> for SchemeKind {
    fn from(w: Weighting) -> Self {
        match w {
            Weighting::LogEntropy => SchemeKind::LogEntropy,
            Weighting::Tfidf => SchemeKind::Tfidf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SvdChoice {
    /// Lanczos bidiagonalization on the sparse matrix.
    Lanczos,
    /// Dense Jacobi SVD, for small corpora.
    Dense,
}

impl From<SvdChoice> for SvdMethod {
    fn from(s: SvdChoice) -> Self {
        match s {
            SvdChoice::Lanczos => SvdMethod::Lanczos,
            SvdChoice::Dense => SvdMethod::Dense,
        }
    }
}

fn parse_k(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(k) if k >= 1 => Ok(k),
        Ok(_) => Err("k must be at least 1".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_top_n(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        Ok(_) => Err("top-n must be at least 1".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if (0.0..=2.0).contains(&t) => Ok(t),
        Ok(t) => Err(format!("{t} is outside [0, 2]")),
        Err(e) => Err(e.to_string()),
    }
}

/// Options shared by every command that builds a space.
#[derive(Debug, Clone, Args)]
pub struct SpaceArgs {
    /// Input format of the corpus files.
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: Format,

    /// SVD backend.
    #[arg(long, value_enum, default_value = "lanczos")]
    pub svd: SvdChoice,

    /// Seed for the Lanczos start vector; the LSAQU_SEED environment variable overrides it.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct BuildSpaceArgs {
    /// Corpus files; their documents are concatenated in the order given.
    #[arg(long, num_args = 1.., required = true)]
    pub corpus: Vec<PathBuf>,

    /// Number of latent dimensions; clamped to the rank of the weighted matrix.
    #[arg(long, default_value_t = DEFAULT_K, value_parser = parse_k)]
    pub k: usize,

    #[arg(long, value_enum, default_value = "log-entropy")]
    pub weighting: Weighting,

    /// Output space file.
    #[arg(long)]
    pub out: PathBuf,

    /// Store the document factors even for very large corpora.
    #[arg(long)]
    pub keep_v: bool,

    #[command(flatten)]
    pub space: SpaceArgs,
}

/// Options shared by the commands that classify.
#[derive(Debug, Clone, Args)]
pub struct ClassifyOpts {
    /// Labeled measurement scales (JSON Lines, `label` required).
    #[arg(long)]
    pub scales: PathBuf,

    /// Review sentences to classify.
    #[arg(long)]
    pub reviews: PathBuf,

    #[arg(long, value_enum, default_value = "jsonl")]
    pub reviews_format: Format,

    /// Number of most similar scales consulted per review.
    #[arg(long, default_value_t = DEFAULT_TOP_N, value_parser = parse_top_n)]
    pub top_n: usize,

    /// Score gap above which the single best scale decides, in [0, 2].
    #[arg(long, default_value_t = DEFAULT_VARIANCE_THRESHOLD, value_parser = parse_threshold)]
    pub variance_threshold: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    /// Space file written by build-space.
    #[arg(long)]
    pub space: PathBuf,

    #[command(flatten)]
    pub opts: ClassifyOpts,

    /// Output predictions (JSON Lines).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Predictions written by classify.
    #[arg(long)]
    pub predictions: PathBuf,

    /// Gold labels: JSON Lines records with `id` and `label`.
    #[arg(long)]
    pub gold: PathBuf,

    /// Output report (JSON).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Corpus variant as NAME=FILE[,FILE...]; repeat for each variant.
    #[arg(long = "variant", value_name = "NAME=FILES", required = true)]
    pub variants: Vec<String>,

    /// Weighting schemes to compare.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "log-entropy")]
    pub weightings: Vec<Weighting>,

    /// Values of k to compare.
    #[arg(long, value_delimiter = ',', default_value = "300", value_parser = parse_k)]
    pub k: Vec<usize>,

    #[command(flatten)]
    pub opts: ClassifyOpts,

    /// Gold labels; defaults to the `label` field of the reviews file.
    #[arg(long)]
    pub gold: Option<PathBuf>,

    #[command(flatten)]
    pub space: SpaceArgs,

    /// Output CSV, one row per configuration.
    #[arg(long)]
    pub out: PathBuf,
}

/// Resolves the seed, letting [`SEED_ENV`] take precedence over the flag.
pub fn effective_seed(flag: u64) -> CliResult<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|e| CliError::Usage(format!("{SEED_ENV}={v:?} is not a valid seed: {e}"))),
        Err(std::env::VarError::NotPresent) => Ok(flag),
        Err(e) => Err(CliError::Usage(format!("{SEED_ENV}: {e}"))),
    }
}

/// Runs a parsed command. Results go to stdout, diagnostics to the log.
pub fn run(cli: Cli) -> CliResult<()> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::BuildSpace(a) => build_space_cmd(&a, &mut stdout),
        Command::Classify(a) => classify_cmd(&a, &mut stdout),
        Command::Evaluate(a) => evaluate_cmd(&a, &mut stdout),
        Command::Sweep(a) => sweep_cmd(&a, &mut stdout),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
