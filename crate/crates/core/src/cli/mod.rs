//! Command-line pipeline: generate, run, analyze, compare, rationale,
//! report and corpus, all reading one JSON config with flag overrides.

mod commands;
mod config;
mod manifest;

pub use commands::{AmceReport, ValidityReport};
pub use config::{
    AnalyzeSection, CompareSection, Config, ConfigError, RationaleSection, RunSection, SparedPole,
};
pub use manifest::{sha256_hex, CommandEntry, FileEntry, RunManifest, MANIFEST_FILE};

use crate::scenario::FocalDimension;
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_EMPTY: i32 = 3;
pub const EXIT_TRANSPORT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "moralbench",
    version,
    about = "Autonomous-vehicle dilemma benchmark: generate, query, analyze, compare"
)]
pub struct Cli {
    /// JSON config with per-command sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: config `outDir`, else `out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a scenario deck.
    Generate(GenerateArgs),
    /// Query a respondent for every scenario in the deck.
    Run(RunArgs),
    /// Parse responses and estimate AMCEs.
    Analyze(AnalyzeArgs),
    /// Distances and PCA across AMCE profiles.
    Compare(CompareArgs),
    /// Re-query selected scenarios asking for a rationale.
    Rationale(RationaleArgs),
    /// Redraw figures and write a text summary from existing outputs.
    Report,
    /// Check the response classifier against a labeled corpus.
    Corpus(CorpusArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Number of scenarios.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: Option<u64>,
    /// Deck seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Probability that one group rides in the car.
    #[arg(long)]
    pub p_passenger: Option<f64>,
    /// Probability of a legality contrast in two-lane scenarios.
    #[arg(long)]
    pub p_law: Option<f64>,
    /// Draw every scenario with this focal dimension.
    #[arg(long)]
    pub focal: Option<FocalDimension>,
}

#[derive(Debug, Args, Default)]
pub struct QueryArgs {
    /// Respondent spec JSON file.
    #[arg(long)]
    pub respondent: Option<PathBuf>,
    /// Override the respondent's model name.
    #[arg(long)]
    pub model: Option<String>,
    /// Override the chat-completions endpoint URL.
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub concurrency: Option<usize>,
    /// Per-request timeout.
    #[arg(long)]
    pub timeout_secs: Option<u64>,
    #[arg(long)]
    pub max_attempts: Option<u32>,
    /// First retry delay; doubles on each further attempt.
    #[arg(long)]
    pub base_delay_ms: Option<u64>,
    /// Noun phrase table overriding the built-in one.
    #[arg(long)]
    pub phrases: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub query: QueryArgs,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Baseline profile drawn in the AMCE figure.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// An `amce.json` to include; repeatable.
    #[arg(long = "profile")]
    pub profiles: Vec<PathBuf>,
    /// Reference profile JSON (e.g. human preferences).
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    /// Label distances are measured from; defaults to the baseline.
    #[arg(long)]
    pub reference: Option<String>,
}

#[derive(Debug, Args)]
pub struct RationaleArgs {
    /// Focal dimension to probe.
    #[arg(long)]
    pub focal: Option<FocalDimension>,
    /// Which pole of the focal contrast the recorded choice must have spared.
    #[arg(long, value_enum)]
    pub spared: Option<SparedPole>,
    /// Only scenarios where the respondent chose Case 1.
    #[arg(long)]
    pub require_straight: bool,
    #[command(flatten)]
    pub query: QueryArgs,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// JSON Lines of `{text, label}`; defaults to the bundled corpus.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Empty(String),
    #[error("{0}")]
    Transport(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Empty(_) => EXIT_EMPTY,
            CliError::Transport(_) => EXIT_TRANSPORT,
            CliError::Failed(_) => EXIT_FAILURE,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code; messages go to stdout and stderr.
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match commands::execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
