mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use varspeech_core::generation::ProviderMode;
use varspeech_core::validation::ValidationMode;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "varspeech", version, about = "Synthesize, validate and evaluate spoken-style entity transcripts")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// TOML (or JSON) run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Global seed; every module derives its own stream from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// mock (offline) or live.
    #[arg(long, global = true)]
    pub mode: Option<ProviderMode>,
    /// Directory for output files and the run manifest. Without it, data goes to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Concurrent provider calls in live mode.
    #[arg(long, global = true)]
    pub parallelism: Option<usize>,
    /// Manifest file to append to when no output directory is set.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate entity values.
    GenValues {
        #[arg(long)]
        kind: Option<String>,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Generate transcripts for one value under a set of variations.
    GenTranscripts {
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        value: String,
        /// Comma-separated variation ids.
        #[arg(long, value_delimiter = ',', required = true)]
        variations: Vec<String>,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Values, transcripts, validation and rebalancing end to end.
    Pipeline {
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        values: Option<usize>,
        #[arg(long)]
        target: Option<usize>,
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        variations: Option<Vec<String>>,
        #[arg(long)]
        validation: Option<ValidationMode>,
    },
    /// Re-validate samples and set their `validated` flag.
    Validate {
        #[arg(long, default_value = "-")]
        input: PathBuf,
        #[arg(long)]
        validation: Option<ValidationMode>,
    },
    /// Assign train/valid/test splits.
    Split {
        #[arg(long, default_value = "-")]
        input: PathBuf,
        /// train,valid,test
        #[arg(long, value_delimiter = ',', num_args = 1)]
        ratios: Option<Vec<f64>>,
    },
    /// Dataset statistics.
    Stats {
        #[arg(long, default_value = "-")]
        input: PathBuf,
    },
    /// Score predictions against gold samples, line by line.
    Score {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
    },
    /// Extract values from transcripts.
    Extract {
        #[arg(long)]
        kind: Option<String>,
        /// A single transcript.
        #[arg(long, conflicts_with = "input")]
        text: Option<String>,
        /// Samples JSONL.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        instruction: Option<String>,
        /// Use the rule-based parser instead of the chat provider.
        #[arg(long)]
        oracle: bool,
    },
    /// Optimize an extraction instruction by mini-batch ascent.
    Optimize {
        /// Samples JSONL with splits assigned; train and valid rows are used.
        #[arg(long, conflicts_with_all = ["train", "valid"])]
        input: Option<PathBuf>,
        #[arg(long, requires = "valid")]
        train: Option<PathBuf>,
        #[arg(long, requires = "train")]
        valid: Option<PathBuf>,
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        pool_size: Option<usize>,
        #[arg(long)]
        mutations: Option<usize>,
        /// Trace JSONL path when no output directory is set.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Similarity of synthetic counterparts to real transcripts.
    Similarity {
        #[arg(long, default_value = "-")]
        input: PathBuf,
        /// rule or provider.
        #[arg(long, default_value = "rule")]
        classify: String,
        /// render or provider.
        #[arg(long, default_value = "render")]
        synthesis: String,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
