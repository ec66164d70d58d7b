//! `poskit`: generate, adapt, evaluate, score, and export position-based
//! retrieval benchmarks.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 runtime error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use commands::EvalArgs;
use config::FileConfig;
use poskit_core::runner::ReasoningMode;

#[derive(Parser)]
#[command(
    name = "poskit",
    version,
    about = "Position-based retrieval benchmark toolkit",
    long_about = "Generates position-retrieval evaluation sets and training mixtures, runs \
                  chat-completion backends (or offline mocks), and builds accuracy, confusion, \
                  and asymmetry reports."
)]
struct Cli {
    /// Declarative TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run seed; required here or in the config (no wall-clock default).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: poskit-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write evaluation prompt sets for every condition in the grid.
    Generate,
    /// Build the training mixture from code and document corpora.
    Adapt {
        /// Newline-delimited JSON corpus of code snippets (text field).
        #[arg(long)]
        code: Vec<PathBuf>,
        /// Newline-delimited JSON corpus of documents or dialogs.
        #[arg(long)]
        adapted: Vec<PathBuf>,
    },
    /// Generate the PyIndex benchmark and its prompt sets.
    Pyindex,
    /// Run prompts against a backend (mock-oracle, mock-random, or the
    /// configured HTTP backend id).
    Eval {
        #[arg(long)]
        backend: String,
        /// Prompt file or directory (default: <out>/prompts).
        #[arg(long)]
        prompts: Option<PathBuf>,
        /// "off" or a reasoning token budget (e.g. 256).
        #[arg(long)]
        reasoning: Option<String>,
        /// Run each prompt with reasoning off and on, writing paired records.
        #[arg(long)]
        compare_reasoning: bool,
        /// Maximum concurrent requests.
        #[arg(long)]
        concurrency: Option<usize>,
    },
    /// Accuracy summaries and per-position tables from trial records.
    Score {
        /// Trial files or directories (default: <out>/trials).
        #[arg(long)]
        trials: Vec<PathBuf>,
    },
    /// Confusion matrices and the forward/backward asymmetry table.
    Report {
        #[arg(long)]
        trials: Vec<PathBuf>,
    },
    /// Export training examples with answer-span masks plus a manifest.
    ExportSft {
        /// Training-example file (default: <out>/train/mixture.jsonl).
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file_config = match &cli.config {
        Some(path) => FileConfig::load(path).map_err(|e| CliError::Usage(format!("{e:#}")))?,
        None => FileConfig::default(),
    };
    let resolved = file_config
        .resolve(cli.seed, cli.out.clone())
        .map_err(|e| CliError::Usage(format!("{e:#}")))?;

    let outcome = match &cli.command {
        Command::Generate => commands::cmd_generate(&resolved),
        Command::Adapt { code, adapted } => commands::cmd_adapt(&resolved, code, adapted),
        Command::Pyindex => commands::cmd_pyindex(&resolved),
        Command::Eval {
            backend,
            prompts,
            reasoning,
            compare_reasoning,
            concurrency,
        } => {
            let reasoning = match reasoning.as_deref() {
                None => None,
                Some("off") => Some(ReasoningMode::Off),
                Some(budget) => {
                    let tokens: u32 = budget.parse().map_err(|_| {
                        CliError::Usage(format!(
                            "--reasoning takes \"off\" or a token budget, got {budget:?}"
                        ))
                    })?;
                    Some(ReasoningMode::Budget(tokens))
                }
            };
            commands::cmd_eval(
                &resolved,
                &EvalArgs {
                    backend: backend.clone(),
                    prompts: prompts.clone(),
                    reasoning,
                    compare_reasoning: *compare_reasoning,
                    concurrency: *concurrency,
                },
            )
        }
        Command::Score { trials } => commands::cmd_score(&resolved, trials),
        Command::Report { trials } => commands::cmd_report(&resolved, trials),
        Command::ExportSft { input } => commands::cmd_export_sft(&resolved, input.as_deref()),
    };
    outcome.map_err(CliError::Runtime)
}
