mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use reseb_core::evaluation::Group;

use crate::error::CliError;

#[derive(Parser)]
#[command(name = "reseb", version, about = "ResE-BiLSTM post-loan default detection pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand that writes a directory.
#[derive(Args, Clone, Debug, Default)]
pub struct Common {
    /// TOML file with [input], [synth], [pipeline], [model], [train],
    /// [trials] and [explain] sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed of the subcommand's own random stream.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cohort as compact delimited records.
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        loans: Option<usize>,
        #[arg(long)]
        delimiter: Option<char>,
    },
    /// Parse a performance file, report diagnostics and write normalized records.
    Ingest {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        /// Layout preset name or TOML file.
        #[arg(long)]
        layout: Option<String>,
        #[arg(long)]
        delimiter: Option<char>,
    },
    /// Window, label, split and scale records into a cohort archive.
    Window {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        layout: Option<String>,
        #[arg(long)]
        delimiter: Option<char>,
        #[arg(long)]
        stride: Option<usize>,
        #[arg(long)]
        balanced_test: bool,
        #[arg(long)]
        cohort: Option<String>,
    },
    /// Train repeated trials on a cohort archive and score the test partition.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        /// Architecture tag, e.g. rese_bilstm or gru.
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Score a saved checkpoint on a cohort's test partition.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Average ranks of models from a metric table.
    Rank {
        #[arg(long)]
        metrics: PathBuf,
        #[arg(long, default_value = "cohort")]
        group: Group,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the full model and its ablated variants and compare them.
    Ablate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated subset of M1,M2,M3,M4.
        #[arg(long, default_value = "M1,M2,M3,M4")]
        variants: String,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Shapley attribution of a checkpoint over test samples.
    Explain {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        permutations: Option<usize>,
    },
}

fn one_line(text: &str) -> String {
    text.lines().map(str::trim).filter(|l| !l.is_empty()).collect::<Vec<_>>().join("; ")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RESEB_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            eprintln!("reseb: {}", text.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(1);
        }
    };
    let (name, result) = match cli.command {
        Command::Synth { common, loans, delimiter } => ("synth", commands::synth(&common, loans, delimiter)),
        Command::Ingest {
            common,
            input,
            layout,
            delimiter,
        } => ("ingest", commands::ingest(&common, &input, layout, delimiter)),
        Command::Window {
            common,
            input,
            layout,
            delimiter,
            stride,
            balanced_test,
            cohort,
        } => (
            "window",
            commands::window(&common, &input, layout, delimiter, stride, balanced_test, cohort),
        ),
        Command::Train {
            common,
            data,
            model,
            trials,
        } => ("train", commands::train(&common, &data, model, trials)),
        Command::Eval { common, data, checkpoint } => ("eval", commands::eval(&common, &data, &checkpoint)),
        Command::Rank { metrics, group, out } => ("rank", commands::rank(&metrics, group, out.as_deref())),
        Command::Ablate {
            common,
            data,
            variants,
            trials,
        } => ("ablate", commands::ablate(&common, &data, &variants, trials)),
        Command::Explain {
            common,
            data,
            checkpoint,
            samples,
            permutations,
        } => (
            "explain",
            commands::explain(&common, &data, &checkpoint, samples, permutations),
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = match e {
                CliError::Validation(_) => "invalid input",
                CliError::Runtime(_) => "failed",
            };
            eprintln!("reseb {name}: {kind}: {}", one_line(&e.to_string()));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
