//! Command-line front end for the quantum molecular autoencoder.
//!
//! Exit codes: 0 on success, 2 for configuration or input problems, 3 for
//! numerical failures.

mod checkpoint;
mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] molqae::Error),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) | CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "molqae", version, about = "Quantum molecular autoencoder")]
struct Cli {
    /// Worker threads for batch evaluation (default: available cores).
    /// Results are identical for any thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a token vocabulary from a SMILES corpus.
    BuildVocab {
        /// Corpus file: one SMILES per line, or CSV with a `smiles` column.
        #[arg(long)]
        data: PathBuf,
        /// Output vocabulary JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train an autoencoder from a config file.
    Train {
        /// TOML config with data.*, arch.*, train.*, out.* keys.
        #[arg(long)]
        config: PathBuf,
        /// Override data.path from the config.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Override data.vocab from the config.
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// Override out.dir from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override train.seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Override train.gradient_engine
        /// (adjoint|parameter-shift|finite-diff).
        #[arg(long = "grad-engine")]
        grad_engine: Option<String>,
        /// Write 0 to the wall_time_s column so reruns are byte-identical.
        #[arg(long)]
        no_timing: bool,
    },
    /// Evaluate a checkpoint over a corpus.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode one SMILES and dump its mid-state and latent register.
    Encode {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        smiles: String,
    },
    /// Print the trainable parameter count for an architecture.
    Params {
        #[arg(long)]
        layers: usize,
        #[arg(long)]
        latent: usize,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Input("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Input(format!("cannot configure thread pool: {e}")))?;
    }
    match cli.command {
        Command::BuildVocab { data, out } => commands::build_vocab(&data, &out),
        Command::Train {
            config,
            data,
            vocab,
            out,
            seed,
            grad_engine,
            no_timing,
        } => commands::run_train(&commands::TrainArgs {
            config,
            data_override: data,
            vocab_override: vocab,
            out_override: out,
            seed_override: seed,
            engine_override: grad_engine,
            no_timing,
            threads: cli.threads,
        }),
        Command::Eval {
            checkpoint,
            data,
            vocab,
            out,
        } => commands::run_eval(&checkpoint, &data, &vocab, out.as_deref()),
        Command::Encode {
            checkpoint,
            vocab,
            smiles,
        } => commands::run_encode(&checkpoint, &vocab, &smiles),
        Command::Params { layers, latent } => commands::run_params(layers, latent),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
