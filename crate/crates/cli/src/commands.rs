//! Subcommand implementations.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use molqae::circuit::{param_count, ArchConfig, Circuit, ParamVector};
use molqae::data::{clean, load_corpus, split, CleanReport, Corpus};
use molqae::objective::batch_objective;
use molqae::optim::{train, EpochRecord, TrainConfig};
use molqae::smiles::{featurize, tokenize, FeatureVector, TokenVocab};

use crate::checkpoint::{BestStats, Checkpoint};
use crate::config::{engine_name, RunConfig};
use crate::CliError;

pub const METRICS_HEADER: &str = "epoch,avg_loss,avg_fidelity,avg_ancilla_dev,lr,wall_time_s";

fn load_vocab(path: &Path) -> Result<TokenVocab, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read vocabulary {}: {e}", path.display())))?;
    TokenVocab::from_json(&text).map_err(CliError::from)
}

fn cleaned_corpus(path: &Path) -> Result<(Corpus, CleanReport), CliError> {
    let corpus = load_corpus(path)?;
    Ok(clean(&corpus))
}

/// Featurizes a corpus, counting how many molecules exceeded the
/// fixed 22-token window and were truncated.
fn featurize_corpus(
    corpus: &Corpus,
    vocab: &TokenVocab,
) -> Result<(Vec<FeatureVector>, usize), CliError> {
    let mut features = Vec::with_capacity(corpus.len());
    let mut truncated = 0;
    for record in &corpus.records {
        let tokens = tokenize(&record.smiles)?;
        if tokens.len() > molqae::smiles::FEATURE_LEN {
            truncated += 1;
        }
        features.push(featurize(&tokens, vocab)?);
    }
    Ok((features, truncated))
}

// ---------------------------------------------------------------------------
// build-vocab
// ---------------------------------------------------------------------------

pub fn build_vocab(data: &Path, out: &Path) -> Result<(), CliError> {
    let (cleaned, report) = cleaned_corpus(data)?;
    if cleaned.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no usable molecules after cleaning",
            data.display()
        )));
    }
    let vocab = TokenVocab::build(&cleaned.smiles())?;
    std::fs::write(out, vocab.to_json())
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", out.display())))?;
    println!(
        "{}",
        serde_json::to_string(&report).expect("report serializes")
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

pub struct TrainArgs {
    pub config: PathBuf,
    pub data_override: Option<PathBuf>,
    pub vocab_override: Option<PathBuf>,
    pub out_override: Option<PathBuf>,
    pub seed_override: Option<u64>,
    pub engine_override: Option<String>,
    pub no_timing: bool,
    pub threads: Option<usize>,
}

#[derive(Serialize)]
struct Manifest {
    code_version: &'static str,
    config: ResolvedConfig,
    data: DataProvenance,
    vocab_sha256: String,
    best: BestStats,
    early_stopped: bool,
    epochs_run: usize,
    final_eval: FinalEval,
    elapsed_s: f64,
}

#[derive(Serialize)]
struct ResolvedConfig {
    data_path: String,
    vocab_path: String,
    train_fraction: f64,
    arch_latent: usize,
    arch_layers: usize,
    max_epochs: usize,
    patience: usize,
    base_lr: f64,
    lambda: f64,
    batch_size: usize,
    clip_max_norm: f64,
    seed: u64,
    gradient_engine: String,
    threads: usize,
    wall_time_recorded: bool,
    out_dir: String,
}

#[derive(Serialize)]
struct DataProvenance {
    source_sha256: String,
    clean_report: CleanReport,
    truncated_over_window: usize,
    train_records: usize,
    holdout_records: usize,
}

#[derive(Serialize)]
struct FinalEval {
    train: EvalReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    holdout: Option<EvalReport>,
}

pub fn run_train(args: &TrainArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let mut config = RunConfig::load(&args.config)?;
    if let Some(path) = &args.data_override {
        config.data.path = path.clone();
    }
    if let Some(path) = &args.vocab_override {
        config.data.vocab = path.clone();
    }
    if let Some(path) = &args.out_override {
        config.out.dir = path.clone();
    }
    if let Some(seed) = args.seed_override {
        config.train.seed = Some(seed);
    }
    if let Some(engine) = &args.engine_override {
        config.train.gradient_engine = Some(engine.clone());
    }

    let train_cfg = config.train_config(!args.no_timing)?;
    let arch = ArchConfig::molqae(config.arch.latent, config.arch.layers)?;
    let vocab = load_vocab(&config.data.vocab)?;
    let (cleaned, clean_report) = cleaned_corpus(&config.data.path)?;
    if cleaned.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no usable molecules after cleaning",
            config.data.path.display()
        )));
    }

    let (train_corpus, holdout_corpus) = if config.data.train_fraction < 1.0 {
        let (t, h) = split(&cleaned, train_cfg.seed, config.data.train_fraction)?;
        (t, Some(h))
    } else {
        (cleaned.clone(), None)
    };
    if train_corpus.is_empty() {
        return Err(CliError::Input(
            "training split is empty; raise data.train_fraction or supply more molecules".into(),
        ));
    }
    let (features, truncated) = featurize_corpus(&train_corpus, &vocab)?;

    std::fs::create_dir_all(&config.out.dir)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", config.out.dir.display())))?;
    let metrics_path = config.out.dir.join("metrics.csv");
    let mut metrics = std::fs::File::create(&metrics_path)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", metrics_path.display())))?;
    writeln!(metrics, "{METRICS_HEADER}").map_err(io_err)?;

    let mut stream_error: Option<std::io::Error> = None;
    let outcome = train(&features, &arch, &train_cfg, |record: &EpochRecord| {
        eprintln!(
            "epoch {:>4}  loss {:.6}  fidelity {:.6}  ancilla_dev {:.6}  lr {:.3e}",
            record.epoch, record.avg_loss, record.avg_fidelity, record.avg_ancilla_dev, record.lr
        );
        let row = format!(
            "{},{},{},{},{},{}",
            record.epoch,
            record.avg_loss,
            record.avg_fidelity,
            record.avg_ancilla_dev,
            record.lr,
            record.wall_time_s
        );
        if let Err(e) = writeln!(metrics, "{row}").and_then(|_| metrics.flush()) {
            stream_error.get_or_insert(e);
        }
    });
    if let Some(e) = stream_error {
        return Err(CliError::Input(format!(
            "cannot stream {}: {e}",
            metrics_path.display()
        )));
    }

    let outcome = match outcome {
        Ok(outcome) => outcome,
        Err(err) => {
            // Partial metrics are already on disk; leave a failure marker.
            let marker = serde_json::json!({
                "error": err.to_string(),
                "metrics": "partial",
            });
            std::fs::write(
                config.out.dir.join("FAILED.json"),
                serde_json::to_string_pretty(&marker).expect("marker serializes"),
            )
            .ok();
            return Err(CliError::from(err));
        }
    };

    let best_record = &outcome.history[outcome.best_epoch];
    let best = BestStats {
        epoch: outcome.best_epoch,
        avg_loss: best_record.avg_loss,
        avg_fidelity: best_record.avg_fidelity,
        avg_ancilla_dev: best_record.avg_ancilla_dev,
    };
    let checkpoint = Checkpoint::build(
        &arch,
        &outcome.best_params,
        vocab.sha256_hex(),
        &train_cfg,
        best.clone(),
    );
    checkpoint.save(&config.out.dir.join("checkpoint.json"))?;

    let eval_train = evaluate_features(&features, &outcome.best_params, &arch, &train_cfg)?;
    let eval_holdout = match &holdout_corpus {
        Some(holdout) if !holdout.is_empty() => {
            let (holdout_features, _) = featurize_corpus(holdout, &vocab)?;
            Some(evaluate_features(
                &holdout_features,
                &outcome.best_params,
                &arch,
                &train_cfg,
            )?)
        }
        _ => None,
    };

    let manifest = Manifest {
        code_version: env!("CARGO_PKG_VERSION"),
        config: ResolvedConfig {
            data_path: config.data.path.display().to_string(),
            vocab_path: config.data.vocab.display().to_string(),
            train_fraction: config.data.train_fraction,
            arch_latent: arch.n_latent(),
            arch_layers: arch.n_layers(),
            max_epochs: train_cfg.max_epochs,
            patience: train_cfg.patience,
            base_lr: train_cfg.base_lr,
            lambda: train_cfg.lambda_weight,
            batch_size: train_cfg.batch_size,
            clip_max_norm: train_cfg.clip_max_norm,
            seed: train_cfg.seed,
            gradient_engine: engine_name(train_cfg.gradient_engine),
            threads: current_threads(args.threads),
            wall_time_recorded: !args.no_timing,
            out_dir: config.out.dir.display().to_string(),
        },
        data: DataProvenance {
            source_sha256: cleaned.source_sha256.clone(),
            clean_report,
            truncated_over_window: truncated,
            train_records: train_corpus.len(),
            holdout_records: holdout_corpus.as_ref().map_or(0, Corpus::len),
        },
        vocab_sha256: vocab.sha256_hex(),
        best,
        early_stopped: outcome.early_stopped,
        epochs_run: outcome.history.len(),
        final_eval: FinalEval {
            train: eval_train,
            holdout: eval_holdout,
        },
        elapsed_s: if args.no_timing {
            0.0
        } else {
            started.elapsed().as_secs_f64()
        },
    };
    let manifest_path = config.out.dir.join("manifest.json");
    std::fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )
    .map_err(|e| CliError::Input(format!("cannot write {}: {e}", manifest_path.display())))?;
    eprintln!(
        "done: best epoch {} (loss {:.6}), artifacts in {}",
        outcome.best_epoch,
        outcome.best_loss,
        config.out.dir.display()
    );
    Ok(())
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Input(format!("i/o error: {e}"))
}

fn current_threads(requested: Option<usize>) -> usize {
    requested.unwrap_or_else(rayon::current_num_threads)
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub mean_fidelity: f64,
    pub mean_ancilla_dev: f64,
    pub mean_loss: f64,
    pub n_samples: usize,
}

fn evaluate_features(
    features: &[FeatureVector],
    params: &ParamVector,
    arch: &ArchConfig,
    cfg: &TrainConfig,
) -> Result<EvalReport, CliError> {
    let metrics = batch_objective(features, params, arch, &cfg.objective())?;
    Ok(EvalReport {
        mean_fidelity: metrics.mean_fidelity,
        mean_ancilla_dev: metrics.mean_ancilla_dev,
        mean_loss: metrics.mean_loss,
        n_samples: features.len(),
    })
}

fn checkpoint_matches_vocab(
    checkpoint: &Checkpoint,
    vocab: &TokenVocab,
) -> Result<(), CliError> {
    if checkpoint.vocab_sha256 != vocab.sha256_hex() {
        return Err(CliError::Input(format!(
            "vocabulary hash mismatch: checkpoint carries {}, supplied vocabulary hashes to {}",
            checkpoint.vocab_sha256,
            vocab.sha256_hex()
        )));
    }
    Ok(())
}

pub fn run_eval(
    checkpoint_path: &Path,
    data: &Path,
    vocab_path: &Path,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let checkpoint = Checkpoint::load(checkpoint_path)?;
    let vocab = load_vocab(vocab_path)?;
    checkpoint_matches_vocab(&checkpoint, &vocab)?;
    let arch = checkpoint.arch_config()?;
    let params = checkpoint.param_vector()?;
    let (cleaned, _) = cleaned_corpus(data)?;
    if cleaned.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no usable molecules after cleaning",
            data.display()
        )));
    }
    let (features, _) = featurize_corpus(&cleaned, &vocab)?;
    let cfg = TrainConfig {
        lambda_weight: checkpoint.train_config.lambda,
        ..TrainConfig::default()
    };
    let report = evaluate_features(&features, &params, &arch, &cfg)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Some(path) = out {
        std::fs::write(path, &json)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    println!("{json}");
    Ok(())
}

// ---------------------------------------------------------------------------
// encode
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct EncodeReport {
    n_latent: usize,
    ancilla_zero_probability: f64,
    ancilla_deviation: f64,
    /// 2^8 mid-state amplitudes as [re, im] pairs.
    mid_amplitudes: Vec<[f64; 2]>,
    /// 2^n_latent renormalized latent amplitudes conditioned on all
    /// ancilla qubits measuring |0⟩.
    latent_amplitudes: Vec<[f64; 2]>,
}

pub fn run_encode(
    checkpoint_path: &Path,
    vocab_path: &Path,
    smiles: &str,
) -> Result<(), CliError> {
    let checkpoint = Checkpoint::load(checkpoint_path)?;
    let vocab = load_vocab(vocab_path)?;
    checkpoint_matches_vocab(&checkpoint, &vocab)?;
    let arch = checkpoint.arch_config()?;
    let params = checkpoint.param_vector()?;

    let tokens = tokenize(smiles)?;
    let features = featurize(&tokens, &vocab)?;
    let input = molqae::smiles::prepare_state(&molqae::smiles::prep_params(&features));
    let circuit = Circuit::new(arch);
    let mid = circuit.encode(&input, &params)?;

    let p_zero = mid.prob_all_zero(&arch.ancilla_qubits())?;
    if p_zero < 1e-12 {
        return Err(CliError::Numerical(format!(
            "ancilla-zero probability {p_zero:.3e} too small to condition on"
        )));
    }
    // Little-endian layout puts the valid (ancilla = 0) basis states at
    // the first 2^n_latent indices.
    let latent_dim = 1usize << arch.n_latent();
    let scale = p_zero.sqrt();
    let latent_amplitudes: Vec<[f64; 2]> = mid.amplitudes()[..latent_dim]
        .iter()
        .map(|a| [a.re / scale, a.im / scale])
        .collect();
    let report = EncodeReport {
        n_latent: arch.n_latent(),
        ancilla_zero_probability: p_zero,
        ancilla_deviation: 1.0 - p_zero,
        mid_amplitudes: mid.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
        latent_amplitudes,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// params
// ---------------------------------------------------------------------------

pub fn run_params(layers: usize, latent: usize) -> Result<(), CliError> {
    let arch = ArchConfig::molqae(latent, layers)?;
    println!("{}", param_count(&arch));
    Ok(())
}
