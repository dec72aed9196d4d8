//! Corpus ingestion for SMILES datasets: loading, cleaning, splitting,
//! and deterministic batching.
//!
//! Inputs are assumed to be pre-canonicalized; deduplication is by exact
//! string match and validity means "the tokenizer accepts it".

use std::collections::HashSet;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::{shuffle, stream_seed, SplitMix64};
use crate::smiles::tokenize;

/// One corpus entry: the record id is its position in the source file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub id: usize,
    pub smiles: String,
}

/// An ordered SMILES corpus with provenance.
#[derive(Clone, Debug)]
pub struct Corpus {
    pub records: Vec<Record>,
    pub source_path: String,
    pub source_sha256: String,
}

/// Outcome of [`clean`].
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CleanReport {
    pub kept: usize,
    pub dup_dropped: usize,
    pub invalid_dropped: usize,
    pub source_hash: String,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn smiles(&self) -> Vec<String> {
        self.records.iter().map(|r| r.smiles.clone()).collect()
    }

    /// Builds a corpus from in-memory strings (tests, synthetic data).
    pub fn from_smiles<S: Into<String>>(entries: Vec<S>) -> Corpus {
        let records = entries
            .into_iter()
            .enumerate()
            .map(|(id, smiles)| Record {
                id,
                smiles: smiles.into(),
            })
            .collect();
        Corpus {
            records,
            source_path: "<memory>".to_string(),
            source_sha256: String::new(),
        }
    }
}

/// Loads a corpus from disk. Plain text is read one SMILES per line with
/// blank lines skipped; if the first line looks like a CSV header
/// containing a `smiles` column, that column is extracted instead.
pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let raw = std::fs::read(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let source_sha256 = hex_digest(&raw);
    let text = String::from_utf8(raw)
        .map_err(|_| Error::Input(format!("{} is not valid UTF-8", path.display())))?;

    let smiles_column = detect_smiles_column(&text);
    let mut records = Vec::new();
    if let Some(column) = smiles_column {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        for (id, row) in reader.records().enumerate() {
            let row = row.map_err(|e| {
                Error::Input(format!("{}: malformed CSV: {e}", path.display()))
            })?;
            let value = row.get(column).unwrap_or("").trim();
            if !value.is_empty() {
                records.push(Record {
                    id,
                    smiles: value.to_string(),
                });
            }
        }
    } else if text.lines().next().is_some_and(|l| l.contains(',')) {
        return Err(Error::Input(format!(
            "{}: CSV input must carry a `smiles` column",
            path.display()
        )));
    } else {
        for (id, line) in text.lines().enumerate() {
            let line = line.trim();
            if !line.is_empty() {
                records.push(Record {
                    id,
                    smiles: line.to_string(),
                });
            }
        }
    }
    Ok(Corpus {
        records,
        source_path: path.display().to_string(),
        source_sha256,
    })
}

fn detect_smiles_column(text: &str) -> Option<usize> {
    let header = text.lines().next()?;
    if !header.contains(',') {
        return None;
    }
    header
        .split(',')
        .position(|cell| cell.trim().eq_ignore_ascii_case("smiles"))
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Drops exact-string duplicates (first occurrence wins) and entries the
/// tokenizer rejects.
pub fn clean(corpus: &Corpus) -> (Corpus, CleanReport) {
    let mut seen = HashSet::new();
    let mut kept = Vec::new();
    let mut dup_dropped = 0;
    let mut invalid_dropped = 0;
    for record in &corpus.records {
        if !seen.insert(record.smiles.clone()) {
            dup_dropped += 1;
            continue;
        }
        if tokenize(&record.smiles).is_err() {
            invalid_dropped += 1;
            continue;
        }
        kept.push(record.clone());
    }
    let report = CleanReport {
        kept: kept.len(),
        dup_dropped,
        invalid_dropped,
        source_hash: corpus.source_sha256.clone(),
    };
    (
        Corpus {
            records: kept,
            source_path: corpus.source_path.clone(),
            source_sha256: corpus.source_sha256.clone(),
        },
        report,
    )
}

/// Seeded shuffle followed by a prefix split; `train_fraction` of the
/// records (rounded down) go to the training side.
pub fn split(corpus: &Corpus, seed: u64, train_fraction: f64) -> Result<(Corpus, Corpus)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train_fraction must lie strictly between 0 and 1, got {train_fraction}"
        )));
    }
    let mut order: Vec<usize> = (0..corpus.records.len()).collect();
    let mut rng = SplitMix64::new(seed);
    shuffle(&mut order, &mut rng);
    let n_train = (corpus.records.len() as f64 * train_fraction).floor() as usize;
    let pick = |indices: &[usize]| Corpus {
        records: indices.iter().map(|&i| corpus.records[i].clone()).collect(),
        source_path: corpus.source_path.clone(),
        source_sha256: corpus.source_sha256.clone(),
    };
    Ok((pick(&order[..n_train]), pick(&order[n_train..])))
}

/// Index order for one epoch: a Fisher-Yates shuffle of 0..n keyed by
/// (seed, epoch) through an independent stream seed.
pub fn epoch_shuffle(n: usize, seed: u64, epoch: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = SplitMix64::new(stream_seed(seed, epoch as u64));
    shuffle(&mut order, &mut rng);
    order
}

/// Batches for one epoch: reshuffled record lists of `batch_size`, the
/// final partial batch included.
pub fn batches(
    corpus: &Corpus,
    batch_size: usize,
    seed: u64,
    epoch: usize,
) -> impl Iterator<Item = Vec<&Record>> {
    assert!(batch_size >= 1, "batch_size must be at least 1");
    let order = epoch_shuffle(corpus.records.len(), seed, epoch);
    let records = &corpus.records;
    let mut start = 0;
    std::iter::from_fn(move || {
        if start >= order.len() {
            return None;
        }
        let end = (start + batch_size).min(order.len());
        let batch = order[start..end].iter().map(|&i| &records[i]).collect();
        start = end;
        Some(batch)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn temp_file(contents: &str) -> std::path::PathBuf {
        let mut path = std::env::temp_dir();
        let unique = format!(
            "molqae-data-test-{}-{}.txt",
            std::process::id(),
            contents.len()
        );
        path.push(unique);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path
    }

    #[test]
    fn load_plain_text() {
        let path = temp_file("CCO\nCC\n");
        let corpus = load_corpus(&path).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.records[0].smiles, "CCO");
        assert_eq!(corpus.records[1].smiles, "CC");
        assert_eq!(corpus.source_sha256.len(), 64);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn load_csv_with_smiles_column() {
        let path = temp_file("id,smiles\n1,CCO\n");
        let corpus = load_corpus(&path).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus.records[0].smiles, "CCO");
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn load_errors() {
        assert!(matches!(
            load_corpus(Path::new("/definitely/not/here.smi")),
            Err(Error::Io { .. })
        ));
        let path = temp_file("id,structure\n1,CCO\n");
        assert!(matches!(load_corpus(&path), Err(Error::Input(_))));
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn empty_file_gives_empty_corpus() {
        let path = temp_file("");
        let corpus = load_corpus(&path).unwrap();
        assert!(corpus.is_empty());
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn clean_dedups_and_filters() {
        let corpus = Corpus::from_smiles(vec!["CCO", "CCO"]);
        let (cleaned, report) = clean(&corpus);
        assert_eq!(cleaned.len(), 1);
        assert_eq!(report.kept, 1);
        assert_eq!(report.dup_dropped, 1);

        let corpus = Corpus::from_smiles(vec!["C?"]);
        let (cleaned, report) = clean(&corpus);
        assert!(cleaned.is_empty());
        assert_eq!(report.invalid_dropped, 1);

        // already-clean corpus: identity, and clean is idempotent
        let corpus = Corpus::from_smiles(vec!["CC", "CO"]);
        let (once, first) = clean(&corpus);
        let (twice, second) = clean(&once);
        assert_eq!(once.records, twice.records);
        assert_eq!(first.kept, second.kept);
        assert_eq!(second.dup_dropped, 0);
        assert_eq!(second.invalid_dropped, 0);
    }

    #[test]
    fn split_partitions_deterministically() {
        let corpus = Corpus::from_smiles((0..10).map(|i| format!("{}C", "C".repeat(i))).collect());
        let (train, holdout) = split(&corpus, 42, 0.9).unwrap();
        assert_eq!(train.len(), 9);
        assert_eq!(holdout.len(), 1);

        let (train2, holdout2) = split(&corpus, 42, 0.9).unwrap();
        assert_eq!(train.records, train2.records);
        assert_eq!(holdout.records, holdout2.records);

        // coverage and disjointness
        let mut all: Vec<String> = train
            .records
            .iter()
            .chain(holdout.records.iter())
            .map(|r| r.smiles.clone())
            .collect();
        all.sort();
        let mut original = corpus.smiles();
        original.sort();
        assert_eq!(all, original);

        assert!(split(&corpus, 42, 0.0).is_err());
        assert!(split(&corpus, 42, 1.0).is_err());
    }

    #[test]
    fn batches_cover_each_record_once() {
        let corpus = Corpus::from_smiles(vec!["C", "CC", "CCC", "CCCC", "CCCCC"]);
        let sizes: Vec<usize> = batches(&corpus, 2, 7, 0).map(|b| b.len()).collect();
        assert_eq!(sizes, vec![2, 2, 1]);

        let epoch0: Vec<String> = batches(&corpus, 2, 7, 0)
            .flatten()
            .map(|r| r.smiles.clone())
            .collect();
        let epoch1: Vec<String> = batches(&corpus, 2, 7, 1)
            .flatten()
            .map(|r| r.smiles.clone())
            .collect();
        assert_ne!(epoch0, epoch1, "epochs should reshuffle");
        let mut sorted0 = epoch0.clone();
        let mut sorted1 = epoch1.clone();
        sorted0.sort();
        sorted1.sort();
        assert_eq!(sorted0, sorted1, "same multiset across epochs");

        // oversized batch degenerates to a single batch
        let whole: Vec<usize> = batches(&corpus, 10, 7, 0).map(|b| b.len()).collect();
        assert_eq!(whole, vec![5]);
    }

    #[test]
    fn cleaned_corpus_featurizes_under_its_own_vocab() {
        let corpus = Corpus::from_smiles(vec!["CCO", "C?", "CC(=O)Cl", "CCO"]);
        let (cleaned, _) = clean(&corpus);
        let vocab = crate::smiles::TokenVocab::build(&cleaned.smiles()).unwrap();
        for record in &cleaned.records {
            let tokens = tokenize(&record.smiles).unwrap();
            assert!(crate::smiles::featurize(&tokens, &vocab).is_ok());
        }
    }
}
