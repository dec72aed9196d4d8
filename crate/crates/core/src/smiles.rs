//! SMILES ingestion: tokenization, vocabulary, fixed-length feature
//! vectors, and preparation of the 8-qubit molecular state.
//!
//! A SMILES string becomes a sequence of tokens, each token maps to its
//! vocabulary index normalized by the vocabulary size, and the resulting
//! length-22 feature vector drives the rotation angles of the state
//! preparation circuit (a U3 on every qubit followed by a ring of CNOTs).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::qsim::StateVector;

/// Fixed feature-vector length; covers the token count of the vast
/// majority of small organic molecules.
pub const FEATURE_LEN: usize = 22;

/// Qubits in the molecular register.
pub const PREP_QUBITS: usize = 8;

/// Padding token; always index 0 so padded positions contribute zero
/// rotation angles.
pub const PAD_TOKEN: &str = "<PAD>";

/// Splits a SMILES string into tokens with greedy longest-match rules:
/// bracket atoms `[...]` as single tokens, the two-letter elements `Cl`
/// and `Br`, `%NN` ring closures, then single-character atoms, bonds,
/// branches, ring digits, and dots. `@` is only valid inside brackets.
pub fn tokenize(smiles: &str) -> Result<Vec<String>> {
    if smiles.is_empty() {
        return Err(Error::EmptySmiles);
    }
    let bytes = smiles.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let rest = &smiles[pos..];
        if rest.starts_with('[') {
            match rest.find(']') {
                Some(end) => {
                    tokens.push(rest[..=end].to_string());
                    pos += end + 1;
                    continue;
                }
                None => {
                    return Err(Error::Tokenize {
                        smiles: smiles.to_string(),
                        found: "[ without matching ]".to_string(),
                        position: pos,
                    });
                }
            }
        }
        if rest.starts_with("Cl") || rest.starts_with("Br") {
            tokens.push(rest[..2].to_string());
            pos += 2;
            continue;
        }
        if let Some(digits) = rest.strip_prefix('%') {
            if digits.len() >= 2 && digits.as_bytes()[..2].iter().all(u8::is_ascii_digit) {
                tokens.push(rest[..3].to_string());
                pos += 3;
                continue;
            }
            return Err(Error::Tokenize {
                smiles: smiles.to_string(),
                found: "% without two digits".to_string(),
                position: pos,
            });
        }
        let ch = rest.chars().next().expect("non-empty remainder");
        let single = matches!(
            ch,
            'B' | 'C'
                | 'N'
                | 'O'
                | 'P'
                | 'S'
                | 'F'
                | 'I'
                | 'b'
                | 'c'
                | 'n'
                | 'o'
                | 'p'
                | 's'
                | '-'
                | '='
                | '#'
                | '/'
                | '\\'
                | '('
                | ')'
                | '.'
                | '0'..='9'
        );
        if single {
            tokens.push(ch.to_string());
            pos += ch.len_utf8();
        } else {
            return Err(Error::Tokenize {
                smiles: smiles.to_string(),
                found: ch.to_string(),
                position: pos,
            });
        }
    }
    Ok(tokens)
}

/// Ordered token vocabulary. Index 0 is the pad token; the remaining
/// tokens are the distinct tokens of the source corpus in lexicographic
/// order, making construction deterministic for a fixed corpus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenVocab {
    tokens: Vec<String>,
}

/// On-disk layout of a vocabulary file.
#[derive(Serialize, Deserialize)]
struct VocabFile {
    tokens: Vec<String>,
    pad: String,
    version: u32,
}

impl TokenVocab {
    /// Builds a vocabulary from a corpus of SMILES strings. Every entry
    /// must tokenize; filter the corpus first if it may contain invalid
    /// structures.
    pub fn build(corpus: &[String]) -> Result<TokenVocab> {
        if corpus.is_empty() {
            return Err(Error::Config("cannot build vocabulary from an empty corpus".into()));
        }
        let mut seen = BTreeSet::new();
        for smiles in corpus {
            for token in tokenize(smiles)? {
                seen.insert(token);
            }
        }
        let mut tokens = Vec::with_capacity(seen.len() + 1);
        tokens.push(PAD_TOKEN.to_string());
        tokens.extend(seen);
        Ok(TokenVocab { tokens })
    }

    pub fn size(&self) -> usize {
        self.tokens.len()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        // Tokens past the pad are sorted, so a binary search would also
        // work; vocabularies are small enough that linear scan never shows
        // up in profiles.
        self.tokens.iter().position(|t| t == token)
    }

    /// Canonical JSON serialization (fixed field order, compact).
    pub fn to_json(&self) -> String {
        let file = VocabFile {
            tokens: self.tokens.clone(),
            pad: PAD_TOKEN.to_string(),
            version: 1,
        };
        serde_json::to_string(&file).expect("vocab serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<TokenVocab> {
        let file: VocabFile = serde_json::from_str(json)
            .map_err(|e| Error::Input(format!("malformed vocabulary file: {e}")))?;
        if file.version != 1 {
            return Err(Error::Input(format!(
                "unsupported vocabulary version {}",
                file.version
            )));
        }
        if file.tokens.first().map(String::as_str) != Some(file.pad.as_str()) {
            return Err(Error::Input(
                "vocabulary pad token must sit at index 0".into(),
            ));
        }
        Ok(TokenVocab { tokens: file.tokens })
    }

    /// SHA-256 of the canonical JSON form, hex-encoded. Embedded in
    /// checkpoints so a mismatched vocabulary is caught at load time.
    pub fn sha256_hex(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Normalized token features, xi in [0,1)^22.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureVector {
    xi: [f64; FEATURE_LEN],
}

impl FeatureVector {
    /// Builds a feature vector from raw values, which must all lie in
    /// [0, 1].
    pub fn new(xi: [f64; FEATURE_LEN]) -> Result<Self> {
        for (i, v) in xi.iter().enumerate() {
            if !(0.0..=1.0).contains(v) {
                return Err(Error::Input(format!(
                    "feature {i} = {v} outside [0, 1]"
                )));
            }
        }
        Ok(FeatureVector { xi })
    }

    pub fn values(&self) -> &[f64; FEATURE_LEN] {
        &self.xi
    }

    #[cfg(test)]
    pub(crate) fn from_raw(xi: [f64; FEATURE_LEN]) -> Self {
        FeatureVector { xi }
    }
}

/// Maps tokens to the fixed-length feature vector: position j holds
/// `index(token_j) / V`. Shorter sequences are padded with the zero-index
/// pad token; longer sequences keep their first 22 tokens.
pub fn featurize(tokens: &[String], vocab: &TokenVocab) -> Result<FeatureVector> {
    let v = vocab.size() as f64;
    let mut xi = [0.0; FEATURE_LEN];
    for (slot, token) in xi.iter_mut().zip(tokens.iter()) {
        let index = vocab
            .index_of(token)
            .ok_or_else(|| Error::UnknownToken {
                token: token.clone(),
            })?;
        *slot = index as f64 / v;
    }
    Ok(FeatureVector { xi })
}

/// Per-qubit (theta, phi, lambda) triples for state preparation, each in
/// [0, pi].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrepAngles {
    triples: [[f64; 3]; PREP_QUBITS],
}

impl PrepAngles {
    pub fn triples(&self) -> &[[f64; 3]; PREP_QUBITS] {
        &self.triples
    }
}

/// Cyclic assignment of features to rotation angles: qubit i draws its
/// triple from positions (3i, 3i+1, 3i+2) mod 22, scaled by pi. Qubit 7
/// wraps around to the start of the feature vector.
pub fn prep_params(features: &FeatureVector) -> PrepAngles {
    let xi = features.values();
    let mut triples = [[0.0; 3]; PREP_QUBITS];
    for (i, triple) in triples.iter_mut().enumerate() {
        for (a, angle) in triple.iter_mut().enumerate() {
            *angle = std::f64::consts::PI * xi[(3 * i + a) % FEATURE_LEN];
        }
    }
    PrepAngles { triples }
}

/// Builds the molecular input state: U3(theta_j, phi_j, lambda_j) on every
/// qubit of |0⟩^⊗8, then the entangling ring CNOT(i, (i+1) mod 8) applied
/// for i = 0..7 in ascending order.
pub fn prepare_state(angles: &PrepAngles) -> StateVector {
    let mut state = StateVector::zero(PREP_QUBITS).expect("8 qubits is within the supported range");
    for (q, [theta, phi, lambda]) in angles.triples().iter().enumerate() {
        state
            .apply_u3(q, *theta, *phi, *lambda)
            .expect("prep qubit in range");
    }
    for i in 0..PREP_QUBITS {
        state
            .apply_cnot(i, (i + 1) % PREP_QUBITS)
            .expect("ring indices in range");
    }
    state
}

/// Tokenize + featurize + prepare in one step.
pub fn prepare_from_smiles(smiles: &str, vocab: &TokenVocab) -> Result<StateVector> {
    let tokens = tokenize(smiles)?;
    let features = featurize(&tokens, vocab)?;
    Ok(prepare_state(&prep_params(&features)))
}
