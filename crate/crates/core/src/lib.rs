//! Quantum molecular autoencoder.
//!
//! SMILES strings are tokenized into normalized feature vectors, lifted
//! onto an 8-qubit register through parameterized rotations and a ring of
//! CNOTs, compressed by a layered encoder into a smaller latent register
//! while ancilla qubits are driven toward |0⟩, and reconstructed by a
//! mirror-structured decoder. All circuit parameters train jointly against
//! a dual objective: reconstruction fidelity plus a weighted trash-state
//! deviation.
//!
//! Module map:
//! * [`qsim`] — dense statevector simulation and gate kernels
//! * [`smiles`] — tokenizer, vocabulary, features, state preparation
//! * [`circuit`] — parameter layout and the encoder/decoder program
//! * [`objective`] — fidelity, ancilla deviation, combined loss
//! * [`grad`] — adjoint, parameter-shift, and finite-difference gradients
//! * [`optim`] — Adam training loop with cosine annealing and early stop
//! * [`data`] — corpus loading, cleaning, splitting, batching

pub mod circuit;
pub mod data;
mod error;
mod exec;
pub mod grad;
pub mod objective;
pub mod optim;
pub mod qsim;
pub mod rng;
pub mod smiles;

pub use error::{Error, Result};
