//! The quantum autoencoder circuit: parameter layout, encoder, latent and
//! ancilla processing, the special entangling layer, and the decoder.
//!
//! Encoder and decoder share the same per-layer structure (a U3 on every
//! qubit followed by fully-connected CRZ entanglement) but own disjoint
//! parameter segments. Between them sit single-qubit refinements: RZ
//! rotations on the latent qubits and U3 compression gates on the ancilla
//! qubits, then a nearest-neighbor CRZ layer ahead of the decoder.
//!
//! Gate order inside a layer is fixed for reproducibility: U3 gates in
//! ascending qubit order, then CRZ gates over pairs (i, j) with i < j in
//! lexicographic order, the lower index acting as control. The CRZ gates
//! of a layer are mutually diagonal and commute, so only the boundary
//! between the U3 block and the CRZ block is observable.

use crate::error::{Error, Result};
use crate::qsim::StateVector;
use crate::rng::SplitMix64;

/// Architecture shape: register width, latent width, and layer count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArchConfig {
    n_qubits: usize,
    n_latent: usize,
    n_layers: usize,
}

impl ArchConfig {
    /// General constructor; small registers are allowed for brute-force
    /// test oracles.
    pub fn new(n_qubits: usize, n_latent: usize, n_layers: usize) -> Result<Self> {
        if !(2..=crate::qsim::MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::Config(format!(
                "n_qubits must be in 2..={}, got {n_qubits}",
                crate::qsim::MAX_QUBITS
            )));
        }
        if n_latent == 0 || n_latent >= n_qubits {
            return Err(Error::Config(format!(
                "n_latent must be in 1..={}, got {n_latent}",
                n_qubits - 1
            )));
        }
        if n_layers == 0 {
            return Err(Error::Config("n_layers must be at least 1".into()));
        }
        Ok(ArchConfig {
            n_qubits,
            n_latent,
            n_layers,
        })
    }

    /// The standard 8-qubit molecular register.
    pub fn molqae(n_latent: usize, n_layers: usize) -> Result<Self> {
        Self::new(crate::smiles::PREP_QUBITS, n_latent, n_layers)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_latent(&self) -> usize {
        self.n_latent
    }

    pub fn n_ancilla(&self) -> usize {
        self.n_qubits - self.n_latent
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    /// Qubit indices of the ancilla (trash) register.
    pub fn ancilla_qubits(&self) -> Vec<usize> {
        (self.n_latent..self.n_qubits).collect()
    }
}

/// Which circuit stage a parameter belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Segment {
    EncoderU3 { layer: usize },
    EncoderCrz { layer: usize },
    LatentRz,
    AncillaU3,
    SpecialCrz,
    DecoderU3 { layer: usize },
    DecoderCrz { layer: usize },
}

/// One gate of the trainable circuit, referencing slots in the flat
/// parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateOp {
    /// U3 on `qubit` consuming parameters `first_param..first_param+3`
    /// as (theta, phi, lambda).
    U3 { qubit: usize, first_param: usize },
    /// RZ on `qubit` consuming one parameter.
    Rz { qubit: usize, param: usize },
    /// CRZ with `control < target` consuming one parameter.
    Crz {
        control: usize,
        target: usize,
        param: usize,
    },
}

impl GateOp {
    pub fn param_range(&self) -> std::ops::Range<usize> {
        match *self {
            GateOp::U3 { first_param, .. } => first_param..first_param + 3,
            GateOp::Rz { param, .. } | GateOp::Crz { param, .. } => param..param + 1,
        }
    }
}

/// Deterministic map from flat parameter indices onto the gates of the
/// architecture, with human-readable names for diagnostics.
#[derive(Clone, Debug)]
pub struct ParamLayout {
    arch: ArchConfig,
    total: usize,
    names: Vec<String>,
    segments: Vec<(Segment, std::ops::Range<usize>)>,
    crz_params: Vec<usize>,
}

impl ParamLayout {
    fn poke(&mut self, segment: Segment, len: usize) -> std::ops::Range<usize> {
        let start = self.total;
        self.total += len;
        let range = start..self.total;
        self.segments.push((segment, range.clone()));
        range
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn arch(&self) -> &ArchConfig {
        &self.arch
    }

    /// Name such as `enc.L2.crz.3-7` or `ancilla.u3.q6.phi`.
    pub fn name_of(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn segment_range(&self, segment: Segment) -> Option<std::ops::Range<usize>> {
        self.segments
            .iter()
            .find(|(s, _)| *s == segment)
            .map(|(_, r)| r.clone())
    }

    /// Flat indices of every CRZ angle (encoder, special, and decoder).
    pub fn crz_param_indices(&self) -> &[usize] {
        &self.crz_params
    }

    /// Indices of parameters belonging to any decoder-side stage
    /// (special layer included).
    pub fn decoder_side_indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (segment, range) in &self.segments {
            if matches!(
                segment,
                Segment::SpecialCrz | Segment::DecoderU3 { .. } | Segment::DecoderCrz { .. }
            ) {
                out.extend(range.clone());
            }
        }
        out
    }
}

/// Flat trainable parameter values (radians).
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVector {
    values: Vec<f64>,
}

impl ParamVector {
    pub fn from_values(values: Vec<f64>) -> Self {
        ParamVector { values }
    }

    pub fn zeros(len: usize) -> Self {
        ParamVector {
            values: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// The full trainable circuit for an architecture: an ordered gate
/// program plus its parameter layout. The first [`Circuit::encoder_len`]
/// gates produce the mid-state used by the compression objective.
#[derive(Clone, Debug)]
pub struct Circuit {
    arch: ArchConfig,
    layout: ParamLayout,
    gates: Vec<GateOp>,
    encoder_len: usize,
}

impl Circuit {
    pub fn new(arch: ArchConfig) -> Self {
        let n = arch.n_qubits();
        let mut layout = ParamLayout {
            arch,
            total: 0,
            names: Vec::new(),
            segments: Vec::new(),
            crz_params: Vec::new(),
        };
        let mut gates = Vec::new();

        let push_u3_block = |layout: &mut ParamLayout, gates: &mut Vec<GateOp>, segment: Segment, qubits: std::ops::Range<usize>, label: &str| {
            let range = layout.poke(segment, qubits.len() * 3);
            let mut p = range.start;
            for q in qubits {
                gates.push(GateOp::U3 {
                    qubit: q,
                    first_param: p,
                });
                for angle in ["theta", "phi", "lambda"] {
                    layout.names.push(format!("{label}.u3.q{q}.{angle}"));
                }
                p += 3;
            }
        };
        let push_crz_pairs = |layout: &mut ParamLayout, gates: &mut Vec<GateOp>, segment: Segment, pairs: Vec<(usize, usize)>, label: &str| {
            let range = layout.poke(segment, pairs.len());
            for (p, (i, j)) in range.zip(pairs) {
                gates.push(GateOp::Crz {
                    control: i,
                    target: j,
                    param: p,
                });
                layout.names.push(format!("{label}.crz.{i}-{j}"));
                layout.crz_params.push(p);
            }
        };

        let all_pairs = || -> Vec<(usize, usize)> {
            let mut pairs = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    pairs.push((i, j));
                }
            }
            pairs
        };

        for layer in 0..arch.n_layers() {
            push_u3_block(
                &mut layout,
                &mut gates,
                Segment::EncoderU3 { layer },
                0..n,
                &format!("enc.L{layer}"),
            );
            push_crz_pairs(
                &mut layout,
                &mut gates,
                Segment::EncoderCrz { layer },
                all_pairs(),
                &format!("enc.L{layer}"),
            );
        }

        // Latent refinement: RZ on each latent qubit.
        let latent_range = layout.poke(Segment::LatentRz, arch.n_latent());
        for (p, q) in latent_range.zip(0..arch.n_latent()) {
            gates.push(GateOp::Rz { qubit: q, param: p });
            layout.names.push(format!("latent.rz.q{q}"));
        }

        // Ancilla compression: U3 on each trash qubit.
        push_u3_block(
            &mut layout,
            &mut gates,
            Segment::AncillaU3,
            arch.n_latent()..n,
            "ancilla",
        );

        let encoder_len = gates.len();

        // Nearest-neighbor CRZ layer ahead of the decoder.
        let chain: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        push_crz_pairs(&mut layout, &mut gates, Segment::SpecialCrz, chain, "special");

        for layer in 0..arch.n_layers() {
            push_u3_block(
                &mut layout,
                &mut gates,
                Segment::DecoderU3 { layer },
                0..n,
                &format!("dec.L{layer}"),
            );
            push_crz_pairs(
                &mut layout,
                &mut gates,
                Segment::DecoderCrz { layer },
                all_pairs(),
                &format!("dec.L{layer}"),
            );
        }

        debug_assert_eq!(layout.names.len(), layout.total);
        Circuit {
            arch,
            layout,
            gates,
            encoder_len,
        }
    }

    pub fn arch(&self) -> &ArchConfig {
        &self.arch
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    /// Number of leading gates forming the encoder + latent + ancilla
    /// stages.
    pub fn encoder_len(&self) -> usize {
        self.encoder_len
    }

    fn check_inputs(&self, state: &StateVector, params: &ParamVector) -> Result<()> {
        if state.n_qubits() != self.arch.n_qubits() {
            return Err(Error::DimensionMismatch {
                left: state.n_qubits(),
                right: self.arch.n_qubits(),
            });
        }
        if params.len() != self.layout.total() {
            return Err(Error::ParamLength {
                got: params.len(),
                want: self.layout.total(),
            });
        }
        Ok(())
    }

    pub(crate) fn apply_gate(state: &mut StateVector, gate: &GateOp, params: &[f64]) {
        match *gate {
            GateOp::U3 { qubit, first_param } => {
                let m = crate::qsim::u3_matrix(
                    params[first_param],
                    params[first_param + 1],
                    params[first_param + 2],
                );
                state.kernel_single_qubit(qubit, m);
            }
            GateOp::Rz { qubit, param } => state.kernel_rz(qubit, params[param]),
            GateOp::Crz {
                control,
                target,
                param,
            } => state.kernel_crz(control, target, params[param]),
        }
    }

    /// Applies the inverse of a gate.
    pub(crate) fn apply_gate_inverse(state: &mut StateVector, gate: &GateOp, params: &[f64]) {
        match *gate {
            GateOp::U3 { qubit, first_param } => {
                let m = crate::qsim::u3_dagger_matrix(
                    params[first_param],
                    params[first_param + 1],
                    params[first_param + 2],
                );
                state.kernel_single_qubit(qubit, m);
            }
            GateOp::Rz { qubit, param } => state.kernel_rz(qubit, -params[param]),
            GateOp::Crz {
                control,
                target,
                param,
            } => state.kernel_crz(control, target, -params[param]),
        }
    }

    fn run(&self, input: &StateVector, params: &ParamVector, gates: &[GateOp]) -> StateVector {
        let mut state = input.clone();
        for gate in gates {
            Self::apply_gate(&mut state, gate, params.values());
        }
        state
    }

    /// Encoder + latent + ancilla stages; the result is the mid-state
    /// whose ancilla register the training objective drives to |0⟩.
    pub fn encode(&self, input: &StateVector, params: &ParamVector) -> Result<StateVector> {
        self.check_inputs(input, params)?;
        Ok(self.run(input, params, &self.gates[..self.encoder_len]))
    }

    /// Special entangling layer + decoder stages.
    pub fn decode(&self, mid: &StateVector, params: &ParamVector) -> Result<StateVector> {
        self.check_inputs(mid, params)?;
        Ok(self.run(mid, params, &self.gates[self.encoder_len..]))
    }

    /// Full pass; returns both the mid-state and the reconstructed output.
    pub fn forward(&self, input: &StateVector, params: &ParamVector) -> Result<(StateVector, StateVector)> {
        let mid = self.encode(input, params)?;
        let out = self.run(&mid, params, &self.gates[self.encoder_len..]);
        Ok((mid, out))
    }
}

/// Closed-form trainable parameter count for an 8-qubit architecture,
/// cross-checked against an explicit enumeration of the gate program.
pub fn param_count(arch: &ArchConfig) -> usize {
    let n = arch.n_qubits();
    let per_layer = 3 * n + n * (n - 1) / 2;
    let closed_form = 2 * per_layer * arch.n_layers()
        + arch.n_latent()
        + 3 * arch.n_ancilla()
        + (n - 1);
    let enumerated = Circuit::new(*arch).layout().total();
    assert_eq!(
        closed_form, enumerated,
        "parameter layout disagrees with the closed-form count"
    );
    closed_form
}

/// Draws all parameters uniformly from the open interval (-pi, pi),
/// deterministically for a fixed seed.
pub fn init_params(arch: &ArchConfig, seed: u64) -> ParamVector {
    let total = param_count(arch);
    let mut rng = SplitMix64::new(seed);
    let mut values = Vec::with_capacity(total);
    while values.len() < total {
        let angle = (2.0 * rng.next_f64() - 1.0) * std::f64::consts::PI;
        if angle > -std::f64::consts::PI {
            values.push(angle);
        }
    }
    ParamVector::from_values(values)
}
