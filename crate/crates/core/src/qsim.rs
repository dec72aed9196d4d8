//! Dense statevector simulation.
//!
//! A [`StateVector`] holds the 2^n complex amplitudes of a pure n-qubit
//! state. Bit ordering is little-endian: qubit 0 is the least-significant
//! bit of the basis index, so the basis states with qubits `{k..n}` all in
//! |0⟩ are exactly the indices below 2^k.
//!
//! Gate kernels update amplitudes in place with stride iteration; no full
//! 2^n x 2^n matrix is ever formed. Phase conventions are fixed as
//! `RZ(a) = diag(e^{-ia/2}, e^{+ia/2})`, with CRZ the controlled version of
//! that RZ.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Practical cap on register size; memory grows as 2^n.
pub const MAX_QUBITS: usize = 16;

/// Pure quantum state of `n_qubits` qubits as 2^n complex amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0...0⟩ on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidQubitCount {
                n: n_qubits,
                max: MAX_QUBITS,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// Basis state |index⟩ (little-endian bit layout).
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let mut state = Self::zero(n_qubits)?;
        if index >= state.amps.len() {
            return Err(Error::DimensionMismatch {
                left: index,
                right: state.amps.len(),
            });
        }
        state.amps[0] = Complex64::new(0.0, 0.0);
        state.amps[index] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    /// Builds a state from raw amplitudes. The length must be a power of
    /// two; the vector is not renormalized, callers are expected to pass a
    /// unit-norm state.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() || len > (1 << MAX_QUBITS) {
            return Err(Error::DimensionMismatch {
                left: len,
                right: 1 << MAX_QUBITS,
            });
        }
        Ok(StateVector {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            Err(Error::QubitOutOfRange {
                q,
                n: self.n_qubits,
            })
        } else {
            Ok(())
        }
    }

    fn check_pair(&self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::DuplicateQubit { q: control });
        }
        Ok(())
    }

    /// Applies an arbitrary single-qubit operator given by its row-major
    /// 2x2 matrix `[m00, m01, m10, m11]`.
    pub fn apply_single_qubit(&mut self, q: usize, m: [Complex64; 4]) -> Result<()> {
        self.check_qubit(q)?;
        self.kernel_single_qubit(q, m);
        Ok(())
    }

    #[inline]
    pub(crate) fn kernel_single_qubit(&mut self, q: usize, m: [Complex64; 4]) {
        let step = 1usize << q;
        let len = self.amps.len();
        let mut base = 0;
        while base < len {
            for offset in base..base + step {
                let j = offset;
                let k = offset + step;
                let a = self.amps[j];
                let b = self.amps[k];
                self.amps[j] = m[0] * a + m[1] * b;
                self.amps[k] = m[2] * a + m[3] * b;
            }
            base += 2 * step;
        }
    }

    /// U3 rotation with the matrix
    /// `[[cos(t/2), -e^{il} sin(t/2)], [e^{ip} sin(t/2), e^{i(p+l)} cos(t/2)]]`.
    pub fn apply_u3(&mut self, q: usize, theta: f64, phi: f64, lambda: f64) -> Result<()> {
        self.check_qubit(q)?;
        self.kernel_single_qubit(q, u3_matrix(theta, phi, lambda));
        Ok(())
    }

    /// Z-axis rotation `diag(e^{-ia/2}, e^{+ia/2})`.
    pub fn apply_rz(&mut self, q: usize, alpha: f64) -> Result<()> {
        self.check_qubit(q)?;
        self.kernel_rz(q, alpha);
        Ok(())
    }

    #[inline]
    pub(crate) fn kernel_rz(&mut self, q: usize, alpha: f64) {
        let phase0 = Complex64::from_polar(1.0, -alpha / 2.0);
        let phase1 = Complex64::from_polar(1.0, alpha / 2.0);
        let mask = 1usize << q;
        for (k, amp) in self.amps.iter_mut().enumerate() {
            *amp *= if k & mask == 0 { phase0 } else { phase1 };
        }
    }

    /// CNOT with the given control and target.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_pair(control, target)?;
        self.kernel_cnot(control, target);
        Ok(())
    }

    #[inline]
    pub(crate) fn kernel_cnot(&mut self, control: usize, target: usize) {
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for k in 0..self.amps.len() {
            if k & cmask != 0 && k & tmask == 0 {
                self.amps.swap(k, k | tmask);
            }
        }
    }

    /// Controlled RZ: applies `RZ(gamma)` on the target within the
    /// control=1 subspace and leaves the control=0 subspace untouched.
    pub fn apply_crz(&mut self, control: usize, target: usize, gamma: f64) -> Result<()> {
        self.check_pair(control, target)?;
        self.kernel_crz(control, target, gamma);
        Ok(())
    }

    #[inline]
    pub(crate) fn kernel_crz(&mut self, control: usize, target: usize, gamma: f64) {
        let phase0 = Complex64::from_polar(1.0, -gamma / 2.0);
        let phase1 = Complex64::from_polar(1.0, gamma / 2.0);
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for (k, amp) in self.amps.iter_mut().enumerate() {
            if k & cmask != 0 {
                *amp *= if k & tmask == 0 { phase0 } else { phase1 };
            }
        }
    }

    /// ⟨self|other⟩ = Σ conj(self_k) · other_k.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.amps.len() != other.amps.len() {
            return Err(Error::DimensionMismatch {
                left: self.amps.len(),
                right: other.amps.len(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.amps.iter().zip(other.amps.iter()) {
            acc += a.conj() * b;
        }
        Ok(acc)
    }

    /// Probability that every listed qubit measures |0⟩: the summed
    /// |amplitude|^2 over basis states whose bits at those positions are
    /// all zero. An empty list yields the total norm (1 for a normalized
    /// state).
    pub fn prob_all_zero(&self, qubits: &[usize]) -> Result<f64> {
        let mut mask = 0usize;
        for &q in qubits {
            self.check_qubit(q)?;
            mask |= 1 << q;
        }
        let mut total = 0.0;
        for (k, amp) in self.amps.iter().enumerate() {
            if k & mask == 0 {
                total += amp.norm_sqr();
            }
        }
        Ok(total)
    }
}

/// Row-major U3 matrix for the given Euler-like angles.
pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> [Complex64; 4] {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    [
        Complex64::new(c, 0.0),
        -Complex64::from_polar(s, lambda),
        Complex64::from_polar(s, phi),
        Complex64::from_polar(c, phi + lambda),
    ]
}

/// Conjugate transpose of [`u3_matrix`].
pub fn u3_dagger_matrix(theta: f64, phi: f64, lambda: f64) -> [Complex64; 4] {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    [
        Complex64::new(c, 0.0),
        Complex64::from_polar(s, -phi),
        -Complex64::from_polar(s, -lambda),
        Complex64::from_polar(c, -(phi + lambda)),
    ]
}

/// Gate families used by the architecture.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateKind {
    U3,
    Rz,
    Cnot,
    Crz,
}

/// A concrete gate: kind, qubit operands, and rotation angles.
///
/// Used for validation and for materializing the explicit (2x2 or 4x4)
/// unitary in property checks; the simulation path never builds these
/// matrices.
#[derive(Clone, Debug)]
pub struct GateInstance {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub angles: Vec<f64>,
}

impl GateInstance {
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let (want_qubits, want_angles) = match self.kind {
            GateKind::U3 => (1, 3),
            GateKind::Rz => (1, 1),
            GateKind::Cnot => (2, 0),
            GateKind::Crz => (2, 1),
        };
        if self.qubits.len() != want_qubits || self.angles.len() != want_angles {
            return Err(Error::Config(format!(
                "{:?} gate takes {want_qubits} qubit(s) and {want_angles} angle(s)",
                self.kind
            )));
        }
        for &q in &self.qubits {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { q, n: n_qubits });
            }
        }
        if want_qubits == 2 && self.qubits[0] == self.qubits[1] {
            return Err(Error::DuplicateQubit { q: self.qubits[0] });
        }
        Ok(())
    }

    /// Dense row-major matrix of the gate: 2x2 for single-qubit kinds,
    /// 4x4 for two-qubit kinds (basis order |control,target⟩ = 00,01,10,11
    /// with the target as the low bit).
    pub fn matrix(&self) -> Vec<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        match self.kind {
            GateKind::U3 => u3_matrix(self.angles[0], self.angles[1], self.angles[2]).to_vec(),
            GateKind::Rz => {
                let a = self.angles[0];
                vec![
                    Complex64::from_polar(1.0, -a / 2.0),
                    zero,
                    zero,
                    Complex64::from_polar(1.0, a / 2.0),
                ]
            }
            GateKind::Cnot => {
                let mut m = vec![zero; 16];
                // |00⟩→|00⟩, |01⟩→|01⟩, |10⟩→|11⟩, |11⟩→|10⟩
                m[0] = one;
                m[5] = one;
                m[11] = one;
                m[14] = one;
                m
            }
            GateKind::Crz => {
                let g = self.angles[0];
                let mut m = vec![zero; 16];
                m[0] = one;
                m[5] = one;
                m[10] = Complex64::from_polar(1.0, -g / 2.0);
                m[15] = Complex64::from_polar(1.0, g / 2.0);
                m
            }
        }
    }

    /// Applies the gate to a state.
    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        match self.kind {
            GateKind::U3 => {
                state.apply_u3(self.qubits[0], self.angles[0], self.angles[1], self.angles[2])
            }
            GateKind::Rz => state.apply_rz(self.qubits[0], self.angles[0]),
            GateKind::Cnot => state.apply_cnot(self.qubits[0], self.qubits[1]),
            GateKind::Crz => state.apply_crz(self.qubits[0], self.qubits[1], self.angles[0]),
        }
    }
}

/// Max-abs entry of M†M − I for a row-major square matrix; 0 for an exact
/// unitary.
pub fn unitarity_defect(matrix: &[Complex64]) -> f64 {
    let dim = (matrix.len() as f64).sqrt() as usize;
    assert_eq!(dim * dim, matrix.len());
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                acc += matrix[k * dim + i].conj() * matrix[k * dim + j];
            }
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((acc - Complex64::new(expect, 0.0)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn assert_close(a: Complex64, b: Complex64) {
        assert!((a - b).norm() < 1e-12, "{a} != {b}");
    }

    #[test]
    fn zero_state_layout() {
        let s = StateVector::zero(1).unwrap();
        assert_eq!(s.amplitudes().len(), 2);
        assert_close(s.amplitudes()[0], Complex64::new(1.0, 0.0));

        let s = StateVector::zero(3).unwrap();
        assert_eq!(s.amplitudes().len(), 8);
        assert_close(s.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert!(s.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));

        let s = StateVector::zero(8).unwrap();
        assert_eq!(s.amplitudes().len(), 256);
    }

    #[test]
    fn zero_state_rejects_bad_counts() {
        assert!(matches!(
            StateVector::zero(0),
            Err(Error::InvalidQubitCount { .. })
        ));
        assert!(matches!(
            StateVector::zero(17),
            Err(Error::InvalidQubitCount { .. })
        ));
    }

    #[test]
    fn u3_identity_and_pauli_x() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_u3(0, 0.0, 0.0, 0.0).unwrap();
        assert_close(s.amplitudes()[0], Complex64::new(1.0, 0.0));

        // U3(pi, 0, pi) reduces to Pauli-X.
        let mut s = StateVector::zero(1).unwrap();
        s.apply_u3(0, PI, 0.0, PI).unwrap();
        assert!(s.amplitudes()[0].norm() < 1e-15);
        assert_close(s.amplitudes()[1], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn u3_half_turn_makes_equal_superposition() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_u3(0, FRAC_PI_2, 0.0, 0.0).unwrap();
        let expect = (PI / 4.0).cos();
        assert!((s.amplitudes()[0].re - expect).abs() < 1e-12);
        assert!((s.amplitudes()[1].re - expect).abs() < 1e-12);
    }

    #[test]
    fn u3_rejects_out_of_range_qubit() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(matches!(
            s.apply_u3(2, 1.0, 0.0, 0.0),
            Err(Error::QubitOutOfRange { q: 2, n: 2 })
        ));
    }

    #[test]
    fn rz_phases() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_rz(0, 0.0).unwrap();
        assert_close(s.amplitudes()[0], Complex64::new(1.0, 0.0));

        // RZ(2pi) is -I (global phase).
        let mut s = StateVector::zero(1).unwrap();
        s.apply_rz(0, 2.0 * PI).unwrap();
        assert_close(s.amplitudes()[0], Complex64::new(-1.0, 0.0));

        // RZ(pi) on |+⟩ splits phases as e^{∓i pi/2}.
        let mut s = StateVector::zero(1).unwrap();
        s.apply_u3(0, FRAC_PI_2, 0.0, 0.0).unwrap();
        s.apply_rz(0, PI).unwrap();
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        assert_close(s.amplitudes()[0], Complex64::new(0.0, -inv_sqrt2));
        assert_close(s.amplitudes()[1], Complex64::new(0.0, inv_sqrt2));
    }

    #[test]
    fn cnot_basic_action() {
        // control=1, target=0 flips the target.
        let mut s = StateVector::basis(2, 0b01).unwrap(); // qubit0 = 1
        s.apply_cnot(0, 1).unwrap();
        assert_close(s.amplitudes()[0b11], Complex64::new(1.0, 0.0));

        // control=0 leaves everything alone.
        let mut s = StateVector::zero(2).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_close(s.amplitudes()[0], Complex64::new(1.0, 0.0));

        // involution
        let mut s = StateVector::basis(2, 0b01).unwrap();
        s.apply_cnot(0, 1).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_close(s.amplitudes()[0b01], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn cnot_rejects_equal_indices() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(matches!(
            s.apply_cnot(1, 1),
            Err(Error::DuplicateQubit { q: 1 })
        ));
    }

    #[test]
    fn crz_control_subspaces() {
        // control=0 subspace untouched
        let mut s = StateVector::basis(2, 0b10).unwrap(); // control (qubit 0) = 0
        s.apply_crz(0, 1, 1.234).unwrap();
        assert_close(s.amplitudes()[0b10], Complex64::new(1.0, 0.0));

        // CRZ(pi) on |11⟩ gives e^{i pi/2}|11⟩
        let mut s = StateVector::basis(2, 0b11).unwrap();
        s.apply_crz(0, 1, PI).unwrap();
        assert_close(s.amplitudes()[0b11], Complex64::new(0.0, 1.0));

        // inverse pair
        let mut s = StateVector::basis(2, 0b11).unwrap();
        s.apply_crz(0, 1, 0.77).unwrap();
        s.apply_crz(0, 1, -0.77).unwrap();
        assert_close(s.amplitudes()[0b11], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn inner_product_cases() {
        let zero = StateVector::zero(1).unwrap();
        assert_close(
            zero.inner_product(&zero).unwrap(),
            Complex64::new(1.0, 0.0),
        );

        let one = StateVector::basis(1, 1).unwrap();
        assert_close(zero.inner_product(&one).unwrap(), Complex64::new(0.0, 0.0));

        let mut plus = StateVector::zero(1).unwrap();
        plus.apply_u3(0, FRAC_PI_2, 0.0, 0.0).unwrap();
        let overlap = zero.inner_product(&plus).unwrap();
        assert!((overlap.re - 1.0 / 2.0_f64.sqrt()).abs() < 1e-12);

        let two = StateVector::zero(2).unwrap();
        assert!(matches!(
            zero.inner_product(&two),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn prob_all_zero_cases() {
        let s = StateVector::zero(8).unwrap();
        assert_eq!(s.prob_all_zero(&[4, 5, 6, 7]).unwrap(), 1.0);

        // qubit 5 deterministically |1⟩
        let s = StateVector::basis(8, 1 << 5).unwrap();
        assert_eq!(s.prob_all_zero(&[4, 5, 6, 7]).unwrap(), 0.0);

        // (|00⟩+|01⟩)/sqrt(2) with qubit 1 as the high bit
        let inv = 1.0 / 2.0_f64.sqrt();
        let s = StateVector::from_amplitudes(vec![
            Complex64::new(inv, 0.0),
            Complex64::new(inv, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        assert!((s.prob_all_zero(&[1]).unwrap() - 1.0).abs() < 1e-12);
        assert!((s.prob_all_zero(&[0]).unwrap() - 0.5).abs() < 1e-12);

        // empty set: total norm
        assert!((s.prob_all_zero(&[]).unwrap() - 1.0).abs() < 1e-12);

        assert!(s.prob_all_zero(&[9]).is_err());
    }

    #[test]
    fn gate_matrices_are_unitary() {
        let gates = [
            GateInstance {
                kind: GateKind::U3,
                qubits: vec![0],
                angles: vec![0.3, -1.2, 2.6],
            },
            GateInstance {
                kind: GateKind::Rz,
                qubits: vec![0],
                angles: vec![0.9],
            },
            GateInstance {
                kind: GateKind::Cnot,
                qubits: vec![0, 1],
                angles: vec![],
            },
            GateInstance {
                kind: GateKind::Crz,
                qubits: vec![0, 1],
                angles: vec![-2.4],
            },
        ];
        for gate in &gates {
            gate.validate(2).unwrap();
            assert!(unitarity_defect(&gate.matrix()) < 1e-12);
        }
    }

    #[test]
    fn gate_instance_validation_failures() {
        let bad_angles = GateInstance {
            kind: GateKind::U3,
            qubits: vec![0],
            angles: vec![0.1],
        };
        assert!(bad_angles.validate(2).is_err());

        let dup = GateInstance {
            kind: GateKind::Crz,
            qubits: vec![1, 1],
            angles: vec![0.1],
        };
        assert!(dup.validate(2).is_err());
    }

    #[test]
    fn disjoint_qubit_gates_commute() {
        let mut a = StateVector::basis(3, 0b101).unwrap();
        let mut b = a.clone();
        a.apply_u3(0, 0.4, 1.0, -0.3).unwrap();
        a.apply_u3(1, -0.8, 0.2, 0.9).unwrap();
        b.apply_u3(1, -0.8, 0.2, 0.9).unwrap();
        b.apply_u3(0, 0.4, 1.0, -0.3).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn u3_dagger_inverts_u3() {
        let mut s = StateVector::basis(2, 0b10).unwrap();
        s.apply_u3(1, 0.7, -0.4, 1.9).unwrap();
        s.apply_single_qubit(1, u3_dagger_matrix(0.7, -0.4, 1.9))
            .unwrap();
        assert!((s.amplitudes()[0b10] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }
}
