//! Brute-force oracle: composes the architecture's gates as explicit dense
//! matrices (built here from the gate definitions, independent of the
//! simulator's stride kernels) and checks the fast path against them.

use num_complex::Complex64;

use molqae::circuit::{ArchConfig, Circuit, ParamVector};
use molqae::qsim::StateVector;
use molqae::rng::SplitMix64;
use molqae::smiles::{prep_params, prepare_state, FeatureVector, FEATURE_LEN, PREP_QUBITS};

type Matrix = Vec<Vec<Complex64>>;

fn zeros(dim: usize) -> Matrix {
    vec![vec![Complex64::new(0.0, 0.0); dim]; dim]
}

fn identity(dim: usize) -> Matrix {
    let mut m = zeros(dim);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let dim = a.len();
    let mut out = zeros(dim);
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i][k];
            if aik.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..dim {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn matvec(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = zeros(ra * rb);
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// U3 written straight from its defining matrix.
fn u3(theta: f64, phi: f64, lambda: f64) -> Matrix {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    vec![
        vec![Complex64::new(c, 0.0), -Complex64::from_polar(s, lambda)],
        vec![
            Complex64::from_polar(s, phi),
            Complex64::from_polar(c, phi + lambda),
        ],
    ]
}

/// Lifts a single-qubit matrix onto qubit `q` of an `n`-qubit register
/// (little-endian: qubit 0 is the low bit of the basis index).
fn on_qubit(op: &Matrix, q: usize, n: usize) -> Matrix {
    let low = identity(1 << q);
    let high = identity(1 << (n - q - 1));
    kron(&high, &kron(op, &low))
}

/// Diagonal matrix of `RZ(a) = diag(e^{-ia/2}, e^{ia/2})` on qubit `q`.
fn rz_full(q: usize, alpha: f64, n: usize) -> Matrix {
    let mut m = identity(1 << n);
    for (k, row) in m.iter_mut().enumerate() {
        let sign = if k & (1 << q) == 0 { -1.0 } else { 1.0 };
        row[k] = Complex64::from_polar(1.0, sign * alpha / 2.0);
    }
    m
}

/// Controlled RZ on (control, target), phases only in the control=1 block.
fn crz_full(control: usize, target: usize, gamma: f64, n: usize) -> Matrix {
    let mut m = identity(1 << n);
    for (k, row) in m.iter_mut().enumerate() {
        if k & (1 << control) != 0 {
            let sign = if k & (1 << target) == 0 { -1.0 } else { 1.0 };
            row[k] = Complex64::from_polar(1.0, sign * gamma / 2.0);
        }
    }
    m
}

/// CNOT permutation matrix (an involution, so row r sources from the same
/// bit-flip map).
fn cnot_full(control: usize, target: usize, n: usize) -> Matrix {
    let mut m = zeros(1 << n);
    for (r, row) in m.iter_mut().enumerate() {
        let src = if r & (1 << control) != 0 {
            r ^ (1 << target)
        } else {
            r
        };
        row[src] = Complex64::new(1.0, 0.0);
    }
    m
}

/// Builds the full architecture unitaries (encoder prefix, decoder suffix)
/// from the stage definitions: per layer U3 on every qubit then CRZ over
/// all pairs (i, j), i < j, lower index as control; latent RZ; ancilla U3;
/// nearest-neighbor CRZ chain; decoder layers mirroring the encoder.
fn oracle_unitaries(arch: &ArchConfig, params: &[f64]) -> (Matrix, Matrix) {
    let n = arch.n_qubits();
    let dim = 1 << n;
    let mut next = 0usize;
    let mut take = || {
        let v = params[next];
        next += 1;
        v
    };

    let layer = |acc: &mut Matrix, take: &mut dyn FnMut() -> f64| {
        for q in 0..n {
            let (t, p, l) = (take(), take(), take());
            *acc = matmul(&on_qubit(&u3(t, p, l), q, n), acc);
        }
        for i in 0..n {
            for j in i + 1..n {
                *acc = matmul(&crz_full(i, j, take(), n), acc);
            }
        }
    };

    let mut encoder = identity(dim);
    for _ in 0..arch.n_layers() {
        layer(&mut encoder, &mut take);
    }
    for q in 0..arch.n_latent() {
        encoder = matmul(&rz_full(q, take(), n), &encoder);
    }
    for q in arch.n_latent()..n {
        let (t, p, l) = (take(), take(), take());
        encoder = matmul(&on_qubit(&u3(t, p, l), q, n), &encoder);
    }

    let mut decoder = identity(dim);
    for i in 0..n - 1 {
        decoder = matmul(&crz_full(i, i + 1, take(), n), &decoder);
    }
    for _ in 0..arch.n_layers() {
        layer(&mut decoder, &mut take);
    }
    assert_eq!(next, params.len(), "oracle consumed every parameter");
    (encoder, decoder)
}

fn random_params(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed);
    (0..len)
        .map(|_| (2.0 * rng.next_f64() - 1.0) * std::f64::consts::PI)
        .collect()
}

fn assert_state_matches(expected: &[Complex64], actual: &[Complex64], tol: f64) {
    assert_eq!(expected.len(), actual.len());
    for (i, (e, a)) in expected.iter().zip(actual).enumerate() {
        assert!(
            (e - a).norm() < tol,
            "amplitude {i}: oracle {e} vs simulator {a}"
        );
    }
}

#[test]
fn forward_matches_composed_matrices_on_two_qubits() {
    let arch = ArchConfig::new(2, 1, 1).unwrap();
    let circuit = Circuit::new(arch);
    let params = random_params(circuit.layout().total(), 2024);
    let (enc, dec) = oracle_unitaries(&arch, &params);
    let full = matmul(&dec, &enc);
    let pv = ParamVector::from_values(params);

    for basis in 0..4 {
        let input = StateVector::basis(2, basis).unwrap();
        let (mid, out) = circuit.forward(&input, &pv).unwrap();
        let expected_mid = matvec(&enc, input.amplitudes());
        let expected_out = matvec(&full, input.amplitudes());
        assert_state_matches(&expected_mid, mid.amplitudes(), 1e-12);
        assert_state_matches(&expected_out, out.amplitudes(), 1e-12);
    }
}

#[test]
fn forward_matches_oracle_on_three_qubits_two_layers() {
    let arch = ArchConfig::new(3, 2, 2).unwrap();
    let circuit = Circuit::new(arch);
    let params = random_params(circuit.layout().total(), 77);
    let (enc, dec) = oracle_unitaries(&arch, &params);
    let pv = ParamVector::from_values(params);

    // random normalized input
    let mut rng = SplitMix64::new(5);
    let mut amps: Vec<Complex64> = (0..8)
        .map(|_| Complex64::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    let input = StateVector::from_amplitudes(amps).unwrap();
    let (mid, out) = circuit.forward(&input, &pv).unwrap();
    let expected_mid = matvec(&enc, input.amplitudes());
    let expected_out = matvec(&dec, &expected_mid);
    assert_state_matches(&expected_mid, mid.amplitudes(), 1e-12);
    assert_state_matches(&expected_out, out.amplitudes(), 1e-12);
}

#[test]
fn state_preparation_matches_oracle_on_full_register() {
    // U3 per qubit then the CNOT ring applied for i = 0..7 in ascending
    // order, all as dense matrix products.
    let mut xi = [0.0; FEATURE_LEN];
    let mut rng = SplitMix64::new(99);
    for v in xi.iter_mut() {
        *v = rng.next_f64();
    }
    let features = FeatureVector::new(xi).unwrap();
    let angles = prep_params(&features);
    let fast = prepare_state(&angles);

    let n = PREP_QUBITS;
    let mut state = vec![Complex64::new(0.0, 0.0); 1 << n];
    state[0] = Complex64::new(1.0, 0.0);
    for (q, [t, p, l]) in angles.triples().iter().enumerate() {
        state = matvec(&on_qubit(&u3(*t, *p, *l), q, n), &state);
    }
    for i in 0..n {
        state = matvec(&cnot_full(i, (i + 1) % n, n), &state);
    }
    assert_state_matches(&state, fast.amplitudes(), 1e-12);
}

#[test]
fn forward_is_linear_in_the_input() {
    let arch = ArchConfig::new(2, 1, 1).unwrap();
    let circuit = Circuit::new(arch);
    let params = ParamVector::from_values(random_params(circuit.layout().total(), 8));

    let a = StateVector::basis(2, 1).unwrap();
    let b = StateVector::basis(2, 2).unwrap();
    let alpha = Complex64::new(0.6, 0.0);
    let beta = Complex64::new(0.0, 0.8);
    let combined: Vec<Complex64> = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| alpha * x + beta * y)
        .collect();
    let input = StateVector::from_amplitudes(combined).unwrap();

    let (_, out) = circuit.forward(&input, &params).unwrap();
    let (_, out_a) = circuit.forward(&a, &params).unwrap();
    let (_, out_b) = circuit.forward(&b, &params).unwrap();
    let expected: Vec<Complex64> = out_a
        .amplitudes()
        .iter()
        .zip(out_b.amplitudes())
        .map(|(x, y)| alpha * x + beta * y)
        .collect();
    assert_state_matches(&expected, out.amplitudes(), 1e-12);
}
