use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::foundation::Rng;
use crate::quantum::state::{Gate, QuantumState};

/// Qubits in the feature-transform block circuit.
pub const BLOCK_QUBITS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn ry(&mut self, theta: f64, target: usize) -> Result<&mut Self> {
        self.push(Gate::Ry { theta, target })
    }

    pub fn h(&mut self, target: usize) -> Result<&mut Self> {
        self.push(Gate::H { target })
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> Result<&mut Self> {
        self.push(Gate::Cnot { control, target })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }
}

/// Rotation angles `θ_i = 2·arccos(x_i)`, each in `[0, π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingAngles(Vec<f64>);

impl EncodingAngles {
    pub fn thetas(&self) -> &[f64] {
        &self.0
    }
}

/// Angle-encodes features. Inputs are clamped to `[0, 1]` first, so the
/// encoded qubit is `x|0⟩ + √(1−x²)|1⟩`.
pub fn encode_angles(x: &[f64]) -> EncodingAngles {
    EncodingAngles(
        x.iter()
            .map(|&v| {
                let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
                2.0 * v.acos()
            })
            .collect(),
    )
}

/// `Ry(θ_i)` on qubit `i`, then `H` on every qubit, then the CNOT chain
/// `0→1, 1→2, 2→3, 3→4`: 14 gates in total.
pub fn build_block_circuit(angles: &EncodingAngles) -> Result<Circuit> {
    if angles.0.len() != BLOCK_QUBITS {
        return Err(Error::Argument(format!(
            "block circuit takes {BLOCK_QUBITS} angles, got {}",
            angles.0.len()
        )));
    }
    let mut c = Circuit::new(BLOCK_QUBITS);
    for (q, &theta) in angles.0.iter().enumerate() {
        c.ry(theta, q)?;
    }
    for q in 0..BLOCK_QUBITS {
        c.h(q)?;
    }
    for q in 0..BLOCK_QUBITS - 1 {
        c.cnot(q, q + 1)?;
    }
    Ok(c)
}

/// Runs `circuit` on `|0…0⟩`.
pub fn simulate(circuit: &Circuit) -> Result<QuantumState> {
    let mut state = QuantumState::zero(circuit.n_qubits)?;
    for g in &circuit.gates {
        state.apply(g)?;
    }
    Ok(state)
}

pub fn marginals(state: &QuantumState) -> Vec<f64> {
    state.marginals()
}

/// Bitstring histogram from repeated measurement. Keys print the most
/// significant qubit first, so qubit 0 is the last character.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementCounts {
    pub n_qubits: usize,
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
}

impl MeasurementCounts {
    /// Observed frequency of `1` on every qubit.
    pub fn qubit_frequencies(&self) -> Vec<f64> {
        let mut ones = vec![0u64; self.n_qubits];
        for (key, &n) in &self.counts {
            for (k, ch) in key.bytes().rev().enumerate() {
                if ch == b'1' {
                    ones[k] += n;
                }
            }
        }
        ones.iter().map(|&o| o as f64 / self.shots as f64).collect()
    }

    /// Frequency of every basis index `0..2^n` (index bit k = qubit k).
    pub fn basis_frequencies(&self) -> Vec<f64> {
        let mut out = vec![0.0; 1 << self.n_qubits];
        for (key, &n) in &self.counts {
            let idx = usize::from_str_radix(key, 2).expect("keys are bitstrings");
            out[idx] = n as f64 / self.shots as f64;
        }
        out
    }
}

/// Basis indices drawn i.i.d. from `|a_i|²` by inverse CDF.
pub fn sample_indices(state: &QuantumState, shots: u64, rng: &mut Rng) -> Result<Vec<usize>> {
    if shots == 0 {
        return Err(Error::Argument("shots must be at least 1".into()));
    }
    let mut cdf = Vec::with_capacity(state.amplitudes().len());
    let mut acc = 0.0;
    for p in state.probabilities() {
        acc += p;
        cdf.push(acc);
    }
    let last = cdf.len() - 1;
    Ok((0..shots)
        .map(|_| {
            let u = rng.next_f64() * acc;
            cdf.partition_point(|&c| c <= u).min(last)
        })
        .collect())
}

pub fn sample_counts(state: &QuantumState, shots: u64, rng: &mut Rng) -> Result<MeasurementCounts> {
    let n = state.n_qubits();
    let mut counts = BTreeMap::new();
    for idx in sample_indices(state, shots, rng)? {
        *counts.entry(format!("{idx:0n$b}")).or_insert(0) += 1;
    }
    Ok(MeasurementCounts {
        n_qubits: n,
        shots,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn angle_fixtures() {
        let a = encode_angles(&[1.0, 0.0, 0.5, 1.7, -0.2]);
        let t = a.thetas();
        assert_eq!(t[0], 0.0);
        assert!((t[1] - PI).abs() < 1e-15);
        assert!((t[2] - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!((t[2] - 2.094395).abs() < 1e-6);
        assert_eq!(t[3], 0.0);
        assert!((t[4] - PI).abs() < 1e-15);
    }

    #[test]
    fn encoded_qubit_amplitudes() {
        for x in [0.0, 0.2, 0.5, FRAC_1_SQRT_2, 0.9, 1.0] {
            let theta = encode_angles(&[x]).thetas()[0];
            let mut c = Circuit::new(1);
            c.ry(theta, 0).unwrap();
            let s = simulate(&c).unwrap();
            assert!((s.amplitudes()[0].re - x).abs() < 1e-12);
            assert!((s.amplitudes()[1].re - (1.0 - x * x).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn block_layout() {
        let c = build_block_circuit(&encode_angles(&[0.1, 0.2, 0.3, 0.4, 0.5])).unwrap();
        let g = c.gates();
        assert_eq!(g.len(), 14);
        for q in 0..5 {
            assert!(matches!(g[q], Gate::Ry { target, .. } if target == q));
            assert_eq!(g[5 + q], Gate::H { target: q });
        }
        for q in 0..4 {
            assert_eq!(g[10 + q], Gate::Cnot { control: q, target: q + 1 });
        }
        assert!(build_block_circuit(&encode_angles(&[0.1; 4])).is_err());
    }

    #[test]
    fn simulate_fixtures() {
        let empty = simulate(&Circuit::new(5)).unwrap();
        assert_eq!(empty.probabilities()[0], 1.0);

        let ones = simulate(&build_block_circuit(&encode_angles(&[1.0; 5])).unwrap()).unwrap();
        for p in ones.probabilities() {
            assert!((p - 1.0 / 32.0).abs() < 1e-12);
        }

        let s = simulate(&build_block_circuit(&encode_angles(&[FRAC_1_SQRT_2; 5])).unwrap()).unwrap();
        assert!((s.probabilities()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ghz_spread_marginals() {
        let x = [1.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2];
        let s = simulate(&build_block_circuit(&encode_angles(&x)).unwrap()).unwrap();
        for p in marginals(&s) {
            assert!((p - 0.5).abs() < 1e-12);
        }
        let probs = s.probabilities();
        assert!((probs[0] - 0.5).abs() < 1e-12);
        assert!((probs[31] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn basis_state_sampling() {
        let s = QuantumState::zero(5).unwrap();
        let c = sample_counts(&s, 777, &mut Rng::seed_from_u64(0)).unwrap();
        assert_eq!(c.counts.len(), 1);
        assert_eq!(c.counts["00000"], 777);
        assert!(sample_counts(&s, 0, &mut Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn bitstrings_put_qubit_zero_last() {
        let mut c = Circuit::new(3);
        c.ry(PI, 0).unwrap();
        let s = simulate(&c).unwrap();
        let counts = sample_counts(&s, 5, &mut Rng::seed_from_u64(0)).unwrap();
        assert_eq!(counts.counts["001"], 5);
        assert_eq!(counts.qubit_frequencies(), vec![1.0, 0.0, 0.0]);
        assert_eq!(counts.basis_frequencies()[1], 1.0);
    }

    #[test]
    fn half_probability_within_three_sigma() {
        let mut c = Circuit::new(1);
        c.h(0).unwrap();
        let s = simulate(&c).unwrap();
        let counts = sample_counts(&s, 10_000, &mut Rng::seed_from_u64(21)).unwrap();
        let f = counts.qubit_frequencies()[0];
        assert!((f - 0.5).abs() < 0.015, "{f}");
        let again = sample_counts(&s, 10_000, &mut Rng::seed_from_u64(21)).unwrap();
        assert_eq!(counts, again);
        assert_eq!(counts.counts.values().sum::<u64>(), 10_000);
    }
}
