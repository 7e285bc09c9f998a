use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense statevectors beyond this many qubits are refused.
pub const MAX_QUBITS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    /// Rotation about Y: `[[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]`.
    Ry { theta: f64, target: usize },
    /// Hadamard: `1/√2 [[1, 1], [1, −1]]`.
    H { target: usize },
    /// Flips `target` where `control` is 1.
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let check = |q: usize| {
            if q >= n_qubits {
                Err(Error::Argument(format!(
                    "qubit index {q} out of range for {n_qubits} qubits"
                )))
            } else {
                Ok(())
            }
        };
        match *self {
            Gate::Ry { theta, target } => {
                if !theta.is_finite() {
                    return Err(Error::Argument(format!("rotation angle {theta} is not finite")));
                }
                check(target)
            }
            Gate::H { target } => check(target),
            Gate::Cnot { control, target } => {
                check(control)?;
                check(target)?;
                if control == target {
                    return Err(Error::Argument(format!(
                        "CNOT control and target are both qubit {control}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// `2^n` complex amplitudes. Basis index bit `k` is the value of qubit `k`
/// (qubit 0 is the least significant bit).
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Argument(format!(
                "qubit count must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps explicit amplitudes; the vector must have length `2^n` and unit norm.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() || len > 1 << MAX_QUBITS {
            return Err(Error::Argument(format!(
                "amplitude count {len} is not 2^n for 1 <= n <= {MAX_QUBITS}"
            )));
        }
        let state = Self {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Value(format!("state norm² is {norm}, expected 1")));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match *gate {
            Gate::Ry { theta, target } => {
                let (s, c) = (theta / 2.0).sin_cos();
                self.apply_single(target, [[c, -s], [s, c]]);
            }
            Gate::H { target } => {
                let h = FRAC_1_SQRT_2;
                self.apply_single(target, [[h, h], [h, -h]]);
            }
            Gate::Cnot { control, target } => {
                let cbit = 1usize << control;
                let tbit = 1usize << target;
                for i in 0..self.amplitudes.len() {
                    if i & cbit != 0 && i & tbit == 0 {
                        self.amplitudes.swap(i, i | tbit);
                    }
                }
            }
        }
        Ok(())
    }

    /// Real 2×2 unitary on the amplitude pairs that differ only in `target`.
    fn apply_single(&mut self, target: usize, m: [[f64; 2]; 2]) {
        let bit = 1usize << target;
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | bit];
                self.amplitudes[i] = a0 * m[0][0] + a1 * m[0][1];
                self.amplitudes[i | bit] = a0 * m[1][0] + a1 * m[1][1];
            }
        }
    }

    /// `p(qubit k = 1)` for every qubit: the sum of `|a_i|²` over indices with
    /// bit `k` set.
    pub fn marginals(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.n_qubits];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let w = a.norm_sqr();
            for (k, pk) in p.iter_mut().enumerate() {
                if i >> k & 1 == 1 {
                    *pk += w;
                }
            }
        }
        p.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        p
    }
}
