//! Dense statevector simulation for circuits made of Rx, Rz and CNOT.
//!
//! Qubit `q` of an `n`-qubit register is bit `n - 1 - q` of the basis index,
//! so qubit 0 is the most significant bit and a ket written `|q0 q1 ... ⟩`
//! reads as the binary index. Rotations follow the convention
//! `Rx(θ) = exp(iθX/2)` and `Rz(θ) = exp(iθZ/2)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 20;

const LOAD_NORM_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

/// Rotation generator of a parameterised gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    /// `exp(iθ/2 · P)` on `target`, angle read from `param_index`.
    Rotation { axis: Axis, target: usize, param_index: usize },
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn rx(target: usize, param_index: usize) -> Self {
        Gate::Rotation { axis: Axis::X, target, param_index }
    }

    pub fn rz(target: usize, param_index: usize) -> Self {
        Gate::Rotation { axis: Axis::Z, target, param_index }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    pub fn param_index(&self) -> Option<usize> {
        match *self {
            Gate::Rotation { param_index, .. } => Some(param_index),
            Gate::Cnot { .. } => None,
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        match *self {
            Gate::Rotation { target, .. } => check_qubit(target, n_qubits),
            Gate::Cnot { control, target } => {
                check_qubit(control, n_qubits)?;
                check_qubit(target, n_qubits)?;
                if control == target {
                    return Err(Error::invalid(format!("CNOT control and target are both qubit {target}")));
                }
                Ok(())
            }
        }
    }
}

fn check_qubit(q: usize, n_qubits: usize) -> Result<()> {
    if q >= n_qubits {
        return Err(Error::invalid(format!("qubit index {q} out of range for {n_qubits} qubits")));
    }
    Ok(())
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::invalid(format!("n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amplitudes })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let mut s = Self::zero(n_qubits)?;
        if index >= s.dim() {
            return Err(Error::invalid(format!("basis index {index} out of range")));
        }
        s.amplitudes[0] = Complex64::new(0.0, 0.0);
        s.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Load explicit amplitudes. The length must be a power of two and the
    /// norm within 1e-8 of one; the residual is normalised away.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::invalid(format!("amplitude count {len} is not a power of two ≥ 2")));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::invalid(format!("{n_qubits} qubits exceeds the simulator bound")));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > LOAD_NORM_TOLERANCE {
            return Err(Error::invalid(format!("state norm {norm} deviates from 1")));
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    fn stride(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    /// Apply `gate` with rotation angle `angle` (ignored for CNOT).
    pub fn apply(&mut self, gate: &Gate, angle: f64) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.apply_unchecked(gate, angle);
        Ok(())
    }

    pub(crate) fn apply_unchecked(&mut self, gate: &Gate, angle: f64) {
        match *gate {
            Gate::Rotation { axis: Axis::X, target, .. } => self.rx(target, angle),
            Gate::Rotation { axis: Axis::Z, target, .. } => self.rz(target, angle),
            Gate::Cnot { control, target } => self.cnot(control, target),
        }
    }

    fn rx(&mut self, q: usize, theta: f64) {
        let (s, c) = (0.5 * theta).sin_cos();
        let is = Complex64::new(0.0, s);
        let stride = self.stride(q);
        for block in (0..self.dim()).step_by(2 * stride) {
            for i in block..block + stride {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i + stride];
                self.amplitudes[i] = a0 * c + a1 * is;
                self.amplitudes[i + stride] = a0 * is + a1 * c;
            }
        }
    }

    fn rz(&mut self, q: usize, theta: f64) {
        let (s, c) = (0.5 * theta).sin_cos();
        let up = Complex64::new(c, s);
        let down = Complex64::new(c, -s);
        let stride = self.stride(q);
        for block in (0..self.dim()).step_by(2 * stride) {
            for i in block..block + stride {
                self.amplitudes[i] *= up;
                self.amplitudes[i + stride] *= down;
            }
        }
    }

    fn cnot(&mut self, control: usize, target: usize) {
        let cbit = self.stride(control);
        let tbit = self.stride(target);
        for i in 0..self.dim() {
            if i & cbit != 0 && i & tbit == 0 {
                self.amplitudes.swap(i, i | tbit);
            }
        }
    }

    /// Apply the bare Pauli generator of a rotation axis.
    pub(crate) fn apply_pauli(&mut self, axis: Axis, q: usize) {
        let stride = self.stride(q);
        for block in (0..self.dim()).step_by(2 * stride) {
            for i in block..block + stride {
                match axis {
                    Axis::X => self.amplitudes.swap(i, i + stride),
                    Axis::Z => self.amplitudes[i + stride] = -self.amplitudes[i + stride],
                }
            }
        }
    }

    /// `⟨bra| P_q |self⟩` without materialising `P_q|self⟩`.
    pub(crate) fn pauli_matrix_element(&self, bra: &StateVector, axis: Axis, q: usize) -> Complex64 {
        let stride = self.stride(q);
        let mut acc = Complex64::new(0.0, 0.0);
        for block in (0..self.dim()).step_by(2 * stride) {
            for i in block..block + stride {
                let j = i + stride;
                match axis {
                    Axis::X => {
                        acc += bra.amplitudes[i].conj() * self.amplitudes[j];
                        acc += bra.amplitudes[j].conj() * self.amplitudes[i];
                    }
                    Axis::Z => {
                        acc += bra.amplitudes[i].conj() * self.amplitudes[i];
                        acc -= bra.amplitudes[j].conj() * self.amplitudes[j];
                    }
                }
            }
        }
        acc
    }

    /// `⟨Z_q⟩`, in `[-1, 1]`.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        check_qubit(qubit, self.n_qubits)?;
        Ok(self.expectation_z_unchecked(qubit))
    }

    pub(crate) fn expectation_z_unchecked(&self, qubit: usize) -> f64 {
        let bit = self.stride(qubit);
        let z: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| if i & bit == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum();
        z.clamp(-1.0, 1.0)
    }

    /// Probability of reading `|1⟩` on `qubit`: `(1 − ⟨Z⟩)/2`.
    pub fn prob_one(&self, qubit: usize) -> Result<f64> {
        Ok(z_to_prob_one(self.expectation_z(qubit)?))
    }
}

pub(crate) fn z_to_prob_one(z: f64) -> f64 {
    ((1.0 - z) * 0.5).clamp(0.0, 1.0)
}

/// `|0…0⟩` on `n_qubits` qubits.
pub fn init_state(n_qubits: usize) -> Result<StateVector> {
    StateVector::zero(n_qubits)
}

pub fn load_state(amplitudes: Vec<Complex64>) -> Result<StateVector> {
    StateVector::from_amplitudes(amplitudes)
}

pub fn apply_gate(mut state: StateVector, gate: &Gate, angle: f64) -> Result<StateVector> {
    state.apply(gate, angle)?;
    Ok(state)
}
