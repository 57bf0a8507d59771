//! Hardware-efficient variational classifier.
//!
//! Each layer applies a rotation triple (default Rx, Rz, Rx) to every qubit,
//! then a CNOT ladder `CNOT(q, q+1)` for `q = 0..n-2`. A final column of
//! single rotations (default Rx) follows the last layer. Parameter indices
//! are consecutive in circuit order, giving `3·n·L + n` angles; eight qubits
//! and ten layers give 248.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qsim::{z_to_prob_one, Axis, Gate, StateVector};

#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub readout_qubit: usize,
    pub layer_rotations: [Axis; 3],
    pub terminal_rotation: Axis,
}

impl Default for AnsatzSpec {
    fn default() -> Self {
        Self::new(8, 10)
    }
}

impl AnsatzSpec {
    pub fn new(n_qubits: usize, n_layers: usize) -> Self {
        Self {
            n_qubits,
            n_layers,
            readout_qubit: 0,
            layer_rotations: [Axis::X, Axis::Z, Axis::X],
            terminal_rotation: Axis::X,
        }
    }

    pub fn param_count(&self) -> usize {
        param_count(self)
    }
}

pub fn param_count(spec: &AnsatzSpec) -> usize {
    3 * spec.n_qubits * spec.n_layers + spec.n_qubits
}

/// Rotation angles in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn distance(&self, other: &ParameterVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }
}

impl From<Vec<f64>> for ParameterVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// A parameterised circuit with a single Z readout.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    n_params: usize,
    readout_qubit: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    /// Build from an explicit gate list. Every parameter index below
    /// `n_params` may be used any number of times.
    pub fn new(n_qubits: usize, n_params: usize, readout_qubit: usize, gates: Vec<Gate>) -> Result<Self> {
        if readout_qubit >= n_qubits {
            return Err(Error::invalid(format!("readout qubit {readout_qubit} out of range")));
        }
        for g in &gates {
            g.validate(n_qubits)?;
            if let Some(p) = g.param_index() {
                if p >= n_params {
                    return Err(Error::invalid(format!("parameter index {p} ≥ parameter count {n_params}")));
                }
            }
        }
        Ok(Self { n_qubits, n_params, readout_qubit, gates })
    }

    pub fn from_spec(spec: &AnsatzSpec) -> Result<Self> {
        Self::new(spec.n_qubits, param_count(spec), spec.readout_qubit, build_circuit(spec)?)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn readout_qubit(&self) -> usize {
        self.readout_qubit
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    fn check(&self, params: &[f64], input: &StateVector) -> Result<()> {
        if params.len() != self.n_params {
            return Err(Error::invalid(format!(
                "expected {} parameters, got {}",
                self.n_params,
                params.len()
            )));
        }
        if input.n_qubits() != self.n_qubits {
            return Err(Error::invalid(format!(
                "input has {} qubits, circuit has {}",
                input.n_qubits(),
                self.n_qubits
            )));
        }
        Ok(())
    }

    fn evolve(&self, params: &[f64], state: &mut StateVector) {
        for g in &self.gates {
            let angle = g.param_index().map_or(0.0, |p| params[p]);
            state.apply_unchecked(g, angle);
        }
    }

    /// Output state of the circuit on `input`.
    pub fn run(&self, params: &[f64], input: &StateVector) -> Result<StateVector> {
        self.check(params, input)?;
        let mut state = input.clone();
        self.evolve(params, &mut state);
        Ok(state)
    }

    /// Class-1 probability `p₁` on the readout qubit.
    pub fn forward(&self, params: &[f64], input: &StateVector) -> Result<f64> {
        let out = self.run(params, input)?;
        Ok(z_to_prob_one(out.expectation_z_unchecked(self.readout_qubit)))
    }

    /// `p₁` together with `∂p₁/∂θ`, by reverse-mode (adjoint) propagation
    /// through the statevector. Costs about three forward passes.
    pub fn forward_with_gradient(&self, params: &[f64], input: &StateVector) -> Result<(f64, Vec<f64>)> {
        self.check(params, input)?;
        let mut psi = input.clone();
        self.evolve(params, &mut psi);
        let z = psi.expectation_z_unchecked(self.readout_qubit);

        // λ = Z_r |ψ⟩; walking backwards, both ψ and λ are un-computed gate by gate.
        let mut lambda = psi.clone();
        lambda.apply_pauli(Axis::Z, self.readout_qubit);
        let mut dz = vec![0.0; self.n_params];
        for g in self.gates.iter().rev() {
            let angle = g.param_index().map_or(0.0, |p| params[p]);
            if let Gate::Rotation { axis, target, param_index } = *g {
                // d/dθ exp(iθP/2) = (i/2) P exp(iθP/2), so
                // ∂⟨Z⟩/∂θ = 2 Re⟨λ|(i/2)P|ψ⟩ = −Im⟨λ|P|ψ⟩.
                let elem: Complex64 = psi.pauli_matrix_element(&lambda, axis, target);
                dz[param_index] -= elem.im;
            }
            psi.apply_unchecked(g, -angle);
            lambda.apply_unchecked(g, -angle);
        }
        let grad = dz.into_iter().map(|d| -0.5 * d).collect();
        Ok((z_to_prob_one(z), grad))
    }
}

/// Gate list of the layered ansatz, in application order.
pub fn build_circuit(spec: &AnsatzSpec) -> Result<Vec<Gate>> {
    if spec.n_qubits < 2 {
        return Err(Error::invalid(format!("ansatz needs at least 2 qubits, got {}", spec.n_qubits)));
    }
    if spec.readout_qubit >= spec.n_qubits {
        return Err(Error::invalid(format!("readout qubit {} out of range", spec.readout_qubit)));
    }
    let mut gates = Vec::with_capacity(spec.n_layers * 4 * spec.n_qubits + spec.n_qubits);
    let mut next_param = 0;
    let mut rotation = |axis: Axis, target: usize| {
        let g = Gate::Rotation { axis, target, param_index: next_param };
        next_param += 1;
        g
    };
    for _ in 0..spec.n_layers {
        for q in 0..spec.n_qubits {
            for &axis in &spec.layer_rotations {
                gates.push(rotation(axis, q));
            }
        }
        for q in 0..spec.n_qubits - 1 {
            gates.push(Gate::cnot(q, q + 1));
        }
    }
    for q in 0..spec.n_qubits {
        gates.push(rotation(spec.terminal_rotation, q));
    }
    Ok(gates)
}

pub fn forward(spec: &AnsatzSpec, params: &ParameterVector, input: &StateVector) -> Result<f64> {
    Circuit::from_spec(spec)?.forward(params.as_slice(), input)
}
