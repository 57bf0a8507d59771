//! Cluster-Ising chain
//! `H(h) = −Σᵢ XᵢZᵢ₊₁Xᵢ₊₂ + h Σᵢ YᵢYᵢ₊₁` with periodic indices.
//!
//! For `h < 1` the ground state lies in the Z₂×Z₂ symmetry-protected
//! cluster phase, for `h > 1` in an antiferromagnetic phase. Spin `i` is
//! qubit `i` of the state vector (bit `n − 1 − i` of the basis index).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::data::{Dataset, LabeledSample};
use crate::error::{Error, Result};
use crate::qsim::StateVector;
use crate::rng::{derive_seed, SplitMix64};

pub const MAX_DENSE_SPINS: usize = 12;
/// Minimum distance of sampling ranges from the critical point `h = 1`.
pub const CRITICAL_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SptParams {
    pub h: f64,
    pub n_spins: usize,
}

impl SptParams {
    pub fn new(h: f64) -> Self {
        Self { h, n_spins: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// `P|b⟩ = phase · |b ^ flip⟩` for a Pauli string given as `(spin, op)`.
fn pauli_action(n: usize, ops: &[(usize, Pauli)], b: usize) -> (usize, Complex64) {
    let mut target = b;
    let mut phase = Complex64::new(1.0, 0.0);
    for &(i, op) in ops {
        let bit = 1usize << (n - 1 - i);
        let up = target & bit == 0;
        match op {
            Pauli::X => target ^= bit,
            Pauli::Z => {
                if !up {
                    phase = -phase;
                }
            }
            Pauli::Y => {
                // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
                phase *= if up { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, -1.0) };
                target ^= bit;
            }
        }
    }
    (target, phase)
}

/// Real part of `⟨ψ|P|ψ⟩` for a Hermitian Pauli string.
pub fn pauli_expectation(state: &StateVector, ops: &[(usize, Pauli)]) -> Result<f64> {
    let n = state.n_qubits();
    if let Some(&(i, _)) = ops.iter().find(|(i, _)| *i >= n) {
        return Err(Error::invalid(format!("spin {i} out of range for {n} spins")));
    }
    let amps = state.amplitudes();
    let v: Complex64 = (0..amps.len())
        .map(|b| {
            let (t, phase) = pauli_action(n, ops, b);
            amps[t].conj() * phase * amps[b]
        })
        .sum();
    Ok(v.re)
}

/// Cluster stabilizer `Kᵢ = XᵢZᵢ₊₁Xᵢ₊₂` (periodic).
pub fn cluster_stabilizer(i: usize, n: usize) -> [(usize, Pauli); 3] {
    [(i % n, Pauli::X), ((i + 1) % n, Pauli::Z), ((i + 2) % n, Pauli::X)]
}

/// String operator `Kᵢ Kᵢ₊₂ … Kᵢ₊₂ₘ = Xᵢ Zᵢ₊₁ Zᵢ₊₃ … Zᵢ₊₂ₘ₊₁ Xᵢ₊₂ₘ₊₂`.
/// Equals one in the `h = 0` cluster state; requires `2m + 2 < n`.
pub fn cluster_string(i: usize, m: usize, n: usize) -> Vec<(usize, Pauli)> {
    let mut ops = vec![(i % n, Pauli::X)];
    for k in 0..=m {
        ops.push(((i + 2 * k + 1) % n, Pauli::Z));
    }
    ops.push(((i + 2 * m + 2) % n, Pauli::X));
    ops
}

fn check_params(p: &SptParams) -> Result<()> {
    if p.n_spins < 3 || p.n_spins > MAX_DENSE_SPINS {
        return Err(Error::invalid(format!(
            "chain length must be in 3..={MAX_DENSE_SPINS}, got {}",
            p.n_spins
        )));
    }
    if !(p.h.is_finite() && p.h >= 0.0) {
        return Err(Error::invalid(format!("h must be finite and nonnegative, got {}", p.h)));
    }
    Ok(())
}

/// Dense Hamiltonian. All matrix elements are real.
pub fn spt_hamiltonian(p: &SptParams) -> Result<DMatrix<f64>> {
    check_params(p)?;
    let n = p.n_spins;
    let dim = 1usize << n;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let mut terms: Vec<(f64, Vec<(usize, Pauli)>)> = Vec::with_capacity(2 * n);
    for i in 0..n {
        terms.push((-1.0, cluster_stabilizer(i, n).to_vec()));
        terms.push((p.h, vec![(i, Pauli::Y), ((i + 1) % n, Pauli::Y)]));
    }
    for b in 0..dim {
        for (coeff, ops) in &terms {
            let (t, phase) = pauli_action(n, ops, b);
            debug_assert!(phase.im == 0.0);
            h[(t, b)] += coeff * phase.re;
        }
    }
    Ok(h)
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
}

/// Lowest eigenpair. The sign is fixed so that the first amplitude with
/// modulus above 1e-8 is positive.
pub fn spt_ground_state(p: &SptParams) -> Result<GroundState> {
    let h = spt_hamiltonian(p)?;
    let eig = SymmetricEigen::new(h);
    let (k, &energy) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let sign = v.iter().find(|x| x.abs() > 1e-8).map_or(1.0, |x| x.signum());
    for x in &mut v {
        *x *= sign / norm;
    }
    let state = StateVector::from_amplitudes(v.into_iter().map(|x| Complex64::new(x, 0.0)).collect())?;
    Ok(GroundState { energy, state })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SptSampling {
    pub n_train_per_class: usize,
    pub n_test_per_class: usize,
    pub h_low: (f64, f64),
    pub h_high: (f64, f64),
    pub n_spins: usize,
}

impl Default for SptSampling {
    fn default() -> Self {
        Self { n_train_per_class: 200, n_test_per_class: 50, h_low: (0.2, 0.8), h_high: (1.2, 2.0), n_spins: 8 }
    }
}

impl SptSampling {
    pub fn with_sizes(n_train_per_class: usize, n_test_per_class: usize) -> Self {
        Self { n_train_per_class, n_test_per_class, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = (self.h_low, self.h_high);
        if !(lo.0 >= 0.0 && lo.0 < lo.1 && hi.0 < hi.1) {
            return Err(Error::invalid("h ranges must be non-empty and nonnegative"));
        }
        if lo.1 > 1.0 - CRITICAL_MARGIN || hi.0 < 1.0 + CRITICAL_MARGIN {
            return Err(Error::invalid(format!(
                "h ranges [{}, {}] and [{}, {}] must stay {CRITICAL_MARGIN} away from the critical point h = 1",
                lo.0, lo.1, hi.0, hi.1
            )));
        }
        if self.n_train_per_class == 0 || self.n_test_per_class == 0 {
            return Err(Error::invalid("split sizes must be positive"));
        }
        Ok(())
    }
}

/// Ground states labelled by phase: 0 for `h < 1`, 1 for `h > 1`.
pub fn gen_spt_dataset(s: &SptSampling, seed: u64) -> Result<Dataset> {
    s.validate()?;
    let mut jobs = Vec::new();
    for (split, n) in [("train", s.n_train_per_class), ("test", s.n_test_per_class)] {
        for label in [0u8, 1] {
            for i in 0..n {
                let mut rng = SplitMix64::new(derive_seed(seed, &format!("spt/{split}/{label}/{i}")));
                let range = if label == 0 { s.h_low } else { s.h_high };
                jobs.push((split, label, rng.uniform(range.0, range.1)));
            }
        }
    }
    let states: Vec<Result<GroundState>> = jobs
        .par_iter()
        .map(|&(_, _, h)| spt_ground_state(&SptParams { h, n_spins: s.n_spins }))
        .collect();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (&(split, label, h), gs) in jobs.iter().zip(states) {
        let entry = (h, label, gs?.state);
        if split == "train" { train.push(entry) } else { test.push(entry) }
    }
    let mut order = SplitMix64::new(derive_seed(seed, "spt/order"));
    order.shuffle(&mut train);
    order.shuffle(&mut test);

    let mut provenance = vec![
        ("kind".to_string(), "spt".to_string()),
        ("seed".to_string(), seed.to_string()),
        ("n_spins".to_string(), s.n_spins.to_string()),
        ("h_low".to_string(), format!("{},{}", s.h_low.0, s.h_low.1)),
        ("h_high".to_string(), format!("{},{}", s.h_high.0, s.h_high.1)),
    ];
    for (split, v) in [("train", &train), ("test", &test)] {
        for (i, (h, label, _)) in v.iter().enumerate() {
            provenance.push((format!("{split}.{i}.h"), h.to_string()));
            provenance.push((format!("{split}.{i}.label"), label.to_string()));
        }
    }
    let to_samples =
        |v: Vec<(f64, u8, StateVector)>| v.into_iter().map(|(_, l, st)| LabeledSample::state(st, l)).collect();
    let mut ds = Dataset::new("spt", to_samples(train), to_samples(test), seed)?;
    ds.provenance = provenance;
    Ok(ds)
}
