//! Quantum-physics task generators.

pub mod qah;
pub mod spt;

pub use qah::{bloch_d_vector, chern_number, gen_tof_dataset, tof_image, QahParams, TofSampling};
pub use spt::{gen_spt_dataset, spt_ground_state, spt_hamiltonian, SptParams, SptSampling};
