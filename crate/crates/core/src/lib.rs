//! Continual learning for variational quantum classifiers.
//!
//! An eight-qubit hardware-efficient circuit is trained on a sequence of
//! binary classification tasks (MNIST digit pairs, time-of-flight images of a
//! Chern insulator, ground states of a cluster-Ising chain). Elastic weight
//! consolidation anchors the parameters of earlier tasks with their Fisher
//! information so that learning a new task does not erase the old ones.

pub mod ansatz;
pub mod data;
pub mod error;
pub mod harness;
pub mod learn;
pub mod physics;
pub mod qsim;
pub mod rng;

pub use error::{Error, Result};
