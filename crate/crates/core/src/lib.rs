//! Gate-based quantum Boltzmann machine for approximating ground states of
//! Pauli Hamiltonians.
//!
//! Conventions: qubit 0 is the least significant bit of a basis index, a
//! bitstring lists qubit 0 first, and bit 0 carries spin +1.

// `!(x > 0.0)` is used on purpose so that NaN takes the error path.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decomposition;
pub mod error;
pub mod gradient;
pub mod model;
pub mod optimizer;
pub mod pauli;
pub mod sim;
pub mod validation;
pub mod wavefunction;

pub use error::{QbmError, Result};
pub use model::{AncillaLayout, QbmParameters, QbmShape, Regulator, RegulatorMode};
pub use optimizer::{train, EstimationMode, NodeMode, TrainConfig, TrainOutcome};
pub use pauli::{PauliHamiltonian, PauliString};
pub use wavefunction::{TrialWaveFunction, VisibleDistribution};
