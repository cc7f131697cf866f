//! Classical simulation of a quantum convolutional neural network that
//! recognises the toric-code phase.
//!
//! Qubits live on the edges of an `l1 x l2` torus. Plaquettes carry X-type
//! stabilizers, vertices carry Z-type stabilizers. The Clifford convolution maps
//! every stabilizer onto a single qubit, after which the pooling layers are pure
//! classical post-processing of measurement bits.

pub mod circuits;
pub mod error;
pub mod groundstate;
pub mod harness;
pub mod lattice;
pub mod pauli_frame;
pub mod pooling;
pub mod scalar;
pub mod stabilizer_sim;

pub use error::{Error, Result};
pub use lattice::{LatticeGeometry, PoolingSchedule, StabilizerId};
pub use pauli_frame::{NoiseModel, Pauli, PauliFrame};
pub use pooling::{Basis, SyndromeGrid};
pub use scalar::Real;

pub type StateVector = groundstate::StateVector<f64>;
pub type StateVector32 = groundstate::StateVector<f32>;
pub type SparseHamiltonian = groundstate::SparseHamiltonian<f64>;
pub type SparseHamiltonian32 = groundstate::SparseHamiltonian<f32>;
pub type GroundState = groundstate::GroundState<f64>;
pub type GroundState32 = groundstate::GroundState<f32>;
pub type LayerStat = pooling::LayerStat<f64>;
pub type LayerOutputs = pooling::LayerOutputs<f64>;
pub type PipelineOutputs = pooling::PipelineOutputs<f64>;
