use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulator and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("layer {layer} is outside 0..={depth}")]
    LayerOutOfRange { depth: usize, layer: usize },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("probability {name} = {value} is outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{n_qubits} qubits exceed the configured cap of {cap}")]
    ResourceLimit { n_qubits: u64, cap: u64 },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("no crossing in range: {0}")]
    NoCrossing(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed data: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
