//! Exact dense state-vector simulation.
//!
//! Amplitude index convention: tensor position 0 is the most significant bit.

mod bell;
mod density;
mod register;
mod rng;

use thiserror::Error;

pub use bell::{Basis, BellKind, PauliOp, TwoBits};
pub use density::{expected_withheld_density, fidelity, trace_distance, DensityMatrix};
pub use register::{QuantumRegister, QubitId};
pub use rng::RandomSource;

/// Hard cap on simultaneously live qubits in one register.
pub const MAX_LIVE_QUBITS: usize = 24;

/// Allowed deviation of Σ|a|² from one.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Tolerance for the Hermitian, trace, and positivity checks on density matrices.
pub const DENSITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QcoreError {
    #[error("capacity exceeded: {live} live + {requested} requested > cap {cap}")]
    CapacityExceeded {
        live: usize,
        requested: usize,
        cap: usize,
    },
    #[error("unknown or measured qubit {0}")]
    UnknownQubit(QubitId),
    #[error("qubit {0} given twice for a two-qubit measurement")]
    SameQubit(QubitId),
    #[error("duplicate qubit {0} in subset")]
    DuplicateQubit(QubitId),
    #[error("empty qubit subset")]
    EmptySubset,
    #[error("order lists {given} qubits but the register has {live}")]
    IncompleteOrder { given: usize, live: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("state is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("state length {0} is not a positive power of two")]
    NotPowerOfTwo(usize),
    #[error("index {index} out of range for {len} qubits")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("outcome probabilities drifted (total {total})")]
    ProbabilityDrift { total: f64 },
    #[error("zero-probability measurement branch")]
    ZeroProbabilityBranch,
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
}


/// Number of qubits spanned by a state vector.
pub fn register_width(state: &[num_complex::Complex64]) -> Result<usize, QcoreError> {
    register::qubit_count(state.len())
}

/// Σ|a|² = 1 within [`NORM_TOLERANCE`].
pub fn check_state(state: &[num_complex::Complex64]) -> Result<(), QcoreError> {
    register::check_normalized(state)
}
