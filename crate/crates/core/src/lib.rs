//! Simulator for controlled quantum secret sharing.
//!
//! A dealer hands the qubits of an encoding state to players by entanglement
//! swapping and routes the resulting Bell-measurement record to controllers.
//! Players can only undo the swap corrections once the controllers holding
//! the matching records release them.

pub mod party;
pub mod protocol;
pub mod qcore;
pub mod harness;
pub mod security;

pub use party::{PartyId, Role};
pub use qcore::{
    expected_withheld_density, fidelity, trace_distance, Basis, BellKind, DensityMatrix, PauliOp,
    QcoreError, QuantumRegister, QubitId, RandomSource, TwoBits,
};
