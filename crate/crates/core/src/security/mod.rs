//! Decoy-based eavesdropping checks, an intercept-resend attacker, and the
//! no-information audit.

mod audit;
mod decoy;
mod eve;

use thiserror::Error;

use crate::protocol::ProtocolError;
use crate::qcore::QcoreError;

pub use audit::{no_information_audit, predicted_withheld_density, AuditReport, AUDIT_TOLERANCE};
pub use decoy::{
    insert_decoys, setup_with_decoys, verify_decoys, DecoyPlan, DecoyState, DetectionReport, Verdict,
};
pub use eve::{eve_tap, Eavesdropper, EveModel, EveStrategy};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SecurityError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Qcore(#[from] QcoreError),
    #[error("malformed decoy plan: {0}")]
    MalformedPlan(String),
    #[error("intercept probability {0} outside [0, 1]")]
    InvalidProbability(f64),
}
