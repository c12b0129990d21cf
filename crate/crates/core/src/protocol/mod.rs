//! Share distribution by entanglement swapping, record transport to
//! controllers, and controlled reconstruction.

mod policy;
mod run;
mod transcript;
mod withheld;

use thiserror::Error;

use crate::party::PartyId;
use crate::qcore::{BellKind, QcoreError, TwoBits};

pub use policy::{AccessPolicy, Release, ShareHolders, ShareMode};
pub use run::{ChannelTap, ClassicalShare, ProtocolRun, Reconstruction, SealReason, SlotKind};
pub use transcript::{
    AppliedCorrection, ExpectedResources, Message, Payload, Recipient, ResourceReport, Transcript,
};

/// Two-bit label of a Bell outcome.
pub fn encode_bits(kind: BellKind) -> TwoBits {
    kind.bits()
}

pub fn decode_bits(bits: TwoBits) -> BellKind {
    BellKind::from_bits(bits)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error(transparent)]
    Qcore(#[from] QcoreError),
    #[error("invalid {field}: {reason}")]
    Config { field: &'static str, reason: String },
    #[error("invalid policy {field}: {reason}")]
    Policy { field: &'static str, reason: String },
    #[error("slot {0} already distributed")]
    AlreadyDistributed(usize),
    #[error("secret qubit {0} not distributed yet")]
    NotDistributed(usize),
    #[error("no secret qubit with index {0}")]
    UnknownIndex(usize),
    #[error("no slot {0}")]
    UnknownSlot(usize),
    #[error("no Bell record for index {0}")]
    UnknownRecord(usize),
    #[error("slot {0} is not a decoy")]
    NotADecoy(usize),
    #[error("decoy slot {0} already checked")]
    DecoyAlreadyChecked(usize),
    #[error("record {0} already sent")]
    ShareAlreadySent(usize),
    #[error("distribution incomplete")]
    DistributionIncomplete,
    #[error("records not yet transported to controllers")]
    SharesNotTransported,
    #[error("decoy slots not yet checked")]
    DecoysPending,
    #[error("reconstruction already performed")]
    AlreadyReconstructed,
    #[error("{controller} needs {needed} EPR link(s), {left} left")]
    InsufficientLinks {
        controller: PartyId,
        needed: usize,
        left: usize,
    },
    #[error("{0} named twice for a split record")]
    SameController(PartyId),
    #[error("{0} is not a controller of this run")]
    NotAController(PartyId),
    #[error("record {record} is not split between {ca} and {cb}")]
    NoSplitShare {
        record: usize,
        ca: PartyId,
        cb: PartyId,
    },
    #[error("{0} refuses to cooperate")]
    Refused(PartyId),
    #[error("dealer and controller pads disagree for record {record}")]
    PadMismatch { record: usize },
}

#[cfg(test)]
mod tests;
