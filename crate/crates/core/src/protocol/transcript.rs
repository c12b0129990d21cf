use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::party::PartyId;
use crate::qcore::{Basis, BellKind, PauliOp, QubitId, TwoBits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Recipient {
    Party(PartyId),
    Public,
}

/// Classical payloads. Every message a party sends is logged verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Payload {
    /// One-time-padded record bits `(x ⊕ x′, y ⊕ y′)`.
    Announcement { record: usize, bits: TwoBits },
    /// Correction for one half of a split record.
    SplitCorrection { record: usize, half: usize, op: PauliOp },
    /// A controller making its record available to the players.
    Release { record: usize, bits: TwoBits },
    /// Dealer disclosure of a decoy slot after distribution.
    DecoyDisclosure { slot: usize, basis: Basis, outcome: BellKind },
    DecoyReport { slot: usize, bit: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub from: PartyId,
    pub to: Recipient,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppliedCorrection {
    pub party: PartyId,
    pub qubit: QubitId,
    pub op: PauliOp,
}

/// Full record of one protocol run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    /// Dealer outcome ψⁱ for each secret index `i`.
    pub bell_record: BTreeMap<usize, BellKind>,
    /// Dealer outcomes for decoy slots, keyed by 1-based slot position.
    pub decoy_record: BTreeMap<usize, BellKind>,
    pub epr_player: usize,
    pub epr_controller: usize,
    pub dealer_measurements: usize,
    pub controller_measurements: usize,
    pub messages: Vec<Message>,
    pub corrections: Vec<AppliedCorrection>,
}

impl Transcript {
    pub fn log(&mut self, from: PartyId, to: Recipient, payload: Payload) {
        self.messages.push(Message { from, to, payload });
    }

    /// Public announcements `(record, bits)` in send order.
    pub fn announcements(&self) -> impl Iterator<Item = (usize, TwoBits)> + '_ {
        self.messages.iter().filter_map(|m| match m.payload {
            Payload::Announcement { record, bits } => Some((record, bits)),
            _ => None,
        })
    }

    /// Canonical byte encoding used for determinism checks.
    pub fn to_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("transcript serializes")
    }
}

/// Resource counts of a completed run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceReport {
    /// Dealer–player EPR links, one per distributed slot (decoys included).
    pub epr_player: usize,
    pub epr_controller: usize,
    /// Dealer-side Bell measurements: distribution plus record transport.
    pub dealer_measurements: usize,
    pub controller_measurements: usize,
    pub decoy_overhead: usize,
}

impl ResourceReport {
    /// Closed-form dealer-side counts for `width` secret qubits, of which
    /// `split` records go to controller pairs, plus `decoys` decoy slots.
    /// Controller-side measurements are not predicted.
    pub fn expected(width: usize, split: usize, decoys: usize) -> ExpectedResources {
        let classical = width - split;
        ExpectedResources {
            epr_player: width + decoys,
            epr_controller: 2 * width,
            dealer_measurements: width + decoys + classical + 2 * split,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedResources {
    pub epr_player: usize,
    pub epr_controller: usize,
    pub dealer_measurements: usize,
}

impl ExpectedResources {
    pub fn matches(&self, report: &ResourceReport) -> bool {
        self.epr_player == report.epr_player
            && self.epr_controller == report.epr_controller
            && self.dealer_measurements == report.dealer_measurements
    }
}
