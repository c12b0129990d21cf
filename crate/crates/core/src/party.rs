use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Dealer,
    Player,
    Controller,
}

/// A protocol participant. Players are indexed `1..=n`, controllers `1..=m`;
/// the dealer always has index 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PartyId {
    pub role: Role,
    pub index: usize,
}

impl PartyId {
    pub const DEALER: PartyId = PartyId {
        role: Role::Dealer,
        index: 0,
    };

    pub const fn player(index: usize) -> Self {
        Self {
            role: Role::Player,
            index,
        }
    }

    pub const fn controller(index: usize) -> Self {
        Self {
            role: Role::Controller,
            index,
        }
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.role {
            Role::Dealer => f.write_str("A"),
            Role::Player => write!(f, "B{}", self.index),
            Role::Controller => write!(f, "C{}", self.index),
        }
    }
}
