use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::party::PartyId;

/// Who holds the Bell record for one secret qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShareHolders {
    /// Two classical bits sent to one controller over a pair of EPR links.
    Single(usize),
    /// The Bell state itself, split between two controllers.
    Split([usize; 2]),
}

impl ShareHolders {
    pub fn controllers(&self) -> Vec<usize> {
        match *self {
            ShareHolders::Single(c) => vec![c],
            ShareHolders::Split([a, b]) => vec![a, b],
        }
    }

    pub fn is_split(&self) -> bool {
        matches!(self, ShareHolders::Split(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Release {
    Released,
    Withheld,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShareMode {
    Classical,
    Split,
    Mixed,
}

/// Assignment of qubits to players and Bell records to controllers, plus
/// the release and cooperation decisions that gate reconstruction.
///
/// Vectors are indexed from zero but hold 1-based party indices:
/// `qubit_to_player[i - 1]` is the player receiving secret qubit `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessPolicy {
    pub threshold: usize,
    pub qubit_to_player: Vec<usize>,
    pub record_holders: Vec<ShareHolders>,
    pub release: Vec<Release>,
    pub cooperating_players: BTreeSet<usize>,
}

impl AccessPolicy {
    /// n = m = N: player `i` receives qubit `i` and controller `i` its record.
    /// Everyone releases and cooperates.
    pub fn one_to_one(width: usize, threshold: usize) -> Self {
        Self {
            threshold,
            qubit_to_player: (1..=width).collect(),
            record_holders: (1..=width).map(ShareHolders::Single).collect(),
            release: vec![Release::Released; width],
            cooperating_players: (1..=width).collect(),
        }
    }

    /// Round-robin assignment of `width` qubits to `players` players and of
    /// classical records to `controllers` controllers, full release.
    pub fn round_robin(width: usize, players: usize, controllers: usize, threshold: usize) -> Self {
        Self {
            threshold,
            qubit_to_player: (0..width).map(|i| 1 + i % players).collect(),
            record_holders: (0..width)
                .map(|i| ShareHolders::Single(1 + i % controllers))
                .collect(),
            release: vec![Release::Released; controllers],
            cooperating_players: (1..=players).collect(),
        }
    }

    /// Record `i` split between controllers `2i − 1` and `2i` (m = 2N).
    pub fn all_split(width: usize, threshold: usize) -> Self {
        Self {
            threshold,
            qubit_to_player: (1..=width).collect(),
            record_holders: (0..width)
                .map(|i| ShareHolders::Split([2 * i + 1, 2 * i + 2]))
                .collect(),
            release: vec![Release::Released; 2 * width],
            cooperating_players: (1..=width).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.qubit_to_player.len()
    }

    pub fn mode(&self) -> ShareMode {
        let split = self.record_holders.iter().filter(|h| h.is_split()).count();
        if split == 0 {
            ShareMode::Classical
        } else if split == self.record_holders.len() {
            ShareMode::Split
        } else {
            ShareMode::Mixed
        }
    }

    pub fn player_of(&self, index: usize) -> PartyId {
        PartyId::player(self.qubit_to_player[index - 1])
    }

    pub fn holders_of(&self, index: usize) -> ShareHolders {
        self.record_holders[index - 1]
    }

    pub fn is_released(&self, controller: usize) -> bool {
        self.release
            .get(controller.wrapping_sub(1))
            .is_some_and(|r| *r == Release::Released)
    }

    /// Secret indices held by `player`.
    pub fn qubits_of(&self, player: usize) -> Vec<usize> {
        self.qubit_to_player
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == player)
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// Records held (fully or half) by `controller`.
    pub fn records_of(&self, controller: usize) -> Vec<usize> {
        self.record_holders
            .iter()
            .enumerate()
            .filter(|(_, h)| h.controllers().contains(&controller))
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// EPR links each controller needs: two per classical share, one per
    /// split half. Index `c - 1`.
    pub fn controller_links(&self, controllers: usize) -> Vec<usize> {
        let mut links = vec![0; controllers];
        for h in &self.record_holders {
            match *h {
                ShareHolders::Single(c) => links[c - 1] += 2,
                ShareHolders::Split([a, b]) => {
                    links[a - 1] += 1;
                    links[b - 1] += 1;
                }
            }
        }
        links
    }

    pub fn validate(&self, players: usize, controllers: usize) -> Result<(), ProtocolError> {
        let width = self.width();
        let bad = |field: &'static str, reason: String| Err(ProtocolError::Policy { field, reason });
        if self.threshold == 0 || self.threshold > players {
            return bad("threshold", format!("need 1 <= k <= n = {players}, got {}", self.threshold));
        }
        if let Some(&p) = self.qubit_to_player.iter().find(|&&p| p == 0 || p > players) {
            return bad("qubit_to_player", format!("player {p} outside 1..={players}"));
        }
        if let Some(p) = (1..=players).find(|p| !self.qubit_to_player.contains(p)) {
            return bad("qubit_to_player", format!("player {p} receives no qubit"));
        }
        if self.record_holders.len() != width {
            return bad(
                "record_holders",
                format!("{} entries for {width} qubits", self.record_holders.len()),
            );
        }
        for h in &self.record_holders {
            for c in h.controllers() {
                if c == 0 || c > controllers {
                    return bad("record_holders", format!("controller {c} outside 1..={controllers}"));
                }
            }
            if let ShareHolders::Split([a, b]) = h {
                if a == b {
                    return bad("record_holders", format!("split share given twice to controller {a}"));
                }
            }
        }
        if let Some(c) = (1..=controllers).find(|c| self.records_of(*c).is_empty()) {
            return bad("record_holders", format!("controller {c} holds no record"));
        }
        if self.release.len() != controllers {
            return bad(
                "release",
                format!("{} entries for {controllers} controllers", self.release.len()),
            );
        }
        if let Some(&p) = self.cooperating_players.iter().find(|&&p| p == 0 || p > players) {
            return bad("cooperating_players", format!("player {p} outside 1..={players}"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn link_plan_totals_two_per_record() {
        let p = AccessPolicy::one_to_one(3, 3);
        assert_eq!(p.controller_links(3), vec![2, 2, 2]);
        let s = AccessPolicy::all_split(3, 3);
        assert_eq!(s.controller_links(6).iter().sum::<usize>(), 6);
        assert_eq!(s.mode(), ShareMode::Split);
        assert_eq!(p.mode(), ShareMode::Classical);
    }

    #[test]
    fn validation_names_the_field() {
        let mut p = AccessPolicy::one_to_one(3, 3);
        p.threshold = 4;
        assert!(matches!(p.validate(3, 3), Err(ProtocolError::Policy { field: "threshold", .. })));
        let mut p = AccessPolicy::one_to_one(3, 3);
        p.record_holders[0] = ShareHolders::Split([2, 2]);
        assert!(matches!(p.validate(3, 3), Err(ProtocolError::Policy { field: "record_holders", .. })));
        let mut p = AccessPolicy::one_to_one(3, 3);
        p.release.pop();
        assert!(matches!(p.validate(3, 3), Err(ProtocolError::Policy { field: "release", .. })));
        let p = AccessPolicy::round_robin(3, 2, 2, 2);
        assert!(p.validate(2, 2).is_ok());
        assert!(matches!(p.validate(2, 3), Err(ProtocolError::Policy { field: "record_holders", .. })));
    }
}
