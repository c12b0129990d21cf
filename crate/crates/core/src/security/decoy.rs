use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SecurityError;
use crate::protocol::{ProtocolRun, SlotKind};
use crate::qcore::{register_width, Basis, QcoreError, RandomSource, MAX_LIVE_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoyState {
    Zero,
    One,
    PlusX,
    MinusX,
}

impl DecoyState {
    pub const ALL: [DecoyState; 4] = [
        DecoyState::Zero,
        DecoyState::One,
        DecoyState::PlusX,
        DecoyState::MinusX,
    ];

    pub fn basis(self) -> Basis {
        match self {
            DecoyState::Zero | DecoyState::One => Basis::Z,
            DecoyState::PlusX | DecoyState::MinusX => Basis::X,
        }
    }

    /// Outcome a faithful measurement in [`Self::basis`] must report.
    pub fn bit(self) -> bool {
        matches!(self, DecoyState::One | DecoyState::MinusX)
    }

    pub fn amplitudes(self) -> [Complex64; 2] {
        self.basis().eigenvector(self.bit())
    }
}

/// Where the decoys sit among the `N + M` distributed slots and what they
/// are. The dealer keeps this private until distribution is over.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoyPlan {
    secret_width: usize,
    /// 0-based tensor positions, ascending; `states[j]` sits at `placements[j]`.
    placements: Vec<usize>,
    states: Vec<DecoyState>,
}

impl DecoyPlan {
    pub fn new(
        secret_width: usize,
        placements: Vec<usize>,
        states: Vec<DecoyState>,
    ) -> Result<Self, SecurityError> {
        let plan = Self {
            secret_width,
            placements,
            states,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn none(secret_width: usize) -> Self {
        Self {
            secret_width,
            placements: Vec::new(),
            states: Vec::new(),
        }
    }

    /// `count` decoys at positions drawn uniformly without replacement from
    /// the `secret_width + count` slots, each state uniform over the four.
    pub fn random(secret_width: usize, count: usize, rng: &mut RandomSource) -> Self {
        let total = secret_width + count;
        let mut placements = rand::seq::index::sample(rng, total, count).into_vec();
        placements.sort_unstable();
        let states = (0..count).map(|_| DecoyState::ALL[rng.below(4)]).collect();
        Self {
            secret_width,
            placements,
            states,
        }
    }

    pub fn count(&self) -> usize {
        self.states.len()
    }

    pub fn secret_width(&self) -> usize {
        self.secret_width
    }

    pub fn placements(&self) -> &[usize] {
        &self.placements
    }

    pub fn states(&self) -> &[DecoyState] {
        &self.states
    }

    pub fn total_slots(&self) -> usize {
        self.secret_width + self.count()
    }

    pub fn validate(&self) -> Result<(), SecurityError> {
        if self.placements.len() != self.states.len() {
            return Err(SecurityError::MalformedPlan(format!(
                "{} placements for {} states",
                self.placements.len(),
                self.states.len()
            )));
        }
        let total = self.total_slots();
        if !self.placements.windows(2).all(|w| w[0] < w[1]) {
            return Err(SecurityError::MalformedPlan(
                "placements must be strictly ascending".into(),
            ));
        }
        if let Some(&p) = self.placements.iter().find(|&&p| p >= total) {
            return Err(SecurityError::MalformedPlan(format!(
                "placement {p} outside {total} slots"
            )));
        }
        Ok(())
    }

    /// Slot layout for [`ProtocolRun::setup_with_layout`].
    pub fn layout(&self) -> Vec<SlotKind> {
        let mut next_secret = 1;
        (0..self.total_slots())
            .map(|p| match self.placements.iter().position(|&x| x == p) {
                Some(j) => SlotKind::Decoy(j),
                None => {
                    next_secret += 1;
                    SlotKind::Secret(next_secret - 1)
                }
            })
            .collect()
    }
}

/// Secret ⊗ decoys, permuted so decoy `j` occupies `placements[j]`.
pub fn insert_decoys(secret: &[Complex64], plan: &DecoyPlan) -> Result<Vec<Complex64>, SecurityError> {
    plan.validate()?;
    let width = register_width(secret)?;
    if width != plan.secret_width {
        return Err(SecurityError::MalformedPlan(format!(
            "plan is for {} secret qubits, state has {width}",
            plan.secret_width
        )));
    }
    let total = plan.total_slots();
    if total > MAX_LIVE_QUBITS {
        return Err(QcoreError::CapacityExceeded {
            live: 0,
            requested: total,
            cap: MAX_LIVE_QUBITS,
        }
        .into());
    }
    let decoy_amps: Vec<[Complex64; 2]> = plan.states.iter().map(|s| s.amplitudes()).collect();
    let out = (0..1usize << total)
        .map(|i| {
            let mut secret_index = 0usize;
            let mut amp = Complex64::new(1.0, 0.0);
            let mut j = 0;
            for p in 0..total {
                let bit = (i >> (total - 1 - p)) & 1;
                if plan.placements.get(j) == Some(&p) {
                    amp *= decoy_amps[j][bit];
                    j += 1;
                } else {
                    secret_index = (secret_index << 1) | bit;
                }
            }
            amp * secret[secret_index]
        })
        .collect();
    Ok(out)
}

/// Set up a run that distributes `secret` interleaved with the plan's decoys.
pub fn setup_with_decoys(
    players: usize,
    controllers: usize,
    secret: Vec<Complex64>,
    policy: crate::protocol::AccessPolicy,
    plan: &DecoyPlan,
    rng: RandomSource,
) -> Result<ProtocolRun, SecurityError> {
    let extended = insert_decoys(&secret, plan)?;
    Ok(ProtocolRun::setup_with_layout(
        players,
        controllers,
        secret,
        extended,
        plan.layout(),
        policy,
        rng,
    )?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Clean,
    EveDetected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub decoys_checked: usize,
    pub mismatches: usize,
    pub verdict: Verdict,
}

/// Disclose every decoy slot, have its holder correct and measure it in the
/// decoy's basis, and count reports that disagree with the dealer's record.
pub fn verify_decoys(run: &mut ProtocolRun, plan: &DecoyPlan) -> Result<DetectionReport, SecurityError> {
    if !run.is_distributed() {
        return Err(crate::protocol::ProtocolError::DistributionIncomplete.into());
    }
    let mut mismatches = 0;
    for (&pos, state) in plan.placements.iter().zip(&plan.states) {
        let reported = run.measure_decoy(pos + 1, state.basis())?;
        if reported != state.bit() {
            mismatches += 1;
        }
    }
    Ok(DetectionReport {
        decoys_checked: plan.count(),
        mismatches,
        verdict: if mismatches > 0 {
            Verdict::EveDetected
        } else {
            Verdict::Clean
        },
    })
}
