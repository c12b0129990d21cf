use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::policy::{AccessPolicy, ShareHolders, ShareMode};
use super::transcript::{AppliedCorrection, Payload, Recipient, ResourceReport, Transcript};
use super::ProtocolError;
use crate::party::{PartyId, Role};
use crate::qcore::{Basis, BellKind, QuantumRegister, QubitId, RandomSource, TwoBits};

/// What a distributed slot carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlotKind {
    /// Secret qubit `i` (1-based).
    Secret(usize),
    /// Decoy `j` (0-based).
    Decoy(usize),
}

/// Eavesdropping hook on the dealer→player quantum channel. Called with the
/// player half of the fresh link before the dealer's swap measurement.
pub trait ChannelTap {
    fn intercept(
        &mut self,
        register: &mut QuantumRegister,
        in_flight: QubitId,
        rng: &mut RandomSource,
    ) -> Result<(), crate::qcore::QcoreError>;
}

#[derive(Debug, Clone)]
struct Slot {
    kind: SlotKind,
    player: PartyId,
    /// Dealer's qubit before distribution, the player's afterwards.
    carrier: QubitId,
    outcome: Option<BellKind>,
    checked: bool,
}

/// A record share as held by its controller(s) after transport.
#[derive(Debug, Clone)]
enum HeldShare {
    Classical {
        controller: usize,
        bits: TwoBits,
    },
    Split {
        holders: [usize; 2],
        register: QuantumRegister,
        halves: [QubitId; 2],
    },
    Identified(BellKind),
}

/// The record share fields of a classical transport.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassicalShare {
    pub bits: TwoBits,
    pub about_qubit: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reconstruction {
    /// The players' register over the secret qubits (index order), with
    /// corrections applied for every qubit of the authorized players.
    Recovered {
        state: Vec<Complex64>,
        corrected: Vec<usize>,
        players: Vec<usize>,
    },
    Sealed(SealReason),
}

impl Reconstruction {
    pub fn is_recovered(&self) -> bool {
        matches!(self, Reconstruction::Recovered { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SealReason {
    pub released_records: Vec<usize>,
    pub eligible_players: Vec<usize>,
    pub threshold: usize,
}

impl std::fmt::Display for SealReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} eligible player(s) {:?} below threshold {} (released records {:?})",
            self.eligible_players.len(),
            self.eligible_players,
            self.threshold,
            self.released_records
        )
    }
}

/// One execution of the protocol: dealer, `n` players, `m` controllers.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    players: usize,
    controllers: usize,
    policy: AccessPolicy,
    secret: Vec<Complex64>,
    slots: Vec<Slot>,
    register: QuantumRegister,
    shares: BTreeMap<usize, HeldShare>,
    links_left: Vec<usize>,
    transcript: Transcript,
    rng: RandomSource,
    reconstructed: bool,
}

impl ProtocolRun {
    /// Run that distributes exactly the qubits of `secret`.
    pub fn setup(
        players: usize,
        controllers: usize,
        secret: Vec<Complex64>,
        policy: AccessPolicy,
        rng: RandomSource,
    ) -> Result<Self, ProtocolError> {
        let width = crate::qcore::register_width(&secret)?;
        let layout = (1..=width).map(SlotKind::Secret).collect();
        Self::setup_with_layout(players, controllers, secret.clone(), secret, layout, policy, rng)
    }

    /// Run over an extended state (secret plus decoys). `layout[p]` says what
    /// tensor position `p` of `distributed` carries; secret qubits must keep
    /// their relative order.
    pub fn setup_with_layout(
        players: usize,
        controllers: usize,
        secret: Vec<Complex64>,
        distributed: Vec<Complex64>,
        layout: Vec<SlotKind>,
        policy: AccessPolicy,
        rng: RandomSource,
    ) -> Result<Self, ProtocolError> {
        let width = crate::qcore::register_width(&secret)?;
        crate::qcore::check_state(&secret)?;
        let config = |field: &'static str, reason: String| ProtocolError::Config { field, reason };
        if players == 0 || players > width {
            return Err(config("players", format!("need 1 <= n <= N = {width}, got {players}")));
        }
        if controllers == 0 || controllers > 2 * width {
            return Err(config(
                "controllers",
                format!("need 1 <= m <= 2N = {}, got {controllers}", 2 * width),
            ));
        }
        if policy.width() != width {
            return Err(ProtocolError::Policy {
                field: "qubit_to_player",
                reason: format!("{} entries for {width} qubits", policy.width()),
            });
        }
        if policy.mode() == ShareMode::Classical && controllers > width {
            return Err(config(
                "controllers",
                format!("classical mode needs m <= N = {width}, got {controllers}"),
            ));
        }
        policy.validate(players, controllers)?;

        let secret_slots: Vec<usize> = layout
            .iter()
            .filter_map(|k| match k {
                SlotKind::Secret(i) => Some(*i),
                SlotKind::Decoy(_) => None,
            })
            .collect();
        if secret_slots != (1..=width).collect::<Vec<_>>() {
            return Err(config("layout", "secret slots must be 1..=N in order".into()));
        }
        let mut register = QuantumRegister::new();
        if register.capacity() < layout.len() + 2 {
            return Err(config(
                "decoys",
                format!("{} slots exceed the live-qubit cap", layout.len()),
            ));
        }
        let carriers = register.append_state(&distributed, PartyId::DEALER)?;
        if carriers.len() != layout.len() {
            return Err(config(
                "layout",
                format!("{} entries for {} qubits", layout.len(), carriers.len()),
            ));
        }
        let slots = layout
            .into_iter()
            .zip(carriers)
            .map(|(kind, carrier)| Slot {
                kind,
                player: match kind {
                    SlotKind::Secret(i) => policy.player_of(i),
                    SlotKind::Decoy(j) => PartyId::player(1 + j % players),
                },
                carrier,
                outcome: None,
                checked: matches!(kind, SlotKind::Secret(_)),
            })
            .collect();
        let links_left = policy.controller_links(controllers);
        Ok(Self {
            players,
            controllers,
            policy,
            secret,
            slots,
            register,
            shares: BTreeMap::new(),
            links_left,
            transcript: Transcript::default(),
            rng,
            reconstructed: false,
        })
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn controllers(&self) -> usize {
        self.controllers
    }

    pub fn width(&self) -> usize {
        self.policy.width()
    }

    pub fn policy(&self) -> &AccessPolicy {
        &self.policy
    }

    pub fn secret(&self) -> &[Complex64] {
        &self.secret
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn register(&self) -> &QuantumRegister {
        &self.register
    }

    pub fn rng_mut(&mut self) -> &mut RandomSource {
        &mut self.rng
    }

    /// Controller EPR links still unused, index `c - 1`.
    pub fn links_left(&self) -> &[usize] {
        &self.links_left
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn slot_kind(&self, slot: usize) -> Option<SlotKind> {
        self.slots.get(slot.wrapping_sub(1)).map(|s| s.kind)
    }

    pub fn decoy_count(&self) -> usize {
        self.slots.iter().filter(|s| matches!(s.kind, SlotKind::Decoy(_))).count()
    }

    /// Current carrier of secret qubit `index`.
    pub fn carrier_of(&self, index: usize) -> Result<QubitId, ProtocolError> {
        let pos = self.secret_slot(index)?;
        Ok(self.slots[pos].carrier)
    }

    pub fn is_distributed(&self) -> bool {
        self.slots.iter().all(|s| s.outcome.is_some())
    }

    pub fn is_transported(&self) -> bool {
        self.shares.len() == self.width()
    }

    fn secret_slot(&self, index: usize) -> Result<usize, ProtocolError> {
        self.slots
            .iter()
            .position(|s| s.kind == SlotKind::Secret(index))
            .ok_or(ProtocolError::UnknownIndex(index))
    }

    fn controller_slot(&self, c: PartyId) -> Result<usize, ProtocolError> {
        if c.role != Role::Controller || c.index == 0 || c.index > self.controllers {
            return Err(ProtocolError::NotAController(c));
        }
        Ok(c.index - 1)
    }

    fn take_links(&mut self, c: PartyId, needed: usize) -> Result<(), ProtocolError> {
        let slot = self.controller_slot(c)?;
        let left = self.links_left[slot];
        if left < needed {
            return Err(ProtocolError::InsufficientLinks {
                controller: c,
                needed,
                left,
            });
        }
        self.links_left[slot] -= needed;
        self.transcript.epr_controller += needed;
        Ok(())
    }

    /// Swap secret qubit `index` to its player. The outcome is recorded but
    /// no correction is applied.
    pub fn distribute_qubit(&mut self, index: usize) -> Result<BellKind, ProtocolError> {
        let pos = self.secret_slot(index)?;
        self.distribute_slot_at(pos, None)
    }

    /// Swap the qubit in 1-based `slot` (secret or decoy), optionally through
    /// a tapped channel.
    pub fn distribute_slot(
        &mut self,
        slot: usize,
        tap: Option<&mut dyn ChannelTap>,
    ) -> Result<BellKind, ProtocolError> {
        if slot == 0 || slot > self.slots.len() {
            return Err(ProtocolError::UnknownSlot(slot));
        }
        self.distribute_slot_at(slot - 1, tap)
    }

    /// Distribute every remaining slot in ascending order.
    pub fn distribute_all(&mut self, mut tap: Option<&mut dyn ChannelTap>) -> Result<(), ProtocolError> {
        for pos in 0..self.slots.len() {
            if self.slots[pos].outcome.is_none() {
                let reborrow: Option<&mut dyn ChannelTap> = match tap {
                    Some(ref mut t) => Some(&mut **t),
                    None => None,
                };
                self.distribute_slot_at(pos, reborrow)?;
            }
        }
        Ok(())
    }

    fn distribute_slot_at(
        &mut self,
        pos: usize,
        tap: Option<&mut dyn ChannelTap>,
    ) -> Result<BellKind, ProtocolError> {
        let slot = &self.slots[pos];
        if slot.outcome.is_some() {
            return Err(ProtocolError::AlreadyDistributed(pos + 1));
        }
        let (carrier, player) = (slot.carrier, slot.player);
        let (mu, nu) = self.register.alloc_bell_pair(BellKind::PhiMinus)?;
        self.register.set_owner(nu, player)?;
        self.transcript.epr_player += 1;
        if let Some(tap) = tap {
            tap.intercept(&mut self.register, nu, &mut self.rng)?;
        }
        let outcome = self.register.bell_measure(carrier, mu, &mut self.rng)?;
        self.transcript.dealer_measurements += 1;
        let slot = &mut self.slots[pos];
        slot.carrier = nu;
        slot.outcome = Some(outcome);
        match slot.kind {
            SlotKind::Secret(i) => self.transcript.bell_record.insert(i, outcome),
            SlotKind::Decoy(_) => self.transcript.decoy_record.insert(pos + 1, outcome),
        };
        Ok(outcome)
    }

    /// Send the two bits of `share` to `controller` over a pair of EPR links
    /// used as a one-time pad.
    pub fn send_bits_classical(
        &mut self,
        controller: PartyId,
        share: ClassicalShare,
    ) -> Result<(), ProtocolError> {
        let record = share.about_qubit;
        self.check_record(record)?;
        self.take_links(controller, 2)?;
        let mut link = QuantumRegister::with_capacity(4);
        let (alpha, beta) = link.alloc_bell_pair(BellKind::PhiMinus)?;
        let (alpha2, beta2) = link.alloc_bell_pair(BellKind::PhiMinus)?;
        link.set_owner(beta, controller)?;
        link.set_owner(beta2, controller)?;

        let pad = link.bell_measure(alpha, alpha2, &mut self.rng)?;
        self.transcript.dealer_measurements += 1;
        let remote = link.bell_measure(beta, beta2, &mut self.rng)?;
        self.transcript.controller_measurements += 1;
        if pad != remote {
            return Err(ProtocolError::PadMismatch { record });
        }
        let announced = share.bits ^ pad.bits();
        self.transcript.log(
            PartyId::DEALER,
            Recipient::Public,
            Payload::Announcement {
                record,
                bits: announced,
            },
        );
        let decoded = announced ^ remote.bits();
        self.shares.insert(
            record,
            HeldShare::Classical {
                controller: controller.index,
                bits: decoded,
            },
        );
        Ok(())
    }

    /// Prepare a fresh Bell pair in state ψ^record and teleport one half to
    /// each controller; corrections are sent and applied immediately.
    pub fn split_bell_between_controllers(
        &mut self,
        ca: PartyId,
        cb: PartyId,
        record: usize,
    ) -> Result<(), ProtocolError> {
        let kind = self.check_record(record)?;
        if ca == cb {
            return Err(ProtocolError::SameController(ca));
        }
        for c in [ca, cb] {
            let slot = self.controller_slot(c)?;
            if self.links_left[slot] == 0 {
                return Err(ProtocolError::InsufficientLinks {
                    controller: c,
                    needed: 1,
                    left: 0,
                });
            }
        }
        let mut reg = QuantumRegister::with_capacity(6);
        let (p, q) = reg.alloc_bell_pair(kind)?;
        let mut halves = [p, q];
        for (half, controller) in [ca, cb].into_iter().enumerate() {
            self.take_links(controller, 1)?;
            let (alpha, beta) = reg.alloc_bell_pair(BellKind::PhiMinus)?;
            reg.set_owner(beta, controller)?;
            let outcome = reg.bell_measure(halves[half], alpha, &mut self.rng)?;
            self.transcript.dealer_measurements += 1;
            let op = outcome.correction();
            self.transcript.log(
                PartyId::DEALER,
                Recipient::Party(controller),
                Payload::SplitCorrection { record, half, op },
            );
            reg.apply_pauli(beta, op)?;
            self.transcript.corrections.push(AppliedCorrection {
                party: controller,
                qubit: beta,
                op,
            });
            halves[half] = beta;
        }
        self.shares.insert(
            record,
            HeldShare::Split {
                holders: [ca.index, cb.index],
                register: reg,
                halves,
            },
        );
        Ok(())
    }

    fn check_record(&self, record: usize) -> Result<BellKind, ProtocolError> {
        if self.shares.contains_key(&record) {
            return Err(ProtocolError::ShareAlreadySent(record));
        }
        self.transcript
            .bell_record
            .get(&record)
            .copied()
            .ok_or(ProtocolError::UnknownRecord(record))
    }

    /// Ship every distributed record to its holders per the policy.
    pub fn transport_shares(&mut self) -> Result<(), ProtocolError> {
        for record in 1..=self.width() {
            if self.shares.contains_key(&record) {
                continue;
            }
            let kind = *self
                .transcript
                .bell_record
                .get(&record)
                .ok_or(ProtocolError::NotDistributed(record))?;
            match self.policy.holders_of(record) {
                ShareHolders::Single(c) => self.send_bits_classical(
                    PartyId::controller(c),
                    ClassicalShare {
                        bits: kind.bits(),
                        about_qubit: record,
                    },
                )?,
                ShareHolders::Split([a, b]) => self.split_bell_between_controllers(
                    PartyId::controller(a),
                    PartyId::controller(b),
                    record,
                )?,
            }
        }
        Ok(())
    }

    /// Bits a single controller decoded for `record`, if it holds them.
    pub fn controller_bits(&self, record: usize) -> Option<(usize, TwoBits)> {
        match self.shares.get(&record)? {
            HeldShare::Classical { controller, bits } => Some((*controller, *bits)),
            _ => None,
        }
    }

    /// The two controllers' halves of a split record.
    pub fn split_share(&self, record: usize) -> Option<(&QuantumRegister, [QubitId; 2])> {
        match self.shares.get(&record)? {
            HeldShare::Split {
                register, halves, ..
            } => Some((register, *halves)),
            _ => None,
        }
    }

    /// Kind recovered by a completed joint measurement on split `record`.
    pub fn identified(&self, record: usize) -> Option<BellKind> {
        match self.shares.get(&record)? {
            HeldShare::Identified(kind) => Some(*kind),
            _ => None,
        }
    }

    /// Joint Bell measurement by the two holders of split `record`.
    pub fn joint_identify(
        &mut self,
        ca: PartyId,
        cb: PartyId,
        record: usize,
    ) -> Result<BellKind, ProtocolError> {
        let holders = match self.shares.get(&record) {
            Some(HeldShare::Split { holders, .. }) => *holders,
            _ => {
                return Err(ProtocolError::NoSplitShare {
                    record,
                    ca,
                    cb,
                })
            }
        };
        if [ca.index, cb.index] != holders || ca.role != Role::Controller || cb.role != Role::Controller {
            return Err(ProtocolError::NoSplitShare { record, ca, cb });
        }
        for c in [ca, cb] {
            if !self.policy.is_released(c.index) {
                return Err(ProtocolError::Refused(c));
            }
        }
        let Some(HeldShare::Split {
            mut register,
            halves,
            ..
        }) = self.shares.remove(&record)
        else {
            unreachable!("checked above")
        };
        let kind = register.bell_measure(halves[0], halves[1], &mut self.rng)?;
        self.transcript.controller_measurements += 1;
        self.shares.insert(record, HeldShare::Identified(kind));
        Ok(kind)
    }

    /// Disclose decoy `slot` and have its player correct and measure it in
    /// `basis`. Returns the reported bit; the decoy qubit is consumed.
    pub fn measure_decoy(&mut self, slot: usize, basis: Basis) -> Result<bool, ProtocolError> {
        let pos = slot.wrapping_sub(1);
        let Some(s) = self.slots.get(pos) else {
            return Err(ProtocolError::UnknownSlot(slot));
        };
        if !matches!(s.kind, SlotKind::Decoy(_)) {
            return Err(ProtocolError::NotADecoy(slot));
        }
        if s.checked {
            return Err(ProtocolError::DecoyAlreadyChecked(slot));
        }
        if !self.is_distributed() {
            return Err(ProtocolError::DistributionIncomplete);
        }
        let (carrier, player) = (s.carrier, s.player);
        let outcome = s.outcome.expect("distributed");
        self.transcript.log(
            PartyId::DEALER,
            Recipient::Party(player),
            Payload::DecoyDisclosure {
                slot,
                basis,
                outcome,
            },
        );
        let op = outcome.correction();
        self.register.apply_pauli(carrier, op)?;
        self.transcript.corrections.push(AppliedCorrection {
            party: player,
            qubit: carrier,
            op,
        });
        let bit = self.register.measure_single(carrier, basis, &mut self.rng)?;
        self.transcript.log(
            player,
            Recipient::Party(PartyId::DEALER),
            Payload::DecoyReport { slot, bit },
        );
        self.slots[pos].checked = true;
        Ok(bit)
    }

    /// Release, authorize, and correct. Every secret qubit of each eligible
    /// player (cooperating, with all its records released) is corrected;
    /// the result is `Recovered` when at least `k` players are eligible.
    pub fn reconstruct(&mut self) -> Result<Reconstruction, ProtocolError> {
        if !self.is_distributed() {
            return Err(ProtocolError::DistributionIncomplete);
        }
        if !self.is_transported() {
            return Err(ProtocolError::SharesNotTransported);
        }
        if self.slots.iter().any(|s| !s.checked) {
            return Err(ProtocolError::DecoysPending);
        }
        if self.reconstructed {
            return Err(ProtocolError::AlreadyReconstructed);
        }
        self.reconstructed = true;

        let mut available = BTreeMap::new();
        for record in 1..=self.width() {
            match self.policy.holders_of(record) {
                ShareHolders::Single(c) if self.policy.is_released(c) => {
                    let (_, bits) = self.controller_bits(record).expect("transported");
                    self.transcript.log(
                        PartyId::controller(c),
                        Recipient::Public,
                        Payload::Release { record, bits },
                    );
                    available.insert(record, BellKind::from_bits(bits));
                }
                ShareHolders::Split([a, b])
                    if self.policy.is_released(a) && self.policy.is_released(b) =>
                {
                    let kind = self.joint_identify(PartyId::controller(a), PartyId::controller(b), record)?;
                    self.transcript.log(
                        PartyId::controller(a),
                        Recipient::Public,
                        Payload::Release {
                            record,
                            bits: kind.bits(),
                        },
                    );
                    available.insert(record, kind);
                }
                _ => {}
            }
        }

        let eligible: Vec<usize> = self
            .policy
            .cooperating_players
            .iter()
            .copied()
            .filter(|&p| {
                self.policy
                    .qubits_of(p)
                    .iter()
                    .all(|i| available.contains_key(i))
            })
            .collect();
        if eligible.len() < self.policy.threshold {
            return Ok(Reconstruction::Sealed(SealReason {
                released_records: available.keys().copied().collect(),
                eligible_players: eligible,
                threshold: self.policy.threshold,
            }));
        }

        let mut corrected = Vec::new();
        for &p in &eligible {
            for index in self.policy.qubits_of(p) {
                let carrier = self.carrier_of(index)?;
                let op = available[&index].correction();
                self.register.apply_pauli(carrier, op)?;
                self.transcript.corrections.push(AppliedCorrection {
                    party: PartyId::player(p),
                    qubit: carrier,
                    op,
                });
                corrected.push(index);
            }
        }
        corrected.sort_unstable();
        let order: Vec<QubitId> = (1..=self.width())
            .map(|i| self.carrier_of(i))
            .collect::<Result<_, _>>()?;
        let state = self.register.state_in_order(&order)?;
        Ok(Reconstruction::Recovered {
            state,
            corrected,
            players: eligible,
        })
    }

    pub fn resource_report(&self) -> Result<ResourceReport, ProtocolError> {
        if !self.is_distributed() {
            return Err(ProtocolError::DistributionIncomplete);
        }
        if !self.is_transported() {
            return Err(ProtocolError::SharesNotTransported);
        }
        let t = &self.transcript;
        Ok(ResourceReport {
            epr_player: t.epr_player,
            epr_controller: t.epr_controller,
            dealer_measurements: t.dealer_measurements,
            controller_measurements: t.controller_measurements,
            decoy_overhead: self.decoy_count(),
        })
    }
}
