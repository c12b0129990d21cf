use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bell::{Basis, BellKind, PauliOp};
use super::density::DensityMatrix;
use super::rng::RandomSource;
use super::{QcoreError, MAX_LIVE_QUBITS, NORM_TOLERANCE};
use crate::party::PartyId;

/// Stable handle for a live qubit. Handles are never reused by a register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QubitId(u64);

impl QubitId {
    pub const fn from_raw(raw: u64) -> Self {
        Self(raw)
    }

    pub const fn raw(self) -> u64 {
        self.0
    }
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// Dense state vector over the live qubits.
///
/// Tensor position 0 is the most significant bit of the amplitude index.
/// Newly allocated qubits are appended at the least significant end, and
/// measured qubits are removed so the vector only spans live qubits.
#[derive(Debug, Clone)]
pub struct QuantumRegister {
    amps: Vec<Complex64>,
    layout: Vec<QubitId>,
    owners: BTreeMap<QubitId, PartyId>,
    next_id: u64,
    capacity: usize,
}

impl Default for QuantumRegister {
    fn default() -> Self {
        Self::new()
    }
}

impl QuantumRegister {
    pub fn new() -> Self {
        Self::with_capacity(MAX_LIVE_QUBITS)
    }

    /// Register with a custom live-qubit cap, which may not exceed the global cap.
    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            amps: vec![Complex64::new(1.0, 0.0)],
            layout: Vec::new(),
            owners: BTreeMap::new(),
            next_id: 0,
            capacity: capacity.min(MAX_LIVE_QUBITS),
        }
    }

    pub fn len(&self) -> usize {
        self.layout.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layout.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Live qubits in tensor-position order.
    pub fn qubits(&self) -> &[QubitId] {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn contains(&self, q: QubitId) -> bool {
        self.layout.contains(&q)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn owner(&self, q: QubitId) -> Option<PartyId> {
        self.owners.get(&q).copied()
    }

    pub fn set_owner(&mut self, q: QubitId, owner: PartyId) -> Result<(), QcoreError> {
        self.position(q)?;
        self.owners.insert(q, owner);
        Ok(())
    }

    pub fn position(&self, q: QubitId) -> Result<usize, QcoreError> {
        self.layout
            .iter()
            .position(|&x| x == q)
            .ok_or(QcoreError::UnknownQubit(q))
    }

    /// Tensor a normalized `k`-qubit state onto the register. The new qubits
    /// take the `k` least significant positions, in order.
    pub fn append_state(
        &mut self,
        state: &[Complex64],
        owner: PartyId,
    ) -> Result<Vec<QubitId>, QcoreError> {
        let k = qubit_count(state.len())?;
        check_normalized(state)?;
        if self.len() + k > self.capacity {
            return Err(QcoreError::CapacityExceeded {
                live: self.len(),
                requested: k,
                cap: self.capacity,
            });
        }
        let mut amps = Vec::with_capacity(self.amps.len() * state.len());
        for a in &self.amps {
            amps.extend(state.iter().map(|b| a * b));
        }
        self.amps = amps;
        let ids: Vec<QubitId> = (0..k)
            .map(|_| {
                let id = QubitId(self.next_id);
                self.next_id += 1;
                id
            })
            .collect();
        for &id in &ids {
            self.layout.push(id);
            self.owners.insert(id, owner);
        }
        Ok(ids)
    }

    pub fn alloc_qubit(&mut self, value: bool) -> Result<QubitId, QcoreError> {
        let state = Basis::Z.eigenvector(value);
        Ok(self.append_state(&state, PartyId::DEALER)?[0])
    }

    pub fn alloc_bell_pair(&mut self, kind: BellKind) -> Result<(QubitId, QubitId), QcoreError> {
        let ids = self.append_state(&kind.amplitudes(), PartyId::DEALER)?;
        Ok((ids[0], ids[1]))
    }

    /// Apply a row-major 2×2 matrix to `q`.
    pub fn apply_single(&mut self, q: QubitId, m: [[Complex64; 2]; 2]) -> Result<(), QcoreError> {
        let pos = self.position(q)?;
        let mask = 1usize << (self.len() - 1 - pos);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | mask];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | mask] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(())
    }

    pub fn apply_pauli(&mut self, q: QubitId, op: PauliOp) -> Result<(), QcoreError> {
        if op == PauliOp::I {
            return self.position(q).map(|_| ());
        }
        self.apply_single(q, op.matrix())
    }

    fn pair_positions(&self, qa: QubitId, qb: QubitId) -> Result<[usize; 2], QcoreError> {
        if qa == qb {
            return Err(QcoreError::SameQubit(qa));
        }
        Ok([self.position(qa)?, self.position(qb)?])
    }

    fn bell_branches(&self, pos: &[usize; 2]) -> Vec<Vec<Complex64>> {
        let bras = BellKind::ALL.map(|k| k.amplitudes());
        let refs: Vec<&[Complex64]> = bras.iter().map(|b| b.as_slice()).collect();
        self.contract_many(pos, &refs)
    }

    /// Born probabilities of the four Bell outcomes on `(qa, qb)`, in
    /// [`BellKind::ALL`] order. The register is not modified.
    pub fn bell_probabilities(&self, qa: QubitId, qb: QubitId) -> Result<[f64; 4], QcoreError> {
        let pos = self.pair_positions(qa, qb)?;
        let branches = self.bell_branches(&pos);
        Ok(std::array::from_fn(|k| norm_sqr(&branches[k])))
    }

    /// Sampled Bell-basis measurement of `(qa, qb)`. Both qubits are removed.
    pub fn bell_measure(
        &mut self,
        qa: QubitId,
        qb: QubitId,
        rng: &mut RandomSource,
    ) -> Result<BellKind, QcoreError> {
        let pos = self.pair_positions(qa, qb)?;
        let branches = self.bell_branches(&pos);
        let probs: Vec<f64> = branches.iter().map(|b| norm_sqr(b)).collect();
        let k = sample_outcome(&probs, rng)?;
        let branch = branches.into_iter().nth(k).expect("four branches");
        self.collapse_to(&pos, branch, probs[k]);
        Ok(BellKind::ALL[k])
    }

    /// Post-select the Bell outcome `kind` on `(qa, qb)`. Returns the branch
    /// probability; both qubits are removed and the residual renormalized.
    pub fn bell_project(
        &mut self,
        qa: QubitId,
        qb: QubitId,
        kind: BellKind,
    ) -> Result<f64, QcoreError> {
        let pos = self.pair_positions(qa, qb)?;
        let branch = self.contract(&pos, &kind.amplitudes());
        let p = norm_sqr(&branch);
        if p <= f64::MIN_POSITIVE {
            return Err(QcoreError::ZeroProbabilityBranch);
        }
        self.collapse_to(&pos, branch, p);
        Ok(p)
    }

    /// Sampled single-qubit measurement; `q` is removed. Outcome `false` is
    /// |0⟩ for Z and |+x⟩ for X.
    pub fn measure_single(
        &mut self,
        q: QubitId,
        basis: Basis,
        rng: &mut RandomSource,
    ) -> Result<bool, QcoreError> {
        let pos = [self.position(q)?];
        let eig = [basis.eigenvector(false), basis.eigenvector(true)];
        let mut branches = self.contract_many(&pos, &[&eig[0], &eig[1]]);
        let probs = [norm_sqr(&branches[0]), norm_sqr(&branches[1])];
        let bit = sample_outcome(&probs, rng)? == 1;
        let k = usize::from(bit);
        self.collapse_to(&pos, branches.swap_remove(k), probs[k]);
        Ok(bit)
    }

    /// Probability of `bit` when measuring `q` in `basis`.
    pub fn single_probability(&self, q: QubitId, basis: Basis, bit: bool) -> Result<f64, QcoreError> {
        let pos = [self.position(q)?];
        Ok(norm_sqr(&self.contract(&pos, &basis.eigenvector(bit))))
    }

    /// Post-select `bit` for `q` in `basis`; `q` is removed.
    pub fn project_single(&mut self, q: QubitId, basis: Basis, bit: bool) -> Result<f64, QcoreError> {
        let pos = [self.position(q)?];
        let branch = self.contract(&pos, &basis.eigenvector(bit));
        let p = norm_sqr(&branch);
        if p <= f64::MIN_POSITIVE {
            return Err(QcoreError::ZeroProbabilityBranch);
        }
        self.collapse_to(&pos, branch, p);
        Ok(p)
    }

    /// Sampled measurement that leaves `q` live in the observed eigenstate.
    pub fn measure_in_place(
        &mut self,
        q: QubitId,
        basis: Basis,
        rng: &mut RandomSource,
    ) -> Result<bool, QcoreError> {
        let p = self.position(q)?;
        let eig = [basis.eigenvector(false), basis.eigenvector(true)];
        let mut branches = self.contract_many(&[p], &[&eig[0], &eig[1]]);
        let probs = [norm_sqr(&branches[0]), norm_sqr(&branches[1])];
        let bit = sample_outcome(&probs, rng)? == 1;
        let k = usize::from(bit);
        let branch = branches.swap_remove(k);
        self.reinsert(p, eig[k], &branch, probs[k]);
        Ok(bit)
    }

    /// Post-select `bit` for `q` in `basis`, leaving `q` live in that
    /// eigenstate. Returns the branch probability.
    pub fn project_in_place(&mut self, q: QubitId, basis: Basis, bit: bool) -> Result<f64, QcoreError> {
        let p = self.position(q)?;
        let branch = self.contract(&[p], &basis.eigenvector(bit));
        let prob = norm_sqr(&branch);
        if prob <= f64::MIN_POSITIVE {
            return Err(QcoreError::ZeroProbabilityBranch);
        }
        self.reinsert(p, basis.eigenvector(bit), &branch, prob);
        Ok(prob)
    }

    fn reinsert(&mut self, pos: usize, eig: [Complex64; 2], branch: &[Complex64], prob: f64) {
        let scale = 1.0 / prob.sqrt();
        let shift = self.len() - 1 - pos;
        let low = (1usize << shift) - 1;
        for (i, a) in self.amps.iter_mut().enumerate() {
            let rest = ((i >> (shift + 1)) << shift) | (i & low);
            *a = eig[(i >> shift) & 1] * branch[rest] * scale;
        }
    }

    /// Reduced density matrix of `subset` (in the given order).
    pub fn reduced_density(&self, subset: &[QubitId]) -> Result<DensityMatrix, QcoreError> {
        let positions = self.subset_positions(subset)?;
        let n = self.len();
        let s = positions.len();
        let dim = 1usize << s;
        let rest_dim = 1usize << (n - s);
        let mut blocks = vec![Complex64::new(0.0, 0.0); dim * rest_dim];
        for (i, a) in self.amps.iter().enumerate() {
            let (sub, rest) = split_index(i, n, &positions);
            blocks[sub * rest_dim + rest] = *a;
        }
        let entries = nalgebra::DMatrix::from_fn(dim, dim, |r, c| {
            (0..rest_dim)
                .map(|k| blocks[r * rest_dim + k] * blocks[c * rest_dim + k].conj())
                .sum()
        });
        Ok(DensityMatrix::from_parts(entries, subset.to_vec()))
    }

    /// Amplitudes re-indexed so `order[0]` is the most significant bit.
    /// `order` must list every live qubit exactly once.
    pub fn state_in_order(&self, order: &[QubitId]) -> Result<Vec<Complex64>, QcoreError> {
        let positions = self.subset_positions(order)?;
        if positions.len() != self.len() {
            return Err(QcoreError::IncompleteOrder {
                given: positions.len(),
                live: self.len(),
            });
        }
        let n = self.len();
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let (sub, _) = split_index(i, n, &positions);
            out[sub] = *a;
        }
        Ok(out)
    }

    fn subset_positions(&self, subset: &[QubitId]) -> Result<Vec<usize>, QcoreError> {
        if subset.is_empty() {
            return Err(QcoreError::EmptySubset);
        }
        let mut positions = Vec::with_capacity(subset.len());
        for (i, &q) in subset.iter().enumerate() {
            if subset[..i].contains(&q) {
                return Err(QcoreError::DuplicateQubit(q));
            }
            positions.push(self.position(q)?);
        }
        Ok(positions)
    }

    /// `⟨bra|` applied to the qubits at `positions`; the result spans the
    /// remaining qubits in position order.
    fn contract(&self, positions: &[usize], bra: &[Complex64]) -> Vec<Complex64> {
        self.contract_many(positions, &[bra]).pop().expect("one bra")
    }

    /// [`Self::contract`] for several bras in one sweep over the amplitudes.
    fn contract_many(&self, positions: &[usize], bras: &[&[Complex64]]) -> Vec<Vec<Complex64>> {
        let n = self.len();
        let offsets = sub_offsets(n, positions);
        let mask = offsets.iter().fold(0, |m, o| m | o);
        let rest_len = self.amps.len() >> positions.len();
        let terms: Vec<Vec<(usize, Complex64)>> = bras
            .iter()
            .map(|b| {
                b.iter()
                    .zip(&offsets)
                    .filter(|(c, _)| c.re != 0.0 || c.im != 0.0)
                    .map(|(c, &off)| (off, c.conj()))
                    .collect()
            })
            .collect();
        let mut out = vec![vec![Complex64::new(0.0, 0.0); rest_len]; bras.len()];
        let mut base = 0usize;
        for r in 0..rest_len {
            for (o, t) in out.iter_mut().zip(&terms) {
                o[r] = t
                    .iter()
                    .fold(Complex64::new(0.0, 0.0), |acc, &(off, c)| acc + c * self.amps[base | off]);
            }
            base = ((base | mask) + 1) & !mask;
        }
        out
    }

    fn collapse_to(&mut self, positions: &[usize], branch: Vec<Complex64>, prob: f64) {
        let scale = 1.0 / prob.sqrt();
        self.amps = branch.into_iter().map(|a| a * scale).collect();
        let mut removed: Vec<usize> = positions.to_vec();
        removed.sort_unstable_by(|a, b| b.cmp(a));
        for p in removed {
            let q = self.layout.remove(p);
            self.owners.remove(&q);
        }
    }
}

/// Split amplitude index `i` of an `n`-qubit vector into the sub-index over
/// `positions` (first entry most significant) and the index over the
/// remaining positions (in ascending position order).
pub(crate) fn split_index(i: usize, n: usize, positions: &[usize]) -> (usize, usize) {
    let mut sub = 0usize;
    for &p in positions {
        sub = (sub << 1) | ((i >> (n - 1 - p)) & 1);
    }
    let mut rest = 0usize;
    for p in 0..n {
        if !positions.contains(&p) {
            rest = (rest << 1) | ((i >> (n - 1 - p)) & 1);
        }
    }
    (sub, rest)
}

/// Index bits contributed by each sub-index over `positions`.
fn sub_offsets(n: usize, positions: &[usize]) -> Vec<usize> {
    let k = positions.len();
    (0..1usize << k)
        .map(|sub| {
            positions.iter().enumerate().fold(0, |acc, (j, &p)| {
                if (sub >> (k - 1 - j)) & 1 == 1 {
                    acc | (1 << (n - 1 - p))
                } else {
                    acc
                }
            })
        })
        .collect()
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

pub(crate) fn qubit_count(len: usize) -> Result<usize, QcoreError> {
    if len == 0 || !len.is_power_of_two() {
        return Err(QcoreError::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros() as usize)
}

pub(crate) fn check_normalized(state: &[Complex64]) -> Result<(), QcoreError> {
    let n = norm_sqr(state);
    if (n - 1.0).abs() > NORM_TOLERANCE {
        return Err(QcoreError::NotNormalized { norm_sqr: n });
    }
    Ok(())
}

/// Inverse-CDF draw from outcome probabilities. Negatives down to −1e-12
/// clamp to zero; totals within 1e-9 of one are renormalized; anything
/// further off is reported as drift.
pub(crate) fn sample_outcome(probs: &[f64], rng: &mut RandomSource) -> Result<usize, QcoreError> {
    let mut clean = Vec::with_capacity(probs.len());
    for &p in probs {
        if p < -1e-12 || !p.is_finite() {
            return Err(QcoreError::ProbabilityDrift { total: p });
        }
        clean.push(p.max(0.0));
    }
    let total: f64 = clean.iter().sum();
    if (total - 1.0).abs() > NORM_TOLERANCE {
        return Err(QcoreError::ProbabilityDrift { total });
    }
    let u = rng.uniform() * total;
    let mut cum = 0.0;
    let mut last = None;
    for (k, &p) in clean.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        cum += p;
        last = Some(k);
        if u < cum {
            return Ok(k);
        }
    }
    last.ok_or(QcoreError::ZeroProbabilityBranch)
}
