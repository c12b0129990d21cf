use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{ProtocolError, ProtocolRun};
use crate::party::PartyId;
use crate::qcore::{BellKind, DensityMatrix, QuantumRegister, QubitId};

impl ProtocolRun {
    /// Players' state over the secret qubits when the records in `withheld`
    /// stay secret and every other record is released and applied.
    ///
    /// Replays the swap of each qubit from the dealer's copy of Ψ: released
    /// indices are post-selected on the recorded outcome and corrected;
    /// withheld indices branch over all four outcomes, weighted by their
    /// exact probabilities.
    pub fn withheld_state(&self, withheld: &BTreeSet<usize>) -> Result<DensityMatrix, ProtocolError> {
        let width = self.width();
        if let Some(&i) = withheld.iter().find(|&&i| i == 0 || i > width) {
            return Err(ProtocolError::UnknownIndex(i));
        }
        let mut outcomes = Vec::with_capacity(width);
        for i in 1..=width {
            if withheld.contains(&i) {
                outcomes.push(None);
            } else {
                let k = self
                    .transcript()
                    .bell_record
                    .get(&i)
                    .ok_or(ProtocolError::NotDistributed(i))?;
                outcomes.push(Some(*k));
            }
        }
        let mixture = branch_mixture(self.secret(), &outcomes)?;
        let labels: Vec<QubitId> = (1..=width)
            .map(|i| self.carrier_of(i))
            .collect::<Result<_, _>>()?;
        Ok(DensityMatrix::from_parts(mixture, labels))
    }
}

/// Σ_b p_b |r_b⟩⟨r_b| over swap branches, normalized by Σ_b p_b.
/// `outcomes[i]` fixes (and corrects) qubit `i + 1`; `None` enumerates it.
pub(crate) fn branch_mixture(
    secret: &[Complex64],
    outcomes: &[Option<BellKind>],
) -> Result<DMatrix<Complex64>, ProtocolError> {
    let mut reg = QuantumRegister::new();
    let carriers = reg.append_state(secret, PartyId::DEALER)?;
    let dim = secret.len();
    let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
    let mut total = 0.0;
    descend(reg, carriers, 0, outcomes, 1.0, &mut acc, &mut total)?;
    Ok(acc / Complex64::new(total, 0.0))
}

fn descend(
    reg: QuantumRegister,
    mut carriers: Vec<QubitId>,
    idx: usize,
    outcomes: &[Option<BellKind>],
    weight: f64,
    acc: &mut DMatrix<Complex64>,
    total: &mut f64,
) -> Result<(), ProtocolError> {
    if idx == outcomes.len() {
        let state = reg.state_in_order(&carriers)?;
        for r in 0..state.len() {
            for c in 0..state.len() {
                acc[(r, c)] += state[r] * state[c].conj() * weight;
            }
        }
        *total += weight;
        return Ok(());
    }
    let mut reg = reg;
    let (mu, nu) = reg.alloc_bell_pair(BellKind::PhiMinus)?;
    let source = carriers[idx];
    carriers[idx] = nu;
    match outcomes[idx] {
        Some(kind) => {
            let p = reg.bell_project(source, mu, kind)?;
            reg.apply_pauli(nu, kind.correction())?;
            descend(reg, carriers, idx + 1, outcomes, weight * p, acc, total)
        }
        None => {
            for kind in BellKind::ALL {
                let mut branch = reg.clone();
                let p = branch.bell_project(source, mu, kind)?;
                descend(branch, carriers.clone(), idx + 1, outcomes, weight * p, acc, total)?;
            }
            Ok(())
        }
    }
}
