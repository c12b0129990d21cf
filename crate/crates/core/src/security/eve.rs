use serde::{Deserialize, Serialize};

use super::SecurityError;
use crate::protocol::ChannelTap;
use crate::qcore::{Basis, QcoreError, QuantumRegister, QubitId, RandomSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EveStrategy {
    None,
    InterceptResendRandomBasis,
}

/// Intercept-resend eavesdropper on the dealer→player channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EveModel {
    pub strategy: EveStrategy,
    pub intercept_probability: f64,
}

impl EveModel {
    pub const NONE: EveModel = EveModel {
        strategy: EveStrategy::None,
        intercept_probability: 0.0,
    };

    pub fn intercept_resend(probability: f64) -> Result<Self, SecurityError> {
        let model = Self {
            strategy: EveStrategy::InterceptResendRandomBasis,
            intercept_probability: probability,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), SecurityError> {
        if !(0.0..=1.0).contains(&self.intercept_probability) {
            return Err(SecurityError::InvalidProbability(self.intercept_probability));
        }
        Ok(())
    }

    pub fn is_active(&self) -> bool {
        self.strategy != EveStrategy::None && self.intercept_probability > 0.0
    }

    /// Chance that a single decoy is flagged: interception, wrong basis, and
    /// a flipped outcome, `p · ½ · ½`.
    pub fn per_decoy_detection(&self) -> f64 {
        if self.strategy == EveStrategy::None {
            0.0
        } else {
            self.intercept_probability / 4.0
        }
    }

    /// Probability that `decoys` decoys all pass.
    pub fn escape_probability(&self, decoys: usize) -> f64 {
        (1.0 - self.per_decoy_detection()).powi(decoys as i32)
    }
}

/// Apply `model` to the in-flight qubit `q`. Returns the basis and outcome
/// of Eve's measurement when she intercepts.
pub fn eve_tap(
    register: &mut QuantumRegister,
    q: QubitId,
    model: &EveModel,
    rng: &mut RandomSource,
) -> Result<Option<(Basis, bool)>, QcoreError> {
    if !model.is_active() {
        return Ok(None);
    }
    if rng.uniform() >= model.intercept_probability {
        return Ok(None);
    }
    let basis = if rng.bit() { Basis::X } else { Basis::Z };
    let bit = register.measure_in_place(q, basis, rng)?;
    Ok(Some((basis, bit)))
}

/// Channel tap that also counts interceptions.
#[derive(Debug, Clone)]
pub struct Eavesdropper {
    pub model: EveModel,
    pub interceptions: usize,
}

impl Eavesdropper {
    pub fn new(model: EveModel) -> Self {
        Self {
            model,
            interceptions: 0,
        }
    }
}

impl ChannelTap for Eavesdropper {
    fn intercept(
        &mut self,
        register: &mut QuantumRegister,
        in_flight: QubitId,
        rng: &mut RandomSource,
    ) -> Result<(), QcoreError> {
        if eve_tap(register, in_flight, &self.model, rng)?.is_some() {
            self.interceptions += 1;
        }
        Ok(())
    }
}
