//! Scenario files: TOML mirroring [`ScenarioConfig`] with a schema tag.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::encoding::demo_encode;
use super::HarnessError;
use crate::protocol::{AccessPolicy, ProtocolError, ShareHolders, ShareMode};
use crate::qcore::{QcoreError, RandomSource, MAX_LIVE_QUBITS};
use crate::security::{setup_with_decoys, DecoyPlan, EveModel, SecurityError, Verdict};

pub const SCENARIO_SCHEMA: &str = "cqss-scenario/1";

/// Decoy counts swept by the detection-curve experiment when a scenario
/// does not list its own.
pub const DEFAULT_EVE_SWEEP: [usize; 4] = [1, 2, 4, 8];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: String,
    pub name: String,
    /// N
    pub secret_width: usize,
    /// n
    pub players: usize,
    /// m
    pub controllers: usize,
    pub mode: ShareMode,
    pub policy: AccessPolicy,
    #[serde(default)]
    pub decoys: usize,
    #[serde(default = "no_eve")]
    pub eve: EveModel,
    pub secret: SecretSource,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eve_sweep: Option<Vec<usize>>,
    #[serde(default)]
    pub expect: Expectations,
}

fn no_eve() -> EveModel {
    EveModel::NONE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SecretSource {
    /// `[re, im]` pairs over all 2^N basis states.
    Explicit { amplitudes: Vec<[f64; 2]> },
    /// a|0…0⟩ + b|1…1⟩.
    Demo { a: [f64; 2], b: [f64; 2] },
    Haar { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpectedOutcome {
    Recovered,
    Sealed,
}

/// Optional assertions checked after a run, on top of the built-in ones.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<ExpectedOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_mean_fidelity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mstar: Option<usize>,
}

fn config_err(field: impl Into<String>, reason: impl Into<String>) -> HarnessError {
    HarnessError::Config {
        field: field.into(),
        reason: reason.into(),
    }
}

fn c(pair: [f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| HarnessError::Parse {
            path: None,
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            HarnessError::Parse { message, .. } => HarnessError::Parse {
                path: Some(path.display().to_string()),
                message,
            },
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// The secret state Ψ described by `secret`.
    pub fn secret_state(&self) -> Result<Vec<Complex64>, HarnessError> {
        let n = self.secret_width;
        if n == 0 || n > MAX_LIVE_QUBITS {
            return Err(config_err(
                "secret_width",
                format!("need 1 <= N <= {MAX_LIVE_QUBITS}, got {n}"),
            ));
        }
        let psi = match &self.secret {
            SecretSource::Explicit { amplitudes } => {
                if amplitudes.len() != 1 << n {
                    return Err(config_err(
                        "secret.amplitudes",
                        format!("{} entries for N = {n}, need {}", amplitudes.len(), 1usize << n),
                    ));
                }
                amplitudes.iter().copied().map(c).collect()
            }
            SecretSource::Demo { a, b } => demo_encode([c(*a), c(*b)], n)
                .map_err(|e| config_err("secret", e.to_string()))?,
            SecretSource::Haar { seed } => RandomSource::new(*seed).haar_state(n),
        };
        crate::qcore::check_state(&psi).map_err(|e| config_err("secret", e.to_string()))?;
        Ok(psi)
    }

    /// Every check a run would hit before its first trial, reported against
    /// the scenario field at fault.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.schema != SCENARIO_SCHEMA {
            return Err(config_err(
                "schema",
                format!("expected \"{SCENARIO_SCHEMA}\", got \"{}\"", self.schema),
            ));
        }
        if self.trials == 0 {
            return Err(config_err("trials", "need at least one trial"));
        }
        let psi = self.secret_state()?;
        if self.policy.width() != self.secret_width {
            return Err(config_err(
                "policy.qubit_to_player",
                format!(
                    "{} entries for secret_width {}",
                    self.policy.width(),
                    self.secret_width
                ),
            ));
        }
        if self.mode != ShareMode::Mixed && self.mode != self.policy.mode() {
            return Err(config_err(
                "mode",
                format!(
                    "{:?} does not match policy.record_holders, which describe {:?} shares",
                    self.mode,
                    self.policy.mode()
                ),
            ));
        }
        self.eve
            .validate()
            .map_err(|e| config_err("eve.intercept_probability", e.to_string()))?;
        if let Some(sweep) = &self.eve_sweep {
            if sweep.is_empty() {
                return Err(config_err("eve_sweep", "empty list"));
            }
            for &m in sweep {
                self.check_setup(&psi, m, "eve_sweep")?;
            }
        }
        self.check_setup(&psi, self.decoys, "decoys")
    }

    fn check_setup(&self, psi: &[Complex64], decoys: usize, decoy_field: &str) -> Result<(), HarnessError> {
        if self.secret_width + decoys + 2 > MAX_LIVE_QUBITS {
            return Err(config_err(
                decoy_field,
                format!(
                    "{} slots plus working qubits exceed the {MAX_LIVE_QUBITS}-qubit cap",
                    self.secret_width + decoys
                ),
            ));
        }
        let plan = DecoyPlan::random(self.secret_width, decoys, &mut RandomSource::new(0));
        setup_with_decoys(
            self.players,
            self.controllers,
            psi.to_vec(),
            self.policy.clone(),
            &plan,
            RandomSource::new(0),
        )
        .map(|_| ())
        .map_err(|e| match e {
            SecurityError::Protocol(ProtocolError::Config { field, reason }) => {
                let field = if field == "decoys" { decoy_field } else { field };
                config_err(field, reason)
            }
            SecurityError::Protocol(ProtocolError::Policy { field, reason }) => {
                config_err(format!("policy.{field}"), reason)
            }
            SecurityError::Protocol(ProtocolError::Qcore(QcoreError::CapacityExceeded { .. }))
            | SecurityError::Qcore(QcoreError::CapacityExceeded { .. }) => config_err(
                decoy_field,
                format!(
                    "{} slots plus working qubits exceed the {MAX_LIVE_QUBITS}-qubit cap",
                    self.secret_width + decoys
                ),
            ),
            other => config_err(decoy_field, other.to_string()),
        })
    }

    /// n = m = N with each controller holding exactly one classical record.
    pub fn is_one_share_per_controller(&self) -> bool {
        let n = self.secret_width;
        if self.players != n || self.controllers != n {
            return false;
        }
        let mut seen = vec![false; n + 1];
        self.policy.record_holders.iter().all(|h| match *h {
            ShareHolders::Single(c) if c >= 1 && c <= n && !seen[c] => {
                seen[c] = true;
                true
            }
            _ => false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const DEMO: &str = r#"
schema = "cqss-scenario/1"
name = "demo"
secret_width = 3
players = 3
controllers = 3
mode = "classical"
trials = 4
master_seed = 11

[policy]
threshold = 3
qubit_to_player = [1, 2, 3]
record_holders = [1, 2, 3]
release = ["released", "released", "released"]
cooperating_players = [1, 2, 3]

[secret]
kind = "demo"
a = [0.6, 0.0]
b = [0.0, 0.8]
"#;

    fn field_of(text: &str) -> String {
        match ScenarioConfig::from_toml_str(text) {
            Err(HarnessError::Config { field, .. }) => field,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn parses_and_round_trips() {
        let cfg = ScenarioConfig::from_toml_str(DEMO).unwrap();
        assert_eq!(cfg.eve, EveModel::NONE);
        assert_eq!(cfg.decoys, 0);
        assert!(cfg.is_one_share_per_controller());
        let again = ScenarioConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn mixed_holders_parse() {
        let text = DEMO
            .replace("controllers = 3", "controllers = 4")
            .replace("mode = \"classical\"", "mode = \"mixed\"")
            .replace("record_holders = [1, 2, 3]", "record_holders = [1, 2, [3, 4]]")
            .replace(
                "release = [\"released\", \"released\", \"released\"]",
                "release = [\"released\", \"released\", \"released\", \"withheld\"]",
            );
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.policy.record_holders[2], ShareHolders::Split([3, 4]));
        assert!(!cfg.is_one_share_per_controller());
        let wrong = text.replace("mode = \"mixed\"", "mode = \"split\"");
        assert_eq!(field_of(&wrong), "mode");
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(field_of(&DEMO.replace("cqss-scenario/1", "cqss-scenario/9")), "schema");
        assert_eq!(field_of(&DEMO.replace("trials = 4", "trials = 0")), "trials");
        assert_eq!(field_of(&DEMO.replace("players = 3", "players = 4")), "players");
        assert_eq!(field_of(&DEMO.replace("threshold = 3", "threshold = 0")), "policy.threshold");
        assert_eq!(field_of(&DEMO.replace("b = [0.0, 0.8]", "b = [0.0, 0.9]")), "secret");
        assert_eq!(
            field_of(&DEMO.replace("trials = 4", "trials = 4\ndecoys = 30")),
            "decoys"
        );
        assert_eq!(
            field_of(&format!(
                "{DEMO}\n[eve]\nstrategy = \"intercept-resend-random-basis\"\nintercept_probability = 1.5\n"
            )),
            "eve.intercept_probability"
        );
        let err = ScenarioConfig::from_toml_str(&DEMO.replace("trials = 4", "trials = 4\nbogus = 1"))
            .unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let err = ScenarioConfig::from_toml_str(&DEMO.replace("master_seed = 11\n", "")).unwrap_err();
        assert!(err.to_string().contains("master_seed"), "{err}");
    }

    #[test]
    fn explicit_and_haar_secrets() {
        let text = DEMO.replace(
            "kind = \"demo\"\na = [0.6, 0.0]\nb = [0.0, 0.8]",
            "kind = \"haar\"\nseed = 5",
        );
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.secret_state().unwrap(), RandomSource::new(5).haar_state(3));

        let text = DEMO.replace(
            "kind = \"demo\"\na = [0.6, 0.0]\nb = [0.0, 0.8]",
            "kind = \"explicit\"\namplitudes = [[1.0, 0.0], [0.0, 0.0]]",
        );
        assert_eq!(field_of(&text), "secret.amplitudes");
    }
}
