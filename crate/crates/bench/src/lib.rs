//! Criterion benchmarks for the simulator; see `benches/`.

use cqss_core::harness::{Expectations, ScenarioConfig, SecretSource, SCENARIO_SCHEMA};
use cqss_core::protocol::{AccessPolicy, ShareMode};
use cqss_core::security::EveModel;

/// One-to-one scenario over `width` qubits with a Haar-random secret.
pub fn one_to_one(width: usize, decoys: usize, eve: EveModel) -> ScenarioConfig {
    ScenarioConfig {
        schema: SCENARIO_SCHEMA.into(),
        name: format!("bench-{width}"),
        secret_width: width,
        players: width,
        controllers: width,
        mode: ShareMode::Classical,
        policy: AccessPolicy::one_to_one(width, width),
        decoys,
        eve,
        secret: SecretSource::Haar { seed: 1 },
        trials: 1,
        master_seed: 0,
        eve_sweep: None,
        expect: Expectations::default(),
    }
}
