//! Scenario files, batch trial execution and reports.

mod config;
mod encoding;
mod experiments;
mod mstar;
mod scenario;

use thiserror::Error;

use crate::protocol::ProtocolError;
use crate::qcore::QcoreError;
use crate::security::SecurityError;

pub use config::{
    ExpectedOutcome, Expectations, ScenarioConfig, SecretSource, DEFAULT_EVE_SWEEP, SCENARIO_SCHEMA,
};
pub use encoding::{demo_decode, demo_encode, CODE_TOLERANCE};
pub use experiments::{
    eve_curve, noinfo_sweep, resource_table, EveCurve, EvePoint, NoInfoReport, ResourceTable,
    FULL_NOINFO_WIDTH,
};
pub use mstar::{mstar_sweep, MstarRow, MstarTable, EXHAUSTIVE_LIMIT, SAMPLES_PER_COUNT};
pub use scenario::{
    run_scenario, run_trial, within_band, withheld_records, Aggregate, Check, Outcome, RunReport,
    TrialRecord, FIDELITY_FLOOR, REPORT_SCHEMA, SIGMA_BAND,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{}malformed scenario: {message}", path.as_ref().map(|p| format!("{p}: ")).unwrap_or_default())]
    Parse { path: Option<String>, message: String },
    #[error("invalid scenario field `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("encoding: {0}")]
    Encoding(String),
    #[error("trial {trial}: {source}")]
    Trial { trial: u64, source: SecurityError },
    #[error(transparent)]
    Security(#[from] SecurityError),
}

impl From<ProtocolError> for HarnessError {
    fn from(e: ProtocolError) -> Self {
        HarnessError::Security(e.into())
    }
}

impl From<QcoreError> for HarnessError {
    fn from(e: QcoreError) -> Self {
        HarnessError::Security(e.into())
    }
}
