use std::collections::BTreeSet;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExpectedOutcome, ScenarioConfig, SecretSource};
use super::encoding::demo_decode;
use super::mstar::{mstar_sweep, MstarTable};
use super::HarnessError;
use crate::protocol::{ProtocolRun, Reconstruction, ResourceReport, SealReason, ShareHolders};
use crate::qcore::{fidelity, RandomSource};
use crate::security::{
    no_information_audit, setup_with_decoys, verify_decoys, AuditReport, DecoyPlan, DetectionReport,
    Eavesdropper, SecurityError, Verdict,
};

pub const REPORT_SCHEMA: &str = "cqss-report/1";

/// Fidelity floor for an exact reconstruction.
pub const FIDELITY_FLOOR: f64 = 1.0 - 1e-10;

/// Width of the acceptance band for frequency checks, in standard errors.
pub const SIGMA_BAND: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Recovered,
    Sealed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub outcome: Outcome,
    /// |⟨Ψ|ρ⟩|² for the reconstructed register, when recovered.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    /// Fidelity of the decoded single-qubit secret, for demo secrets.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub secret_fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub corrected: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sealed: Option<SealReason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection: Option<DetectionReport>,
    pub interceptions: usize,
    pub resources: ResourceReport,
    pub bell_record: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: usize,
    pub recovered: usize,
    pub sealed: usize,
    pub recovered_fraction: f64,
    /// Mean over recovered trials.
    pub mean_fidelity: Option<f64>,
    pub min_fidelity: Option<f64>,
    pub detections: usize,
    pub detection_frequency: f64,
    pub predicted_detection_frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub scenario: String,
    pub master_seed: u64,
    pub aggregate: Aggregate,
    pub audit: AuditReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mstar: Option<MstarTable>,
    pub checks: Vec<Check>,
    pub trials: Vec<TrialRecord>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Records no released controller set can reach under the policy.
pub fn withheld_records(cfg: &ScenarioConfig) -> BTreeSet<usize> {
    (1..=cfg.secret_width)
        .filter(|&i| match cfg.policy.holders_of(i) {
            ShareHolders::Single(c) => !cfg.policy.is_released(c),
            ShareHolders::Split([a, b]) => !(cfg.policy.is_released(a) && cfg.policy.is_released(b)),
        })
        .collect()
}

/// Distributed and transported run without decoys or Eve, seeded from the
/// stream `stream` of the master seed.
pub(crate) fn clean_run(
    cfg: &ScenarioConfig,
    secret: &[Complex64],
    policy: crate::protocol::AccessPolicy,
    stream: u64,
) -> Result<ProtocolRun, SecurityError> {
    let mut run = ProtocolRun::setup(
        cfg.players,
        cfg.controllers,
        secret.to_vec(),
        policy,
        RandomSource::for_trial(cfg.master_seed, stream),
    )?;
    run.distribute_all(None)?;
    run.transport_shares()?;
    Ok(run)
}

/// One complete trial: decoy insertion, distribution with optional Eve,
/// share transport, decoy verification, release and reconstruction.
pub fn run_trial(
    cfg: &ScenarioConfig,
    secret: &[Complex64],
    trial: u64,
) -> Result<TrialRecord, SecurityError> {
    let mut rng = RandomSource::for_trial(cfg.master_seed, trial);
    let plan = DecoyPlan::random(cfg.secret_width, cfg.decoys, &mut rng);
    let mut run = setup_with_decoys(
        cfg.players,
        cfg.controllers,
        secret.to_vec(),
        cfg.policy.clone(),
        &plan,
        rng,
    )?;
    let mut eve = Eavesdropper::new(cfg.eve);
    if cfg.eve.is_active() {
        run.distribute_all(Some(&mut eve))?;
    } else {
        run.distribute_all(None)?;
    }
    run.transport_shares()?;
    let detection = if plan.count() > 0 {
        Some(verify_decoys(&mut run, &plan)?)
    } else {
        None
    };
    let resources = run.resource_report()?;
    let bell_record = run
        .transcript()
        .bell_record
        .values()
        .map(|k| k.to_string())
        .collect();

    let mut record = TrialRecord {
        trial,
        outcome: Outcome::Sealed,
        fidelity: None,
        secret_fidelity: None,
        corrected: Vec::new(),
        sealed: None,
        detection,
        interceptions: eve.interceptions,
        resources,
        bell_record,
    };
    match run.reconstruct()? {
        Reconstruction::Recovered {
            state, corrected, ..
        } => {
            record.outcome = Outcome::Recovered;
            record.fidelity = Some(fidelity(&state, secret)?);
            if let SecretSource::Demo { a, b } = cfg.secret {
                let xi = [Complex64::new(a[0], a[1]), Complex64::new(b[0], b[1])];
                record.secret_fidelity = Some(match demo_decode(&state) {
                    Ok(got) => fidelity(&got, &xi)?,
                    Err(_) => 0.0,
                });
            }
            record.corrected = corrected;
        }
        Reconstruction::Sealed(reason) => record.sealed = Some(reason),
    }
    Ok(record)
}

fn aggregate(cfg: &ScenarioConfig, trials: &[TrialRecord]) -> Aggregate {
    let fids: Vec<f64> = trials.iter().filter_map(|t| t.fidelity).collect();
    let recovered = fids.len();
    let detections = trials
        .iter()
        .filter(|t| t.detection.is_some_and(|d| d.verdict == Verdict::EveDetected))
        .count();
    let total = trials.len();
    Aggregate {
        trials: total,
        recovered,
        sealed: total - recovered,
        recovered_fraction: recovered as f64 / total as f64,
        mean_fidelity: (recovered > 0).then(|| fids.iter().sum::<f64>() / recovered as f64),
        min_fidelity: fids.iter().copied().reduce(f64::min),
        detections,
        detection_frequency: detections as f64 / total as f64,
        predicted_detection_frequency: 1.0 - cfg.eve.escape_probability(cfg.decoys),
    }
}

/// Binomial frequency test: `|observed − p| ≤ 4σ`, exact when σ = 0.
pub fn within_band(observed: f64, p: f64, trials: usize) -> (bool, f64) {
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    let pass = if sigma == 0.0 {
        observed == p
    } else {
        (observed - p).abs() <= SIGMA_BAND * sigma
    };
    (pass, sigma)
}

fn checks(
    cfg: &ScenarioConfig,
    trials: &[TrialRecord],
    agg: &Aggregate,
    audit: &AuditReport,
    mstar: Option<&MstarTable>,
) -> Vec<Check> {
    let mut out = Vec::new();
    let mut push = |name: &str, pass: bool, detail: String| {
        out.push(Check {
            name: name.into(),
            pass,
            detail,
        })
    };

    if !cfg.eve.is_active() {
        let full = trials
            .iter()
            .filter(|t| t.corrected.len() == cfg.secret_width)
            .filter_map(|t| t.fidelity);
        let bad = full.filter(|&f| f < FIDELITY_FLOOR).count();
        push(
            "exact-reconstruction",
            bad == 0,
            format!("{bad} fully corrected trial(s) below fidelity {FIDELITY_FLOOR}"),
        );
    }
    if cfg.decoys > 0 {
        let (pass, sigma) = within_band(agg.detection_frequency, agg.predicted_detection_frequency, agg.trials);
        push(
            "detection-frequency",
            pass,
            format!(
                "observed {:.6}, predicted {:.6}, sigma {:.6}",
                agg.detection_frequency, agg.predicted_detection_frequency, sigma
            ),
        );
    }
    push(
        "no-information",
        audit.pass,
        format!("trace distance {:e} over withheld {:?}", audit.trace_distance, audit.withheld),
    );
    if let Some(table) = mstar {
        push(
            "mstar-equals-threshold",
            table.matches_threshold,
            format!("m* = {:?}, k = {}", table.m_star, table.threshold),
        );
    }

    let expect = &cfg.expect;
    if let Some(outcome) = expect.outcome {
        let (want, got) = match outcome {
            ExpectedOutcome::Recovered => ("recovered", agg.recovered),
            ExpectedOutcome::Sealed => ("sealed", agg.sealed),
        };
        push(
            "expected-outcome",
            got == agg.trials,
            format!("{got}/{} trials {want}", agg.trials),
        );
    }
    if let Some(floor) = expect.min_mean_fidelity {
        push(
            "mean-fidelity",
            agg.mean_fidelity.is_some_and(|f| f >= floor),
            format!("mean {:?}, floor {floor}", agg.mean_fidelity),
        );
    }
    if let Some(verdict) = expect.verdict {
        let matching = trials
            .iter()
            .filter(|t| t.detection.map_or(Verdict::Clean, |d| d.verdict) == verdict)
            .count();
        let pass = match verdict {
            Verdict::Clean => matching == agg.trials,
            Verdict::EveDetected => matching > 0,
        };
        push(
            "expected-verdict",
            pass,
            format!("{matching}/{} trials {verdict:?}", agg.trials),
        );
    }
    if let Some(m) = expect.mstar {
        let got = mstar.and_then(|t| t.m_star);
        push("expected-mstar", got == Some(m), format!("m* = {got:?}, expected {m}"));
    }
    out
}

/// Run every trial of `cfg` in parallel and assemble the report. Trial `t`
/// draws from stream `t` of the master seed; the output does not depend on
/// scheduling.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunReport, HarnessError> {
    cfg.validate()?;
    let secret = cfg.secret_state()?;
    let trials: Vec<TrialRecord> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(cfg, &secret, t).map_err(|source| HarnessError::Trial { trial: t, source }))
        .collect::<Result<_, _>>()?;

    let audit_run = clean_run(cfg, &secret, cfg.policy.clone(), u64::MAX)?;
    let audit = no_information_audit(&audit_run, &withheld_records(cfg))?;
    let mstar = if cfg.is_one_share_per_controller() {
        Some(mstar_sweep(cfg)?)
    } else {
        None
    };
    let agg = aggregate(cfg, &trials);
    let checks = checks(cfg, &trials, &agg, &audit, mstar.as_ref());
    Ok(RunReport {
        schema: REPORT_SCHEMA.into(),
        scenario: cfg.name.clone(),
        master_seed: cfg.master_seed,
        aggregate: agg,
        audit,
        mstar,
        checks,
        trials,
    })
}
