//! Sweeps behind the `noinfo`, `eve` and `resources` commands.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ScenarioConfig, DEFAULT_EVE_SWEEP};
use super::scenario::{clean_run, run_trial, within_band, withheld_records};
use super::HarnessError;
use crate::protocol::{ExpectedResources, ResourceReport};
use crate::qcore::RandomSource;
use crate::security::{
    no_information_audit, setup_with_decoys, verify_decoys, AuditReport, DecoyPlan, Eavesdropper,
    EveModel, SecurityError, Verdict,
};

/// Widths up to which every nonempty withheld set is audited.
pub const FULL_NOINFO_WIDTH: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoInfoReport {
    pub scenario: String,
    pub audits: Vec<AuditReport>,
    pub pass: bool,
}

/// Audit every nonempty withheld set (N ≤ 4), or every single index, the
/// policy's own withheld set and the full set above that.
pub fn noinfo_sweep(cfg: &ScenarioConfig) -> Result<NoInfoReport, HarnessError> {
    cfg.validate()?;
    let secret = cfg.secret_state()?;
    let n = cfg.secret_width;
    let run = clean_run(cfg, &secret, cfg.policy.clone(), u64::MAX)?;
    let mut sets: BTreeSet<Vec<usize>> = BTreeSet::new();
    if n <= FULL_NOINFO_WIDTH {
        for mask in 1u32..(1 << n) {
            sets.insert((1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect());
        }
    } else {
        sets.extend((1..=n).map(|i| vec![i]));
        sets.insert((1..=n).collect());
    }
    let own: Vec<usize> = withheld_records(cfg).into_iter().collect();
    if !own.is_empty() {
        sets.insert(own);
    }
    let mut sets: Vec<Vec<usize>> = sets.into_iter().collect();
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    let audits = sets
        .par_iter()
        .map(|s| no_information_audit(&run, &s.iter().copied().collect()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(NoInfoReport {
        scenario: cfg.name.clone(),
        pass: audits.iter().all(|a| a.pass),
        audits,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvePoint {
    pub decoys: usize,
    pub trials: usize,
    pub escaped: usize,
    pub escape_frequency: f64,
    pub predicted_escape: f64,
    pub sigma: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EveCurve {
    pub scenario: String,
    pub eve: EveModel,
    pub points: Vec<EvePoint>,
    pub pass: bool,
}

fn escapes(
    cfg: &ScenarioConfig,
    secret: &[num_complex::Complex64],
    decoys: usize,
    stream: u64,
) -> Result<usize, SecurityError> {
    let mut rng = RandomSource::for_trial(cfg.master_seed, stream);
    let plan = DecoyPlan::random(cfg.secret_width, decoys, &mut rng);
    let mut run = setup_with_decoys(
        cfg.players,
        cfg.controllers,
        secret.to_vec(),
        cfg.policy.clone(),
        &plan,
        rng,
    )?;
    let mut eve = Eavesdropper::new(cfg.eve);
    run.distribute_all(Some(&mut eve))?;
    let report = verify_decoys(&mut run, &plan)?;
    Ok(usize::from(report.verdict == Verdict::Clean))
}

/// Escape frequency against the decoy count. Each point runs `cfg.trials`
/// distributions with Eve on the player channel and checks the frequency of
/// clean verdicts against `(1 − p/4)^M`.
pub fn eve_curve(cfg: &ScenarioConfig) -> Result<EveCurve, HarnessError> {
    cfg.validate()?;
    let secret = cfg.secret_state()?;
    let counts = cfg.eve_sweep.clone().unwrap_or_else(|| DEFAULT_EVE_SWEEP.to_vec());
    let mut points = Vec::with_capacity(counts.len());
    for (i, &decoys) in counts.iter().enumerate() {
        let base = ((i as u64) + 1) << 40;
        let escaped = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|t| {
                escapes(cfg, &secret, decoys, base + t)
                    .map_err(|source| HarnessError::Trial { trial: base + t, source })
            })
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .sum::<usize>();
        let freq = escaped as f64 / cfg.trials as f64;
        let predicted = cfg.eve.escape_probability(decoys);
        let (pass, sigma) = within_band(freq, predicted, cfg.trials);
        points.push(EvePoint {
            decoys,
            trials: cfg.trials,
            escaped,
            escape_frequency: freq,
            predicted_escape: predicted,
            sigma,
            pass,
        });
    }
    Ok(EveCurve {
        scenario: cfg.name.clone(),
        eve: cfg.eve,
        pass: points.iter().all(|p| p.pass),
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceTable {
    pub scenario: String,
    pub secret_width: usize,
    pub split_records: usize,
    pub report: ResourceReport,
    pub expected: ExpectedResources,
    pub matches: bool,
}

/// Counters of trial 0 next to the closed-form totals.
pub fn resource_table(cfg: &ScenarioConfig) -> Result<ResourceTable, HarnessError> {
    cfg.validate()?;
    let secret = cfg.secret_state()?;
    let record = run_trial(cfg, &secret, 0).map_err(|source| HarnessError::Trial { trial: 0, source })?;
    let split = cfg.policy.record_holders.iter().filter(|h| h.is_split()).count();
    let expected = ResourceReport::expected(cfg.secret_width, split, cfg.decoys);
    Ok(ResourceTable {
        scenario: cfg.name.clone(),
        secret_width: cfg.secret_width,
        split_records: split,
        matches: expected.matches(&record.resources),
        report: record.resources,
        expected,
    })
}
