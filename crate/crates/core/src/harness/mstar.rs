//! Minimum number of consenting controllers, found by sweeping release sets.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::scenario::clean_run;
use super::HarnessError;
use crate::protocol::{AccessPolicy, Release};
use crate::qcore::RandomSource;

/// Largest controller count swept exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 5;
/// Subsets drawn per release count above the limit.
pub const SAMPLES_PER_COUNT: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MstarRow {
    pub released: usize,
    pub subsets: usize,
    pub recovered: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MstarTable {
    pub controllers: usize,
    pub threshold: usize,
    pub exhaustive: bool,
    pub rows: Vec<MstarRow>,
    /// Smallest release count with at least one successful subset.
    pub m_star: Option<usize>,
    pub matches_threshold: bool,
}

fn binomial(n: usize, r: usize) -> usize {
    (0..r).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// All `r`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, r, &mut Vec::new(), &mut out);
    out
}

/// For every release count `r = 0..=m`, reconstruct under each chosen set of
/// `r` releasing controllers with all players cooperating, and count the
/// sets that recover.
pub fn mstar_sweep(cfg: &ScenarioConfig) -> Result<MstarTable, HarnessError> {
    if !cfg.is_one_share_per_controller() {
        return Err(HarnessError::Config {
            field: "policy.record_holders".into(),
            reason: "m* sweep needs n = m = N with one classical record per controller".into(),
        });
    }
    let secret = cfg.secret_state()?;
    let m = cfg.controllers;
    let exhaustive = m <= EXHAUSTIVE_LIMIT;
    let mut pick = RandomSource::for_trial(cfg.master_seed, u64::MAX - 1);
    let mut stream = 1u64 << 48;
    let mut rows = Vec::with_capacity(m + 1);
    for r in 0..=m {
        let subsets = if exhaustive || binomial(m, r) <= SAMPLES_PER_COUNT {
            combinations(m, r)
        } else {
            (0..SAMPLES_PER_COUNT)
                .map(|_| {
                    let mut s = sample(&mut pick, m, r).into_vec();
                    s.sort_unstable();
                    s
                })
                .collect()
        };
        let mut recovered = 0;
        for subset in &subsets {
            let mut release = vec![Release::Withheld; m];
            for &c in subset {
                release[c] = Release::Released;
            }
            let policy = AccessPolicy {
                release,
                cooperating_players: (1..=cfg.players).collect(),
                ..cfg.policy.clone()
            };
            let mut run = clean_run(cfg, &secret, policy, stream)?;
            stream += 1;
            if run.reconstruct().map_err(crate::security::SecurityError::from)?.is_recovered() {
                recovered += 1;
            }
        }
        rows.push(MstarRow {
            released: r,
            subsets: subsets.len(),
            recovered,
        });
    }
    let m_star = rows.iter().find(|row| row.recovered > 0).map(|row| row.released);
    Ok(MstarTable {
        controllers: m,
        threshold: cfg.policy.threshold,
        exhaustive,
        rows,
        m_star,
        matches_threshold: m_star == Some(cfg.policy.threshold),
    })
}
