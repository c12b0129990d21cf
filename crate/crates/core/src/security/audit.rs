use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::SecurityError;
use crate::protocol::ProtocolRun;
use crate::qcore::{trace_distance, DensityMatrix};

/// Trace-distance bound for an exact no-information check.
pub const AUDIT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub withheld: Vec<usize>,
    pub trace_distance: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Closed-form players' state: every withheld slot of |Ψ⟩⟨Ψ| replaced by ½·I.
pub fn predicted_withheld_density(
    secret: &[num_complex::Complex64],
    withheld: &BTreeSet<usize>,
) -> Result<DensityMatrix, SecurityError> {
    let mut rho = DensityMatrix::pure(secret)?;
    for &i in withheld {
        rho = rho.replace_with_mixed(i - 1)?;
    }
    Ok(rho)
}

/// Compare the branch-enumerated players' state with the closed form.
pub fn no_information_audit(
    run: &ProtocolRun,
    withheld: &BTreeSet<usize>,
) -> Result<AuditReport, SecurityError> {
    let actual = run.withheld_state(withheld)?;
    let predicted = predicted_withheld_density(run.secret(), withheld)?;
    let d = trace_distance(&actual, &predicted)?;
    Ok(AuditReport {
        withheld: withheld.iter().copied().collect(),
        trace_distance: d,
        tolerance: AUDIT_TOLERANCE,
        pass: d <= AUDIT_TOLERANCE,
    })
}
