use nalgebra::DMatrix;
use num_complex::Complex64;

use super::register::{check_normalized, qubit_count, split_index, QubitId};
use super::{QcoreError, DENSITY_TOLERANCE};

/// Density matrix over an ordered qubit subset; `subset[0]` is the most
/// significant index bit.
///
/// Matrices built from free state vectors (not from a register) label their
/// qubits positionally, `QubitId::from_raw(p)` for position `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
    subset: Vec<QubitId>,
}

fn positional(n: usize) -> Vec<QubitId> {
    (0..n as u64).map(QubitId::from_raw).collect()
}

impl DensityMatrix {
    pub(crate) fn from_parts(entries: DMatrix<Complex64>, subset: Vec<QubitId>) -> Self {
        debug_assert_eq!(entries.nrows(), 1 << subset.len());
        Self { entries, subset }
    }

    /// Checked constructor: Hermitian, unit trace, no eigenvalue below −1e-9.
    pub fn new(entries: DMatrix<Complex64>, subset: Vec<QubitId>) -> Result<Self, QcoreError> {
        if entries.nrows() != entries.ncols() || entries.nrows() != 1usize << subset.len() {
            return Err(QcoreError::DimensionMismatch {
                left: entries.nrows(),
                right: 1usize << subset.len(),
            });
        }
        let rho = Self { entries, subset };
        rho.validate()?;
        Ok(rho)
    }

    /// |ψ⟩⟨ψ| with positional labels.
    pub fn pure(psi: &[Complex64]) -> Result<Self, QcoreError> {
        let n = qubit_count(psi.len())?;
        check_normalized(psi)?;
        let d = psi.len();
        let entries = DMatrix::from_fn(d, d, |r, c| psi[r] * psi[c].conj());
        Ok(Self::from_parts(entries, positional(n)))
    }

    /// (½)^s · I over `s` positional qubits.
    pub fn maximally_mixed(qubits: usize) -> Self {
        let d = 1usize << qubits;
        let entries = DMatrix::from_diagonal_element(d, d, Complex64::new(1.0 / d as f64, 0.0));
        Self::from_parts(entries, positional(qubits))
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn subset(&self) -> &[QubitId] {
        &self.subset
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn num_qubits(&self) -> usize {
        self.subset.len()
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// Largest entry of |ρ − ρ†|.
    pub fn hermitian_defect(&self) -> f64 {
        let adj = self.entries.adjoint();
        (&self.entries - adj)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues in ascending order (computed on the Hermitian part).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev = hermitian_eigenvalues(&self.entries);
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn validate(&self) -> Result<(), QcoreError> {
        let defect = self.hermitian_defect();
        if defect > DENSITY_TOLERANCE {
            return Err(QcoreError::InvalidDensity(format!("hermitian defect {defect:e}")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOLERANCE || tr.im.abs() > DENSITY_TOLERANCE {
            return Err(QcoreError::InvalidDensity(format!("trace {tr}")));
        }
        if let Some(&min) = self.eigenvalues().first() {
            if min < -DENSITY_TOLERANCE {
                return Err(QcoreError::InvalidDensity(format!("eigenvalue {min:e}")));
            }
        }
        Ok(())
    }

    /// Partial trace keeping the qubits at `keep` (positions into `subset`),
    /// in the given order.
    pub fn reduce(&self, keep: &[usize]) -> Result<DensityMatrix, QcoreError> {
        let n = self.num_qubits();
        if keep.is_empty() {
            return Err(QcoreError::EmptySubset);
        }
        for (i, &p) in keep.iter().enumerate() {
            if p >= n {
                return Err(QcoreError::IndexOutOfRange { index: p, len: n });
            }
            if keep[..i].contains(&p) {
                return Err(QcoreError::DuplicateQubit(self.subset[p]));
            }
        }
        let d = 1usize << keep.len();
        let mut out = DMatrix::<Complex64>::zeros(d, d);
        for r in 0..self.dim() {
            let (rs, rr) = split_index(r, n, keep);
            for c in 0..self.dim() {
                let (cs, cr) = split_index(c, n, keep);
                if rr == cr {
                    out[(rs, cs)] += self.entries[(r, c)];
                }
            }
        }
        let subset = keep.iter().map(|&p| self.subset[p]).collect();
        Ok(Self::from_parts(out, subset))
    }

    /// ½·I on the qubit at `pos` tensored with the partial trace over that
    /// qubit, with the mixed qubit kept in the same slot.
    pub fn replace_with_mixed(&self, pos: usize) -> Result<DensityMatrix, QcoreError> {
        let n = self.num_qubits();
        if pos >= n {
            return Err(QcoreError::IndexOutOfRange { index: pos, len: n });
        }
        let others: Vec<usize> = (0..n).filter(|&p| p != pos).collect();
        let rest = if others.is_empty() {
            None
        } else {
            Some(self.reduce(&others)?)
        };
        let d = self.dim();
        let entries = DMatrix::from_fn(d, d, |r, c| {
            let (rb, rr) = split_index(r, n, &[pos]);
            let (cb, cr) = split_index(c, n, &[pos]);
            if rb != cb {
                return Complex64::new(0.0, 0.0);
            }
            match &rest {
                Some(rho) => rho.entries[(rr, cr)] * 0.5,
                None => Complex64::new(0.5, 0.0),
            }
        });
        Ok(Self::from_parts(entries, self.subset.clone()))
    }
}

fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    nalgebra::SymmetricEigen::new(herm).eigenvalues.iter().copied().collect()
}

/// |⟨a|b⟩|², clamped to `[0, 1]`.
pub fn fidelity(a: &[Complex64], b: &[Complex64]) -> Result<f64, QcoreError> {
    if a.len() != b.len() {
        return Err(QcoreError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    Ok(overlap.norm_sqr().clamp(0.0, 1.0))
}

/// ½ Σ|λᵢ(r − s)|, clamped to `[0, 1]`.
pub fn trace_distance(r: &DensityMatrix, s: &DensityMatrix) -> Result<f64, QcoreError> {
    if r.dim() != s.dim() {
        return Err(QcoreError::DimensionMismatch {
            left: r.dim(),
            right: s.dim(),
        });
    }
    let diff = &r.entries - &s.entries;
    let sum: f64 = hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum();
    Ok((0.5 * sum).clamp(0.0, 1.0))
}

/// Players' state when the record for qubit position `withheld` is kept
/// secret: ½·I in that slot tensored with the partial trace of |ψ⟩⟨ψ| over it.
pub fn expected_withheld_density(
    psi: &[Complex64],
    withheld: usize,
) -> Result<DensityMatrix, QcoreError> {
    DensityMatrix::pure(psi)?.replace_with_mixed(withheld)
}
