//! Demo (N, N) encoding a|0…0⟩ + b|1…1⟩ used for end-to-end runs.

use num_complex::Complex64;

use super::HarnessError;
use crate::qcore::{register_width, NORM_TOLERANCE};

/// Tolerance for membership in the demo code space.
pub const CODE_TOLERANCE: f64 = 1e-9;

pub fn demo_encode(xi: [Complex64; 2], width: usize) -> Result<Vec<Complex64>, HarnessError> {
    let norm = xi[0].norm_sqr() + xi[1].norm_sqr();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(HarnessError::Encoding(format!(
            "secret amplitudes have norm² {norm}"
        )));
    }
    if width < 2 {
        return Err(HarnessError::Encoding(format!(
            "demo encoding needs at least 2 qubits, got {width}"
        )));
    }
    let mut psi = vec![Complex64::new(0.0, 0.0); 1 << width];
    psi[0] = xi[0];
    psi[(1 << width) - 1] = xi[1];
    Ok(psi)
}

/// Inverse of [`demo_encode`], up to global phase.
pub fn demo_decode(state: &[Complex64]) -> Result<[Complex64; 2], HarnessError> {
    let width = register_width(state).map_err(|e| HarnessError::Encoding(e.to_string()))?;
    let last = state.len() - 1;
    let leak: f64 = state[1..last].iter().map(|a| a.norm_sqr()).sum();
    if width < 2 || leak > CODE_TOLERANCE {
        return Err(HarnessError::Encoding(format!(
            "state outside the demo code space (weight {leak:e} off |0…0⟩, |1…1⟩)"
        )));
    }
    let a = state[0];
    let b = state[last];
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    Ok([a / norm, b / norm])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{fidelity, QuantumRegister, RandomSource};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn encode_examples() {
        let psi = demo_encode([c(1.0, 0.0), c(0.0, 0.0)], 3).unwrap();
        assert_eq!(psi[0], c(1.0, 0.0));
        assert!(psi[1..].iter().all(|a| a.norm() == 0.0));

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = demo_encode([c(h, 0.0), c(h, 0.0)], 2).unwrap();
        assert_eq!(psi, vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]);

        assert!(demo_encode([c(1.0, 0.0), c(1.0, 0.0)], 2).is_err());
        assert!(demo_encode([c(1.0, 0.0), c(0.0, 0.0)], 1).is_err());
    }

    #[test]
    fn single_share_sees_only_populations() {
        let xi = [c(0.6, 0.0), c(0.0, 0.8)];
        for width in 2..=4 {
            let psi = demo_encode(xi, width).unwrap();
            let mut reg = QuantumRegister::new();
            let ids = reg.append_state(&psi, crate::PartyId::DEALER).unwrap();
            for q in ids {
                let rho = reg.reduced_density(&[q]).unwrap();
                let e = rho.entries();
                assert!((e[(0, 0)].re - 0.36).abs() < 1e-15);
                assert!((e[(1, 1)].re - 0.64).abs() < 1e-15);
                assert!(e[(0, 1)].norm() < 1e-15);
            }
        }
    }

    #[test]
    fn decode_examples() {
        let mut rng = RandomSource::new(6);
        for width in 2..=5 {
            let xi_vec = rng.haar_state(1);
            let xi = [xi_vec[0], xi_vec[1]];
            let back = demo_decode(&demo_encode(xi, width).unwrap()).unwrap();
            assert!(fidelity(&back, &xi).unwrap() > 1.0 - 1e-15);
        }
        let zeros = demo_encode([c(1.0, 0.0), c(0.0, 0.0)], 3).unwrap();
        assert_eq!(demo_decode(&zeros).unwrap(), [c(1.0, 0.0), c(0.0, 0.0)]);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let outside = [c(0.0, 0.0), c(h, 0.0), c(h, 0.0), c(0.0, 0.0)];
        assert!(matches!(demo_decode(&outside), Err(HarnessError::Encoding(_))));
    }
}
