use std::fmt;
use std::ops::BitXor;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub(crate) const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// The four Bell states of a qubit pair `(first, second)`.
///
/// `PhiMinus` is the singlet (EPR) state used for every dealer link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BellKind {
    /// (|01⟩ − |10⟩)/√2
    PhiMinus,
    /// (|01⟩ + |10⟩)/√2
    PhiPlus,
    /// (|00⟩ − |11⟩)/√2
    VarphiMinus,
    /// (|00⟩ + |11⟩)/√2
    VarphiPlus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PhiMinus,
        BellKind::PhiPlus,
        BellKind::VarphiMinus,
        BellKind::VarphiPlus,
    ];

    /// Amplitudes in `|00⟩, |01⟩, |10⟩, |11⟩` order, first qubit most significant.
    pub fn amplitudes(self) -> [Complex64; 4] {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            BellKind::PhiMinus => [ZERO, h, -h, ZERO],
            BellKind::PhiPlus => [ZERO, h, h, ZERO],
            BellKind::VarphiMinus => [h, ZERO, ZERO, -h],
            BellKind::VarphiPlus => [h, ZERO, ZERO, h],
        }
    }

    /// Classical two-bit label: φ⁻→00, φ⁺→01, φ̃⁻→10, φ̃⁺→11.
    pub fn bits(self) -> TwoBits {
        match self {
            BellKind::PhiMinus => TwoBits::new(false, false),
            BellKind::PhiPlus => TwoBits::new(false, true),
            BellKind::VarphiMinus => TwoBits::new(true, false),
            BellKind::VarphiPlus => TwoBits::new(true, true),
        }
    }

    pub fn from_bits(bits: TwoBits) -> Self {
        match (bits.x, bits.y) {
            (false, false) => BellKind::PhiMinus,
            (false, true) => BellKind::PhiPlus,
            (true, false) => BellKind::VarphiMinus,
            (true, true) => BellKind::VarphiPlus,
        }
    }

    /// Pauli that undoes the swap residual when the dealer observes `self`
    /// while measuring (carried qubit, dealer half of a singlet link).
    pub fn correction(self) -> PauliOp {
        match self {
            BellKind::VarphiPlus => PauliOp::ZX,
            BellKind::VarphiMinus => PauliOp::X,
            BellKind::PhiPlus => PauliOp::Z,
            BellKind::PhiMinus => PauliOp::I,
        }
    }
}

impl fmt::Display for BellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            BellKind::PhiMinus => "phi-",
            BellKind::PhiPlus => "phi+",
            BellKind::VarphiMinus => "varphi-",
            BellKind::VarphiPlus => "varphi+",
        };
        f.write_str(name)
    }
}

/// A pair of classical bits `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TwoBits {
    pub x: bool,
    pub y: bool,
}

impl TwoBits {
    pub const fn new(x: bool, y: bool) -> Self {
        Self { x, y }
    }

    /// `0..4` with `x` as the high bit.
    pub fn index(self) -> usize {
        (usize::from(self.x) << 1) | usize::from(self.y)
    }

    pub fn from_index(i: usize) -> Self {
        Self::new(i & 2 != 0, i & 1 != 0)
    }
}

impl BitXor for TwoBits {
    type Output = TwoBits;

    fn bitxor(self, rhs: TwoBits) -> TwoBits {
        TwoBits::new(self.x ^ rhs.x, self.y ^ rhs.y)
    }
}

impl fmt::Display for TwoBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", u8::from(self.x), u8::from(self.y))
    }
}

impl Serialize for TwoBits {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TwoBits {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "00" => Ok(TwoBits::new(false, false)),
            "01" => Ok(TwoBits::new(false, true)),
            "10" => Ok(TwoBits::new(true, false)),
            "11" => Ok(TwoBits::new(true, true)),
            other => Err(serde::de::Error::custom(format!("invalid bit pair {other:?}"))),
        }
    }
}

/// Single-qubit Pauli corrections. `ZX` applies X first, then Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliOp {
    I,
    X,
    Z,
    ZX,
}

impl PauliOp {
    /// Row-major 2×2 matrix.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        match self {
            PauliOp::I => [[ONE, ZERO], [ZERO, ONE]],
            PauliOp::X => [[ZERO, ONE], [ONE, ZERO]],
            PauliOp::Z => [[ONE, ZERO], [ZERO, -ONE]],
            PauliOp::ZX => [[ZERO, ONE], [-ONE, ZERO]],
        }
    }

    /// Inverse operator (equal to `self` up to a global sign).
    pub fn inverse(self) -> PauliOp {
        self
    }
}

/// Single-qubit measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    /// Eigenvector for outcome `bit`: Z gives |0⟩/|1⟩, X gives |+x⟩/|−x⟩.
    pub fn eigenvector(self, bit: bool) -> [Complex64; 2] {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match (self, bit) {
            (Basis::Z, false) => [ONE, ZERO],
            (Basis::Z, true) => [ZERO, ONE],
            (Basis::X, false) => [h, h],
            (Basis::X, true) => [h, -h],
        }
    }
}
