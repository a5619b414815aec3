use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Single-qubit Pauli correction `X^x Z^z`, with symbol `2z + x`:
/// 0 = I, 1 = X, 2 = Z, 3 = XZ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Pauli {
    I,
    X,
    Z,
    XZ,
}

impl From<Pauli> for u8 {
    fn from(p: Pauli) -> u8 {
        p.symbol()
    }
}

impl TryFrom<u8> for Pauli {
    type Error = Error;
    fn try_from(s: u8) -> Result<Self> {
        Pauli::from_symbol(s)
    }
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Z, Pauli::XZ];

    pub fn from_symbol(s: u8) -> Result<Self> {
        match s {
            0 => Ok(Pauli::I),
            1 => Ok(Pauli::X),
            2 => Ok(Pauli::Z),
            3 => Ok(Pauli::XZ),
            _ => Err(Error::Domain(format!("Pauli symbol {s} not in 0..=3"))),
        }
    }

    pub fn from_bits(x: u8, z: u8) -> Self {
        Self::from_symbol(((z & 1) << 1) | (x & 1)).expect("two bits")
    }

    pub fn symbol(self) -> u8 {
        self as u8
    }

    pub fn x_bit(self) -> u8 {
        self.symbol() & 1
    }

    pub fn z_bit(self) -> u8 {
        self.symbol() >> 1
    }

    /// The matrix `X^x Z^z`.
    pub fn matrix<T: Scalar>(self) -> Matrix<T> {
        let v: [f64; 4] = match self {
            Pauli::I => [1.0, 0.0, 0.0, 1.0],
            Pauli::X => [0.0, 1.0, 1.0, 0.0],
            Pauli::Z => [1.0, 0.0, 0.0, -1.0],
            Pauli::XZ => [0.0, -1.0, 1.0, 0.0],
        };
        Matrix::from_real(2, &v).expect("2x2")
    }

    /// `self · other = sign · result`, with `sign ∈ {+1, −1}`.
    pub fn compose(self, other: Pauli) -> (Pauli, i8) {
        let sign = if self.z_bit() & other.x_bit() == 1 { -1 } else { 1 };
        (Pauli::from_symbol(self.symbol() ^ other.symbol()).expect("xor of symbols"), sign)
    }

    /// `+1` if the two commute, `−1` if they anticommute.
    pub fn commutation_sign(self, other: Pauli) -> i8 {
        if (self.z_bit() & other.x_bit()) ^ (self.x_bit() & other.z_bit()) == 1 {
            -1
        } else {
            1
        }
    }

    /// `H self H = sign · result`.
    pub fn conjugate_by_hadamard(self) -> (Pauli, i8) {
        let sign = if self.x_bit() & self.z_bit() == 1 { -1 } else { 1 };
        (Pauli::from_bits(self.z_bit(), self.x_bit()), sign)
    }

    /// Whether `σ_k† H^θ|x⟩` measured in basis `θ` reads `1 − x`.
    pub fn flips_bb84(self, theta: u8) -> bool {
        if theta & 1 == 0 {
            self.x_bit() == 1
        } else {
            self.z_bit() == 1
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pauli::I => "I",
            Pauli::X => "X",
            Pauli::Z => "Z",
            Pauli::XZ => "XZ",
        })
    }
}

/// Outcome of measuring `σ_k† H^θ|x⟩` in basis `θ`.
pub fn pauli_effect_on_bb84(k: Pauli, theta: u8, x: u8) -> u8 {
    (x & 1) ^ u8::from(k.flips_bb84(theta))
}

/// Per-qubit Pauli string, qubit 0 first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PauliKey(Vec<Pauli>);

impl PauliKey {
    pub fn identity(n: usize) -> Self {
        Self(vec![Pauli::I; n])
    }

    pub fn new(paulis: Vec<Pauli>) -> Self {
        Self(paulis)
    }

    pub fn from_symbols(symbols: &[u8]) -> Result<Self> {
        symbols.iter().map(|&s| Pauli::from_symbol(s)).collect::<Result<Vec<_>>>().map(Self)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self((0..n).map(|_| Pauli::ALL[rng.random_range(0..4)]).collect())
    }

    pub fn symbols(&self) -> Vec<u8> {
        self.0.iter().map(|p| p.symbol()).collect()
    }

    pub fn paulis(&self) -> &[Pauli] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    /// Product up to a global sign.
    pub fn compose(&self, other: &PauliKey) -> PauliKey {
        assert_eq!(self.len(), other.len(), "Pauli keys of different lengths");
        Self(self.0.iter().zip(&other.0).map(|(&a, &b)| a.compose(b).0).collect())
    }

    pub fn concat(&self, other: &PauliKey) -> PauliKey {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self(v)
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> PauliKey {
        Self(self.0[range].to_vec())
    }

    /// Tensor product of the per-qubit matrices, qubit 0 most significant.
    pub fn matrix<T: Scalar>(&self) -> Matrix<T> {
        self.0.iter().fold(Matrix::identity(1), |acc, p| acc.kron(&p.matrix()))
    }
}

impl fmt::Display for PauliKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{BasisString, Statevector};
    use num_complex::Complex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn composition_table_matches_matrices() {
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let (c, sign) = a.compose(b);
                let lhs = a.matrix::<f64>().matmul(&b.matrix());
                let rhs = c.matrix::<f64>().scale(Complex::new(sign as f64, 0.0));
                assert!(lhs.max_abs_diff(&rhs) < 1e-15, "{a}·{b}");
                let ab = a.matrix::<f64>().matmul(&b.matrix());
                let ba = b.matrix::<f64>().matmul(&a.matrix());
                let s = Complex::new(a.commutation_sign(b) as f64, 0.0);
                assert!(ab.max_abs_diff(&ba.scale(s)) < 1e-15);
            }
        }
    }

    #[test]
    fn hadamard_conjugation_table() {
        let h = crate::qsim::Gate::<f64>::H.matrix();
        for a in Pauli::ALL {
            let (c, sign) = a.conjugate_by_hadamard();
            let lhs = h.matmul(&a.matrix()).matmul(&h);
            assert!(lhs.max_abs_diff(&c.matrix::<f64>().scale(Complex::new(sign as f64, 0.0))) < 1e-15);
        }
    }

    #[test]
    fn bb84_flip_table_against_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for k in Pauli::ALL {
            for theta in 0..2u8 {
                for x in 0..2u8 {
                    let s = Statevector::<f64>::bb84(theta, x);
                    let corrupted = s
                        .apply_gate(&crate::qsim::Gate::Unitary(k.matrix().adjoint()), &[0])
                        .unwrap();
                    let (bits, _) = corrupted
                        .measure_in_basis(&BasisString::uniform(theta, 1), &[0], &mut rng)
                        .unwrap();
                    assert_eq!(bits[0], pauli_effect_on_bb84(k, theta, x), "k={k} θ={theta} x={x}");
                }
            }
        }
        assert_eq!(pauli_effect_on_bb84(Pauli::X, 0, 0), 1);
        assert_eq!(pauli_effect_on_bb84(Pauli::I, 1, 1), 1);
    }

    #[test]
    fn key_serializes_as_symbols() {
        let k = PauliKey::from_symbols(&[0, 3, 1]).unwrap();
        assert_eq!(serde_json::to_string(&k).unwrap(), "[0,3,1]");
        assert!(PauliKey::from_symbols(&[4]).is_err());
    }
}
