use num_complex::Complex;

use crate::error::Result;
use crate::linalg::Matrix;
use crate::scalar::{Scalar, C};

/// Gates accepted by [`Statevector::apply_gate`](super::Statevector::apply_gate).
#[derive(Clone, Debug, PartialEq)]
pub enum Gate<T: Scalar> {
    H,
    X,
    Z,
    /// Any `2^k × 2^k` unitary acting on `k` targets.
    Unitary(Matrix<T>),
}

impl<T: Scalar> Gate<T> {
    pub fn matrix(&self) -> Matrix<T> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Gate::H => Matrix::from_real(2, &[h, h, h, -h]).expect("2x2"),
            Gate::X => Matrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2"),
            Gate::Z => Matrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]).expect("2x2"),
            Gate::Unitary(m) => m.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Gate::Unitary(m) => m.check_unitary(T::tolerance()),
            _ => Ok(()),
        }
    }
}

/// Controlled NOT, control first.
pub fn cnot<T: Scalar>() -> Matrix<T> {
    Matrix::from_real(
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, 1.0, 0.0,
        ],
    )
    .expect("4x4")
}

pub fn swap<T: Scalar>() -> Matrix<T> {
    Matrix::from_real(
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        ],
    )
    .expect("4x4")
}

/// Phase gate `diag(1, e^{iφ})`.
pub fn phase<T: Scalar>(phi: f64) -> Matrix<T> {
    let one = Complex::new(T::one(), T::zero());
    let zero = Complex::new(T::zero(), T::zero());
    let p: C<T> = Complex::from_polar(T::one(), T::lit(phi));
    Matrix::from_vec(2, vec![one, zero, zero, p]).expect("2x2")
}

/// Real rotation whose rows are the basis `{cos a|0⟩ + sin a|1⟩, −sin a|0⟩ + cos a|1⟩}`.
///
/// Applying it and then measuring computationally measures in that basis.
pub fn basis_rotation<T: Scalar>(angle: f64) -> Matrix<T> {
    let (s, c) = angle.sin_cos();
    Matrix::from_real(2, &[c, s, -s, c]).expect("2x2")
}

/// Rotation into the Breidbart basis, halfway between computational and
/// Hadamard at angle π/8.
pub fn breidbart_rotation<T: Scalar>() -> Matrix<T> {
    basis_rotation(std::f64::consts::FRAC_PI_8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_gates_are_unitary() {
        for g in [Gate::<f64>::H, Gate::X, Gate::Z] {
            assert!(g.matrix().unitarity_deviation() < 1e-15);
        }
        assert!(cnot::<f64>().unitarity_deviation() < 1e-15);
        assert!(swap::<f64>().unitarity_deviation() < 1e-15);
        assert!(phase::<f64>(0.3).unitarity_deviation() < 1e-15);
        assert!(breidbart_rotation::<f64>().unitarity_deviation() < 1e-15);
    }

    #[test]
    fn hadamard_is_involution() {
        let h = Gate::<f64>::H.matrix();
        assert!(h.matmul(&h).max_abs_diff(&Matrix::identity(2)) < 1e-15);
    }
}
