use serde::{Deserialize, Serialize};

use super::state::Statevector;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{cr, Scalar};

/// Validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DensityMatrix<T: Scalar> {
    matrix: Matrix<T>,
}

impl<T: Scalar> DensityMatrix<T> {
    pub fn new(matrix: Matrix<T>) -> Result<Self> {
        let tol = T::tolerance();
        let dev = matrix.hermiticity_deviation();
        if dev > tol {
            return Err(Error::NotHermitian { deviation: dev.to_f64_lossy() });
        }
        let tr = matrix.trace();
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        let ev = matrix.hermitian_eigenvalues()?;
        if let Some(&min) = ev.first() {
            if min < -tol {
                return Err(Error::InvalidDensity(format!("negative eigenvalue {min}")));
            }
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(psi: &Statevector<T>) -> Self {
        let a = psi.amplitudes();
        let n = a.len();
        let mut m = Matrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                m.set(r, c, a[r] * a[c].conj());
            }
        }
        Self { matrix: m }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: Matrix::identity(dim).scale(cr(1.0 / dim as f64)) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn purity(&self) -> T {
        self.matrix.matmul(&self.matrix).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        self.matrix.hermitian_eigenvalues().expect("validated Hermitian")
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self { matrix: self.matrix.kron(&other.matrix) }
    }

    /// Traces out every subsystem not listed in `keep`. `dims` gives the
    /// subsystem dimensions, most significant first; `keep` must be ascending.
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if total != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: total });
        }
        if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
            return Err(Error::Domain(format!("keep list {keep:?} must be ascending and in range")));
        }
        let kd: usize = keep.iter().map(|&k| dims[k]).product();
        let digits = |mut idx: usize| {
            let mut d = vec![0usize; dims.len()];
            for s in (0..dims.len()).rev() {
                d[s] = idx % dims[s];
                idx /= dims[s];
            }
            d
        };
        let split = |d: &[usize]| {
            let mut k = 0usize;
            let mut e = 0usize;
            for (s, &v) in d.iter().enumerate() {
                if keep.contains(&s) {
                    k = k * dims[s] + v;
                } else {
                    e = e * dims[s] + v;
                }
            }
            (k, e)
        };
        let parts: Vec<(usize, usize)> = (0..total).map(|i| split(&digits(i))).collect();
        let mut out = Matrix::zeros(kd);
        for (r, &(kr, er)) in parts.iter().enumerate() {
            for (c, &(kc, ec)) in parts.iter().enumerate() {
                if er == ec {
                    let v = out.get(kr, kc) + self.matrix.get(r, c);
                    out.set(kr, kc, v);
                }
            }
        }
        Ok(Self { matrix: out })
    }

    /// Block-diagonal mixture `⊕_y w_y ρ_y`, all blocks of equal dimension.
    pub fn block_diagonal(weights: &[T], blocks: &[Self]) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Err(Error::Domain("no blocks".into()));
        };
        let b = first.dim();
        if weights.len() != blocks.len() {
            return Err(Error::DimensionMismatch { expected: blocks.len(), got: weights.len() });
        }
        let n = b * blocks.len();
        let mut m = Matrix::zeros(n);
        for (y, (blk, &w)) in blocks.iter().zip(weights).enumerate() {
            if blk.dim() != b {
                return Err(Error::DimensionMismatch { expected: b, got: blk.dim() });
            }
            for r in 0..b {
                for c in 0..b {
                    let v = blk.matrix.get(r, c) * w;
                    m.set(y * b + r, y * b + c, v);
                }
            }
        }
        Self::new(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::make_epr;

    #[test]
    fn invalid_matrices_rejected() {
        let not_unit_trace = Matrix::<f64>::identity(2);
        assert!(DensityMatrix::new(not_unit_trace).is_err());
        let negative = Matrix::<f64>::from_real(2, &[1.5, 0.0, 0.0, -0.5]).unwrap();
        assert!(DensityMatrix::new(negative).is_err());
    }

    #[test]
    fn subsystem_trace_matches_statevector_trace() {
        let e = make_epr::<f64>();
        let rho = DensityMatrix::from_pure(&e);
        let a = rho.partial_trace(&[2, 2], &[0]).unwrap();
        let b = e.partial_trace(&[0]).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-14);
    }
}
