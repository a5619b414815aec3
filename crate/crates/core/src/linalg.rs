//! Dense square complex matrices and the small amount of linear algebra the
//! simulator needs: products, Kronecker products, unitarity checks, Hermitian
//! eigenvalues and Haar-random unitaries.

use std::ops::Mul;

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, Scalar, C};

/// Row-major square complex matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Matrix<T: Scalar> {
    dim: usize,
    data: Vec<C<T>>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![czero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = cone();
        }
        m
    }

    /// Builds a matrix from row-major entries; `data.len()` must be a square.
    pub fn from_vec(dim: usize, data: Vec<C<T>>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: data.len() });
        }
        Ok(Self { dim, data })
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(dim, data.iter().map(|&x| Complex::new(T::lit(x), T::zero())).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C<T>] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C<T> {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C<T>) {
        self.data[r * self.dim + c] = v;
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] = out.data[r * n + c] + a * other.data[k * n + c];
                }
            }
        }
        out
    }

    /// `self ⊗ other`, with `self` on the more significant index.
    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        let n = a * b;
        let mut out = Self::zeros(n);
        for r1 in 0..a {
            for c1 in 0..a {
                let x = self.data[r1 * a + c1];
                for r2 in 0..b {
                    for c2 in 0..b {
                        out.data[(r1 * b + r2) * n + c1 * b + c2] = x * other.data[r2 * b + c2];
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn trace(&self) -> C<T> {
        (0..self.dim).fold(czero(), |acc, i| acc + self.get(i, i))
    }

    pub fn apply(&self, v: &[C<T>]) -> Vec<C<T>> {
        let n = self.dim;
        (0..n)
            .map(|r| (0..n).fold(czero(), |acc, c| acc + self.data[r * n + c] * v[c]))
            .collect()
    }

    /// Largest entrywise deviation of `self† self` from the identity.
    pub fn unitarity_deviation(&self) -> T {
        let p = self.adjoint().matmul(self);
        let mut worst = T::zero();
        for r in 0..self.dim {
            for c in 0..self.dim {
                let target = if r == c { cone() } else { czero() };
                worst = worst.max((p.get(r, c) - target).norm());
            }
        }
        worst
    }

    pub fn check_unitary(&self, tol: T) -> Result<()> {
        let dev = self.unitarity_deviation();
        if dev > tol || dev.is_nan() {
            return Err(Error::NotUnitary { deviation: dev.to_f64_lossy() });
        }
        Ok(())
    }

    pub fn hermiticity_deviation(&self) -> T {
        let mut worst = T::zero();
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).norm()))
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    ///
    /// The matrix `A + iB` is embedded as the real symmetric `[[A, -B], [B, A]]`,
    /// whose spectrum is that of the original with every eigenvalue doubled.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<T>> {
        let dev = self.hermiticity_deviation();
        if dev > T::tolerance() {
            return Err(Error::NotHermitian { deviation: dev.to_f64_lossy() });
        }
        let n = self.dim;
        let m = 2 * n;
        let mut s = vec![T::zero(); m * m];
        for r in 0..n {
            for c in 0..n {
                let z = self.get(r, c);
                s[r * m + c] = z.re;
                s[(r + n) * m + c + n] = z.re;
                s[r * m + c + n] = -z.im;
                s[(r + n) * m + c] = z.im;
            }
        }
        let mut ev = jacobi_eigenvalues(&mut s, m);
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        Ok(ev.chunks(2).map(|p| (p[0] + p[1]) / T::lit(2.0)).collect())
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: Self) -> Matrix<T> {
        self.matmul(rhs)
    }
}

/// Cyclic Jacobi rotations on a real symmetric `m × m` matrix (destroyed).
fn jacobi_eigenvalues<T: Scalar>(a: &mut [T], m: usize) -> Vec<T> {
    let two = T::lit(2.0);
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut total = T::zero();
        for r in 0..m {
            for c in 0..m {
                let v = a[r * m + c] * a[r * m + c];
                total = total + v;
                if r != c {
                    off = off + v;
                }
            }
        }
        if off <= eps * eps * total || off == T::zero() {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a[p * m + q];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let app = a[p * m + p];
                let aqq = a[q * m + q];
                let theta = (aqq - app) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..m).map(|i| a[i * m + i]).collect()
}

/// Haar-random unitary of dimension `dim`, via Gram–Schmidt on a complex
/// Gaussian matrix (QR with positive diagonal).
pub fn random_unitary<T: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix<T> {
    let cols: Vec<Vec<C<T>>> = (0..dim)
        .map(|_| (0..dim).map(|_| gaussian_complex(rng)).collect())
        .collect();
    from_columns(gram_schmidt(cols))
}

/// Modified Gram–Schmidt on a list of columns.
fn gram_schmidt<T: Scalar>(mut cols: Vec<Vec<C<T>>>) -> Vec<Vec<C<T>>> {
    for j in 0..cols.len() {
        for i in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let proj = inner(&done[i], &rest[0]);
            for (x, &b) in rest[0].iter_mut().zip(&done[i]) {
                *x = *x - b * proj;
            }
        }
        let norm = cols[j].iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
        for x in cols[j].iter_mut() {
            *x = *x / norm;
        }
    }
    cols
}

fn from_columns<T: Scalar>(cols: Vec<Vec<C<T>>>) -> Matrix<T> {
    let mut m = Matrix::zeros(cols.len());
    for (c, col) in cols.iter().enumerate() {
        for (r, &v) in col.iter().enumerate() {
            m.set(r, c, v);
        }
    }
    m
}

impl<T: Scalar> Matrix<T> {
    /// Nearest-in-spirit unitary: re-orthonormalizes the columns. Used to
    /// stop rounding drift in long products of unitaries.
    pub fn reunitarize(&self) -> Self {
        let cols = (0..self.dim).map(|c| (0..self.dim).map(|r| self.get(r, c)).collect()).collect();
        from_columns(gram_schmidt(cols))
    }
}

pub(crate) fn gaussian_complex<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> C<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(re), T::lit(im))
}

/// `⟨a|b⟩`.
pub fn inner<T: Scalar>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).fold(czero(), |acc, (&x, &y)| acc + x.conj() * y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in [1, 2, 4, 8] {
            let u: Matrix<f64> = random_unitary(dim, &mut rng);
            assert!(u.unitarity_deviation() < 1e-12);
        }
    }

    #[test]
    fn eigenvalues_of_known_hermitian() {
        // Pauli Y has eigenvalues ±1.
        let y = Matrix::<f64>::from_vec(
            2,
            vec![
                Complex::new(0.0, 0.0),
                Complex::new(0.0, -1.0),
                Complex::new(0.0, 1.0),
                Complex::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let ev = y.hermitian_eigenvalues().unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_sum_to_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u: Matrix<f64> = random_unitary(6, &mut rng);
        let h = u.add(&u.adjoint());
        let ev = h.hermitian_eigenvalues().unwrap();
        let s: f64 = ev.iter().sum();
        assert!((s - h.trace().re).abs() < 1e-10);
    }

    #[test]
    fn kron_dimensions_and_identity() {
        let i2 = Matrix::<f64>::identity(2);
        let i4 = i2.kron(&i2);
        assert_eq!(i4, Matrix::identity(4));
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = Matrix::<f64>::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(m.hermitian_eigenvalues(), Err(Error::NotHermitian { .. })));
    }
}
