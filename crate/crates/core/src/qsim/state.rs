use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::density::DensityMatrix;
use super::gate::Gate;
use crate::error::{Error, Result};
use crate::linalg::{gaussian_complex, inner, Matrix};
use crate::scalar::{cone, cr, czero, Scalar, C};

/// Measurement basis per qubit: 0 is computational, 1 is Hadamard.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisString {
    bits: Vec<u8>,
}

impl BasisString {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Domain(format!("basis bit {b} is not 0 or 1")));
        }
        Ok(Self { bits })
    }

    pub fn uniform(theta: u8, n: usize) -> Self {
        Self { bits: vec![theta & 1; n] }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self { bits: (0..n).map(|_| rng.random_range(0..2u8)).collect() }
    }

    pub fn complement(&self) -> Self {
        Self { bits: self.bits.iter().map(|b| b ^ 1).collect() }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Pure state of `n` qubits. Qubit 0 is the most significant bit of the
/// amplitude index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Statevector<T: Scalar> {
    n_qubits: usize,
    amps: Vec<C<T>>,
}

impl<T: Scalar> Statevector<T> {
    pub fn new(n_qubits: usize, amps: Vec<C<T>>) -> Result<Self> {
        if amps.len() != 1usize << n_qubits {
            return Err(Error::DimensionMismatch { expected: 1 << n_qubits, got: amps.len() });
        }
        let s = Self { n_qubits, amps };
        let norm = s.norm_sqr();
        if (norm - T::one()).abs() > T::tolerance() {
            return Err(Error::NotNormalized { norm: norm.to_f64_lossy() });
        }
        Ok(s)
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn from_unnormalized(n_qubits: usize, mut amps: Vec<C<T>>) -> Result<Self> {
        if amps.len() != 1usize << n_qubits {
            return Err(Error::DimensionMismatch { expected: 1 << n_qubits, got: amps.len() });
        }
        let norm = amps.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
        if norm <= T::min_positive_value() {
            return Err(Error::NotNormalized { norm: 0.0 });
        }
        for a in amps.iter_mut() {
            *a = *a / norm;
        }
        Ok(Self { n_qubits, amps })
    }

    /// The empty register: zero qubits, amplitude 1.
    pub fn empty() -> Self {
        Self { n_qubits: 0, amps: vec![cone()] }
    }

    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![czero(); 1 << n_qubits];
        amps[index] = cone();
        Self { n_qubits, amps }
    }

    /// `H^θ |x⟩` on a single qubit.
    pub fn bb84(theta: u8, x: u8) -> Self {
        let s = Self::basis(1, (x & 1) as usize);
        if theta & 1 == 1 {
            s.apply_gate(&Gate::H, &[0]).expect("single-qubit H")
        } else {
            s
        }
    }

    /// Haar-random pure state.
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let amps = (0..1usize << n_qubits).map(|_| gaussian_complex(rng)).collect();
        Self::from_unnormalized(n_qubits, amps).expect("gaussian vector is nonzero")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().fold(T::zero(), |a, z| a + z.norm_sqr())
    }

    /// `self ⊗ other`; the qubits of `other` follow those of `self`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for &a in &self.amps {
            for &b in &other.amps {
                amps.push(a * b);
            }
        }
        Self { n_qubits: self.n_qubits + other.n_qubits, amps }
    }

    fn check_targets(&self, targets: &[usize]) -> Result<()> {
        for (i, &t) in targets.iter().enumerate() {
            if t >= self.n_qubits {
                return Err(Error::QubitOutOfRange { index: t, n_qubits: self.n_qubits });
            }
            if targets[..i].contains(&t) {
                return Err(Error::DuplicateTargets(targets.to_vec()));
            }
        }
        Ok(())
    }

    #[inline]
    fn mask(&self, q: usize) -> usize {
        1 << (self.n_qubits - 1 - q)
    }

    pub fn apply_gate(&self, gate: &Gate<T>, targets: &[usize]) -> Result<Self> {
        let mut s = self.clone();
        s.apply_gate_mut(gate, targets)?;
        Ok(s)
    }

    pub fn apply_gate_mut(&mut self, gate: &Gate<T>, targets: &[usize]) -> Result<()> {
        gate.validate()?;
        let m = gate.matrix();
        if m.dim() != 1usize << targets.len() {
            return Err(Error::DimensionMismatch { expected: 1 << targets.len(), got: m.dim() });
        }
        self.check_targets(targets)?;
        self.apply_matrix_unchecked(&m, targets);
        Ok(())
    }

    /// Applies `m` (already known to be unitary and of matching size) to
    /// `targets`, where `targets[0]` is the most significant sub-index bit.
    pub(crate) fn apply_matrix_unchecked(&mut self, m: &Matrix<T>, targets: &[usize]) {
        let k = targets.len();
        let d = 1usize << k;
        let masks: Vec<usize> = targets.iter().map(|&q| self.mask(q)).collect();
        let all: usize = masks.iter().sum();
        let offsets: Vec<usize> = (0..d)
            .map(|s| (0..k).filter(|&t| (s >> (k - 1 - t)) & 1 == 1).map(|t| masks[t]).sum())
            .collect();
        let mut buf = vec![czero::<T>(); d];
        for base in 0..self.amps.len() {
            if base & all != 0 {
                continue;
            }
            for (s, &off) in offsets.iter().enumerate() {
                buf[s] = self.amps[base + off];
            }
            for (r, &off) in offsets.iter().enumerate() {
                let mut acc = czero();
                for (c, &b) in buf.iter().enumerate() {
                    acc = acc + m.get(r, c) * b;
                }
                self.amps[base + off] = acc;
            }
        }
    }

    pub(crate) fn apply_checked_matrix(&mut self, m: &Matrix<T>, targets: &[usize]) -> Result<()> {
        if m.dim() != 1usize << targets.len() {
            return Err(Error::DimensionMismatch { expected: 1 << targets.len(), got: m.dim() });
        }
        self.check_targets(targets)?;
        self.apply_matrix_unchecked(m, targets);
        Ok(())
    }

    /// Probability that qubit `q` reads `v` in the computational basis.
    pub fn probability(&self, q: usize, v: u8) -> Result<T> {
        self.check_targets(&[q])?;
        let mask = self.mask(q);
        let want = if v & 1 == 1 { mask } else { 0 };
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == want)
            .fold(T::zero(), |a, (_, z)| a + z.norm_sqr()))
    }

    /// Projects qubit `q` onto `|v⟩` and renormalizes; returns the branch
    /// probability.
    pub fn project_mut(&mut self, q: usize, v: u8) -> Result<T> {
        let p = self.probability(q, v)?;
        if p <= T::epsilon() {
            return Err(Error::Internal(format!("projection of qubit {q} onto {v} has zero weight")));
        }
        let mask = self.mask(q);
        let want = if v & 1 == 1 { mask } else { 0 };
        let scale = T::one() / p.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a = if i & mask == want { *a * scale } else { czero() };
        }
        Ok(p)
    }

    /// Computational-basis measurement of one qubit, collapsing in place.
    pub fn measure_qubit_mut<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<u8> {
        let p0 = self.probability(q, 0)?;
        let p1 = self.probability(q, 1)?;
        // Branches carrying only rounding noise are never selected.
        let v = if p1 <= T::epsilon() {
            0
        } else if p0 <= T::epsilon() {
            1
        } else {
            let u: f64 = rng.random();
            let p1 = p1.to_f64_lossy() / (p0 + p1).to_f64_lossy();
            u8::from(u < p1)
        };
        self.project_mut(q, v)?;
        Ok(v)
    }

    /// Measures `targets` in `basis` (one basis bit per target). The post-state
    /// keeps all qubits, each measured one collapsed to `H^θ|x⟩`.
    pub fn measure_in_basis<R: Rng + ?Sized>(
        &self,
        basis: &BasisString,
        targets: &[usize],
        rng: &mut R,
    ) -> Result<(Vec<u8>, Self)> {
        if basis.len() != targets.len() {
            return Err(Error::DimensionMismatch { expected: targets.len(), got: basis.len() });
        }
        self.check_targets(targets)?;
        let mut s = self.clone();
        let h = Gate::<T>::H.matrix();
        let mut out = Vec::with_capacity(targets.len());
        for (&q, &b) in targets.iter().zip(basis.bits()) {
            if b == 1 {
                s.apply_matrix_unchecked(&h, &[q]);
            }
            out.push(s.measure_qubit_mut(q, rng)?);
            if b == 1 {
                s.apply_matrix_unchecked(&h, &[q]);
            }
        }
        Ok((out, s))
    }

    /// Drops qubit `q`, which must already be collapsed to `|v⟩`.
    pub fn remove_collapsed(&self, q: usize, v: u8) -> Result<Self> {
        self.check_targets(&[q])?;
        let n = self.n_qubits;
        let low_bits = n - 1 - q;
        let low_mask = (1usize << low_bits) - 1;
        let mut amps = Vec::with_capacity(self.dim() / 2);
        for j in 0..self.dim() / 2 {
            let hi = j >> low_bits;
            let lo = j & low_mask;
            let i = (hi << (low_bits + 1)) | ((v as usize & 1) << low_bits) | lo;
            amps.push(self.amps[i]);
        }
        let s = Self { n_qubits: n - 1, amps };
        let norm = s.norm_sqr();
        if (norm - T::one()).abs() > T::lit(1e-6) {
            return Err(Error::Internal(format!("qubit {q} was not collapsed to {v} (residual norm {norm})")));
        }
        Ok(s)
    }

    /// Measures qubit `q` in the computational basis and removes it.
    pub fn measure_and_remove<R: Rng + ?Sized>(&self, q: usize, rng: &mut R) -> Result<(u8, Self)> {
        let mut s = self.clone();
        let v = s.measure_qubit_mut(q, rng)?;
        Ok((v, s.remove_collapsed(q, v)?))
    }

    /// Reorders qubits: new qubit `i` is old qubit `order[i]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, got: order.len() });
        }
        self.check_targets(order)?;
        let n = self.n_qubits;
        let mut amps = vec![czero(); self.dim()];
        for (old, &a) in self.amps.iter().enumerate() {
            let mut new = 0usize;
            for (i, &o) in order.iter().enumerate() {
                if (old >> (n - 1 - o)) & 1 == 1 {
                    new |= 1 << (n - 1 - i);
                }
            }
            amps[new] = a;
        }
        Ok(Self { n_qubits: n, amps })
    }

    /// Reduced density matrix on `keep`, in the order given.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix<T>> {
        if keep.is_empty() {
            return Err(Error::Domain("partial trace must keep at least one qubit".into()));
        }
        self.check_targets(keep)?;
        let n = self.n_qubits;
        let env: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let dk = 1usize << keep.len();
        let de = 1usize << env.len();
        let mut m = vec![czero::<T>(); dk * de];
        for (i, &a) in self.amps.iter().enumerate() {
            let bits = |qs: &[usize]| {
                qs.iter().fold(0usize, |acc, &q| (acc << 1) | ((i >> (n - 1 - q)) & 1))
            };
            m[bits(keep) * de + bits(&env)] = a;
        }
        let mut rho = Matrix::zeros(dk);
        for r in 0..dk {
            for c in r..dk {
                let mut acc = czero();
                for e in 0..de {
                    acc = acc + m[r * de + e] * m[c * de + e].conj();
                }
                rho.set(r, c, acc);
                rho.set(c, r, acc.conj());
            }
        }
        DensityMatrix::new(rho)
    }
}

/// The EPR pair `(|00⟩ + |11⟩)/√2`.
pub fn make_epr<T: Scalar>() -> Statevector<T> {
    let h = cr::<T>(std::f64::consts::FRAC_1_SQRT_2);
    Statevector { n_qubits: 2, amps: vec![h, czero(), czero(), h] }
}

/// `|⟨a|b⟩|²`, insensitive to global phase.
pub fn fidelity_up_to_global_phase<T: Scalar>(a: &Statevector<T>, b: &Statevector<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let f = inner(a.amplitudes(), b.amplitudes()).norm_sqr();
    Ok(f.min(T::one()))
}

impl<T: Scalar> Statevector<T> {
    /// Applies a complex phase to every amplitude (test helper for phase checks).
    pub fn with_global_phase(&self, phi: T) -> Self {
        let p = Complex::from_polar(T::one(), phi);
        Self { n_qubits: self.n_qubits, amps: self.amps.iter().map(|&a| a * p).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hadamard_maps_zero_to_plus() {
        let s = Statevector::<f64>::zero(1).apply_gate(&Gate::H, &[0]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0].re - h).abs() < 1e-15);
        assert!((s.amplitudes()[1].re - h).abs() < 1e-15);
    }

    #[test]
    fn x_flips() {
        let s = Statevector::<f64>::zero(1).apply_gate(&Gate::X, &[0]).unwrap();
        assert_eq!(s, Statevector::basis(1, 1));
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        let s = Statevector::<f64>::zero(3).apply_gate(&Gate::X, &[0]).unwrap();
        assert_eq!(s, Statevector::basis(3, 0b100));
    }

    #[test]
    fn out_of_range_and_duplicates_rejected() {
        let s = Statevector::<f64>::zero(2);
        assert!(matches!(s.apply_gate(&Gate::X, &[2]), Err(Error::QubitOutOfRange { .. })));
        let cnot = Gate::Unitary(super::super::gate::cnot());
        assert!(matches!(s.apply_gate(&cnot, &[1, 1]), Err(Error::DuplicateTargets(_))));
    }

    #[test]
    fn non_unitary_rejected() {
        let m = Matrix::<f64>::from_real(2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        let s = Statevector::<f64>::zero(1);
        assert!(matches!(s.apply_gate(&Gate::Unitary(m), &[0]), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn epr_amplitudes_and_marginals() {
        let e = make_epr::<f64>();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = e.amplitudes();
        assert!((a[0].re - h).abs() < 1e-15 && a[1].norm() == 0.0 && a[2].norm() == 0.0);
        for q in 0..2 {
            let rho = e.partial_trace(&[q]).unwrap();
            assert!(rho.matrix().max_abs_diff(&DensityMatrix::maximally_mixed(2).matrix().clone()) < 1e-12);
        }
    }

    #[test]
    fn remove_collapsed_and_permute() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = Statevector::<f64>::random(2, &mut rng);
        let full = Statevector::basis(1, 1).tensor(&psi);
        let back = full.remove_collapsed(0, 1).unwrap();
        assert!(fidelity_up_to_global_phase(&back, &psi).unwrap() > 1.0 - 1e-12);
        let swapped = psi.permute(&[1, 0]).unwrap().permute(&[1, 0]).unwrap();
        assert!(swapped.amplitudes().iter().zip(psi.amplitudes()).all(|(a, b)| (a - b).norm() < 1e-15));
    }

    #[test]
    fn product_partial_trace() {
        let plus = Statevector::<f64>::bb84(1, 0);
        let s = Statevector::zero(1).tensor(&plus);
        let rho = s.partial_trace(&[1]).unwrap();
        let expect = DensityMatrix::from_pure(&plus);
        assert!(rho.matrix().max_abs_diff(expect.matrix()) < 1e-12);
        assert!((s.partial_trace(&[0, 1]).unwrap().purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let z = Statevector::<f64>::zero(1);
        let one = Statevector::basis(1, 1);
        let plus = Statevector::bb84(1, 0);
        assert!(fidelity_up_to_global_phase(&z, &one).unwrap().abs() < 1e-15);
        assert!((fidelity_up_to_global_phase(&z, &plus).unwrap() - 0.5).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = Statevector::<f64>::random(3, &mut rng);
        assert!((fidelity_up_to_global_phase(&r, &r.with_global_phase(1.234)).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity_up_to_global_phase(&z, &Statevector::zero(2)).is_err());
    }
}
