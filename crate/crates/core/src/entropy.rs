//! Binary and von Neumann entropies, conditional entropies of hybrid states,
//! the Fano bound and a numerical check of the complementary information
//! tradeoff on concrete tripartite states.
//!
//! Logarithms are base 2 throughout.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::qsim::{DensityMatrix, Gate, Statevector};
use crate::scalar::Scalar;

/// Eigenvalues below this are treated as exact zeros.
pub const EIGEN_CUTOFF: f64 = 1e-12;

/// `h(p) = −p log p − (1−p) log(1−p)`, with `h(0) = h(1) = 0`.
pub fn binary_entropy<T: Scalar>(p: T) -> Result<T> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::Domain(format!("binary entropy argument {p} outside [0, 1]")));
    }
    let term = |x: T| if x <= T::zero() { T::zero() } else { -x * x.log2() };
    Ok(term(p) + term(T::one() - p))
}

/// The unique `p ∈ [0, 1/2]` with `h(p) = y`, by bisection.
pub fn binary_entropy_inverse<T: Scalar>(y: T) -> Result<T> {
    if !(y >= T::zero() && y <= T::one()) {
        return Err(Error::Domain(format!("binary entropy value {y} outside [0, 1]")));
    }
    let target = y.to_f64_lossy();
    if target >= 1.0 {
        return Ok(T::lit(0.5));
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(T::lit(0.5 * (lo + hi)))
}

/// `1 − h⁻¹(1/2)`, the soundness parameter of single-round BB84 position
/// verification against unentangled adversaries.
pub fn soundness_epsilon() -> f64 {
    1.0 - binary_entropy_inverse(0.5f64).expect("1/2 in range")
}

/// `−tr ρ log ρ`.
pub fn von_neumann_entropy<T: Scalar>(rho: &DensityMatrix<T>) -> Result<T> {
    entropy_of_matrix(rho.matrix())
}

fn entropy_of_matrix<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    let cut = T::lit(EIGEN_CUTOFF);
    Ok(m.hermitian_eigenvalues()?
        .into_iter()
        .filter(|&l| l > cut)
        .fold(T::zero(), |acc, l| acc - l * l.log2()))
}

/// `H(A|B) = H(AB) − H(B)` for a state on `A ⊗ B` with `A` most significant.
pub fn conditional_entropy<T: Scalar>(rho_ab: &DensityMatrix<T>, dims: (usize, usize)) -> Result<T> {
    let (da, db) = dims;
    if da * db != rho_ab.dim() {
        return Err(Error::DimensionMismatch { expected: rho_ab.dim(), got: da * db });
    }
    let rho_b = rho_ab.partial_trace(&[da, db], &[1])?;
    Ok(von_neumann_entropy(rho_ab)? - von_neumann_entropy(&rho_b)?)
}

/// Classical-quantum state `Σ_y P(y) |y⟩⟨y| ⊗ ρ^y_{AB}`, stored as weighted
/// blocks.
#[derive(Clone, Debug)]
pub struct HybridState<T: Scalar> {
    weights: Vec<T>,
    blocks: Vec<DensityMatrix<T>>,
    dims: (usize, usize),
}

impl<T: Scalar> HybridState<T> {
    pub fn new(weights: Vec<T>, blocks: Vec<DensityMatrix<T>>, dims: (usize, usize)) -> Result<Self> {
        if weights.len() != blocks.len() || blocks.is_empty() {
            return Err(Error::DimensionMismatch { expected: blocks.len(), got: weights.len() });
        }
        let total = weights.iter().fold(T::zero(), |a, &w| a + w);
        if (total - T::one()).abs() > T::tolerance() || weights.iter().any(|&w| w < T::zero()) {
            return Err(Error::Domain(format!("weights must form a distribution, sum {total}")));
        }
        for b in &blocks {
            if b.dim() != dims.0 * dims.1 {
                return Err(Error::DimensionMismatch { expected: dims.0 * dims.1, got: b.dim() });
            }
        }
        Ok(Self { weights, blocks, dims })
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn blocks(&self) -> &[DensityMatrix<T>] {
        &self.blocks
    }

    /// `n_y` blocks, each the reduction of a random pure state on
    /// `A ⊗ B ⊗ env` with a qubit environment; Dirichlet(1,…,1) weights.
    pub fn random<R: Rng + ?Sized>(n_y: usize, qubits: (usize, usize), rng: &mut R) -> Result<Self> {
        if n_y == 0 {
            return Err(Error::Domain("need at least one block".into()));
        }
        let (qa, qb) = qubits;
        let raw: Vec<f64> = (0..n_y).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = raw.iter().sum();
        let weights = raw.iter().map(|w| T::lit(w / total)).collect();
        let keep: Vec<usize> = (0..qa + qb).collect();
        let blocks = (0..n_y)
            .map(|_| Statevector::random(qa + qb + 1, rng).partial_trace(&keep))
            .collect::<Result<Vec<_>>>()?;
        Self::new(weights, blocks, (1 << qa, 1 << qb))
    }

    /// The assembled block-diagonal state on `Y ⊗ A ⊗ B`.
    pub fn assemble(&self) -> Result<DensityMatrix<T>> {
        DensityMatrix::block_diagonal(&self.weights, &self.blocks)
    }
}

/// `H(A|BY)` as the weighted average `Σ_y P(y) H(ρ^y_{AB}|B)`.
pub fn conditional_entropy_hybrid<T: Scalar>(h: &HybridState<T>) -> Result<T> {
    let mut acc = T::zero();
    for (&w, b) in h.weights.iter().zip(&h.blocks) {
        if w > T::zero() {
            acc = acc + w * conditional_entropy(b, h.dims)?;
        }
    }
    Ok(acc)
}

/// `H(A|BY) = H(YAB) − H(YB)` evaluated directly on the assembled state.
pub fn conditional_entropy_assembled<T: Scalar>(h: &HybridState<T>) -> Result<T> {
    let full = h.assemble()?;
    let (da, db) = h.dims;
    let yb = full.partial_trace(&[h.weights.len(), da, db], &[0, 2])?;
    Ok(von_neumann_entropy(&full)? - von_neumann_entropy(&yb)?)
}

/// Smallest error probability `q` compatible with Fano's inequality
/// `h(q) + q log(|X| − 1) ≥ H(X|Y)`.
pub fn fano_bound(cond_entropy: f64, alphabet_size: usize) -> Result<f64> {
    if alphabet_size < 2 {
        return Err(Error::Domain("alphabet must have at least two symbols".into()));
    }
    let cap = (alphabet_size as f64).log2();
    if !(0.0..=cap + 1e-12).contains(&cond_entropy) {
        return Err(Error::Domain(format!(
            "conditional entropy {cond_entropy} infeasible for alphabet of size {alphabet_size}"
        )));
    }
    if alphabet_size == 2 {
        return binary_entropy_inverse(cond_entropy.min(1.0));
    }
    let extra = ((alphabet_size - 1) as f64).log2();
    let f = |q: f64| binary_entropy(q).map(|h| h + q * extra);
    let (mut lo, mut hi) = (0.0, 1.0 - 1.0 / alphabet_size as f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < cond_entropy {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A tripartite pure state with registers `A` (first `n_a` qubits), `E`
/// (next `n_e`) and `F` (the remaining `n_f`).
#[derive(Clone, Debug)]
pub struct CitInstance<T: Scalar> {
    psi: Statevector<T>,
    n_a: usize,
    n_e: usize,
    n_f: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CitReport {
    /// `H(X|ΘE) + H(X|ΘF)`.
    pub lhs: f64,
    pub h_x_given_theta_e: f64,
    pub h_x_given_theta_f: f64,
    /// `lhs ≥ n − 1e−7`.
    pub holds: bool,
}

impl<T: Scalar> CitInstance<T> {
    pub fn new(psi: Statevector<T>, n_a: usize, n_e: usize, n_f: usize) -> Result<Self> {
        if n_a + n_e + n_f != psi.n_qubits() {
            return Err(Error::DimensionMismatch { expected: psi.n_qubits(), got: n_a + n_e + n_f });
        }
        if n_a == 0 {
            return Err(Error::Domain("register A must be nonempty".into()));
        }
        Ok(Self { psi, n_a, n_e, n_f })
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    /// `H(X|E)` when `A` is measured in basis `theta` and `side` (E or F) is
    /// the quantum side information.
    fn conditional_for(&self, theta: usize, side: Side) -> Result<T> {
        let mut rotated = self.psi.clone();
        for q in 0..self.n_a {
            if (theta >> (self.n_a - 1 - q)) & 1 == 1 {
                rotated.apply_gate_mut(&Gate::H, &[q])?;
            }
        }
        let side_qubits: Vec<usize> = match side {
            Side::E => (self.n_a..self.n_a + self.n_e).collect(),
            Side::F => (self.n_a + self.n_e..self.n_a + self.n_e + self.n_f).collect(),
        };
        let mut keep: Vec<usize> = (0..self.n_a).collect();
        keep.extend_from_slice(&side_qubits);
        let rho_ae = rotated.partial_trace(&keep)?;
        let dx = 1usize << self.n_a;
        let de = 1usize << side_qubits.len();
        // Measuring A dephases it: drop coherences between different x.
        let mut m = rho_ae.matrix().clone();
        for r in 0..dx * de {
            for c in 0..dx * de {
                if r / de != c / de {
                    m.set(r, c, num_complex::Complex::new(T::zero(), T::zero()));
                }
            }
        }
        let rho_xe = DensityMatrix::new(m)?;
        conditional_entropy(&rho_xe, (dx, de))
    }

    /// Cor. 2.5 form: averages over all `2^n` bases.
    pub fn check(&self) -> Result<CitReport> {
        let count = 1usize << self.n_a;
        let mut he = T::zero();
        let mut hf = T::zero();
        for theta in 0..count {
            he = he + self.conditional_for(theta, Side::E)?;
            hf = hf + self.conditional_for(theta, Side::F)?;
        }
        let norm = T::lit(count as f64);
        let (he, hf) = ((he / norm).to_f64_lossy(), (hf / norm).to_f64_lossy());
        let lhs = he + hf;
        Ok(CitReport { lhs, h_x_given_theta_e: he, h_x_given_theta_f: hf, holds: lhs >= self.n_a as f64 - 1e-7 })
    }

    /// Theorem form for one basis: `H(X|E)` under `theta` plus `H(X|F)` under
    /// its complement.
    pub fn check_complementary(&self, theta: usize) -> Result<f64> {
        let comp = ((1usize << self.n_a) - 1) ^ theta;
        Ok((self.conditional_for(theta, Side::E)? + self.conditional_for(comp, Side::F)?).to_f64_lossy())
    }
}

#[derive(Clone, Copy)]
enum Side {
    E,
    F,
}

/// `(H(X|ΘE) + H(X|ΘF), holds)`.
pub fn check_cit<T: Scalar>(instance: &CitInstance<T>) -> Result<(f64, bool)> {
    let r = instance.check()?;
    Ok((r.lhs, r.holds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_unitary;
    use crate::qsim::{cnot, make_epr};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn binary_entropy_values() {
        assert!((binary_entropy(0.5f64).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(binary_entropy(0.0f64).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0f64).unwrap(), 0.0);
        assert!((binary_entropy(0.11f64).unwrap() - 0.4999).abs() < 5e-4);
        assert!(binary_entropy(1.5f64).is_err());
    }

    #[test]
    fn inverse_values() {
        assert!((binary_entropy_inverse(1.0f64).unwrap() - 0.5).abs() < 1e-10);
        let p = binary_entropy_inverse(0.5f64).unwrap();
        assert!((p - 0.1100).abs() < 1e-3);
        assert!((soundness_epsilon() - 0.89).abs() < 1e-3);
        assert!(soundness_epsilon() > (std::f64::consts::FRAC_PI_8.cos()).powi(2));
        assert!((1.0 - soundness_epsilon() - p).abs() < 1e-15);
    }

    #[test]
    fn von_neumann_examples() {
        let mixed = DensityMatrix::<f64>::maximally_mixed(2);
        assert!((von_neumann_entropy(&mixed).unwrap() - 1.0).abs() < 1e-12);
        let epr = make_epr::<f64>();
        let full = DensityMatrix::from_pure(&epr);
        assert!(von_neumann_entropy(&full).unwrap().abs() < 1e-10);
        assert!((von_neumann_entropy(&epr.partial_trace(&[0]).unwrap()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_examples() {
        let epr = DensityMatrix::from_pure(&make_epr::<f64>());
        assert!((conditional_entropy(&epr, (2, 2)).unwrap() + 1.0).abs() < 1e-10);
        let prod = DensityMatrix::<f64>::maximally_mixed(4);
        assert!((conditional_entropy(&prod, (2, 2)).unwrap() - 1.0).abs() < 1e-12);
        let copy = Matrix::<f64>::from_real(
            4,
            &[0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5],
        )
        .unwrap();
        let copy = DensityMatrix::new(copy).unwrap();
        assert!(conditional_entropy(&copy, (2, 2)).unwrap().abs() < 1e-12);
        assert!(conditional_entropy(&copy, (2, 3)).is_err());
    }

    #[test]
    fn hybrid_examples() {
        let epr = DensityMatrix::from_pure(&make_epr::<f64>());
        let h = HybridState::new(vec![0.5, 0.5], vec![epr.clone(), epr.clone()], (2, 2)).unwrap();
        assert!((conditional_entropy_hybrid(&h).unwrap() + 1.0).abs() < 1e-10);
        assert!((conditional_entropy_assembled(&h).unwrap() + 1.0).abs() < 1e-10);
        let single = HybridState::new(vec![1.0], vec![epr.clone()], (2, 2)).unwrap();
        assert!(
            (conditional_entropy_hybrid(&single).unwrap() - conditional_entropy(&epr, (2, 2)).unwrap()).abs()
                < 1e-12
        );
        assert!(HybridState::new(vec![1.0], vec![epr], (2, 4)).is_err());
    }

    #[test]
    fn random_hybrid_two_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let h = HybridState::<f64>::random(3, (1, 1), &mut rng).unwrap();
            let a = conditional_entropy_hybrid(&h).unwrap();
            let b = conditional_entropy_assembled(&h).unwrap();
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn fano_examples() {
        assert!((fano_bound(1.0, 2).unwrap() - 0.5).abs() < 1e-9);
        assert!((fano_bound(0.5, 2).unwrap() - 0.110).abs() < 1e-3);
        assert!(fano_bound(0.0, 2).unwrap().abs() < 1e-9);
        assert!(fano_bound(2.5, 4).is_err());
        let q = fano_bound(1.5, 4).unwrap();
        let lhs = binary_entropy(q).unwrap() + q * 3f64.log2();
        assert!((lhs - 1.5).abs() < 1e-9);
    }

    #[test]
    fn cit_examples() {
        // A maximally entangled with a discarded partner; E, F trivial.
        let epr = make_epr::<f64>();
        let inst = CitInstance::new(epr.clone(), 1, 0, 1).unwrap();
        let r = inst.check().unwrap();
        assert!(r.holds && (r.h_x_given_theta_e - 1.0).abs() < 1e-9);
        // E is a computational-basis copy of A, F trivial.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = Statevector::<f64>::random(1, &mut rng);
        let copied = a
            .tensor(&Statevector::zero(1))
            .apply_gate(&Gate::Unitary(cnot()), &[0, 1])
            .unwrap();
        let r = CitInstance::new(copied, 1, 1, 0).unwrap().check().unwrap();
        assert!(r.holds, "lhs {}", r.lhs);
        // Random isometry split of one half of an EPR pair.
        for _ in 0..20 {
            let u = random_unitary::<f64, _>(8, &mut rng);
            let s = epr.tensor(&Statevector::zero(2)).apply_gate(&Gate::Unitary(u), &[1, 2, 3]).unwrap();
            let inst = CitInstance::new(s, 1, 1, 2).unwrap();
            assert!(check_cit(&inst).unwrap().1);
            assert!(inst.check_complementary(0).unwrap() >= 1.0 - 1e-7);
        }
    }
}
