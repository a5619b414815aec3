//! General entanglement-free attack on the BB84 round: the front adversary
//! maps the incoming qubit isometrically into `E0 ⊗ E1`, keeps `E0` and
//! ships `E1`; once each side knows the basis it applies a basis-dependent
//! unitary and reports the first qubit of its register.

use rand::Rng;
use serde::Serialize;

use crate::entropy::{CitInstance, CitReport};
use crate::error::{Error, Result};
use crate::linalg::{random_unitary, Matrix};
use crate::qsim::{breidbart_rotation, cnot, make_epr, Gate, Statevector};

#[derive(Clone, Debug, Serialize)]
pub struct SplitStrategy {
    widths: [usize; 2],
    /// Unitary on `input ⊗ ancillas`; with ancillas in `|0…0⟩` it is the
    /// isometry `C² → E0 ⊗ E1`.
    #[serde(skip)]
    isometry: Matrix<f64>,
    #[serde(skip)]
    measurements: [[Matrix<f64>; 2]; 2],
}

impl SplitStrategy {
    /// `widths` are the qubit counts of `E0` and `E1` (each 1 or 2, so each
    /// side has dimension at most 4).
    pub fn new(widths: [usize; 2], isometry: Matrix<f64>, measurements: [[Matrix<f64>; 2]; 2]) -> Result<Self> {
        if widths.iter().any(|&w| w == 0 || w > 2) {
            return Err(Error::config("split", "each side holds one or two qubits"));
        }
        let total = widths[0] + widths[1];
        if isometry.dim() != 1 << total {
            return Err(Error::DimensionMismatch { expected: 1 << total, got: isometry.dim() });
        }
        isometry.check_unitary(1e-9)?;
        for (side, ms) in measurements.iter().enumerate() {
            for m in ms {
                if m.dim() != 1 << widths[side] {
                    return Err(Error::DimensionMismatch { expected: 1 << widths[side], got: m.dim() });
                }
                m.check_unitary(1e-9)?;
            }
        }
        Ok(Self { widths, isometry, measurements })
    }

    /// Copies the Breidbart outcome into both sides.
    pub fn breidbart() -> Self {
        let iso = cnot::<f64>().matmul(&breidbart_rotation::<f64>().kron(&Matrix::identity(2)));
        let id = Matrix::identity(2);
        Self::new([1, 1], iso, [[id.clone(), id.clone()], [id.clone(), id]]).expect("valid")
    }

    /// Random isometry and random basis-dependent measurements.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_width: usize) -> Self {
        let max_width = max_width.clamp(1, 2);
        let widths = [rng.random_range(1..=max_width), rng.random_range(1..=max_width)];
        let iso = random_unitary(1 << (widths[0] + widths[1]), rng);
        let m = |w: usize, rng: &mut R| random_unitary(1 << w, rng);
        let measurements = [[m(widths[0], rng), m(widths[0], rng)], [m(widths[1], rng), m(widths[1], rng)]];
        Self::new(widths, iso, measurements).expect("random unitaries are valid")
    }

    pub fn width(&self, side: usize) -> usize {
        self.widths[side]
    }

    pub fn isometry(&self) -> &Matrix<f64> {
        &self.isometry
    }

    pub fn measurement(&self, side: usize, theta: u8) -> &Matrix<f64> {
        &self.measurements[side][theta as usize]
    }

    fn total(&self) -> usize {
        self.widths[0] + self.widths[1]
    }

    /// Applies the isometry to qubit `q0` of `psi`, whose following
    /// ancilla qubits must be in `|0⟩`.
    fn embed(&self, psi: &Statevector<f64>, q0: usize) -> Result<Statevector<f64>> {
        let targets: Vec<usize> = (q0..q0 + self.total()).collect();
        psi.apply_gate(&Gate::Unitary(self.isometry.clone()), &targets)
    }

    /// `|ψ_{A E0 E1}⟩` obtained by feeding half of an EPR pair through the
    /// isometry; `A` is the other half.
    pub fn cit_instance(&self) -> Result<CitInstance<f64>> {
        let psi = make_epr::<f64>().tensor(&Statevector::zero(self.total() - 1));
        let out = self.embed(&psi, 1)?;
        CitInstance::new(out, 1, self.widths[0], self.widths[1])
    }

    pub fn audit_cit(&self) -> Result<CitReport> {
        self.cit_instance()?.check()
    }

    /// Exact probability that both sides report `x`, averaged over `θ, x`.
    pub fn exact_acceptance(&self) -> Result<f64> {
        let n = self.total();
        let (w0, w1) = (self.widths[0], self.widths[1]);
        let mut total = 0.0;
        for theta in 0..2u8 {
            for x in 0..2u8 {
                let psi = Statevector::bb84(theta, x).tensor(&Statevector::zero(n - 1));
                let mut s = self.embed(&psi, 0)?;
                s.apply_gate_mut(&Gate::Unitary(self.measurement(0, theta).clone()), &(0..w0).collect::<Vec<_>>())?;
                s.apply_gate_mut(&Gate::Unitary(self.measurement(1, theta).clone()), &(w0..w0 + w1).collect::<Vec<_>>())?;
                let shift0 = n - 1;
                let shift1 = n - 1 - w0;
                let p: f64 = s
                    .amplitudes()
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (i >> shift0) & 1 == x as usize && (i >> shift1) & 1 == x as usize)
                    .map(|(_, a)| a.norm_sqr())
                    .sum();
                total += 0.25 * p;
            }
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn breidbart_split_matches_closed_form() {
        let p = SplitStrategy::breidbart().exact_acceptance().unwrap();
        assert!((p - std::f64::consts::FRAC_PI_8.cos().powi(2)).abs() < 1e-12);
        assert!(SplitStrategy::breidbart().audit_cit().unwrap().holds);
    }

    #[test]
    fn random_splits_respect_ceiling() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ceiling = crate::entropy::soundness_epsilon();
        for _ in 0..30 {
            let s = SplitStrategy::random(&mut rng, 2);
            assert!(s.exact_acceptance().unwrap() <= ceiling + 1e-9);
            assert!(s.audit_cit().unwrap().holds);
        }
    }
}
