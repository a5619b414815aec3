//! Shared quantum memory addressed through move-only handles.
//!
//! Every qubit in a simulation lives in one global statevector. Parties hold
//! [`RegisterHandle`]s naming groups of those qubits. Handles are neither
//! `Clone` nor `Copy`, so a register can be moved between parties but never
//! duplicated, and measuring a register consumes its handle:
//!
//! ```compile_fail
//! use qpv_core::qsim::{BasisString, RegisterStore, Statevector};
//! use rand::SeedableRng;
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
//! let mut store = RegisterStore::<f64>::new();
//! let h = store.alloc(&Statevector::zero(1));
//! let _ = store.measure(h, &BasisString::uniform(0, 1), &mut rng);
//! let _ = store.measure(h, &BasisString::uniform(0, 1), &mut rng); // moved
//! ```

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;

use super::density::DensityMatrix;
use super::gate::Gate;
use super::state::{make_epr, BasisString, Statevector};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

static NEXT_STORE: AtomicU64 = AtomicU64::new(1);

/// Move-only name for a group of qubits inside a [`RegisterStore`].
#[derive(Debug, PartialEq, Eq)]
pub struct RegisterHandle {
    store: u64,
    id: u64,
}

impl RegisterHandle {
    pub fn id(&self) -> u64 {
        self.id
    }
}

pub struct RegisterStore<T: Scalar> {
    store: u64,
    state: Statevector<T>,
    registers: BTreeMap<u64, Vec<usize>>,
    next_id: u64,
}

impl<T: Scalar> Default for RegisterStore<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> RegisterStore<T> {
    pub fn new() -> Self {
        Self {
            store: NEXT_STORE.fetch_add(1, Ordering::Relaxed),
            state: Statevector::empty(),
            registers: BTreeMap::new(),
            next_id: 0,
        }
    }

    fn mint(&mut self, qubits: Vec<usize>) -> RegisterHandle {
        let id = self.next_id;
        self.next_id += 1;
        self.registers.insert(id, qubits);
        RegisterHandle { store: self.store, id }
    }

    fn qubits(&self, h: &RegisterHandle) -> Result<&[usize]> {
        if h.store != self.store {
            return Err(Error::UnknownRegister(h.id));
        }
        self.registers.get(&h.id).map(Vec::as_slice).ok_or(Error::UnknownRegister(h.id))
    }

    /// Appends `sv` to the global state and returns a handle to its qubits.
    pub fn alloc(&mut self, sv: &Statevector<T>) -> RegisterHandle {
        let base = self.state.n_qubits();
        self.state = self.state.tensor(sv);
        self.mint((base..base + sv.n_qubits()).collect())
    }

    /// Allocates an EPR pair and returns its two halves.
    pub fn alloc_epr(&mut self) -> (RegisterHandle, RegisterHandle) {
        let base = self.state.n_qubits();
        self.state = self.state.tensor(&make_epr());
        (self.mint(vec![base]), self.mint(vec![base + 1]))
    }

    pub fn width(&self, h: &RegisterHandle) -> Result<usize> {
        Ok(self.qubits(h)?.len())
    }

    pub fn qubit_count(&self) -> usize {
        self.state.n_qubits()
    }

    pub fn live_registers(&self) -> usize {
        self.registers.len()
    }

    pub fn state(&self) -> &Statevector<T> {
        &self.state
    }

    /// Global qubit indices of a register (for oracle checks).
    pub fn indices(&self, h: &RegisterHandle) -> Result<Vec<usize>> {
        Ok(self.qubits(h)?.to_vec())
    }

    /// Applies a gate to the qubits of `h`, in register order.
    pub fn apply(&mut self, h: &RegisterHandle, gate: &Gate<T>) -> Result<()> {
        let q = self.qubits(h)?.to_vec();
        let m = gate.matrix();
        if m.dim() == 2 && q.len() > 1 {
            gate.validate()?;
            for &t in &q {
                self.state.apply_matrix_unchecked(&m, &[t]);
            }
            return Ok(());
        }
        self.state.apply_gate_mut(gate, &q)
    }

    /// Applies `m` jointly to the concatenation of several registers.
    pub fn apply_joint(&mut self, hs: &[&RegisterHandle], m: &Matrix<T>) -> Result<()> {
        let mut q = Vec::new();
        for h in hs {
            q.extend_from_slice(self.qubits(h)?);
        }
        self.state.apply_gate_mut(&Gate::Unitary(m.clone()), &q)
    }

    /// Splits a register after its first `at` qubits.
    pub fn split(&mut self, h: RegisterHandle, at: usize) -> Result<(RegisterHandle, RegisterHandle)> {
        let q = self.qubits(&h)?.to_vec();
        if at > q.len() {
            return Err(Error::QubitOutOfRange { index: at, n_qubits: q.len() });
        }
        self.registers.remove(&h.id);
        let (a, b) = q.split_at(at);
        Ok((self.mint(a.to_vec()), self.mint(b.to_vec())))
    }

    /// Concatenates two registers into one.
    pub fn join(&mut self, a: RegisterHandle, b: RegisterHandle) -> Result<RegisterHandle> {
        let mut q = self.qubits(&a)?.to_vec();
        q.extend_from_slice(self.qubits(&b)?);
        self.registers.remove(&a.id);
        self.registers.remove(&b.id);
        Ok(self.mint(q))
    }

    /// Measures the register in `basis`, consumes the handle and removes the
    /// measured qubits from the global state.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        h: RegisterHandle,
        basis: &BasisString,
        rng: &mut R,
    ) -> Result<Vec<u8>> {
        let q = self.qubits(&h)?.to_vec();
        if basis.len() != q.len() {
            return Err(Error::DimensionMismatch { expected: q.len(), got: basis.len() });
        }
        let hm = Gate::<T>::H.matrix();
        for (&t, &b) in q.iter().zip(basis.bits()) {
            if b == 1 {
                self.state.apply_matrix_unchecked(&hm, &[t]);
            }
        }
        self.measure_computational(h, rng)
    }

    /// Applies `rotation` to each qubit, then measures computationally.
    pub fn measure_rotated<R: Rng + ?Sized>(
        &mut self,
        h: RegisterHandle,
        rotation: &Matrix<T>,
        rng: &mut R,
    ) -> Result<Vec<u8>> {
        let q = self.qubits(&h)?.to_vec();
        if rotation.dim() == 2 {
            rotation.check_unitary(T::tolerance())?;
            for &t in &q {
                self.state.apply_matrix_unchecked(rotation, &[t]);
            }
        } else {
            self.state.apply_gate_mut(&Gate::Unitary(rotation.clone()), &q)?;
        }
        self.measure_computational(h, rng)
    }

    fn measure_computational<R: Rng + ?Sized>(&mut self, h: RegisterHandle, rng: &mut R) -> Result<Vec<u8>> {
        let q = self.qubits(&h)?.to_vec();
        self.registers.remove(&h.id);
        let mut out = Vec::with_capacity(q.len());
        for &t in &q {
            out.push(self.state.measure_qubit_mut(t, rng)?);
        }
        self.remove_qubits(&q, &out)?;
        Ok(out)
    }

    /// Projects the register onto the given computational outcome (used to
    /// replay forced Bell outcomes); consumes the handle.
    pub fn postselect(&mut self, h: RegisterHandle, outcome: &[u8]) -> Result<T> {
        let q = self.qubits(&h)?.to_vec();
        if outcome.len() != q.len() {
            return Err(Error::DimensionMismatch { expected: q.len(), got: outcome.len() });
        }
        self.registers.remove(&h.id);
        let mut p = T::one();
        for (&t, &v) in q.iter().zip(outcome) {
            p = p * self.state.project_mut(t, v)?;
        }
        self.remove_qubits(&q, outcome)?;
        Ok(p)
    }

    fn remove_qubits(&mut self, q: &[usize], values: &[u8]) -> Result<()> {
        let mut pairs: Vec<(usize, u8)> = q.iter().copied().zip(values.iter().copied()).collect();
        pairs.sort_by_key(|a| std::cmp::Reverse(a.0));
        for (t, v) in &pairs {
            self.state = self.state.remove_collapsed(*t, *v)?;
        }
        for idx in self.registers.values_mut() {
            for x in idx.iter_mut() {
                let shift = pairs.iter().filter(|(t, _)| *t < *x).count();
                *x -= shift;
            }
        }
        Ok(())
    }

    /// Discards a register without looking at it (partial trace of the
    /// environment): measured with fresh randomness and thrown away.
    pub fn discard<R: Rng + ?Sized>(&mut self, h: RegisterHandle, rng: &mut R) -> Result<()> {
        self.measure_computational(h, rng).map(|_| ())
    }

    /// Reduced density matrix of the listed registers, in order.
    pub fn reduced_state(&self, hs: &[&RegisterHandle]) -> Result<DensityMatrix<T>> {
        let mut q = Vec::new();
        for h in hs {
            q.extend_from_slice(self.qubits(h)?);
        }
        self.state.partial_trace(&q)
    }

    /// Pure state of the listed registers when they are the whole store.
    pub fn snapshot(&self, hs: &[&RegisterHandle]) -> Result<Statevector<T>> {
        let mut q = Vec::new();
        for h in hs {
            q.extend_from_slice(self.qubits(h)?);
        }
        if q.len() != self.state.n_qubits() {
            return Err(Error::Domain("snapshot must name every live qubit".into()));
        }
        self.state.permute(&q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn epr_halves_agree_in_both_bases() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for theta in 0..2u8 {
            for _ in 0..200 {
                let mut s = RegisterStore::<f64>::new();
                let (a, b) = s.alloc_epr();
                let basis = BasisString::uniform(theta, 1);
                let xa = s.measure(a, &basis, &mut rng).unwrap();
                let xb = s.measure(b, &basis, &mut rng).unwrap();
                assert_eq!(xa, xb);
                assert_eq!(s.qubit_count(), 0);
            }
        }
    }

    #[test]
    fn foreign_handle_rejected() {
        let mut s1 = RegisterStore::<f64>::new();
        let mut s2 = RegisterStore::<f64>::new();
        let h = s1.alloc(&Statevector::zero(1));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            s2.measure(h, &BasisString::uniform(0, 1), &mut rng),
            Err(Error::UnknownRegister(_))
        ));
    }

    #[test]
    fn indices_shift_after_removal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = RegisterStore::<f64>::new();
        let a = s.alloc(&Statevector::zero(1));
        let b = s.alloc(&Statevector::basis(1, 1));
        s.measure(a, &BasisString::uniform(0, 1), &mut rng).unwrap();
        assert_eq!(s.indices(&b).unwrap(), vec![0]);
        assert_eq!(s.measure(b, &BasisString::uniform(0, 1), &mut rng).unwrap(), vec![1]);
    }

    #[test]
    fn split_and_join_round_trip() {
        let mut s = RegisterStore::<f64>::new();
        let h = s.alloc(&Statevector::zero(3));
        let (a, b) = s.split(h, 1).unwrap();
        assert_eq!((s.width(&a).unwrap(), s.width(&b).unwrap()), (1, 2));
        let j = s.join(b, a).unwrap();
        assert_eq!(s.indices(&j).unwrap(), vec![1, 2, 0]);
    }
}
