//! Teleportation primitives, both on a bare statevector (used inside the
//! nonlocal computation, where every qubit is tracked by index) and on the
//! handle-based register store (used by protocol parties).

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::pauli::{Pauli, PauliKey};
use crate::error::{Error, Result};
use crate::qsim::{cnot, make_epr, BasisString, Gate, RegisterHandle, RegisterStore, Statevector};
use crate::scalar::Scalar;

/// Where Bell outcomes come from: the Born rule, or a script replayed by
/// projection (each outcome has probability 1/4, so every script is
/// realizable).
#[derive(Clone, Debug, Default)]
pub enum Outcomes {
    #[default]
    Sample,
    Script(VecDeque<Pauli>),
}

impl Outcomes {
    pub fn script(keys: impl IntoIterator<Item = PauliKey>) -> Self {
        Outcomes::Script(keys.into_iter().flat_map(|k| k.paulis().to_vec()).collect())
    }

    fn next_forced(&mut self) -> Option<Pauli> {
        match self {
            Outcomes::Sample => None,
            Outcomes::Script(q) => q.pop_front(),
        }
    }
}

/// Teleports each qubit in `data` through a fresh EPR pair and leaves the
/// receiver's half at the same index, so afterwards `data` holds
/// `σ_k† |ψ⟩` qubit-wise. Returns the key `k`.
pub fn teleport_in_place<T: Scalar, R: Rng + ?Sized>(
    state: &mut Statevector<T>,
    data: &[usize],
    outcomes: &mut Outcomes,
    rng: &mut R,
) -> Result<PauliKey> {
    let cx = cnot::<T>();
    let h = Gate::<T>::H.matrix();
    let mut key = Vec::with_capacity(data.len());
    for &q in data {
        let n = state.n_qubits();
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, n_qubits: n });
        }
        let mut s = state.tensor(&make_epr());
        let a = n;
        s.apply_matrix_unchecked(&cx, &[q, a]);
        s.apply_matrix_unchecked(&h, &[q]);
        let (m1, m2) = match outcomes.next_forced() {
            Some(p) => {
                s.project_mut(q, p.z_bit())?;
                s.project_mut(a, p.x_bit())?;
                (p.z_bit(), p.x_bit())
            }
            None => {
                let m1 = s.measure_qubit_mut(q, rng)?;
                let m2 = s.measure_qubit_mut(a, rng)?;
                (m1, m2)
            }
        };
        let s = s.remove_collapsed(a, m2)?;
        // Now qubit `n` is the receiver half; swap it into slot `q`.
        let mut order: Vec<usize> = (0..=n).collect();
        order.swap(q, n);
        let s = s.permute(&order)?;
        *state = s.remove_collapsed(n, m1)?;
        key.push(Pauli::from_bits(m2, m1));
    }
    Ok(PauliKey::new(key))
}

/// Applies `σ_k` qubit-wise to `data`.
pub fn apply_correction<T: Scalar>(state: &mut Statevector<T>, data: &[usize], key: &PauliKey) -> Result<()> {
    if key.len() != data.len() {
        return Err(Error::DimensionMismatch { expected: data.len(), got: key.len() });
    }
    for (&q, &p) in data.iter().zip(key.paulis()) {
        if p != Pauli::I {
            state.apply_checked_matrix(&p.matrix(), &[q])?;
        }
    }
    Ok(())
}

/// Bell measurement of `data` against `half`, qubit by qubit. Both handles
/// are consumed; the partner of `half` now holds `σ_k† |ψ⟩`.
pub fn bell_measure<T: Scalar, R: Rng + ?Sized>(
    store: &mut RegisterStore<T>,
    data: RegisterHandle,
    half: RegisterHandle,
    outcomes: &mut Outcomes,
    rng: &mut R,
) -> Result<PauliKey> {
    let n = store.width(&data)?;
    if store.width(&half)? != n {
        return Err(Error::DimensionMismatch { expected: n, got: store.width(&half)? });
    }
    let cx = cnot::<T>();
    let mut d_rest = data;
    let mut h_rest = half;
    let mut key = Vec::with_capacity(n);
    for _ in 0..n {
        let (d, dr) = store.split(d_rest, 1)?;
        let (h, hr) = store.split(h_rest, 1)?;
        d_rest = dr;
        h_rest = hr;
        store.apply_joint(&[&d, &h], &cx)?;
        store.apply(&d, &Gate::H)?;
        let p = match outcomes.next_forced() {
            Some(p) => {
                store.postselect(d, &[p.z_bit()])?;
                store.postselect(h, &[p.x_bit()])?;
                p
            }
            None => {
                let z = store.measure(d, &BasisString::uniform(0, 1), rng)?[0];
                let x = store.measure(h, &BasisString::uniform(0, 1), rng)?[0];
                Pauli::from_bits(x, z)
            }
        };
        key.push(p);
    }
    // Both remainders are now empty registers.
    store.postselect(d_rest, &[])?;
    store.postselect(h_rest, &[])?;
    Ok(PauliKey::new(key))
}

/// Identifier of a teleportation channel: iteration index plus the classical
/// label it is reserved for.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelLabel {
    pub round: usize,
    pub label: String,
}

/// A group of `n` EPR pairs shared by sender and receiver.
pub struct TeleportChannel {
    pub label: ChannelLabel,
    pub n_qubits: usize,
    pub sender_half: RegisterHandle,
    pub receiver_half: RegisterHandle,
}

impl TeleportChannel {
    pub fn open<T: Scalar>(store: &mut RegisterStore<T>, label: ChannelLabel, n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Domain("a channel needs at least one pair".into()));
        }
        let (mut s, mut r) = store.alloc_epr();
        for _ in 1..n_qubits {
            let (s2, r2) = store.alloc_epr();
            s = store.join(s, s2)?;
            r = store.join(r, r2)?;
        }
        Ok(Self { label, n_qubits, sender_half: s, receiver_half: r })
    }

    /// Consumes the channel, teleporting `data`. Returns the key and the
    /// receiver's register, which holds `σ_k† |ψ⟩`.
    pub fn teleport<T: Scalar, R: Rng + ?Sized>(
        self,
        store: &mut RegisterStore<T>,
        data: RegisterHandle,
        outcomes: &mut Outcomes,
        rng: &mut R,
    ) -> Result<(PauliKey, RegisterHandle)> {
        let key = bell_measure(store, data, self.sender_half, outcomes, rng)?;
        Ok((key, self.receiver_half))
    }
}

/// Applies `σ_k` qubit-wise to a stored register.
pub fn correct_register<T: Scalar>(store: &mut RegisterStore<T>, h: &RegisterHandle, key: &PauliKey) -> Result<()> {
    if store.width(h)? != key.len() {
        return Err(Error::DimensionMismatch { expected: store.width(h)?, got: key.len() });
    }
    if key.is_identity() {
        return Ok(());
    }
    store.apply_joint(&[h], &key.matrix())
}
