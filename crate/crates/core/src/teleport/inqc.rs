//! Instantaneous nonlocal quantum computation by iterated uncorrected
//! teleportation.
//!
//! Alice teleports her state to Bob through the channel labelled by her
//! classical input. Bob applies the unitary for his input and teleports the
//! result back. If Alice's key `k` is the identity, Alice now holds
//! `V_ℓ U |ψ⟩` and the run succeeds; otherwise she holds `V_ℓ U V_k |ψ⟩`
//! and both parties move to the next round with the repair unitary
//! `U V_k U† V_ℓ`, which Bob can compute for each label `(x, k₁, …)` without
//! knowing which one is realized. Each round succeeds with probability
//! `4^{-n}`.
//!
//! Only the chain that actually carries the data is simulated: channels for
//! other labels would yield uniformly random keys independent of everything
//! else, so materializing them changes no distribution.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::channel::{teleport_in_place, Outcomes};
use super::pauli::PauliKey;
use crate::error::{Error, Result};
use crate::linalg::{random_unitary, Matrix};
use crate::qsim::Statevector;
use crate::scalar::Scalar;

/// Unitaries `U_{x,y}` on `n_a + n_b` qubits (A most significant).
#[derive(Clone, Debug)]
pub struct UnitaryFamily<T: Scalar> {
    n_a: usize,
    n_b: usize,
    x_count: usize,
    y_count: usize,
    unitaries: Vec<Matrix<T>>,
}

impl<T: Scalar> UnitaryFamily<T> {
    /// `unitaries[x * y_count + y] = U_{x,y}`.
    pub fn new(n_a: usize, n_b: usize, x_count: usize, y_count: usize, unitaries: Vec<Matrix<T>>) -> Result<Self> {
        if n_a + n_b == 0 {
            return Err(Error::Domain("family acts on no qubits".into()));
        }
        if unitaries.len() != x_count * y_count || unitaries.is_empty() {
            return Err(Error::DimensionMismatch { expected: x_count * y_count, got: unitaries.len() });
        }
        let dim = 1usize << (n_a + n_b);
        for u in &unitaries {
            if u.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: u.dim() });
            }
            u.check_unitary(T::tolerance())?;
        }
        Ok(Self { n_a, n_b, x_count, y_count, unitaries })
    }

    pub fn single(n_a: usize, n_b: usize, u: Matrix<T>) -> Result<Self> {
        Self::new(n_a, n_b, 1, 1, vec![u])
    }

    pub fn random<R: Rng + ?Sized>(n_a: usize, n_b: usize, x_count: usize, y_count: usize, rng: &mut R) -> Self {
        let dim = 1usize << (n_a + n_b);
        let us = (0..x_count * y_count).map(|_| random_unitary(dim, rng)).collect();
        Self::new(n_a, n_b, x_count, y_count, us).expect("random unitaries are valid")
    }

    pub fn get(&self, x: usize, y: usize) -> Result<&Matrix<T>> {
        if x >= self.x_count || y >= self.y_count {
            return Err(Error::Domain(format!("label ({x}, {y}) outside {}×{}", self.x_count, self.y_count)));
        }
        Ok(&self.unitaries[x * self.y_count + y])
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn x_count(&self) -> usize {
        self.x_count
    }

    pub fn y_count(&self) -> usize {
        self.y_count
    }
}

/// Unitaries indexed by `(x, y_1, …, y_{N−1})` on a register held by Alice.
#[derive(Clone, Debug)]
pub struct NPartyFamily<T: Scalar> {
    n_qubits: usize,
    dims: Vec<usize>,
    unitaries: Vec<Matrix<T>>,
}

impl<T: Scalar> NPartyFamily<T> {
    /// `dims = [|X|, |Y_1|, …]`; unitaries in row-major order over the labels.
    pub fn new(n_qubits: usize, dims: Vec<usize>, unitaries: Vec<Matrix<T>>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Domain("need at least two parties".into()));
        }
        let count: usize = dims.iter().product();
        if unitaries.len() != count || count == 0 {
            return Err(Error::DimensionMismatch { expected: count, got: unitaries.len() });
        }
        for u in &unitaries {
            if u.dim() != 1 << n_qubits {
                return Err(Error::DimensionMismatch { expected: 1 << n_qubits, got: u.dim() });
            }
            u.check_unitary(T::tolerance())?;
        }
        Ok(Self { n_qubits, dims, unitaries })
    }

    pub fn random<R: Rng + ?Sized>(n_qubits: usize, dims: Vec<usize>, rng: &mut R) -> Self {
        let count: usize = dims.iter().product();
        let us = (0..count).map(|_| random_unitary(1 << n_qubits, rng)).collect();
        Self::new(n_qubits, dims, us).expect("random unitaries are valid")
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn get(&self, labels: &[usize]) -> Result<&Matrix<T>> {
        if labels.len() != self.dims.len() || labels.iter().zip(&self.dims).any(|(&l, &d)| l >= d) {
            return Err(Error::Domain(format!("labels {labels:?} outside {:?}", self.dims)));
        }
        let idx = labels.iter().zip(&self.dims).fold(0, |acc, (&l, &d)| acc * d + l);
        Ok(&self.unitaries[idx])
    }
}

/// Alice's channel label: her input plus the keys of all earlier rounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    pub x: usize,
    pub history: Vec<PauliKey>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InqcRound {
    pub round: usize,
    /// Channel Alice teleported through.
    pub label: Label,
    pub k: PauliKey,
    /// Bob's return keys by label; only the realized label is materialized.
    pub ell: Vec<(Label, PauliKey)>,
    /// Nested run performed by the remaining parties, for `N > 2`.
    pub inner: Option<Box<InqcTranscript>>,
}

impl InqcRound {
    pub fn realized_ell(&self) -> &PauliKey {
        &self.ell[0].1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InqcTranscript {
    pub parties: usize,
    pub n_a: usize,
    pub n_b: usize,
    pub rounds_cap: usize,
    pub rounds: Vec<InqcRound>,
    /// Index of the round whose `k` was the identity.
    pub success_round: Option<usize>,
    /// Alice's classical output: her key of every round.
    pub alice_output_k: Vec<PauliKey>,
    /// Bob's classical output along the realized chain.
    pub bob_output_ell: Vec<PauliKey>,
    /// Key of Bob's initial teleport of `B` to Alice.
    pub b_fold_in: Option<PauliKey>,
    /// Key of Alice's final teleport of `B` back to Bob.
    pub b_fold_out: Option<PauliKey>,
    /// Classical messages exchanged between the sides during the rounds.
    pub crossing_messages: usize,
    pub epr_pairs_consumed: usize,
    /// `log2` of the EPR pairs a literal, fully materialized run would share.
    pub log2_worst_case_epr_pairs: f64,
}

impl InqcTranscript {
    pub fn succeeded(&self) -> bool {
        self.success_round.is_some()
    }

    fn trivial(n: usize) -> Self {
        Self {
            parties: 1,
            n_a: n,
            n_b: 0,
            rounds_cap: 0,
            rounds: Vec::new(),
            success_round: Some(0),
            alice_output_k: Vec::new(),
            bob_output_ell: Vec::new(),
            b_fold_in: None,
            b_fold_out: None,
            crossing_messages: 0,
            epr_pairs_consumed: 0,
            log2_worst_case_epr_pairs: f64::NEG_INFINITY,
        }
    }
}

/// Qubit-wise Pauli correction split by side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correction {
    pub a: PauliKey,
    pub b: PauliKey,
}

impl Correction {
    pub fn joined(&self) -> PauliKey {
        self.a.concat(&self.b)
    }
}

/// Output state and transcript of one run.
#[derive(Clone, Debug)]
pub struct InqcRun<T: Scalar> {
    pub output: Statevector<T>,
    pub transcript: InqcTranscript,
}

fn log2_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (1.0 + (lo - hi).exp2()).log2()
}

/// Pairs needed if every channel of every reachable label were prepared:
/// round `r` has `|X| 4^{n(r−1)}` labels, each needing an outbound channel,
/// a return channel and whatever the nested parties need.
fn worst_case_log2(n: usize, x_count: usize, parties: usize, cap: usize) -> f64 {
    if parties <= 1 {
        return f64::NEG_INFINITY;
    }
    let per_label = log2_add((2.0 * n as f64).log2(), worst_case_log2(n, 4usize.pow(n as u32), parties - 1, cap));
    let mut total = f64::NEG_INFINITY;
    for r in 0..cap {
        let labels = (x_count as f64).log2() + 2.0 * (n * r) as f64;
        total = log2_add(total, labels + per_label);
    }
    total
}

/// Recursive core on a global statevector. `data` are the qubits being
/// computed on, held by the first of `parties` parties; `base` is the
/// unitary the remaining parties must apply.
#[allow(clippy::too_many_arguments)]
fn chain<T: Scalar, R: Rng + ?Sized>(
    state: &mut Statevector<T>,
    data: &[usize],
    base: &Matrix<T>,
    parties: usize,
    x: usize,
    x_count: usize,
    rounds_cap: usize,
    outcomes: &mut Outcomes,
    rng: &mut R,
) -> Result<InqcTranscript> {
    let n = data.len();
    if parties == 1 {
        state.apply_checked_matrix(base, data)?;
        return Ok(InqcTranscript::trivial(n));
    }
    if rounds_cap == 0 {
        return Err(Error::Domain("rounds_cap must be at least 1".into()));
    }
    let mut t = InqcTranscript {
        parties,
        n_a: n,
        n_b: 0,
        rounds_cap,
        rounds: Vec::new(),
        success_round: None,
        alice_output_k: Vec::new(),
        bob_output_ell: Vec::new(),
        b_fold_in: None,
        b_fold_out: None,
        crossing_messages: 0,
        epr_pairs_consumed: 0,
        log2_worst_case_epr_pairs: worst_case_log2(n, x_count, parties, rounds_cap),
    };
    let mut u = base.clone();
    let mut history: Vec<PauliKey> = Vec::new();
    for r in 0..rounds_cap {
        let label = Label { x, history: history.clone() };
        let k = teleport_in_place(state, data, outcomes, rng)?;
        t.epr_pairs_consumed += n;
        let (inner, w) = if parties == 2 {
            state.apply_checked_matrix(&u, data)?;
            (None, PauliKey::identity(n))
        } else {
            let sub = chain(state, data, &u, parties - 1, 0, 1, rounds_cap, outcomes, rng)?;
            t.epr_pairs_consumed += sub.epr_pairs_consumed;
            let w = match sub.success_round {
                Some(_) => reconcile_chain(&sub)?,
                None => {
                    t.rounds.push(InqcRound {
                        round: r,
                        label: label.clone(),
                        k: k.clone(),
                        ell: Vec::new(),
                        inner: Some(Box::new(sub)),
                    });
                    t.alice_output_k.push(k);
                    return Ok(t);
                }
            };
            (Some(Box::new(sub)), w)
        };
        let ell = teleport_in_place(state, data, outcomes, rng)?;
        t.epr_pairs_consumed += n;
        t.alice_output_k.push(k.clone());
        t.bob_output_ell.push(ell.clone());
        t.rounds.push(InqcRound { round: r, label: label.clone(), k: k.clone(), ell: vec![(label, ell.clone())], inner });
        if k.is_identity() {
            t.success_round = Some(r);
            break;
        }
        // Repair: U' = U V_k U† W V_ℓ.
        let vk = k.matrix::<T>();
        let tail = w.matrix::<T>().matmul(&ell.matrix());
        // The update squares any drift in `u`, so keep it unitary.
        u = u.matmul(&vk).matmul(&u.adjoint()).matmul(&tail).reunitarize();
        history.push(k);
    }
    Ok(t)
}

/// Correction of a successful chain: `W ⊕ ℓ` at the success round.
fn reconcile_chain(t: &InqcTranscript) -> Result<PauliKey> {
    if t.parties == 1 {
        return Ok(PauliKey::identity(t.n_a + t.n_b));
    }
    let j = t.success_round.ok_or(Error::InqcFailed)?;
    let round = &t.rounds[j];
    let w = match &round.inner {
        Some(sub) => reconcile_chain(sub)?,
        None => PauliKey::identity(round.k.len()),
    };
    Ok(round.realized_ell().compose(&w))
}

/// Runs the two-party computation on a shared statevector. Alice holds
/// `alice` and Bob holds `bob`; `unitary` acts on `alice ++ bob`. Bob's
/// qubits are first teleported to Alice and, after a successful run, back.
#[allow(clippy::too_many_arguments)]
pub fn nonlocal_apply<T: Scalar, R: Rng + ?Sized>(
    state: &mut Statevector<T>,
    alice: &[usize],
    bob: &[usize],
    unitary: &Matrix<T>,
    x: usize,
    x_count: usize,
    rounds_cap: usize,
    outcomes: &mut Outcomes,
    rng: &mut R,
) -> Result<InqcTranscript> {
    let mut data = alice.to_vec();
    data.extend_from_slice(bob);
    if unitary.dim() != 1 << data.len() {
        return Err(Error::DimensionMismatch { expected: 1 << data.len(), got: unitary.dim() });
    }
    let mut base = unitary.clone();
    let mut fold_in = None;
    let mut pairs = 0;
    if !bob.is_empty() {
        let j = teleport_in_place(state, bob, outcomes, rng)?;
        pairs += bob.len();
        // Alice now holds (I ⊗ V_j†)ψ, so the unitary to apply is U (I ⊗ V_j).
        let fold = PauliKey::identity(alice.len()).concat(&j).matrix::<T>();
        base = base.matmul(&fold);
        fold_in = Some(j);
    }
    let mut t = chain(state, &data, &base, 2, x, x_count, rounds_cap, outcomes, rng)?;
    t.n_a = alice.len();
    t.n_b = bob.len();
    t.epr_pairs_consumed += pairs;
    t.b_fold_in = fold_in;
    if t.succeeded() && !bob.is_empty() {
        let kb = teleport_in_place(state, bob, outcomes, rng)?;
        t.epr_pairs_consumed += bob.len();
        t.b_fold_out = Some(kb);
    }
    Ok(t)
}

/// Two-party run on `input`, whose first `n_a + n_b` qubits are the data;
/// any further qubits are an untouched reference system.
pub fn run_inqc_2party<T: Scalar, R: Rng + ?Sized>(
    family: &UnitaryFamily<T>,
    x: usize,
    y: usize,
    input: &Statevector<T>,
    rounds_cap: usize,
    rng: &mut R,
) -> Result<InqcRun<T>> {
    run_inqc_2party_with(family, x, y, input, rounds_cap, &mut Outcomes::Sample, rng)
}

/// As [`run_inqc_2party`], with Bell outcomes optionally scripted.
pub fn run_inqc_2party_with<T: Scalar, R: Rng + ?Sized>(
    family: &UnitaryFamily<T>,
    x: usize,
    y: usize,
    input: &Statevector<T>,
    rounds_cap: usize,
    outcomes: &mut Outcomes,
    rng: &mut R,
) -> Result<InqcRun<T>> {
    let (na, nb) = (family.n_a(), family.n_b());
    if input.n_qubits() < na + nb {
        return Err(Error::DimensionMismatch { expected: na + nb, got: input.n_qubits() });
    }
    let u = family.get(x, y)?;
    let alice: Vec<usize> = (0..na).collect();
    let bob: Vec<usize> = (na..na + nb).collect();
    let mut state = input.clone();
    let transcript = nonlocal_apply(&mut state, &alice, &bob, u, x, family.x_count(), rounds_cap, outcomes, rng)?;
    Ok(InqcRun { output: state, transcript })
}

/// `N`-party run: Alice holds the whole register (other parties' systems
/// folded in) and each further party contributes one classical label.
pub fn run_inqc_nparty<T: Scalar, R: Rng + ?Sized>(
    family: &NPartyFamily<T>,
    labels: &[usize],
    input: &Statevector<T>,
    rounds_cap: usize,
    rng: &mut R,
) -> Result<InqcRun<T>> {
    run_inqc_nparty_with(family, labels, input, rounds_cap, &mut Outcomes::Sample, rng)
}

pub fn run_inqc_nparty_with<T: Scalar, R: Rng + ?Sized>(
    family: &NPartyFamily<T>,
    labels: &[usize],
    input: &Statevector<T>,
    rounds_cap: usize,
    outcomes: &mut Outcomes,
    rng: &mut R,
) -> Result<InqcRun<T>> {
    let n = family.n_qubits();
    if input.n_qubits() < n {
        return Err(Error::DimensionMismatch { expected: n, got: input.n_qubits() });
    }
    let u = family.get(labels)?;
    let data: Vec<usize> = (0..n).collect();
    let mut state = input.clone();
    let transcript =
        chain(&mut state, &data, u, family.parties(), labels[0], family.dims[0], rounds_cap, outcomes, rng)?;
    Ok(InqcRun { output: state, transcript })
}

/// Qubit-wise correction determined by the classical outputs of a
/// successful run. This is the one round of mutual communication.
pub fn reconcile_corrections(t: &InqcTranscript) -> Result<Correction> {
    if t.success_round.is_none() {
        return Err(Error::InqcFailed);
    }
    let all = reconcile_chain(t)?;
    let a = all.slice(0..t.n_a);
    let mut b = all.slice(t.n_a..t.n_a + t.n_b);
    if let Some(kb) = &t.b_fold_out {
        b = b.compose(kb);
    }
    Ok(Correction { a, b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{fidelity_up_to_global_phase, Gate};
    use crate::teleport::apply_correction;
    use crate::teleport::Pauli;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn corrected(run: &InqcRun<f64>) -> Statevector<f64> {
        let c = reconcile_corrections(&run.transcript).unwrap();
        let mut s = run.output.clone();
        let n = run.transcript.n_a + run.transcript.n_b;
        apply_correction(&mut s, &(0..n).collect::<Vec<_>>(), &c.joined()).unwrap();
        s
    }

    #[test]
    fn hadamard_on_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let fam = UnitaryFamily::single(1, 0, Gate::<f64>::H.matrix()).unwrap();
        let run = run_inqc_2party(&fam, 0, 0, &Statevector::zero(1), 64, &mut rng).unwrap();
        assert!(run.transcript.succeeded());
        let want = Statevector::bb84(1, 0);
        assert!(fidelity_up_to_global_phase(&corrected(&run), &want).unwrap() > 1.0 - 1e-9);
        assert_eq!(run.transcript.crossing_messages, 0);
    }

    #[test]
    fn forced_first_round_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let fam = UnitaryFamily::single(1, 0, Matrix::<f64>::identity(2)).unwrap();
        let psi = Statevector::random(1, &mut rng);
        let ell = PauliKey::new(vec![Pauli::Z]);
        let mut o = Outcomes::script([PauliKey::identity(1), ell.clone()]);
        let run = run_inqc_2party_with(&fam, 0, 0, &psi, 8, &mut o, &mut rng).unwrap();
        assert_eq!(run.transcript.success_round, Some(0));
        let c = reconcile_corrections(&run.transcript).unwrap();
        assert_eq!(c.a, ell);
        assert!(fidelity_up_to_global_phase(&corrected(&run), &psi).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn bipartite_with_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let fam = UnitaryFamily::<f64>::random(1, 1, 2, 2, &mut rng);
        for trial in 0..20 {
            let psi = Statevector::random(3, &mut rng);
            let (x, y) = (trial % 2, (trial / 2) % 2);
            let run = run_inqc_2party(&fam, x, y, &psi, 256, &mut rng).unwrap();
            if !run.transcript.succeeded() {
                continue;
            }
            let want = psi.apply_gate(&Gate::Unitary(fam.get(x, y).unwrap().clone()), &[0, 1]).unwrap();
            assert!(fidelity_up_to_global_phase(&corrected(&run), &want).unwrap() > 1.0 - 1e-9);
            assert!(run.transcript.b_fold_in.is_some() && run.transcript.b_fold_out.is_some());
        }
    }

    #[test]
    fn failure_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let fam = UnitaryFamily::single(1, 0, Gate::<f64>::X.matrix()).unwrap();
        let mut o = Outcomes::script([PauliKey::new(vec![Pauli::X]), PauliKey::identity(1)]);
        let run = run_inqc_2party_with(&fam, 0, 0, &Statevector::zero(1), 1, &mut o, &mut rng).unwrap();
        assert!(!run.transcript.succeeded());
        assert!(matches!(reconcile_corrections(&run.transcript), Err(Error::InqcFailed)));
    }

    #[test]
    fn three_parties() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fam = NPartyFamily::<f64>::random(1, vec![2, 2, 2], &mut rng);
        let mut ok = 0;
        for trial in 0..30 {
            let psi = Statevector::random(2, &mut rng);
            let labels = [trial % 2, (trial / 2) % 2, (trial / 4) % 2];
            let run = run_inqc_nparty(&fam, &labels, &psi, 64, &mut rng).unwrap();
            if !run.transcript.succeeded() {
                continue;
            }
            ok += 1;
            let c = reconcile_corrections(&run.transcript).unwrap();
            let mut s = run.output.clone();
            apply_correction(&mut s, &[0], &c.joined()).unwrap();
            let want = psi.apply_gate(&Gate::Unitary(fam.get(&labels).unwrap().clone()), &[0]).unwrap();
            assert!(fidelity_up_to_global_phase(&s, &want).unwrap() > 1.0 - 1e-9);
        }
        assert!(ok > 20);
    }

    #[test]
    fn two_party_base_case_matches() {
        let mut r1 = ChaCha8Rng::seed_from_u64(6);
        let mut r2 = ChaCha8Rng::seed_from_u64(6);
        let u = random_unitary::<f64, _>(2, &mut ChaCha8Rng::seed_from_u64(60));
        let fam2 = UnitaryFamily::new(1, 0, 1, 2, vec![u.clone(), u.clone()]).unwrap();
        let famn = NPartyFamily::new(1, vec![1, 2], vec![u.clone(), u]).unwrap();
        let psi = Statevector::zero(1);
        let a = run_inqc_2party(&fam2, 0, 1, &psi, 64, &mut r1).unwrap();
        let b = run_inqc_nparty(&famn, &[0, 1], &psi, 64, &mut r2).unwrap();
        assert_eq!(a.transcript, b.transcript);
        assert_eq!(a.output, b.output);
    }

    #[test]
    fn worst_case_grows_double_exponentially() {
        let small = worst_case_log2(1, 1, 2, 8);
        let big = worst_case_log2(2, 1, 2, 8);
        assert!(big > small + 10.0);
        assert!((worst_case_log2(1, 1, 2, 1) - 1.0).abs() < 1e-12);
    }
}
