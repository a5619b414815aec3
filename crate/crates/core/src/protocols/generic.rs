//! Generic multi-step position verification.
//!
//! At step `s`, `V0` sends a register `A` with a classical label `x`, `V1`
//! sends `B` with a label `y`, both timed to meet at the claimed position.
//! The prover applies `U_{x,y}` to `A ⊗ B ⊗ R`, where `R` is its private
//! register that persists across steps, and returns `A` to `V0` and `B` to
//! `V1` (or measures `A` and broadcasts the result). Verifiers measure what
//! they receive in the computational basis.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::message::Msg;
use super::pv::PvSetup;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::qsim::{cnot, swap, Gate, Statevector};
use crate::spacetime::{distance, in_time, Network, Position, Simulation, Transcript};
use crate::teleport::UnitaryFamily;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplyKind {
    /// `A` goes back to `V0`, `B` to `V1`.
    Quantum,
    /// `A` is measured and the bits go to both verifiers.
    MeasuredBroadcast,
}

#[derive(Clone, Debug)]
pub struct GenericStep {
    pub n_a: usize,
    pub n_b: usize,
    /// Verifiers prepare `P_{x,y} |a, b⟩` on `A ⊗ B`.
    pub prep: UnitaryFamily<f64>,
    /// `U_{x,y}` on `A ⊗ (B ⊗ R)`.
    pub unitary: UnitaryFamily<f64>,
    pub reply: ReplyKind,
}

/// Verifiers' acceptance predicate on top of timing.
pub type VerifyFn = fn(&[StepSecrets], &[StepObservation]) -> bool;

#[derive(Clone, Debug)]
pub struct GenericScheme {
    pub id: String,
    pub n_r: usize,
    pub steps: Vec<GenericStep>,
    pub verify: Option<VerifyFn>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepSecrets {
    pub x: usize,
    pub y: usize,
    pub a: Vec<u8>,
    pub b: Vec<u8>,
}

/// What the verifiers see at one step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepObservation {
    pub v0_bits: Vec<u8>,
    pub v1_bits: Vec<u8>,
    pub v0_arrival: Option<f64>,
    pub v1_arrival: Option<f64>,
    pub v0_in_time: bool,
    pub v1_in_time: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GenericRun {
    pub secrets: Vec<StepSecrets>,
    pub observations: Vec<StepObservation>,
    pub accept: bool,
    pub transcript: Transcript<f64>,
}

impl GenericRun {
    /// Discrete verifier-observable outcome: every received bit plus every
    /// in-time flag, packed into one integer.
    pub fn category(&self) -> u64 {
        let mut c = 0u64;
        for o in &self.observations {
            for &b in o.v0_bits.iter().chain(&o.v1_bits) {
                c = (c << 1) | u64::from(b);
            }
            c = (c << 1) | u64::from(o.v0_in_time);
            c = (c << 1) | u64::from(o.v1_in_time);
        }
        c
    }
}

fn h_pow(bit: usize) -> Matrix<f64> {
    if bit & 1 == 1 {
        Gate::<f64>::H.matrix()
    } else {
        Matrix::identity(2)
    }
}

fn bits_index(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

impl GenericScheme {
    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() || self.steps.len() > 255 {
            return Err(Error::config("steps", "scheme needs between 1 and 255 steps"));
        }
        for (i, s) in self.steps.iter().enumerate() {
            if s.prep.n_a() != s.n_a || s.prep.n_b() != s.n_b {
                return Err(Error::config("steps", format!("step {i}: preparation acts on the wrong registers")));
            }
            if s.unitary.n_a() != s.n_a || s.unitary.n_b() != s.n_b + self.n_r {
                return Err(Error::config("steps", format!("step {i}: unitary acts on the wrong registers")));
            }
            if s.n_a == 0 {
                return Err(Error::config("steps", format!("step {i}: V0 must send at least one qubit")));
            }
            if s.reply == ReplyKind::MeasuredBroadcast && s.n_b != 0 {
                return Err(Error::config("steps", format!("step {i}: broadcast replies need an empty B")));
            }
            if (s.prep.x_count(), s.prep.y_count()) != (s.unitary.x_count(), s.unitary.y_count()) {
                return Err(Error::config("steps", format!("step {i}: label sets differ")));
            }
        }
        Ok(())
    }

    /// BB84 as a one-step scheme: `V0` sends `H^θ|a⟩`, `V1` sends `θ` as
    /// its label, the prover applies `H^θ` and broadcasts the measured bit.
    pub fn bb84_recast() -> Self {
        let hs: Vec<_> = (0..2).map(h_pow).collect();
        let prep = UnitaryFamily::new(1, 0, 1, 2, hs.clone()).expect("valid");
        let unitary = UnitaryFamily::new(1, 0, 1, 2, hs).expect("valid");
        Self {
            id: "bb84".into(),
            n_r: 0,
            steps: vec![GenericStep { n_a: 1, n_b: 0, prep, unitary, reply: ReplyKind::MeasuredBroadcast }],
            verify: Some(|sec, obs| obs[0].v0_bits == sec[0].a && obs[0].v1_bits == sec[0].a),
        }
    }

    /// Two interleaved steps sharing a one-qubit `R`. Step 1 stores `a₁`
    /// into `R` and broadcasts it; step 2 swaps the stored bit out to `V0`
    /// while `a₂` moves into `R`. Both bases depend on `x ⊕ y`.
    pub fn interleaved_toy() -> Self {
        let mut prep = Vec::new();
        let mut u1 = Vec::new();
        let mut u2 = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                let h = h_pow(x ^ y);
                prep.push(h.clone());
                let h_a = h.kron(&Matrix::identity(2));
                u1.push(cnot::<f64>().matmul(&h_a));
                u2.push(swap::<f64>().matmul(&h_a));
            }
        }
        let prep = UnitaryFamily::new(1, 0, 2, 2, prep).expect("valid");
        let step1 = GenericStep {
            n_a: 1,
            n_b: 0,
            prep: prep.clone(),
            unitary: UnitaryFamily::new(1, 1, 2, 2, u1).expect("valid"),
            reply: ReplyKind::MeasuredBroadcast,
        };
        let step2 = GenericStep {
            n_a: 1,
            n_b: 0,
            prep,
            unitary: UnitaryFamily::new(1, 1, 2, 2, u2).expect("valid"),
            reply: ReplyKind::Quantum,
        };
        Self {
            id: "toy".into(),
            n_r: 1,
            steps: vec![step1, step2],
            verify: Some(|sec, obs| {
                obs[0].v0_bits == sec[0].a && obs[0].v1_bits == sec[0].a && obs[1].v0_bits == sec[0].a
            }),
        }
    }

    /// Random unitaries on one `A` qubit and an `R` of `n_r` qubits, with
    /// quantum replies and no acceptance predicate beyond timing.
    pub fn random<R: Rng + ?Sized>(n_steps: usize, n_r: usize, rng: &mut R) -> Self {
        let steps = (0..n_steps)
            .map(|_| GenericStep {
                n_a: 1,
                n_b: 0,
                prep: UnitaryFamily::random(1, 0, 2, 2, rng),
                unitary: UnitaryFamily::random(1, n_r, 2, 2, rng),
                reply: ReplyKind::Quantum,
            })
            .collect();
        Self { id: format!("random-{n_steps}-{n_r}"), n_r, steps, verify: None }
    }

    /// `bb84`, `toy`, or `random:<steps>:<r qubits>:<seed>`.
    pub fn builtin(id: &str) -> Result<Self> {
        match id {
            "bb84" => Ok(Self::bb84_recast()),
            "toy" => Ok(Self::interleaved_toy()),
            other => {
                let parts: Vec<&str> = other.split(':').collect();
                let parse = |s: &str| s.parse::<u64>().map_err(|_| Error::config("scheme", format!("bad id {other}")));
                match parts.as_slice() {
                    ["random", s, r, seed] => {
                        let mut rng = ChaCha8Rng::seed_from_u64(parse(seed)?);
                        Ok(Self::random(parse(s)? as usize, parse(r)? as usize, &mut rng))
                    }
                    _ => Err(Error::config("scheme", format!("unknown scheme {other}"))),
                }
            }
        }
    }

    pub(crate) fn draw_secrets<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<StepSecrets> {
        self.steps
            .iter()
            .map(|s| StepSecrets {
                x: rng.random_range(0..s.unitary.x_count()),
                y: rng.random_range(0..s.unitary.y_count()),
                a: (0..s.n_a).map(|_| rng.random_range(0..2u8)).collect(),
                b: (0..s.n_b).map(|_| rng.random_range(0..2u8)).collect(),
            })
            .collect()
    }

    /// Appends the prepared `A ⊗ B` for `step` to `state`; returns the
    /// indices of `A` and `B`.
    pub(crate) fn prepare(
        &self,
        state: &mut Statevector<f64>,
        step: usize,
        sec: &StepSecrets,
    ) -> Result<(Vec<usize>, Vec<usize>)> {
        let s = &self.steps[step];
        let mut bits = sec.a.clone();
        bits.extend_from_slice(&sec.b);
        let mut fresh = Statevector::basis(s.n_a + s.n_b, bits_index(&bits));
        let p = s.prep.get(sec.x, sec.y)?;
        fresh.apply_checked_matrix(p, &(0..s.n_a + s.n_b).collect::<Vec<_>>())?;
        let base = state.n_qubits();
        *state = state.tensor(&fresh);
        Ok(((base..base + s.n_a).collect(), (base + s.n_a..base + s.n_a + s.n_b).collect()))
    }
}

/// The honest prover's action at one step: `U` on `A ⊗ B ⊗ R`.
pub fn generic_pv_step(
    state: &mut Statevector<f64>,
    a: &[usize],
    b: &[usize],
    r: &[usize],
    u: &Matrix<f64>,
) -> Result<()> {
    let mut t = a.to_vec();
    t.extend_from_slice(b);
    t.extend_from_slice(r);
    state.apply_gate_mut(&Gate::Unitary(u.clone()), &t)
}

/// Measures the listed qubits computationally and removes them.
pub(crate) fn measure_out<R: Rng + ?Sized>(
    state: &mut Statevector<f64>,
    qubits: &[usize],
    rng: &mut R,
) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(qubits.len());
    for &q in qubits {
        out.push(state.measure_qubit_mut(q, rng)?);
    }
    let mut order: Vec<(usize, u8)> = qubits.iter().copied().zip(out.iter().copied()).collect();
    order.sort_by_key(|x| std::cmp::Reverse(x.0));
    for (q, v) in order {
        *state = state.remove_collapsed(q, v)?;
    }
    Ok(out)
}

/// Bits received by `(V0, V1)` for one step's returned registers.
pub(crate) fn reply_bits(kind: ReplyKind, a_bits: Vec<u8>, b_bits: Vec<u8>) -> (Vec<u8>, Vec<u8>) {
    match kind {
        ReplyKind::Quantum => (a_bits, b_bits),
        ReplyKind::MeasuredBroadcast => (a_bits.clone(), a_bits),
    }
}

/// Quantum part of an honest run; `R` occupies the leading qubits.
pub(crate) fn honest_quantum<R: Rng + ?Sized>(
    scheme: &GenericScheme,
    secrets: &[StepSecrets],
    rng: &mut R,
) -> Result<Vec<(Vec<u8>, Vec<u8>)>> {
    let mut state = Statevector::zero(scheme.n_r);
    let r: Vec<usize> = (0..scheme.n_r).collect();
    let mut out = Vec::with_capacity(scheme.steps.len());
    for (i, (step, sec)) in scheme.steps.iter().zip(secrets).enumerate() {
        let (a, b) = scheme.prepare(&mut state, i, sec)?;
        generic_pv_step(&mut state, &a, &b, &r, step.unitary.get(sec.x, sec.y)?)?;
        let mut both = a.clone();
        both.extend_from_slice(&b);
        let bits = measure_out(&mut state, &both, rng)?;
        let (ab, bb) = bits.split_at(step.n_a);
        out.push(reply_bits(step.reply, ab.to_vec(), bb.to_vec()));
    }
    Ok(out)
}

/// Arrival times of the replies at `(V0, V1)` for every step, from a replay
/// of the message pattern. `coalition` is `None` for the honest prover,
/// otherwise the positions of the two adversaries; `step_ok[s]` is false
/// when the coalition has nothing to send at step `s`.
/// Arrival times and in-time flags per step and verifier, plus the transcript.
pub(crate) type ReplayedTiming = (Vec<[Option<f64>; 2]>, Vec<[bool; 2]>, Transcript<f64>);

pub(crate) fn replay_timing(
    setup: &PvSetup,
    coalition: Option<&[Position<f64>]>,
    step_ok: &[bool],
) -> Result<ReplayedTiming> {
    let layout = &setup.layout;
    if layout.verifiers.len() != 2 {
        return Err(Error::config("verifiers", "generic schemes use two verifiers"));
    }
    let emit = crate::spacetime::schedule_challenges(&layout.verifiers, &layout.prover, &setup.timing)?;
    let mut positions = layout.verifiers.clone();
    match coalition {
        None => positions.push(layout.prover.clone()),
        Some(c) => {
            if c.len() != 2 {
                return Err(Error::config("adversaries", "generic attacks use two adversaries"));
            }
            crate::spacetime::check_adversary_placement(c, &layout.prover, setup.timing.delta)?;
            positions.extend(c.iter().cloned());
        }
    }
    let mut span: f64 = 0.0;
    for p in &positions {
        for q in &positions {
            span = span.max(distance(p, q)?);
        }
    }
    let period = 4.0 * span.max(1e-9);
    let n = step_ok.len();
    let mut sim = Simulation::new(Network::new(positions)?);
    for s in 0..n {
        let shift = period * s as f64;
        let (t0, t1) = match coalition {
            None => (2, 2),
            Some(_) => (2, 3),
        };
        sim.send(0, t0, Msg::Classical(vec![s as u8]), emit[0] + shift)?;
        sim.send(1, t1, Msg::Classical(vec![s as u8]), emit[1] + shift)?;
    }
    let mut got = vec![[0u8; 2]; n];
    let mut arrivals = vec![[None; 2]; n];
    let mut in_time_flags = vec![[false; 2]; n];
    sim.run(|ev, out| {
        let s = match &ev.payload {
            Msg::Classical(v) if !v.is_empty() => v[0] as usize,
            _ => return Err(Error::Internal("unexpected payload".into())),
        };
        let me = ev.receiver;
        if me < 2 {
            let mut cfg = setup.timing;
            cfg.t += period * s as f64;
            if arrivals[s][me].is_none() {
                arrivals[s][me] = Some(ev.arrival_time);
                in_time_flags[s][me] = in_time(ev.arrival_time, &layout.verifiers[me], &layout.prover, &cfg)?;
            }
            return Ok(());
        }
        match coalition {
            None => {
                got[s][ev.sender] = 1;
                if got[s] == [1, 1] {
                    out.send(0, Msg::Classical(vec![s as u8]));
                    out.send(1, Msg::Classical(vec![s as u8]));
                }
            }
            Some(_) => {
                let side = me - 2;
                // Challenge first, then the partner's crossing message.
                if ev.sender < 2 {
                    got[s][side] |= 1;
                    out.send(2 + (1 - side), Msg::Classical(vec![s as u8]));
                } else {
                    got[s][side] |= 2;
                }
                if got[s][side] == 3 && step_ok[s] {
                    out.send(side, Msg::Classical(vec![s as u8]));
                }
            }
        }
        Ok(())
    })?;
    Ok((arrivals, in_time_flags, sim.into_transcript()))
}

pub(crate) fn assemble_run(
    scheme: &GenericScheme,
    secrets: Vec<StepSecrets>,
    bits: Vec<(Vec<u8>, Vec<u8>)>,
    arrivals: Vec<[Option<f64>; 2]>,
    flags: Vec<[bool; 2]>,
    transcript: Transcript<f64>,
) -> GenericRun {
    let mut observations = Vec::with_capacity(scheme.steps.len());
    for s in 0..scheme.steps.len() {
        let (v0_bits, v1_bits) = bits.get(s).cloned().unwrap_or_default();
        observations.push(StepObservation {
            v0_bits,
            v1_bits,
            v0_arrival: arrivals[s][0],
            v1_arrival: arrivals[s][1],
            v0_in_time: flags[s][0] && arrivals[s][0].is_some(),
            v1_in_time: flags[s][1] && arrivals[s][1].is_some(),
        });
    }
    let timely = observations.iter().all(|o| o.v0_in_time && o.v1_in_time);
    let complete = bits.len() == scheme.steps.len();
    let accept = timely && complete && scheme.verify.is_none_or(|f| f(&secrets, &observations));
    GenericRun { secrets, observations, accept, transcript }
}

/// One honest execution.
pub fn run_generic_honest<R: RngCore>(scheme: &GenericScheme, setup: &PvSetup, rng: &mut R) -> Result<GenericRun> {
    scheme.validate()?;
    let secrets = scheme.draw_secrets(rng);
    let bits = honest_quantum(scheme, &secrets, rng)?;
    let (arrivals, flags, transcript) = replay_timing(setup, None, &vec![true; scheme.n_steps()])?;
    Ok(assemble_run(scheme, secrets, bits, arrivals, flags, transcript))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn honest_runs_accept() {
        let setup = PvSetup::line_default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for scheme in [GenericScheme::bb84_recast(), GenericScheme::interleaved_toy()] {
            for _ in 0..200 {
                let run = run_generic_honest(&scheme, &setup, &mut rng).unwrap();
                assert!(run.accept, "{}", scheme.id);
            }
        }
    }

    #[test]
    fn swap_single_step_exchanges_registers() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut s = Statevector::basis(2, 0b10);
        generic_pv_step(&mut s, &[0], &[1], &[], &swap()).unwrap();
        assert_eq!(measure_out(&mut s, &[0, 1], &mut rng).unwrap(), vec![0, 1]);
    }

    #[test]
    fn honest_timing_matches_schedule() {
        let setup = PvSetup::line_default();
        let (arr, flags, t) = replay_timing(&setup, None, &[true, true]).unwrap();
        assert_eq!(arr[0], [Some(1.5), Some(1.5)]);
        assert_eq!(arr[1], [Some(5.5), Some(5.5)]);
        assert!(flags.iter().all(|f| f[0] && f[1]));
        assert_eq!(t.records.len(), 8);
    }

    #[test]
    fn builtin_ids() {
        assert!(GenericScheme::builtin("toy").is_ok());
        assert_eq!(GenericScheme::builtin("random:3:1:9").unwrap().n_steps(), 3);
        assert!(GenericScheme::builtin("nope").is_err());
    }
}
