//! One-round position verification with a BB84 challenge, in its prepared
//! and purified forms, sequential repetition, and the `d`-dimensional
//! variant where the basis is sum-shared among `d` verifiers.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::message::{Agent, Ctx, Msg, Roles, SecurityModel, Strategy, Tag};
use crate::error::{Error, Result};
use crate::qsim::{BasisString, RegisterHandle, RegisterStore, Statevector};
use crate::spacetime::{
    check_adversary_placement, distance, in_time, schedule_challenges, Network, Outbox, PartyId, Position,
    Simulation, TimingConfig, Transcript,
};

/// Verifier positions and the claimed prover position.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Layout {
    pub verifiers: Vec<Position<f64>>,
    pub prover: Position<f64>,
}

impl Layout {
    /// `V0 = 0`, `V1 = 1`, prover at `0.5`.
    pub fn line() -> Self {
        Self::simplex(1)
    }

    /// Verifiers at the origin and the unit vectors of `R^d`, prover at
    /// the centroid.
    pub fn simplex(d: usize) -> Self {
        let mut verifiers = vec![Position::new(vec![0.0; d]).expect("finite")];
        for i in 0..d {
            let mut c = vec![0.0; d];
            c[i] = 1.0;
            verifiers.push(Position::new(c).expect("finite"));
        }
        let centroid = vec![1.0 / (d as f64 + 1.0); d];
        Self { verifiers, prover: Position::new(centroid).expect("finite") }
    }

    pub fn dim(&self) -> usize {
        self.prover.dim()
    }

    /// Midpoints between each verifier and the prover.
    pub fn midpoints(&self) -> Vec<Position<f64>> {
        self.verifiers
            .iter()
            .map(|v| {
                let c = v.coords().iter().zip(self.prover.coords()).map(|(a, b)| 0.5 * (a + b)).collect();
                Position::new(c).expect("finite")
            })
            .collect()
    }
}

/// Everything a round needs besides the prover.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PvSetup {
    pub layout: Layout,
    pub timing: TimingConfig<f64>,
    pub model: SecurityModel,
}

impl PvSetup {
    pub fn new(layout: Layout, timing: TimingConfig<f64>, model: SecurityModel) -> Self {
        Self { layout, timing, model }
    }

    /// Unit line, `T = 1`, `Δ = 0.1`, no slack, No-PE model.
    pub fn line_default() -> Self {
        Self::new(Layout::line(), TimingConfig { t: 1.0, delta: 0.1, slack: 0.0 }, SecurityModel::NoPe)
    }

    pub fn simplex_default(d: usize) -> Self {
        let mut s = Self::line_default();
        s.layout = Layout::simplex(d);
        s
    }

    pub fn with_model(mut self, model: SecurityModel) -> Self {
        self.model = model;
        self
    }
}

/// Who answers the challenges.
#[derive(Clone, Copy)]
pub enum Prover<'a> {
    Honest,
    /// Honest prover authenticating `bit`: a 0-bit is erased with
    /// probability `q`.
    Authenticating { bit: u8, q: f64 },
    Attack(&'a dyn Strategy),
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RoundOptions {
    pub purified: bool,
    /// Forces `(θ, x)` instead of sampling them.
    pub challenge: Option<(u8, u8)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifierRecord {
    pub reply: Option<Tag>,
    pub arrival: Option<f64>,
    pub in_time: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProtocolVerdict {
    pub records: Vec<VerifierRecord>,
    pub joint_accept: bool,
    /// A malformed or duplicated message reached a verifier.
    pub aborted: bool,
    pub theta: u8,
    pub x: u8,
    pub shares: Vec<u8>,
    /// When `V0` measured its EPR half (purified rounds only).
    pub v0_measure_time: Option<f64>,
    pub transcript: Transcript<f64>,
}

impl ProtocolVerdict {
    pub fn all_in_time(&self) -> bool {
        self.records.iter().all(|r| r.in_time)
    }

    /// The tag every verifier received, if they agree and all received one.
    pub fn common_tag(&self) -> Option<Tag> {
        let first = self.records.first()?.reply?;
        self.records.iter().all(|r| r.reply == Some(first)).then_some(first)
    }

    fn compute_accept(&mut self) {
        self.joint_accept = !self.aborted && self.all_in_time() && self.common_tag() == Some(Tag::Bit(self.x));
    }

    /// Sets verifier `i`'s reply, as a tampering channel would, and
    /// recomputes the verdict.
    pub fn with_reply(mut self, i: usize, tag: Tag) -> Self {
        self.records[i].reply = Some(tag);
        self.compute_accept();
        self
    }
}

struct HonestProver {
    qubit: Option<RegisterHandle>,
    shares: Vec<Option<u8>>,
    erase: Option<f64>,
}

impl Agent for HonestProver {
    fn on_message(&mut self, from: PartyId, msg: Msg, ctx: &mut Ctx<'_>) -> Result<()> {
        match msg {
            Msg::Qubit(h) => self.qubit = Some(h),
            Msg::Basis(b) => {
                let slot = self
                    .shares
                    .get_mut(from.wrapping_sub(1))
                    .ok_or_else(|| Error::Internal(format!("share from party {from}")))?;
                *slot = Some(b);
            }
            _ => return Ok(()),
        }
        if self.qubit.is_none() || self.shares.iter().any(Option::is_none) {
            return Ok(());
        }
        let theta = self.shares.iter().fold(0, |acc, s| acc ^ s.unwrap_or(0));
        let h = self.qubit.take().expect("checked");
        let x = ctx.store.measure(h, &BasisString::uniform(theta, 1), &mut *ctx.rng)?[0];
        let tag = match self.erase {
            Some(q) if ctx.rng.random::<f64>() < q => Tag::Bot,
            _ => Tag::Bit(x),
        };
        ctx.broadcast(tag);
        Ok(())
    }
}

/// Sum sharing of `θ` into `d` bits.
fn share_basis<R: Rng + ?Sized>(theta: u8, d: usize, rng: &mut R) -> Vec<u8> {
    let mut shares: Vec<u8> = (1..d).map(|_| rng.random_range(0..2u8)).collect();
    let acc = shares.iter().fold(theta, |a, s| a ^ s);
    shares.push(acc);
    shares
}

/// Core round on `d + 1` verifiers.
pub fn run_pv_round<R: RngCore>(
    setup: &PvSetup,
    prover: Prover<'_>,
    opts: &RoundOptions,
    rng: &mut R,
) -> Result<ProtocolVerdict> {
    let layout = &setup.layout;
    let nv = layout.verifiers.len();
    if nv < 2 {
        return Err(Error::config("verifiers", "need at least two verifiers"));
    }
    let emit = schedule_challenges(&layout.verifiers, &layout.prover, &setup.timing)?;
    let d = nv - 1;

    let mut positions = layout.verifiers.clone();
    let provers: Vec<Position<f64>> = match prover {
        Prover::Attack(s) => {
            if setup.model == SecurityModel::NoPe && s.epr_pairs() > 0 {
                return Err(Error::EntanglementForbidden { pairs: s.epr_pairs() });
            }
            check_adversary_placement(s.positions(), &layout.prover, setup.timing.delta)?;
            s.positions().to_vec()
        }
        _ => vec![layout.prover.clone()],
    };
    positions.extend(provers.iter().cloned());
    let roles = Roles { verifiers: (0..nv).collect(), provers: (nv..nv + provers.len()).collect() };

    let (theta, x) = match opts.challenge {
        Some((t, v)) if t < 2 && v < 2 => (t, v),
        Some(_) => return Err(Error::Domain("challenge bits must be 0 or 1".into())),
        None => (rng.random_range(0..2u8), rng.random_range(0..2u8)),
    };
    let shares = share_basis(theta, d, rng);

    let mut store = RegisterStore::<f64>::new();
    let mut agents: Vec<Box<dyn Agent>> = match prover {
        Prover::Honest => vec![Box::new(HonestProver { qubit: None, shares: vec![None; d], erase: None })],
        Prover::Authenticating { bit, q } => vec![Box::new(HonestProver {
            qubit: None,
            shares: vec![None; d],
            erase: (bit == 0).then_some(q),
        })],
        Prover::Attack(s) => s.spawn(&mut store, &roles)?,
    };
    let target = |v: usize| match prover {
        Prover::Attack(s) => roles.provers[s.interceptor(v)],
        _ => roles.provers[0],
    };

    let (kept, sent) = if opts.purified {
        let (a, b) = store.alloc_epr();
        (Some(a), b)
    } else {
        (None, store.alloc(&Statevector::bb84(theta, x)))
    };

    let mut sim = Simulation::new(Network::new(positions)?);
    sim.send(0, target(0), Msg::Qubit(sent), emit[0])?;
    for (i, &s) in shares.iter().enumerate() {
        sim.send(i + 1, target(i + 1), Msg::Basis(s), emit[i + 1])?;
    }

    let mut records = vec![VerifierRecord { reply: None, arrival: None, in_time: false }; nv];
    let mut aborted = false;
    let mut kept = kept;
    let mut x_purified: Option<u8> = None;
    let mut v0_measure_time = None;
    {
        let rng: &mut dyn RngCore = rng;
        sim.run(|ev, out: &mut Outbox<f64, Msg>| {
            let me = ev.receiver;
            if me < nv {
                match ev.payload {
                    Msg::Reply(tag) if records[me].reply.is_none() => {
                        let ok = in_time(ev.arrival_time, &layout.verifiers[me], &layout.prover, &setup.timing)?;
                        records[me] = VerifierRecord { reply: Some(tag), arrival: Some(ev.arrival_time), in_time: ok };
                        if me == 0 {
                            if let Some(a) = kept.take() {
                                x_purified = Some(store.measure(a, &BasisString::uniform(theta, 1), &mut *rng)?[0]);
                                v0_measure_time = Some(ev.arrival_time);
                            }
                        }
                    }
                    _ => aborted = true,
                }
                return Ok(());
            }
            let agent = agents
                .get_mut(me - nv)
                .ok_or_else(|| Error::Internal(format!("no agent for party {me}")))?;
            let mut ctx = Ctx { store: &mut store, rng: &mut *rng, out, roles: &roles };
            agent.on_message(ev.sender, ev.payload, &mut ctx)
        })?;
        if let Some(a) = kept.take() {
            x_purified = Some(store.measure(a, &BasisString::uniform(theta, 1), rng)?[0]);
        }
    }

    let mut verdict = ProtocolVerdict {
        records,
        joint_accept: false,
        aborted,
        theta,
        x: x_purified.unwrap_or(x),
        shares,
        v0_measure_time,
        transcript: sim.into_transcript(),
    };
    verdict.compute_accept();
    Ok(verdict)
}

/// Two verifiers on a line, prepared BB84 qubit.
pub fn pv_bb84_round<R: RngCore>(setup: &PvSetup, prover: Prover<'_>, rng: &mut R) -> Result<ProtocolVerdict> {
    if setup.layout.verifiers.len() != 2 {
        return Err(Error::config("verifiers", "the BB84 scheme uses exactly two verifiers"));
    }
    run_pv_round(setup, prover, &RoundOptions::default(), rng)
}

/// `V0` sends half of an EPR pair and measures the other half only once the
/// reply reaches it.
pub fn pv_bb84_purified_round<R: RngCore>(
    setup: &PvSetup,
    prover: Prover<'_>,
    rng: &mut R,
) -> Result<ProtocolVerdict> {
    if setup.layout.verifiers.len() != 2 {
        return Err(Error::config("verifiers", "the BB84 scheme uses exactly two verifiers"));
    }
    run_pv_round(setup, prover, &RoundOptions { purified: true, challenge: None }, rng)
}

/// `d + 1` verifiers in `R^d`; the basis is sum-shared among `V1..Vd`.
pub fn pv_ddim_round<R: RngCore>(
    d: usize,
    setup: &PvSetup,
    prover: Prover<'_>,
    rng: &mut R,
) -> Result<ProtocolVerdict> {
    if d == 0 {
        return Err(Error::config("d", "dimension must be at least 1"));
    }
    if setup.layout.verifiers.len() != d + 1 || setup.layout.dim() != d {
        return Err(Error::config("verifiers", format!("need {} verifiers in dimension {d}", d + 1)));
    }
    run_pv_round(setup, prover, &RoundOptions::default(), rng)
}

#[derive(Clone, Debug, Serialize)]
pub struct SequentialVerdict {
    pub rounds: Vec<ProtocolVerdict>,
    pub joint_accept: bool,
}

/// Runs rounds strictly one after another; each starts from a fresh quantum
/// store, so no entanglement survives between rounds. Stops at the first
/// rejection.
pub fn pv_sequential<R: RngCore>(
    n_rounds: usize,
    setup: &PvSetup,
    prover: Prover<'_>,
    opts: &RoundOptions,
    rng: &mut R,
) -> Result<SequentialVerdict> {
    if n_rounds == 0 {
        return Err(Error::config("rounds", "must be at least 1"));
    }
    let mut rounds = Vec::with_capacity(n_rounds);
    for _ in 0..n_rounds {
        let v = run_pv_round(setup, prover, opts, rng)?;
        let ok = v.joint_accept;
        rounds.push(v);
        if !ok {
            return Ok(SequentialVerdict { rounds, joint_accept: false });
        }
    }
    Ok(SequentialVerdict { rounds, joint_accept: true })
}

/// Latest time any honest reply reaches a verifier.
pub fn honest_deadline(setup: &PvSetup) -> Result<f64> {
    let mut m: f64 = 0.0;
    for v in &setup.layout.verifiers {
        m = m.max(distance(v, &setup.layout.prover)?);
    }
    Ok(setup.timing.t + m)
}
