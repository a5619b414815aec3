use rand::Rng;
use serde::Serialize;

use super::split::SplitStrategy;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::protocols::{Agent, Ctx, Layout, Msg, Roles, Strategy, Tag};
use crate::qsim::{breidbart_rotation, BasisString, Gate, RegisterHandle, RegisterStore, Statevector};
use crate::spacetime::{PartyId, Position};
use crate::teleport::{bell_measure, pauli_effect_on_bb84, Outcomes, Pauli, PauliKey};

#[derive(Clone, Debug, Serialize)]
pub enum AttackKind {
    /// Measure at once in the intermediate basis and broadcast.
    Breidbart,
    /// Measure at once in a uniformly guessed basis and broadcast.
    RandomBasis,
    /// Hold the qubit until the basis is relayed, then measure.
    StoreAndWait,
    /// Ship the qubit to the far adversary, who measures with the basis.
    Forward,
    /// Teleport the qubit through a pre-shared pair and fix up classically.
    TeleportPreShared { forced_key: Option<Pauli> },
    /// Split the qubit into two registers and measure each side with the
    /// basis it learns.
    Split(SplitStrategy),
}

/// A coalition with one member next to each verifier.
#[derive(Clone, Debug, Serialize)]
pub struct AttackStrategy {
    pub id: String,
    pub kind: AttackKind,
    pub positions: Vec<Position<f64>>,
    pub epr_budget: usize,
}

impl AttackStrategy {
    pub fn new(id: &str, kind: AttackKind, positions: Vec<Position<f64>>) -> Self {
        let epr_budget = usize::from(matches!(kind, AttackKind::TeleportPreShared { .. }));
        Self { id: id.to_string(), kind, positions, epr_budget }
    }

    /// Same coalition at different positions.
    pub fn at(mut self, positions: Vec<Position<f64>>) -> Self {
        self.positions = positions;
        self
    }

    /// Overrides the declared entanglement budget.
    pub fn with_budget(mut self, pairs: usize) -> Self {
        self.epr_budget = pairs;
        self
    }

    fn needs_two_verifiers(&self, roles: &Roles) -> Result<()> {
        if roles.verifiers.len() != 2 || self.positions.len() != 2 {
            return Err(Error::config("attack", format!("{} needs two verifiers and two adversaries", self.id)));
        }
        Ok(())
    }
}

pub fn attack_breidbart(layout: &Layout) -> AttackStrategy {
    AttackStrategy::new("breidbart", AttackKind::Breidbart, layout.midpoints())
}

pub fn attack_random_basis(layout: &Layout) -> AttackStrategy {
    AttackStrategy::new("random-basis", AttackKind::RandomBasis, layout.midpoints())
}

pub fn attack_store_and_wait(layout: &Layout) -> AttackStrategy {
    AttackStrategy::new("store-and-wait", AttackKind::StoreAndWait, layout.midpoints())
}

pub fn attack_forward(layout: &Layout) -> AttackStrategy {
    AttackStrategy::new("forward", AttackKind::Forward, layout.midpoints())
}

pub fn attack_teleport_pre_shared(layout: &Layout) -> AttackStrategy {
    AttackStrategy::new("teleport", AttackKind::TeleportPreShared { forced_key: None }, layout.midpoints())
}

pub fn attack_split(layout: &Layout, split: SplitStrategy) -> AttackStrategy {
    AttackStrategy::new("split", AttackKind::Split(split), layout.midpoints())
}

/// Looks up an attack by its id.
pub fn attack_by_id(id: &str, layout: &Layout) -> Result<AttackStrategy> {
    Ok(match id {
        "breidbart" => attack_breidbart(layout),
        "random-basis" => attack_random_basis(layout),
        "store-and-wait" => attack_store_and_wait(layout),
        "forward" => attack_forward(layout),
        "teleport" => attack_teleport_pre_shared(layout),
        other => return Err(Error::config("attack", format!("unknown attack {other}"))),
    })
}

impl Strategy for AttackStrategy {
    fn id(&self) -> &str {
        &self.id
    }

    fn epr_pairs(&self) -> usize {
        self.epr_budget
    }

    fn positions(&self) -> &[Position<f64>] {
        &self.positions
    }

    fn interceptor(&self, v: usize) -> usize {
        v.min(self.positions.len() - 1)
    }

    fn spawn(&self, store: &mut RegisterStore<f64>, roles: &Roles) -> Result<Vec<Box<dyn Agent>>> {
        let n = self.positions.len();
        let idle = |k: usize| -> Vec<Box<dyn Agent>> { (0..k).map(|_| Box::new(Idle) as Box<dyn Agent>).collect() };
        let mut agents: Vec<Box<dyn Agent>> = Vec::with_capacity(n);
        match &self.kind {
            AttackKind::Breidbart => {
                agents.push(Box::new(Measurer { rotation: Some(breidbart_rotation()) }));
                agents.extend(idle(n - 1));
            }
            AttackKind::RandomBasis => {
                agents.push(Box::new(Measurer { rotation: None }));
                agents.extend(idle(n - 1));
            }
            AttackKind::StoreAndWait => {
                self.needs_two_verifiers(roles)?;
                agents.push(Box::new(Holder { qubit: None, theta: None }));
                agents.push(Box::new(Relay { to: roles.provers[0] }));
            }
            AttackKind::Forward => {
                self.needs_two_verifiers(roles)?;
                agents.push(Box::new(Shipper { to: roles.provers[1] }));
                agents.push(Box::new(Holder { qubit: None, theta: None }));
            }
            AttackKind::TeleportPreShared { forced_key } => {
                self.needs_two_verifiers(roles)?;
                if self.epr_budget == 0 {
                    return Err(Error::config("attack", "teleport attack needs a pre-shared pair"));
                }
                let (a, b) = store.alloc_epr();
                let outcomes = match forced_key {
                    Some(k) => Outcomes::script([PauliKey::new(vec![*k])]),
                    None => Outcomes::Sample,
                };
                agents.push(Box::new(TeleSender { half: Some(a), key: None, partner: None, outcomes }));
                agents.push(Box::new(TeleReceiver { half: Some(b), mine: None, key: None }));
            }
            AttackKind::Split(split) => {
                self.needs_two_verifiers(roles)?;
                agents.push(Box::new(SplitFront { split: split.clone(), reg: None, theta: None }));
                agents.push(Box::new(SplitBack { split: split.clone(), reg: None, theta: None }));
            }
        }
        Ok(agents)
    }
}

fn member(ctx: &Ctx<'_>) -> usize {
    ctx.out.me() - ctx.roles.provers[0]
}

struct Idle;

impl Agent for Idle {
    fn on_message(&mut self, _: PartyId, _: Msg, _: &mut Ctx<'_>) -> Result<()> {
        Ok(())
    }
}

struct Measurer {
    rotation: Option<Matrix<f64>>,
}

impl Agent for Measurer {
    fn on_message(&mut self, _: PartyId, msg: Msg, ctx: &mut Ctx<'_>) -> Result<()> {
        if let Msg::Qubit(h) = msg {
            let x = match &self.rotation {
                Some(r) => ctx.store.measure_rotated(h, r, &mut *ctx.rng)?[0],
                None => {
                    let guess = ctx.rng.random_range(0..2u8);
                    ctx.store.measure(h, &BasisString::uniform(guess, 1), &mut *ctx.rng)?[0]
                }
            };
            ctx.broadcast(Tag::Bit(x));
        }
        Ok(())
    }
}

/// Waits for both the qubit and the basis, then answers everyone.
struct Holder {
    qubit: Option<RegisterHandle>,
    theta: Option<u8>,
}

impl Agent for Holder {
    fn on_message(&mut self, _: PartyId, msg: Msg, ctx: &mut Ctx<'_>) -> Result<()> {
        match msg {
            Msg::Qubit(h) => self.qubit = Some(h),
            Msg::Basis(b) => self.theta = Some(b),
            Msg::Classical(v) if !v.is_empty() => self.theta = Some(v[0]),
            _ => {}
        }
        if let (Some(theta), true) = (self.theta, self.qubit.is_some()) {
            let h = self.qubit.take().expect("checked");
            let x = ctx.store.measure(h, &BasisString::uniform(theta, 1), &mut *ctx.rng)?[0];
            ctx.broadcast(Tag::Bit(x));
        }
        Ok(())
    }
}

struct Relay {
    to: PartyId,
}

impl Agent for Relay {
    fn on_message(&mut self, _: PartyId, msg: Msg, ctx: &mut Ctx<'_>) -> Result<()> {
        if let Msg::Basis(b) = msg {
            ctx.out.send(self.to, Msg::Classical(vec![b]));
        }
        Ok(())
    }
}

struct Shipper {
    to: PartyId,
}

impl Agent for Shipper {
    fn on_message(&mut self, _: PartyId, msg: Msg, ctx: &mut Ctx<'_>) -> Result<()> {
        if let Msg::Qubit(h) = msg {
            ctx.out.send(self.to, Msg::Qubit(h));
        }
        Ok(())
    }
}

struct TeleSender {
    half: Option<RegisterHandle>,
    key: Option<Pauli>,
    partner: Option<(u8, u8)>,
    outcomes: Outcomes,
}

impl TeleSender {
    fn try_reply(&mut self, ctx: &mut Ctx<'_>) {
        if let (Some(k), Some((x2, theta))) = (self.key, self.partner) {
            let me = member(ctx);
            ctx.out.send(ctx.roles.verifiers[me], Msg::Reply(Tag::Bit(pauli_effect_on_bb84(k, theta, x2))));
        }
    }
}

impl Agent for TeleSender {
    fn on_message(&mut self, _: PartyId, msg: Msg, ctx: &mut Ctx<'_>) -> Result<()> {
        match msg {
            Msg::Qubit(h) => {
                let half = self.half.take().ok_or_else(|| Error::Internal("pair already used".into()))?;
                let key = bell_measure(ctx.store, h, half, &mut self.outcomes, &mut *ctx.rng)?;
                let k = key.paulis()[0];
                self.key = Some(k);
                ctx.out.send(ctx.roles.provers[1], Msg::Classical(vec![k.symbol()]));
            }
            Msg::Classical(v) if v.len() == 2 => self.partner = Some((v[0], v[1])),
            _ => return Ok(()),
        }
        self.try_reply(ctx);
        Ok(())
    }
}

struct TeleReceiver {
    half: Option<RegisterHandle>,
    mine: Option<(u8, u8)>,
    key: Option<Pauli>,
}

impl Agent for TeleReceiver {
    fn on_message(&mut self, _: PartyId, msg: Msg, ctx: &mut Ctx<'_>) -> Result<()> {
        match msg {
            Msg::Basis(theta) => {
                let half = self.half.take().ok_or_else(|| Error::Internal("pair already used".into()))?;
                let x2 = ctx.store.measure(half, &BasisString::uniform(theta, 1), &mut *ctx.rng)?[0];
                self.mine = Some((x2, theta));
                ctx.out.send(ctx.roles.provers[0], Msg::Classical(vec![x2, theta]));
            }
            Msg::Classical(v) if v.len() == 1 => self.key = Some(Pauli::from_symbol(v[0])?),
            _ => return Ok(()),
        }
        if let (Some(k), Some((x2, theta))) = (self.key, self.mine) {
            let me = member(ctx);
            ctx.out.send(ctx.roles.verifiers[me], Msg::Reply(Tag::Bit(pauli_effect_on_bb84(k, theta, x2))));
        }
        Ok(())
    }
}

/// Measures a held register with the side's basis-dependent unitary and
/// answers the nearby verifier with the first qubit's outcome.
fn split_answer(
    split: &SplitStrategy,
    side: usize,
    reg: RegisterHandle,
    theta: u8,
    ctx: &mut Ctx<'_>,
) -> Result<()> {
    ctx.store.apply_joint(&[&reg], split.measurement(side, theta))?;
    let bits = ctx.store.measure(reg, &BasisString::uniform(0, split.width(side)), &mut *ctx.rng)?;
    let me = member(ctx);
    ctx.out.send(ctx.roles.verifiers[me], Msg::Reply(Tag::Bit(bits[0])));
    Ok(())
}

struct SplitFront {
    split: SplitStrategy,
    reg: Option<RegisterHandle>,
    theta: Option<u8>,
}

impl Agent for SplitFront {
    fn on_message(&mut self, _: PartyId, msg: Msg, ctx: &mut Ctx<'_>) -> Result<()> {
        match msg {
            Msg::Qubit(h) => {
                let anc = self.split.width(0) + self.split.width(1) - 1;
                let h = if anc > 0 {
                    let a = ctx.store.alloc(&Statevector::zero(anc));
                    ctx.store.join(h, a)?
                } else {
                    h
                };
                ctx.store.apply_joint(&[&h], self.split.isometry())?;
                let (e0, e1) = ctx.store.split(h, self.split.width(0))?;
                ctx.out.send(ctx.roles.provers[1], Msg::Qubit(e1));
                self.reg = Some(e0);
            }
            Msg::Classical(v) if v.len() == 1 => self.theta = Some(v[0]),
            _ => return Ok(()),
        }
        if let (Some(theta), true) = (self.theta, self.reg.is_some()) {
            let reg = self.reg.take().expect("checked");
            split_answer(&self.split, 0, reg, theta, ctx)?;
        }
        Ok(())
    }
}

struct SplitBack {
    split: SplitStrategy,
    reg: Option<RegisterHandle>,
    theta: Option<u8>,
}

impl Agent for SplitBack {
    fn on_message(&mut self, _: PartyId, msg: Msg, ctx: &mut Ctx<'_>) -> Result<()> {
        match msg {
            Msg::Qubit(h) => self.reg = Some(h),
            Msg::Basis(b) => {
                self.theta = Some(b);
                ctx.out.send(ctx.roles.provers[0], Msg::Classical(vec![b]));
            }
            _ => return Ok(()),
        }
        if let (Some(theta), true) = (self.theta, self.reg.is_some()) {
            let reg = self.reg.take().expect("checked");
            split_answer(&self.split, 1, reg, theta, ctx)?;
        }
        Ok(())
    }
}

/// Exact success probability of the Breidbart measurement, by enumerating
/// basis, bit and outcome.
pub fn breidbart_exact_success() -> f64 {
    let r = breidbart_rotation::<f64>();
    let mut total = 0.0;
    for theta in 0..2u8 {
        for x in 0..2u8 {
            let s = Statevector::bb84(theta, x).apply_gate(&Gate::Unitary(r.clone()), &[0]).expect("1 qubit");
            total += 0.25 * s.amplitudes()[x as usize].norm_sqr();
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn breidbart_closed_form() {
        let want = (std::f64::consts::FRAC_PI_8).cos().powi(2);
        assert!((breidbart_exact_success() - want).abs() < 1e-12);
    }

    #[test]
    fn teleport_declares_one_pair() {
        let l = Layout::line();
        assert_eq!(attack_teleport_pre_shared(&l).epr_budget, 1);
        assert_eq!(attack_breidbart(&l).epr_budget, 0);
        assert!(attack_by_id("nope", &l).is_err());
    }
}
