use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::qsim::{RegisterHandle, RegisterStore};
use crate::spacetime::{Outbox, PartyId, Payload, Position};

/// An authentication tag or position-verification reply. `Bot` is the
/// erasure symbol and is never confused with a bit value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tag {
    Bit(u8),
    Bot,
}

impl Tag {
    /// Wire encoding: 0, 1, or 2 for the erasure.
    pub fn wire(self) -> u8 {
        match self {
            Tag::Bit(b) => b,
            Tag::Bot => 2,
        }
    }

    pub fn from_wire(v: u8) -> Option<Self> {
        match v {
            0 | 1 => Some(Tag::Bit(v)),
            2 => Some(Tag::Bot),
            _ => None,
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Bit(b) => write!(f, "{b}"),
            Tag::Bot => f.write_str("⊥"),
        }
    }
}

/// Payload carried by the event engine. Quantum payloads are handles, so a
/// register in flight exists exactly once.
#[derive(Debug)]
pub enum Msg {
    Qubit(RegisterHandle),
    /// A basis bit or one share of it.
    Basis(u8),
    Reply(Tag),
    /// Coalition-internal classical data.
    Classical(Vec<u8>),
}

impl Payload for Msg {
    fn summary(&self) -> String {
        match self {
            Msg::Qubit(h) => format!("qubit#{}", h.id()),
            Msg::Basis(b) => format!("basis={b}"),
            Msg::Reply(t) => format!("reply={t}"),
            Msg::Classical(v) => format!("classical={}", v.summary()),
        }
    }
}

/// Party ids of one run: verifiers first, then prover-side parties.
#[derive(Clone, Debug)]
pub struct Roles {
    pub verifiers: Vec<PartyId>,
    pub provers: Vec<PartyId>,
}

/// What a prover-side party may touch while handling one delivery.
pub struct Ctx<'a> {
    pub store: &'a mut RegisterStore<f64>,
    pub rng: &'a mut dyn RngCore,
    pub out: &'a mut Outbox<f64, Msg>,
    pub roles: &'a Roles,
}

impl Ctx<'_> {
    /// Sends the same reply to every verifier.
    pub fn broadcast(&mut self, tag: Tag) {
        for &v in &self.roles.verifiers {
            self.out.send(v, Msg::Reply(tag));
        }
    }
}

/// Reaction rule of a prover-side party.
pub trait Agent {
    fn on_message(&mut self, from: PartyId, msg: Msg, ctx: &mut Ctx<'_>) -> Result<()>;
}

/// Adversary model gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecurityModel {
    /// No pre-shared entanglement at the start of a round.
    NoPe,
    Unrestricted,
}

/// Description of a coalition of dishonest provers for one round.
pub trait Strategy: Sync {
    fn id(&self) -> &str;
    /// EPR pairs shared before the round starts.
    fn epr_pairs(&self) -> usize;
    fn positions(&self) -> &[Position<f64>];
    /// Coalition member that intercepts the challenge of verifier `v`.
    fn interceptor(&self, v: usize) -> usize;
    /// Creates the members' reaction rules; may allocate pre-shared state.
    fn spawn(&self, store: &mut RegisterStore<f64>, roles: &Roles) -> Result<Vec<Box<dyn Agent>>>;
}
