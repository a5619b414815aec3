//! Deterministic discrete-event scheduler for timed messages.
//!
//! Messages travel at unit speed, so a message emitted at `t` from `a`
//! arrives at `b` at `t + d(a, b)`. Deliveries are processed in order of
//! `(arrival time, receiver id, sequence number)`. A handler reacts to each
//! delivery through an [`Outbox`] bound to the receiving party; it can only
//! emit from its own position and never into the past.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::Serialize;

use super::geometry::{distance, Position};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type PartyId = usize;

/// Human-readable one-line description of a payload for transcripts.
pub trait Payload {
    fn summary(&self) -> String;
}

impl Payload for String {
    fn summary(&self) -> String {
        self.clone()
    }
}

impl Payload for &'static str {
    fn summary(&self) -> String {
        (*self).to_string()
    }
}

impl Payload for Vec<u8> {
    fn summary(&self) -> String {
        self.iter().map(|b| char::from(b'0' + b)).collect()
    }
}

/// A message in flight or delivered.
#[derive(Debug)]
pub struct SpacetimeEvent<T: Scalar, P> {
    pub seq: u64,
    pub sender: PartyId,
    pub receiver: PartyId,
    pub payload: P,
    pub emit_time: T,
    pub arrival_time: T,
}

/// Transcript line for one delivery.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct DeliveryRecord<T: Scalar> {
    pub seq: u64,
    pub sender: PartyId,
    pub receiver: PartyId,
    pub emit_time: T,
    pub arrival_time: T,
    pub payload: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct Transcript<T: Scalar> {
    pub records: Vec<DeliveryRecord<T>>,
}

impl<T: Scalar> Transcript<T> {
    /// One JSON object per delivery, newline separated.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    /// Every delivery arrives exactly one travel time after emission, and the
    /// transcript is globally time ordered.
    pub fn check_causality(&self, network: &Network<T>) -> Result<()> {
        let mut last = T::neg_infinity();
        for r in &self.records {
            let d = distance(network.position(r.sender)?, network.position(r.receiver)?)?;
            let gap = r.arrival_time - r.emit_time - d;
            if gap.abs() > T::lit(1e-12) * (T::one() + r.arrival_time.abs()) {
                return Err(Error::Causality {
                    emit: r.emit_time.to_f64_lossy(),
                    now: r.arrival_time.to_f64_lossy(),
                });
            }
            if r.arrival_time < last {
                return Err(Error::Internal("transcript not time ordered".into()));
            }
            last = r.arrival_time;
        }
        Ok(())
    }
}

/// Fixed party positions; party ids index into this list.
#[derive(Clone, Debug)]
pub struct Network<T: Scalar> {
    positions: Vec<Position<T>>,
}

impl<T: Scalar> Network<T> {
    pub fn new(positions: Vec<Position<T>>) -> Result<Self> {
        if let Some(first) = positions.first() {
            if let Some(bad) = positions.iter().find(|p| p.dim() != first.dim()) {
                return Err(Error::DimensionMismatch { expected: first.dim(), got: bad.dim() });
            }
        }
        Ok(Self { positions })
    }

    pub fn position(&self, id: PartyId) -> Result<&Position<T>> {
        self.positions
            .get(id)
            .ok_or_else(|| Error::Domain(format!("unknown party {id}")))
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn travel_time(&self, a: PartyId, b: PartyId) -> Result<T> {
        distance(self.position(a)?, self.position(b)?)
    }
}

/// Emissions requested by one handler invocation.
pub struct Outbox<T: Scalar, P> {
    me: PartyId,
    now: T,
    emitted: Vec<(PartyId, P, T)>,
}

impl<T: Scalar, P> Outbox<T, P> {
    pub fn me(&self) -> PartyId {
        self.me
    }

    pub fn now(&self) -> T {
        self.now
    }

    /// Sends immediately.
    pub fn send(&mut self, to: PartyId, payload: P) {
        let now = self.now;
        self.emitted.push((to, payload, now));
    }

    /// Sends at a later local time; emitting before `now` is rejected when
    /// the handler returns.
    pub fn send_at(&mut self, to: PartyId, payload: P, t: T) {
        self.emitted.push((to, payload, t));
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Key<T: Scalar> {
    arrival: T,
    receiver: PartyId,
    seq: u64,
}

impl<T: Scalar> Eq for Key<T> {}

impl<T: Scalar> Ord for Key<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed so BinaryHeap pops the earliest delivery.
        other
            .arrival
            .partial_cmp(&self.arrival)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.receiver.cmp(&self.receiver))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl<T: Scalar> PartialOrd for Key<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub struct Simulation<T: Scalar, P> {
    network: Network<T>,
    queue: BinaryHeap<Key<T>>,
    pending: HashMap<u64, SpacetimeEvent<T, P>>,
    next_seq: u64,
    now: T,
    transcript: Transcript<T>,
}

impl<T: Scalar, P: Payload> Simulation<T, P> {
    pub fn new(network: Network<T>) -> Self {
        Self {
            network,
            queue: BinaryHeap::new(),
            pending: HashMap::new(),
            next_seq: 0,
            now: T::neg_infinity(),
            transcript: Transcript::default(),
        }
    }

    pub fn network(&self) -> &Network<T> {
        &self.network
    }

    /// Schedules an initial emission.
    pub fn send(&mut self, sender: PartyId, receiver: PartyId, payload: P, emit_time: T) -> Result<()> {
        if !emit_time.is_finite() {
            return Err(Error::Domain("emission time must be finite".into()));
        }
        if emit_time < self.now {
            return Err(Error::Causality { emit: emit_time.to_f64_lossy(), now: self.now.to_f64_lossy() });
        }
        let arrival_time = emit_time + self.network.travel_time(sender, receiver)?;
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Key { arrival: arrival_time, receiver, seq });
        self.pending
            .insert(seq, SpacetimeEvent { seq, sender, receiver, payload, emit_time, arrival_time });
        Ok(())
    }

    /// Delivers messages until the queue drains.
    pub fn run<H>(&mut self, mut handler: H) -> Result<()>
    where
        H: FnMut(SpacetimeEvent<T, P>, &mut Outbox<T, P>) -> Result<()>,
    {
        while let Some(key) = self.queue.pop() {
            let ev = self
                .pending
                .remove(&key.seq)
                .ok_or_else(|| Error::Internal("queued event missing".into()))?;
            self.now = ev.arrival_time;
            self.transcript.records.push(DeliveryRecord {
                seq: ev.seq,
                sender: ev.sender,
                receiver: ev.receiver,
                emit_time: ev.emit_time,
                arrival_time: ev.arrival_time,
                payload: ev.payload.summary(),
            });
            let mut outbox = Outbox { me: ev.receiver, now: ev.arrival_time, emitted: Vec::new() };
            handler(ev, &mut outbox)?;
            for (to, payload, t) in outbox.emitted {
                if t < outbox.now {
                    return Err(Error::Causality { emit: t.to_f64_lossy(), now: outbox.now.to_f64_lossy() });
                }
                self.send(outbox.me, to, payload, t)?;
            }
        }
        Ok(())
    }

    pub fn transcript(&self) -> &Transcript<T> {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript<T> {
        self.transcript
    }
}

/// One-shot driver: schedules `events` as `(sender, receiver, payload,
/// emit_time)` and runs `handler` to completion.
pub fn run_events<T, P, H>(network: Network<T>, events: Vec<(PartyId, PartyId, P, T)>, handler: H) -> Result<Transcript<T>>
where
    T: Scalar,
    P: Payload,
    H: FnMut(SpacetimeEvent<T, P>, &mut Outbox<T, P>) -> Result<()>,
{
    let mut sim = Simulation::new(network);
    for (s, r, p, t) in events {
        sim.send(s, r, p, t)?;
    }
    sim.run(handler)?;
    Ok(sim.into_transcript())
}
