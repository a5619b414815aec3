//! Positions, unit-speed travel times, in-time verdicts and the timed
//! message scheduler.

mod engine;
mod geometry;

pub use engine::{
    run_events, DeliveryRecord, Network, Outbox, PartyId, Payload, Simulation, SpacetimeEvent, Transcript,
};
pub use geometry::{
    check_adversary_placement, distance, enclosure, in_time, is_enclosed, schedule_challenges, Enclosure,
    Position, TimingConfig,
};
