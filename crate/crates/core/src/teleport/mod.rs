//! Teleportation, Pauli bookkeeping and instantaneous nonlocal quantum
//! computation for two and for `N` parties.

mod channel;
mod inqc;
mod pauli;

pub use channel::{
    apply_correction, bell_measure, correct_register, teleport_in_place, ChannelLabel, Outcomes, TeleportChannel,
};
pub use inqc::{
    nonlocal_apply, reconcile_corrections, run_inqc_2party, run_inqc_2party_with, run_inqc_nparty,
    run_inqc_nparty_with, Correction, InqcRound, InqcRun, InqcTranscript, Label, NPartyFamily, UnitaryFamily,
};
pub use pauli::{pauli_effect_on_bb84, Pauli, PauliKey};
