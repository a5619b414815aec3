//! Verifier and prover state machines for position verification.

mod generic;
mod message;
mod pv;

pub use generic::{
    generic_pv_step, run_generic_honest, GenericRun, GenericScheme, GenericStep, ReplyKind, StepObservation,
    StepSecrets, VerifyFn,
};
pub(crate) use generic::{assemble_run, measure_out, reply_bits, replay_timing};
pub use message::{Agent, Ctx, Msg, Roles, SecurityModel, Strategy, Tag};
pub use pv::{
    honest_deadline, pv_bb84_purified_round, pv_bb84_round, pv_ddim_round, pv_sequential, run_pv_round, Layout,
    ProtocolVerdict, Prover, PvSetup, RoundOptions, SequentialVerdict, VerifierRecord,
};
