//! Attacks on the position-verification protocols.
//!
//! [`strategy`] holds the concrete coalitions for the single-qubit round,
//! [`split`] the general entanglement-free split attack and
//! [`generic_attack`] the universal attack built on instantaneous nonlocal
//! computation.

pub mod generic_attack;
pub mod split;
pub mod strategy;

pub use generic_attack::{
    chi_square_homogeneity, generic_attack_run, predicted_success, random_line_coalition, run_generic_inqc_attack,
    AttackRun, AttackStep, ChiSquareReport, GenericAttackReport,
};
pub use split::SplitStrategy;
pub use strategy::{
    attack_breidbart, attack_by_id, attack_forward, attack_random_basis, attack_split, attack_store_and_wait,
    attack_teleport_pre_shared, breidbart_exact_success, AttackKind, AttackStrategy,
};
