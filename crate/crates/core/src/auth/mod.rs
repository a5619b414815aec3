//! Position-based authentication and key exchange.
//!
//! [`wauth`] authenticates one bit with a position-verification round;
//! [`scheme`] lifts it to messages through a dominating code and a
//! sliding-window count of erasures. The adversary interleaves the
//! prover's and the verifiers' executions; [`embedding`] records such an
//! interleaving and [`domination`] decides when a code resists all of
//! them.

pub mod code;
pub mod domination;
pub mod embedding;
pub mod keyex;
pub mod scheme;
pub mod wauth;

pub use code::{BalancedRepetitionCode, Codeword};
pub use domination::{
    all_embeddings, code_is_dominating, dominates, dominates_brute_force, dominates_search, pair_satisfies,
    CodeDominationReport, DominationVerdict, EXHAUSTIVE_CAP,
};
pub use embedding::{
    condition_a_count, condition_b_count, condition_b_interval, desync_schedule, honest_schedule, is_embedding,
    random_schedule, schedule_embeddings, validate_schedule, Action, Embedding, PAD,
};
pub use keyex::{key_exchange, key_hex, KeyExchangeConfig, KeyExchangeRun, KeyExchangeTranscript, Tamper};
pub use scheme::{
    auth_run, auth_run_codewords, completeness_bound, first_window_violation, n_bot, AuthBackend, AuthOutcome,
    AuthRun, CompiledAuth,
};
pub use wauth::{
    default_impersonation_success, wauth_accepts, wauth_probabilities, wauth_round, wauth_substitution_bound,
    AuthParams, WauthAdversary, WauthRole, WauthRound,
};
