//! Experiment runner behind the `qpv` binary.
//!
//! A run loads a [`Scenario`], executes one [`Experiment`] with per-trial
//! seeded streams and returns [`ResultRow`]s. Rows may carry an embedded
//! check; a failed check makes the run exit with status 1.

pub mod experiments;
pub mod report;
pub mod scenario;

use std::fmt::Display;
use std::time::Instant;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

pub use experiments::run_rows;
pub use report::{emit_report, round_sig, write_report, Format};
pub use scenario::Scenario;

/// Build version, `<crate version>+<git describe>` when built from a checkout.
pub const VERSION: &str = env!("QPV_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid {field}: {reason}")]
    Config { field: String, reason: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] qpv_core::Error),
}

impl CliError {
    pub fn config(field: &str, reason: impl Display) -> Self {
        CliError::Config { field: field.to_string(), reason: reason.to_string() }
    }

    /// 2 for anything the user can fix in the invocation or scenario, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use qpv_core::Error as E;
        match self {
            CliError::Config { .. } | CliError::Io { .. } => 2,
            CliError::Core(
                E::Config { .. }
                | E::EntanglementForbidden { .. }
                | E::NotEnclosed
                | E::TooClose { .. }
                | E::Degenerate(_)
                | E::Schedule(_),
            ) => 2,
            CliError::Core(_) => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    PvHonest,
    PvAttack,
    PvSequential,
    PvDdim,
    Inqc,
    InqcNparty,
    GenericAttack,
    CitAudit,
    Auth,
    Domination,
    Keyex,
}

impl Experiment {
    pub fn id(self) -> &'static str {
        match self {
            Experiment::PvHonest => "pv-honest",
            Experiment::PvAttack => "pv-attack",
            Experiment::PvSequential => "pv-sequential",
            Experiment::PvDdim => "pv-ddim",
            Experiment::Inqc => "inqc",
            Experiment::InqcNparty => "inqc-nparty",
            Experiment::GenericAttack => "generic-attack",
            Experiment::CitAudit => "cit-audit",
            Experiment::Auth => "auth",
            Experiment::Domination => "domination",
            Experiment::Keyex => "keyex",
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        <Experiment as ValueEnum>::from_str(s, false).map_err(|_| CliError::config("experiment", format!("unknown experiment id `{s}`")))
    }
}

/// One line of a report.
///
/// `frequency = successes / trials` always holds. Rows reporting a scalar
/// that is not a frequency (a p-value, a fidelity) put it in `value` and
/// keep the underlying sample size in `successes`/`trials`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub metric: String,
    /// Compact JSON of the parameters that produced the row.
    pub params: String,
    pub successes: u64,
    pub trials: u64,
    pub frequency: f64,
    pub stderr: f64,
    pub value: Option<f64>,
    /// What the row is compared against, when anything.
    pub reference: Option<f64>,
    /// Outcome of the embedded assertion, when the row has one.
    pub check: Option<bool>,
    pub seed: u64,
    pub version: String,
    /// Seconds for the whole experiment; only with `--timing`, so default
    /// reports stay byte-identical across runs.
    pub wall_time_s: Option<f64>,
}

impl ResultRow {
    pub fn failed(&self) -> bool {
        self.check == Some(false)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub experiment: Experiment,
    /// Overrides the scenario's trial count.
    pub trials: Option<u64>,
    pub seed: u64,
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn trials(&self) -> u64 {
        self.trials.unwrap_or(self.scenario.trials)
    }
}

/// Runs the experiment and returns its rows with provenance filled in.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, CliError> {
    if cfg.trials() == 0 {
        return Err(CliError::config("trials", "must be at least 1"));
    }
    cfg.scenario.validate()?;
    let start = Instant::now();
    let mut rows = run_rows(cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    for r in &mut rows {
        r.seed = cfg.seed;
        r.version = VERSION.to_string();
        r.wall_time_s = cfg.timing.then_some(elapsed);
    }
    Ok(rows)
}

/// 1 if any embedded check failed, else 0.
pub fn exit_status(rows: &[ResultRow]) -> i32 {
    i32::from(rows.iter().any(ResultRow::failed))
}
