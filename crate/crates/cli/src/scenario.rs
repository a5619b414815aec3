use std::path::Path;

use qpv_core::auth::{AuthParams, BalancedRepetitionCode, Tamper};
use qpv_core::protocols::{GenericScheme, Layout, PvSetup, SecurityModel};
use qpv_core::spacetime::{check_adversary_placement, is_enclosed, Position, TimingConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Everything an experiment may read. Every field has a default, so `{"schema": 1}`
/// is a valid scenario.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub schema: u32,
    pub name: String,
    /// Explicit verifier and prover coordinates; overrides `simplex_dim`.
    pub layout: Option<LayoutSpec>,
    /// Regular simplex layout in this dimension when `layout` is absent.
    pub simplex_dim: usize,
    pub timing: TimingConfig<f64>,
    pub model: SecurityModel,
    pub trials: u64,
    pub attack: String,
    /// Adversary coordinates; defaults to the verifier-prover midpoints.
    pub adversary_positions: Option<Vec<Vec<f64>>>,
    pub sequential_rounds: usize,
    pub ddim: usize,
    pub inqc: InqcSpec,
    pub generic: GenericSpec,
    pub cit: CitSpec,
    pub auth: AuthSpec,
    pub domination: DominationSpec,
    pub keyex: KeyexSpec,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            schema: SCHEMA_VERSION,
            name: "default".into(),
            layout: None,
            simplex_dim: 1,
            timing: TimingConfig { t: 1.0, delta: 0.1, slack: 0.0 },
            model: SecurityModel::NoPe,
            trials: 1000,
            attack: "breidbart".into(),
            adversary_positions: None,
            sequential_rounds: 10,
            ddim: 3,
            inqc: InqcSpec::default(),
            generic: GenericSpec::default(),
            cit: CitSpec::default(),
            auth: AuthSpec::default(),
            domination: DominationSpec::default(),
            keyex: KeyexSpec::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSpec {
    pub verifiers: Vec<Vec<f64>>,
    pub prover: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InqcSpec {
    pub n_a: usize,
    pub n_b: usize,
    pub parties: usize,
    pub rounds_cap: usize,
}

impl Default for InqcSpec {
    fn default() -> Self {
        Self { n_a: 1, n_b: 0, parties: 3, rounds_cap: 64 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenericSpec {
    /// `bb84`, `toy` or `random:<steps>:<n_r>:<seed>`.
    pub scheme: String,
    pub rounds_cap: usize,
}

impl Default for GenericSpec {
    fn default() -> Self {
        Self { scheme: "bb84".into(), rounds_cap: 64 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CitSpec {
    pub max_width: usize,
    pub hybrid_states: u64,
}

impl Default for CitSpec {
    fn default() -> Self {
        Self { max_width: 2, hybrid_states: 50 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuthSpec {
    pub lambda: usize,
    pub q: f64,
    /// Block half-length; `4λ` when absent.
    pub ell: Option<usize>,
    pub mu: usize,
    /// `sampled` or `replay`.
    pub backend: String,
    /// λ values for the desync soundness trend.
    pub trend_lambdas: Vec<usize>,
    /// Trials per trend point; the run's trial count when absent.
    pub trend_trials: Option<u64>,
}

impl Default for AuthSpec {
    fn default() -> Self {
        Self { lambda: 8, q: 0.01, ell: None, mu: 1, backend: "sampled".into(), trend_lambdas: vec![4, 8, 16], trend_trials: None }
    }
}

impl AuthSpec {
    pub fn params(&self) -> Result<AuthParams, CliError> {
        AuthParams::new(self.q, self.lambda).map_err(|e| CliError::config("auth", e))
    }

    pub fn code(&self) -> Result<BalancedRepetitionCode, CliError> {
        let ell = self.ell.unwrap_or(4 * self.lambda);
        let code = BalancedRepetitionCode::new(ell, self.mu).map_err(|e| CliError::config("auth", e))?;
        // The block code is ⌈ℓ/4⌉-dominating; require that to cover λ.
        if code.guaranteed_lambda() < self.lambda {
            return Err(CliError::Config {
                field: "auth.ell".into(),
                reason: format!("code with ell = {ell} is only {}-dominating, lambda = {}", code.guaranteed_lambda(), self.lambda),
            });
        }
        Ok(code)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DominationSpec {
    /// `(ℓ, μ)` pairs of balanced repetition codes to verify at `⌈ℓ/4⌉`.
    pub codes: Vec<(usize, usize)>,
    pub budget: u64,
    /// Extra explicit instances.
    pub pairs: Vec<PairSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub c: String,
    pub c_prime: String,
    pub lambda: usize,
    /// Whether domination is expected; omitted means report only.
    pub expect_dominates: Option<bool>,
}

impl Default for DominationSpec {
    fn default() -> Self {
        Self {
            codes: vec![(4, 1), (8, 1), (4, 2)],
            budget: 5_000_000,
            pairs: vec![PairSpec {
                c: "10101010".into(),
                c_prime: "01010101".into(),
                lambda: 2,
                expect_dominates: Some(false),
            }],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KeyexSpec {
    pub lambda: usize,
    pub q: f64,
    pub qkd_rounds: usize,
    /// Flip this bit of the verifiers' bases in transit for the tamper row.
    pub tamper_bit: usize,
}

impl Default for KeyexSpec {
    fn default() -> Self {
        Self { lambda: 1024, q: 0.0125, qkd_rounds: 32, tamper_bit: 0 }
    }
}

impl KeyexSpec {
    pub fn params(&self) -> Result<AuthParams, CliError> {
        AuthParams::new(self.q, self.lambda).map_err(|e| CliError::config("keyex", e))
    }

    pub fn tamper(&self) -> Tamper {
        Tamper::VerifierBases(self.tamper_bit)
    }
}

fn position(field: &str, coords: &[f64]) -> Result<Position<f64>, CliError> {
    Position::new(coords.to_vec()).map_err(|e| CliError::config(field, e))
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| CliError::Config { field: "scenario".into(), reason: e.to_string() })?;
        s.validate()?;
        Ok(s)
    }

    pub fn layout(&self) -> Result<Layout, CliError> {
        match &self.layout {
            Some(spec) => {
                let verifiers = spec
                    .verifiers
                    .iter()
                    .map(|v| position("layout.verifiers", v))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Layout { verifiers, prover: position("layout.prover", &spec.prover)? })
            }
            None => {
                if self.simplex_dim == 0 {
                    return Err(CliError::config("simplex_dim", "must be at least 1"));
                }
                Ok(Layout::simplex(self.simplex_dim))
            }
        }
    }

    pub fn setup(&self) -> Result<PvSetup, CliError> {
        Ok(PvSetup::new(self.layout()?, self.timing, self.model))
    }

    pub fn adversary_positions(&self, layout: &Layout) -> Result<Vec<Position<f64>>, CliError> {
        match &self.adversary_positions {
            Some(ps) => ps.iter().map(|p| position("adversary_positions", p)).collect(),
            None => Ok(layout.midpoints()),
        }
    }

    /// Checks every constraint before a trial runs.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != SCHEMA_VERSION {
            return Err(CliError::Config {
                field: "schema".into(),
                reason: format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema),
            });
        }
        if self.trials == 0 {
            return Err(CliError::config("trials", "must be at least 1"));
        }
        self.timing.validate().map_err(|e| CliError::config("timing", e))?;
        let layout = self.layout()?;
        let dim = layout.prover.dim();
        if layout.verifiers.len() < 2 || layout.verifiers.iter().any(|v| v.dim() != dim) {
            return Err(CliError::config("layout", "need at least two verifiers of the prover's dimension"));
        }
        if !is_enclosed(&layout.verifiers, &layout.prover).map_err(|e| CliError::config("layout", e))? {
            return Err(CliError::config("layout", "prover position is not enclosed by the verifiers"));
        }
        let adv = self.adversary_positions(&layout)?;
        check_adversary_placement(&adv, &layout.prover, self.timing.delta)
            .map_err(|e| CliError::config("adversary_positions", e))?;
        if self.sequential_rounds == 0 {
            return Err(CliError::config("sequential_rounds", "must be at least 1"));
        }
        if self.ddim == 0 {
            return Err(CliError::config("ddim", "must be at least 1"));
        }
        if self.inqc.n_a == 0 || self.inqc.n_a + self.inqc.n_b > 6 {
            return Err(CliError::config("inqc", "need 1 ≤ n_a and n_a + n_b ≤ 6"));
        }
        if self.inqc.parties < 2 || self.inqc.rounds_cap == 0 {
            return Err(CliError::config("inqc", "need at least two parties and a positive round cap"));
        }
        GenericScheme::builtin(&self.generic.scheme).map_err(|e| CliError::config("generic.scheme", e))?;
        if self.generic.rounds_cap == 0 {
            return Err(CliError::config("generic.rounds_cap", "must be positive"));
        }
        if !(1..=2).contains(&self.cit.max_width) {
            return Err(CliError::config("cit.max_width", "must be 1 or 2"));
        }
        self.auth.params()?;
        self.auth.code()?;
        if !["sampled", "replay"].contains(&self.auth.backend.as_str()) {
            return Err(CliError::config("auth.backend", "must be `sampled` or `replay`"));
        }
        for &l in &self.auth.trend_lambdas {
            AuthParams::new(self.auth.q, l).map_err(|e| CliError::config("auth.trend_lambdas", e))?;
        }
        for (l, m) in &self.domination.codes {
            BalancedRepetitionCode::new(*l, *m).map_err(|e| CliError::config("domination.codes", e))?;
        }
        for p in &self.domination.pairs {
            let c = qpv_core::auth::Codeword::parse(&p.c).map_err(|e| CliError::config("domination.pairs", e))?;
            let cp = qpv_core::auth::Codeword::parse(&p.c_prime).map_err(|e| CliError::config("domination.pairs", e))?;
            if c.len() != cp.len() || p.lambda == 0 {
                return Err(CliError::config("domination.pairs", "codewords must have equal length and lambda ≥ 1"));
            }
        }
        self.keyex.params()?;
        if self.keyex.qkd_rounds == 0 || self.keyex.tamper_bit >= self.keyex.qkd_rounds {
            return Err(CliError::config("keyex", "need qkd_rounds ≥ 1 and tamper_bit < qkd_rounds"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scenario_is_valid() {
        let s = Scenario::parse(r#"{"schema": 1}"#).unwrap();
        assert_eq!(s.trials, 1000);
        assert_eq!(s.layout().unwrap().verifiers.len(), 2);
    }

    #[test]
    fn rejections_name_the_field() {
        let bad = [
            (r#"{"schema": 2}"#, "schema"),
            (r#"{"schema": 1, "auth": {"q": 0.2}}"#, "auth"),
            (r#"{"schema": 1, "adversary_positions": [[0.5], [0.45]]}"#, "adversary_positions"),
            (r#"{"schema": 1, "layout": {"verifiers": [[0.0], [1.0]], "prover": [2.0]}}"#, "layout"),
            (r#"{"schema": 1, "auth": {"lambda": 8, "ell": 16}}"#, "auth.ell"),
            (r#"{"schema": 1, "bogus": 1}"#, "scenario"),
        ];
        for (text, field) in bad {
            match Scenario::parse(text) {
                Err(CliError::Config { field: f, .. }) => assert_eq!(f, field, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
