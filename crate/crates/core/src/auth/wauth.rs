//! One-bit weak authentication on top of a position-verification round.
//!
//! To authenticate a 1 the prover answers the round; to authenticate a 0
//! it answers too, except that with probability `q` it sends `⊥` instead.
//! The verifiers accept a consistent, timely answer that is either correct
//! or, for a 0, equal to `⊥`.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::adversary::{attack_breidbart, breidbart_exact_success, AttackStrategy};
use crate::entropy::soundness_epsilon;
use crate::error::{Error, Result};
use crate::protocols::{run_pv_round, ProtocolVerdict, Prover, PvSetup, RoundOptions, Tag};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuthParams {
    pub q: f64,
    pub lambda: usize,
}

impl AuthParams {
    /// Checks `0 < q < (1 − ε)/8` for the single-round soundness `ε`.
    pub fn new(q: f64, lambda: usize) -> Result<Self> {
        let ceiling = (1.0 - soundness_epsilon()) / 8.0;
        if !(q > 0.0 && q < ceiling) {
            return Err(Error::config("q", format!("must lie in (0, {ceiling:.6})")));
        }
        if lambda == 0 {
            return Err(Error::config("lambda", "must be at least 1"));
        }
        Ok(Self { q, lambda })
    }

    /// Midpoint of the admissible `q` range.
    pub fn with_default_q(lambda: usize) -> Result<Self> {
        Self::new((1.0 - soundness_epsilon()) / 16.0, lambda)
    }

    pub fn window(&self) -> usize {
        4 * self.lambda
    }

    pub fn threshold(&self) -> f64 {
        8.0 * self.q * self.lambda as f64
    }
}

/// `δ = 1 − q(1 − ε)`, the substitution ceiling for a 0 replaced by a 1.
pub fn wauth_substitution_bound(q: f64, eps: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) || !(0.0..1.0).contains(&eps) {
        return Err(Error::Domain(format!("need 0 < q < 1 and 0 ≤ ε < 1, got q = {q}, ε = {eps}")));
    }
    Ok(1.0 - q * (1.0 - eps))
}

/// Acceptance rule of the verifiers holding bit `m`.
pub fn wauth_accepts(v: &ProtocolVerdict, m: u8) -> bool {
    !v.aborted
        && v.all_in_time()
        && match v.common_tag() {
            Some(Tag::Bit(b)) => b == v.x,
            Some(Tag::Bot) => m == 0,
            None => false,
        }
}

#[derive(Clone, Debug, Serialize)]
pub struct WauthRound {
    /// The tag the verifiers agreed on, if any.
    pub tag: Option<Tag>,
    pub accept: bool,
    pub verdict: ProtocolVerdict,
}

/// Who is in the round, from the verifiers' point of view.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WauthRole {
    /// The prover runs on bit `m` and its reply is relayed unchanged.
    Prover(u8),
    /// Only the adversary answers.
    Impersonation,
}

/// Adversary used for impersonation and for covering an erased 0.
#[derive(Debug)]
pub struct WauthAdversary {
    pub strategy: AttackStrategy,
}

impl WauthAdversary {
    pub fn breidbart(setup: &PvSetup) -> Self {
        Self { strategy: attack_breidbart(&setup.layout) }
    }
}

/// One wAUTH execution with the verifiers holding `m_prime`.
///
/// When the prover is active on `m` the adversary relays its reply, except
/// that an erased 0 facing verifiers that expect a 1 is replaced by an
/// impersonation. An impersonator facing a 0 sends `⊥`.
pub fn wauth_round<R: RngCore>(
    setup: &PvSetup,
    m_prime: u8,
    role: WauthRole,
    q: f64,
    adversary: &WauthAdversary,
    rng: &mut R,
) -> Result<WauthRound> {
    if m_prime > 1 {
        return Err(Error::Domain("message bit must be 0 or 1".into()));
    }
    let opts = RoundOptions::default();
    let attack = |rng: &mut R| run_pv_round(setup, Prover::Attack(&adversary.strategy), &opts, rng);
    let verdict = match role {
        WauthRole::Prover(m) => {
            let erased = m == 0 && rng.random::<f64>() < q;
            if erased && m_prime == 1 {
                attack(rng)?
            } else {
                let q = if erased { 1.0 } else { 0.0 };
                run_pv_round(setup, Prover::Authenticating { bit: m, q }, &opts, rng)?
            }
        }
        WauthRole::Impersonation if m_prime == 0 => {
            let v = attack(rng)?;
            (0..v.records.len()).fold(v, |v, i| v.with_reply(i, Tag::Bot))
        }
        WauthRole::Impersonation => attack(rng)?,
    };
    let accept = wauth_accepts(&verdict, m_prime);
    Ok(WauthRound { tag: verdict.common_tag(), accept, verdict })
}

/// Exact acceptance and `⊥` probabilities of one execution when the
/// adversary's single-round success is `eps`: `(p_bot, p_reject)`.
pub fn wauth_probabilities(m_prime: u8, role: WauthRole, q: f64, eps: f64) -> (f64, f64) {
    match (role, m_prime) {
        (WauthRole::Impersonation, 0) => (1.0, 0.0),
        (WauthRole::Impersonation, _) => (0.0, 1.0 - eps),
        (WauthRole::Prover(0), 0) => (q, 0.0),
        (WauthRole::Prover(0), _) => (0.0, q * (1.0 - eps)),
        (WauthRole::Prover(_), _) => (0.0, 0.0),
    }
}

/// Single-round success of the default impersonator.
pub fn default_impersonation_success() -> f64 {
    breidbart_exact_success()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::run_trials;

    #[test]
    fn substitution_bound_formula() {
        assert!((wauth_substitution_bound(0.01, 0.89).unwrap() - 0.9989).abs() < 1e-12);
        assert!(wauth_substitution_bound(1e-12, 0.5).unwrap() > 1.0 - 1e-11);
        assert!(wauth_substitution_bound(0.0, 0.5).is_err());
    }

    #[test]
    fn params_range() {
        assert!(AuthParams::new(0.01, 8).is_ok());
        assert!(AuthParams::new(0.02, 8).is_err());
        let p = AuthParams::with_default_q(4).unwrap();
        assert_eq!(p.window(), 16);
    }

    #[test]
    fn honest_and_erasure() {
        let setup = PvSetup::line_default();
        let adv = WauthAdversary::breidbart(&setup);
        let ones = run_trials(5, 200, |rng| Ok(wauth_round(&setup, 1, WauthRole::Prover(1), 0.3, &adv, rng)?.accept)).unwrap();
        assert_eq!(ones.successes, 200);
        let bots = run_trials(6, 2000, |rng| {
            let r = wauth_round(&setup, 0, WauthRole::Prover(0), 0.3, &adv, rng)?;
            assert!(r.accept);
            Ok(r.tag == Some(Tag::Bot))
        })
        .unwrap();
        assert!(bots.consistent_with(0.3, 4.0));
    }

    #[test]
    fn impersonation_matches_exact() {
        let setup = PvSetup::line_default();
        let adv = WauthAdversary::breidbart(&setup);
        let eps = default_impersonation_success();
        let t = run_trials(7, 4000, |rng| Ok(wauth_round(&setup, 1, WauthRole::Impersonation, 0.01, &adv, rng)?.accept))
            .unwrap();
        assert!(t.consistent_with(eps, 4.0));
        let zero = wauth_round(&setup, 0, WauthRole::Impersonation, 0.01, &adv, &mut crate::montecarlo::trial_rng(1, 1))
            .unwrap();
        assert!(zero.accept && zero.tag == Some(Tag::Bot));
    }
}
