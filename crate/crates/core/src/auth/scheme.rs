//! The strong scheme: wAUTH on every bit of a dominating codeword, plus a
//! sliding-window count of `⊥` tags on 0-bits.
//!
//! Two backends produce the same outcome distribution. `Replay` runs every
//! wAUTH execution through the timed protocol engine; `Sampled` draws each
//! execution from its exact probabilities and skips geometrically over the
//! uneventful stretches, which makes codewords of length `2^19` cheap.

use rand::{Rng, RngCore};
use serde::Serialize;

use super::code::{BalancedRepetitionCode, Codeword};
use super::embedding::{schedule_embeddings, validate_schedule, Action, Embedding};
use super::wauth::{wauth_probabilities, wauth_round, AuthParams, WauthAdversary, WauthRole};
use crate::error::{Error, Result};
use crate::protocols::{PvSetup, Tag};

/// `n_⊥(j)`, with 1-based `j`: the number of `i ∈ {j−4λ, …, j}` with
/// `c′_i = 0` and `t_i = ⊥`. `tags[i−1]` is `t_i`.
pub fn n_bot(c_prime: &[u8], tags: &[Option<Tag>], j: usize, lambda: usize) -> usize {
    let lo = j.saturating_sub(4 * lambda).max(1);
    (lo..=j).filter(|&i| c_prime[i - 1] == 0 && tags[i - 1] == Some(Tag::Bot)).count()
}

/// First round `j > 4λ` with `n_⊥(j) > threshold`, given the sorted
/// 1-based rounds that carried a counted `⊥`.
pub fn first_window_violation(bot_rounds: &[usize], n: usize, params: &AuthParams) -> Option<usize> {
    let w = params.window();
    if n <= w {
        return None;
    }
    let thr = params.threshold();
    // The count in window `j` only grows at `j = 4λ + 1` and at the
    // rounds that add a `⊥`, so those are the only candidates.
    let mut candidates: Vec<usize> = std::iter::once(w + 1).chain(bot_rounds.iter().copied().filter(|&p| p > w + 1)).collect();
    candidates.dedup();
    let mut lo = 0;
    let mut hi = 0;
    for j in candidates {
        while hi < bot_rounds.len() && bot_rounds[hi] <= j {
            hi += 1;
        }
        while lo < hi && bot_rounds[lo] < j - w {
            lo += 1;
        }
        if (hi - lo) as f64 > thr {
            return Some(j);
        }
    }
    None
}

#[derive(Clone, Debug)]
pub enum AuthBackend {
    /// `eps` is the adversary's single-round success.
    Sampled { eps: f64 },
    Replay { setup: PvSetup, adversary: std::sync::Arc<WauthAdversary> },
}

impl AuthBackend {
    pub fn sampled_breidbart() -> Self {
        AuthBackend::Sampled { eps: super::wauth::default_impersonation_success() }
    }

    pub fn replay(setup: PvSetup) -> Self {
        let adversary = std::sync::Arc::new(WauthAdversary::breidbart(&setup));
        AuthBackend::Replay { setup, adversary }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AuthOutcome {
    pub accept: bool,
    /// 1-based verifier round whose wAUTH execution failed.
    pub wauth_failure: Option<usize>,
    /// 1-based round at which the window count exceeded the threshold.
    pub window_violation: Option<usize>,
    /// Verifier rounds with `c′_i = 0` and `t_i = ⊥`, in order.
    pub bot_rounds: Vec<usize>,
    /// Verifier rounds actually executed before the decision.
    pub rounds_run: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuthRun {
    pub outcome: AuthOutcome,
    pub e: Embedding,
    pub e_prime: Embedding,
}

/// Per verifier round: the role the schedule gives it.
fn verifier_roles(c: &Codeword, schedule: &[Action]) -> Vec<WauthRole> {
    let mut jp = 0;
    let mut roles = Vec::with_capacity(c.len());
    for a in schedule {
        match a {
            Action::Impersonate => roles.push(WauthRole::Impersonation),
            Action::Substitute => {
                roles.push(WauthRole::Prover(c.bits[jp]));
                jp += 1;
            }
            Action::FastForward => jp += 1,
        }
    }
    roles
}

/// A schedule reduced to runs of verifier rounds with equal event
/// probabilities, ready for repeated sampling.
#[derive(Clone, Debug)]
pub struct CompiledAuth {
    n: usize,
    params: AuthParams,
    /// `(first round, length, p_bot, p_reject)`, rounds 1-based.
    segments: Vec<(usize, usize, f64, f64)>,
}

impl CompiledAuth {
    pub fn new(c: &Codeword, c_prime: &Codeword, schedule: &[Action], params: AuthParams, eps: f64) -> Result<Self> {
        if c.len() != c_prime.len() {
            return Err(Error::DimensionMismatch { expected: c.len(), got: c_prime.len() });
        }
        validate_schedule(schedule, c.len())?;
        let mut segments: Vec<(usize, usize, f64, f64)> = Vec::new();
        for (i, role) in verifier_roles(c, schedule).into_iter().enumerate() {
            let (pb, pr) = wauth_probabilities(c_prime.bits[i], role, params.q, eps);
            match segments.last_mut() {
                Some(s) if s.2 == pb && s.3 == pr => s.1 += 1,
                _ => segments.push((i + 1, 1, pb, pr)),
            }
        }
        Ok(Self { n: c.len(), params, segments })
    }

    /// Probability that no wAUTH execution fails.
    pub fn wauth_pass_probability(&self) -> f64 {
        self.segments.iter().map(|&(_, len, _, pr)| (1.0 - pr).powi(len as i32)).product()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> AuthOutcome {
        let mut bot_rounds = Vec::new();
        let mut failure = None;
        'outer: for &(start, len, pb, pr) in &self.segments {
            let p = pb + pr;
            if p <= 0.0 {
                continue;
            }
            let mut k = 0usize;
            loop {
                // Gap to the next eventful round in this segment.
                let gap = if p >= 1.0 {
                    0
                } else {
                    let u: f64 = rng.random::<f64>();
                    let g = ((1.0 - u).ln() / (1.0 - p).ln()).floor();
                    if g >= (len - k) as f64 {
                        break;
                    }
                    g as usize
                };
                k += gap;
                if k >= len {
                    break;
                }
                let round = start + k;
                if rng.random::<f64>() * p < pr {
                    failure = Some(round);
                    break 'outer;
                }
                bot_rounds.push(round);
                k += 1;
            }
        }
        finish(self.n, &self.params, bot_rounds, failure)
    }
}

fn finish(n: usize, params: &AuthParams, mut bot_rounds: Vec<usize>, failure: Option<usize>) -> AuthOutcome {
    let horizon = failure.unwrap_or(n);
    bot_rounds.retain(|&r| r <= horizon);
    let window = first_window_violation(&bot_rounds, horizon, params).filter(|&j| j <= horizon);
    // The verifiers stop at whichever check fails first.
    let (wauth_failure, window_violation) = match (failure, window) {
        (Some(f), Some(w)) if w < f => (None, Some(w)),
        (f, None) => (f, None),
        (Some(f), Some(_)) => (Some(f), None),
        (None, w) => (None, w),
    };
    let rounds_run = wauth_failure.or(window_violation).unwrap_or(n);
    bot_rounds.retain(|&r| r <= rounds_run);
    AuthOutcome { accept: wauth_failure.is_none() && window_violation.is_none(), wauth_failure, window_violation, bot_rounds, rounds_run }
}

/// Runs AUTH with the prover on `m` and the verifiers on `m_prime`, the
/// adversary interleaving the two according to `schedule`.
pub fn auth_run<R: RngCore>(
    m: &[u8],
    m_prime: &[u8],
    code: &BalancedRepetitionCode,
    params: &AuthParams,
    schedule: &[Action],
    backend: &AuthBackend,
    rng: &mut R,
) -> Result<AuthRun> {
    let c = code.encode(m)?;
    let cp = code.encode(m_prime)?;
    auth_run_codewords(&c, &cp, params, schedule, backend, rng)
}

pub fn auth_run_codewords<R: RngCore>(
    c: &Codeword,
    c_prime: &Codeword,
    params: &AuthParams,
    schedule: &[Action],
    backend: &AuthBackend,
    rng: &mut R,
) -> Result<AuthRun> {
    let (e, e_prime) = schedule_embeddings(c, c_prime, schedule)?;
    let outcome = match backend {
        AuthBackend::Sampled { eps } => CompiledAuth::new(c, c_prime, schedule, *params, *eps)?.sample(rng),
        AuthBackend::Replay { setup, adversary } => {
            let n = c.len();
            let mut tags = Vec::with_capacity(n);
            let mut bot_rounds = Vec::new();
            let mut failure = None;
            let mut window = None;
            for (i, role) in verifier_roles(c, schedule).into_iter().enumerate() {
                let j = i + 1;
                let r = wauth_round(setup, c_prime.bits[i], role, params.q, adversary, rng)?;
                tags.push(r.tag);
                if c_prime.bits[i] == 0 && r.tag == Some(Tag::Bot) {
                    bot_rounds.push(j);
                }
                if !r.accept {
                    failure = Some(j);
                    break;
                }
                if j > params.window() && n_bot(&c_prime.bits, &tags, j, params.lambda) as f64 > params.threshold() {
                    window = Some(j);
                    break;
                }
            }
            let rounds_run = failure.or(window).unwrap_or(n);
            AuthOutcome { accept: failure.is_none() && window.is_none(), wauth_failure: failure, window_violation: window, bot_rounds, rounds_run }
        }
    };
    Ok(AuthRun { outcome, e, e_prime })
}

/// `N·e^{−2qλ}`.
pub fn completeness_bound(n: usize, params: &AuthParams) -> f64 {
    n as f64 * (-2.0 * params.q * params.lambda as f64).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auth::embedding::{desync_schedule, honest_schedule, is_embedding, random_schedule};
    use crate::montecarlo::{run_trials, trial_rng};
    use proptest::prelude::*;
    use rand::Rng;

    fn naive_first_violation(c_prime: &[u8], bots: &[usize], params: &AuthParams) -> Option<usize> {
        let n = c_prime.len();
        let mut tags = vec![Some(Tag::Bit(0)); n];
        for &b in bots {
            tags[b - 1] = Some(Tag::Bot);
        }
        (params.window() + 1..=n).find(|&j| n_bot(c_prime, &tags, j, params.lambda) as f64 > params.threshold())
    }

    proptest! {
        #[test]
        fn window_fast_path_matches_recount(
            lambda in 1usize..4,
            q in 0.001f64..0.0137,
            raw in proptest::collection::vec(any::<bool>(), 1..80),
        ) {
            let params = AuthParams::new(q, lambda).unwrap();
            let c_prime = vec![0u8; raw.len()];
            let bots: Vec<usize> = raw.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i + 1).collect();
            prop_assert_eq!(first_window_violation(&bots, raw.len(), &params), naive_first_violation(&c_prime, &bots, &params));
        }

        #[test]
        fn random_schedules_embed(seed in 0u64..500, ell in 1usize..4, mu in 1usize..3) {
            let code = BalancedRepetitionCode::new(ell, mu).unwrap();
            let mut rng = trial_rng(seed, 0);
            let words = code.codewords();
            let c = &words[rng.random_range(0..words.len())];
            let cp = &words[rng.random_range(0..words.len())];
            let s = random_schedule(code.n(), &mut rng);
            let (e, ep) = schedule_embeddings(c, cp, &s).unwrap();
            prop_assert!(is_embedding(&e, c));
            prop_assert!(is_embedding(&ep, cp));
        }
    }

    #[test]
    fn honest_sampled_always_passes_wauth() {
        let code = BalancedRepetitionCode::new(8, 2).unwrap();
        let params = AuthParams::new(0.01, 2).unwrap();
        let c = code.encode(&[0, 1]).unwrap();
        let comp = CompiledAuth::new(&c, &c, &honest_schedule(c.len()), params, 0.85).unwrap();
        assert_eq!(comp.wauth_pass_probability(), 1.0);
        let mut rng = trial_rng(1, 0);
        for _ in 0..200 {
            assert!(comp.sample(&mut rng).wauth_failure.is_none());
        }
    }

    #[test]
    fn sampled_matches_replay() {
        // Small code, large q is outside AuthParams's range, so build by hand.
        let params = AuthParams { q: 0.2, lambda: 1 };
        let code = BalancedRepetitionCode::new(2, 1).unwrap();
        let (m, mp) = ([0u8], [1u8]);
        let s = desync_schedule(code.n());
        let replay = AuthBackend::replay(PvSetup::line_default());
        let sampled = AuthBackend::sampled_breidbart();
        let go = |b: &AuthBackend, seed| {
            run_trials(seed, 3000, |rng| Ok(auth_run(&m, &mp, &code, &params, &s, b, rng)?.outcome.accept)).unwrap()
        };
        let (a, b) = (go(&replay, 11), go(&sampled, 12));
        let diff = (a.frequency() - b.frequency()).abs();
        let sigma = (a.stderr().powi(2) + b.stderr().powi(2)).sqrt();
        assert!(diff < 4.0 * sigma + 1e-3, "{a:?} {b:?}");
    }
}
