//! Seeded, order-independent Monte Carlo trials.
//!
//! Trial `i` always draws from stream `i` of a ChaCha generator keyed by the
//! experiment seed, so results do not depend on how trials are spread over
//! threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Success count over a number of Bernoulli trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub successes: u64,
    pub trials: u64,
}

impl Tally {
    pub fn new(successes: u64, trials: u64) -> Self {
        Self { successes, trials }
    }

    pub fn frequency(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.successes as f64 / self.trials as f64
    }

    /// Binomial standard error of the frequency.
    pub fn stderr(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        let p = self.frequency();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Standard error under a hypothesized success probability `p`.
    pub fn stderr_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials.max(1) as f64).sqrt()
    }

    /// `|freq − p| ≤ k σ(p)`.
    pub fn consistent_with(&self, p: f64, k: f64) -> bool {
        (self.frequency() - p).abs() <= k * self.stderr_at(p) + 1e-12
    }

    pub fn merge(self, other: Self) -> Self {
        Self { successes: self.successes + other.successes, trials: self.trials + other.trials }
    }
}

/// Runs `trials` independent trials in parallel and returns their outputs
/// in trial order.
pub fn map_trials<O, F>(seed: u64, trials: u64, f: F) -> Result<Vec<O>>
where
    O: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> Result<O> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            f(i, &mut rng)
        })
        .collect()
}

/// Counts trials for which `f` returns true.
pub fn run_trials<F>(seed: u64, trials: u64, f: F) -> Result<Tally>
where
    F: Fn(&mut ChaCha8Rng) -> Result<bool> + Sync,
{
    let successes = (0..trials)
        .into_par_iter()
        .map(|i| f(&mut trial_rng(seed, i)).map(u64::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(Tally { successes, trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_order_independent() {
        let a = map_trials(9, 50, |_, r| Ok(r.random::<u64>())).unwrap();
        let b: Vec<u64> = (0..50).map(|i| trial_rng(9, i).random()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn tally_statistics() {
        let t = run_trials(1, 10_000, |r| Ok(r.random::<f64>() < 0.3)).unwrap();
        assert!(t.consistent_with(0.3, 4.0));
        assert_eq!(Tally::new(1, 4).frequency(), 0.25);
    }
}
