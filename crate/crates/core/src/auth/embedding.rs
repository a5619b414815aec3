//! Embeddings and the interleaving schedules that induce them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::code::Codeword;
use crate::error::{Error, Result};

/// The padding symbol `‡`.
pub const PAD: i8 = -1;

/// A string over `{−1, 0, 1}`; deleting the `−1`s recovers a codeword.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Embedding {
    pub symbols: Vec<i8>,
}

impl Embedding {
    /// `c` followed by `|c|` pads.
    pub fn padded(c: &Codeword) -> Self {
        let mut symbols: Vec<i8> = c.bits.iter().map(|&b| b as i8).collect();
        symbols.extend(std::iter::repeat_n(PAD, c.len()));
        Self { symbols }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// The bits that survive deletion of the pads.
    pub fn surviving(&self) -> Vec<u8> {
        self.symbols.iter().filter(|&&s| s != PAD).map(|&s| s as u8).collect()
    }
}

impl std::fmt::Display for Embedding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &s in &self.symbols {
            match s {
                PAD => write!(f, "‡")?,
                b => write!(f, "{b}")?,
            }
        }
        Ok(())
    }
}

pub fn is_embedding(e: &Embedding, c: &Codeword) -> bool {
    e.len() == 2 * c.len() && e.symbols.iter().all(|&s| (-1..=1).contains(&s)) && e.surviving() == c.bits
}

/// `#{i : e′_i = 1 ∧ e_i < 1}`.
pub fn condition_a_count(e: &Embedding, e_prime: &Embedding) -> usize {
    e.symbols.iter().zip(&e_prime.symbols).filter(|&(&x, &y)| y == 1 && x < 1).count()
}

/// `#{i : e′_i ≠ ‡ ∧ e_i = ‡}`.
pub fn condition_b_count(e: &Embedding, e_prime: &Embedding) -> usize {
    e.symbols.iter().zip(&e_prime.symbols).filter(|&(&x, &y)| y != PAD && x == PAD).count()
}

/// Explicit search for an interval `I` whose `J = {i ∈ I : e′_i > −1}` has
/// `|J| ≥ 4λ` and at least `λ` pads of `e`. Returns the interval.
pub fn condition_b_interval(e: &Embedding, e_prime: &Embedding, lambda: usize) -> Option<(usize, usize)> {
    let n = e.len().min(e_prime.len());
    for lo in 0..n {
        let (mut j, mut pads) = (0, 0);
        for hi in lo..n {
            if e_prime.symbols[hi] != PAD {
                j += 1;
                if e.symbols[hi] == PAD {
                    pads += 1;
                }
            }
            if j >= 4 * lambda && pads >= lambda {
                return Some((lo, hi));
            }
        }
    }
    None
}

/// The adversary's three moves between the prover and the verifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    /// Run the verifiers only.
    Impersonate,
    /// Run both, relaying the prover's reply.
    Substitute,
    /// Run the prover only.
    FastForward,
}

impl Action {
    pub fn activates_verifiers(self) -> bool {
        !matches!(self, Action::FastForward)
    }

    pub fn activates_prover(self) -> bool {
        !matches!(self, Action::Impersonate)
    }
}

/// Counts activations and checks that the schedule can run in order on
/// codewords of length `n` and activates the verifiers exactly `n` times.
pub fn validate_schedule(schedule: &[Action], n: usize) -> Result<()> {
    let (mut jp, mut jv) = (0, 0);
    for (k, a) in schedule.iter().enumerate() {
        if a.activates_prover() {
            jp += 1;
        }
        if a.activates_verifiers() {
            jv += 1;
        }
        if jp > n || jv > n {
            return Err(Error::Schedule(format!("step {k} runs past the end of a codeword of length {n}")));
        }
    }
    if jv != n {
        return Err(Error::Schedule(format!("verifiers run {jv} of {n} executions")));
    }
    Ok(())
}

/// Embeddings of `c` (prover) and `c_prime` (verifiers) induced by a
/// schedule, padded to `2N`.
pub fn schedule_embeddings(c: &Codeword, c_prime: &Codeword, schedule: &[Action]) -> Result<(Embedding, Embedding)> {
    let n = c.len();
    if c_prime.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: c_prime.len() });
    }
    validate_schedule(schedule, n)?;
    let (mut e, mut ep) = (Vec::with_capacity(2 * n), Vec::with_capacity(2 * n));
    let (mut jp, mut jv) = (0, 0);
    for a in schedule {
        match a {
            Action::Impersonate => {
                e.push(PAD);
                ep.push(c_prime.bits[jv] as i8);
                jv += 1;
            }
            Action::Substitute => {
                e.push(c.bits[jp] as i8);
                ep.push(c_prime.bits[jv] as i8);
                jp += 1;
                jv += 1;
            }
            Action::FastForward => {
                e.push(c.bits[jp] as i8);
                ep.push(PAD);
                jp += 1;
            }
        }
    }
    // Prover executions the schedule never ran still belong to `c`.
    e.extend(c.bits[jp..].iter().map(|&b| b as i8));
    e.resize(2 * n, PAD);
    ep.resize(2 * n, PAD);
    Ok((Embedding { symbols: e }, Embedding { symbols: ep }))
}

pub fn honest_schedule(n: usize) -> Vec<Action> {
    vec![Action::Substitute; n]
}

/// Impersonate the first bit, then relay the prover one position behind.
pub fn desync_schedule(n: usize) -> Vec<Action> {
    let mut s = vec![Action::Impersonate];
    s.extend(std::iter::repeat_n(Action::Substitute, n.saturating_sub(1)));
    s
}

/// Uniformly chooses among the moves still available at each point.
pub fn random_schedule<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Action> {
    let (mut jp, mut jv) = (0, 0);
    let mut s = Vec::new();
    while jv < n {
        let mut options = vec![Action::Impersonate];
        if jp < n {
            options.push(Action::Substitute);
            options.push(Action::FastForward);
        }
        let a = options[rng.random_range(0..options.len())];
        jp += usize::from(a.activates_prover());
        jv += usize::from(a.activates_verifiers());
        s.push(a);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_example_embeds() {
        let c = Codeword::parse("10101010").unwrap();
        let e = Embedding::padded(&c);
        assert!(is_embedding(&e, &c));
        assert_eq!(e.to_string(), "10101010‡‡‡‡‡‡‡‡");
        let mut bad = e.clone();
        bad.symbols[0] = 0;
        assert!(!is_embedding(&bad, &c));
    }

    #[test]
    fn update_rule() {
        let c = Codeword::parse("01").unwrap();
        let cp = Codeword::parse("10").unwrap();
        let (e, ep) = schedule_embeddings(&c, &cp, &[Action::Impersonate, Action::FastForward, Action::Substitute]).unwrap();
        assert_eq!(e.to_string(), "‡01‡");
        assert_eq!(ep.to_string(), "1‡0‡");
        assert!(schedule_embeddings(&c, &cp, &[Action::Impersonate]).is_err());
        assert!(schedule_embeddings(&c, &cp, &[Action::FastForward; 3]).is_err());
    }

    #[test]
    fn interval_scan_matches_counts() {
        let e = Embedding { symbols: vec![-1, 0, -1, 1] };
        let ep = Embedding { symbols: vec![1, 1, 0, 0] };
        assert_eq!(condition_a_count(&e, &ep), 2);
        assert_eq!(condition_b_count(&e, &ep), 2);
        assert_eq!(condition_b_interval(&e, &ep, 1), Some((0, 3)));
        assert_eq!(condition_b_interval(&e, &ep, 2), None);
    }
}
