//! Position-based key exchange: BB84 raw key, sifting, and an
//! authenticated echo of the basis strings.
//!
//! The bases travel unauthenticated. Afterwards the prover authenticates
//! what it holds, its own bases followed by the bases it received, and
//! the verifiers compare that against what they sent and received. On
//! rejection the verifiers output the empty key. Error correction and
//! privacy amplification are the identity in this noiseless model.

use rand::{Rng, RngCore};
use serde::Serialize;

use super::code::BalancedRepetitionCode;
use super::embedding::honest_schedule;
use super::scheme::{auth_run, AuthBackend, AuthOutcome};
use super::wauth::AuthParams;
use crate::error::{Error, Result};
use crate::qsim::{BasisString, RegisterStore, Statevector};

/// Which unauthenticated classical message the channel corrupts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tamper {
    #[default]
    None,
    /// Flip bit `i` of the verifiers' bases on the way to the prover.
    VerifierBases(usize),
    /// Flip bit `i` of the prover's bases on the way to the verifiers.
    ProverBases(usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct KeyExchangeConfig {
    pub qkd_rounds: usize,
    pub params: AuthParams,
    pub tamper: Tamper,
}

impl KeyExchangeConfig {
    /// Code with `ℓ = 4λ` for the `2·rounds`-bit echo.
    pub fn code(&self) -> Result<BalancedRepetitionCode> {
        BalancedRepetitionCode::new(4 * self.params.lambda, 2 * self.qkd_rounds)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KeyExchangeTranscript {
    pub values: Vec<u8>,
    pub verifier_bases: Vec<u8>,
    pub prover_bases: Vec<u8>,
    pub prover_outcomes: Vec<u8>,
    /// Verifier bases as the prover received them.
    pub bases_at_prover: Vec<u8>,
    /// Prover bases as the verifiers received them.
    pub bases_at_verifiers: Vec<u8>,
}

#[derive(Clone, Debug, Serialize)]
pub struct KeyExchangeRun {
    pub verifier_key: Vec<u8>,
    pub prover_key: Vec<u8>,
    pub auth_accept: bool,
    pub auth: AuthOutcome,
    pub codeword_length: usize,
    pub transcript: KeyExchangeTranscript,
    pub postprocessing: &'static str,
}

impl KeyExchangeRun {
    pub fn keys_agree(&self) -> bool {
        !self.verifier_key.is_empty() && self.verifier_key == self.prover_key
    }
}

/// Packs bits MSB-first and hex-encodes them.
pub fn key_hex(bits: &[u8]) -> String {
    let bytes: Vec<u8> = bits
        .chunks(8)
        .map(|ch| ch.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | (b << (7 - i))))
        .collect();
    hex::encode(bytes)
}

fn flip(bits: &mut [u8], i: usize) -> Result<()> {
    let b = bits.get_mut(i).ok_or_else(|| Error::config("tamper", format!("bit {i} out of range")))?;
    *b ^= 1;
    Ok(())
}

pub fn key_exchange<R: RngCore>(config: &KeyExchangeConfig, backend: &AuthBackend, rng: &mut R) -> Result<KeyExchangeRun> {
    let n = config.qkd_rounds;
    if n == 0 {
        return Err(Error::config("qkd_rounds", "must be at least 1"));
    }
    let code = config.code()?;
    let values: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
    let verifier_bases: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
    let prover_bases: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();

    let mut store = RegisterStore::<f64>::new();
    let mut prover_outcomes = Vec::with_capacity(n);
    for i in 0..n {
        let h = store.alloc(&Statevector::bb84(verifier_bases[i], values[i]));
        let out = store.measure(h, &BasisString::new(vec![prover_bases[i]])?, rng)?;
        prover_outcomes.push(out[0]);
    }

    let mut bases_at_prover = verifier_bases.clone();
    let mut bases_at_verifiers = prover_bases.clone();
    match config.tamper {
        Tamper::None => {}
        Tamper::VerifierBases(i) => flip(&mut bases_at_prover, i)?,
        Tamper::ProverBases(i) => flip(&mut bases_at_verifiers, i)?,
    }

    // Echo: the prover's view versus the verifiers' view.
    let m: Vec<u8> = prover_bases.iter().chain(&bases_at_prover).copied().collect();
    let m_prime: Vec<u8> = bases_at_verifiers.iter().chain(&verifier_bases).copied().collect();
    let run = auth_run(&m, &m_prime, &code, &config.params, &honest_schedule(code.n()), backend, rng)?;

    let prover_key: Vec<u8> =
        (0..n).filter(|&i| prover_bases[i] == bases_at_prover[i]).map(|i| prover_outcomes[i]).collect();
    let verifier_key: Vec<u8> = if run.outcome.accept {
        (0..n).filter(|&i| verifier_bases[i] == bases_at_verifiers[i]).map(|i| values[i]).collect()
    } else {
        Vec::new()
    };
    Ok(KeyExchangeRun {
        verifier_key,
        prover_key,
        auth_accept: run.outcome.accept,
        auth: run.outcome,
        codeword_length: code.n(),
        transcript: KeyExchangeTranscript {
            values,
            verifier_bases,
            prover_bases,
            prover_outcomes,
            bases_at_prover,
            bases_at_verifiers,
        },
        postprocessing: "error correction and privacy amplification: identity (noiseless channel)",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::trial_rng;

    fn config(tamper: Tamper) -> KeyExchangeConfig {
        KeyExchangeConfig { qkd_rounds: 16, params: AuthParams::new(0.0125, 1024).unwrap(), tamper }
    }

    #[test]
    fn honest_keys_agree() {
        let backend = AuthBackend::sampled_breidbart();
        for t in 0..50 {
            let run = key_exchange(&config(Tamper::None), &backend, &mut trial_rng(3, t)).unwrap();
            assert!(run.auth_accept, "{:?} {}", run.auth, run.auth.bot_rounds.len());
            assert!(run.keys_agree());
        }
    }

    #[test]
    fn tampered_bases_mostly_rejected() {
        let backend = AuthBackend::sampled_breidbart();
        let rejected = (0..200)
            .filter(|&t| !key_exchange(&config(Tamper::VerifierBases(3)), &backend, &mut trial_rng(4, t)).unwrap().auth_accept)
            .count();
        assert!(rejected > 150);
    }

    #[test]
    fn hex_packing() {
        assert_eq!(key_hex(&[1, 0, 1, 0, 1, 1, 1, 1, 1]), "af80");
        assert_eq!(key_hex(&[]), "");
    }
}
