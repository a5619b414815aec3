//! The universal attack on multi-step position verification.
//!
//! The adversary next to `V0` (Alice) receives `A` and `x`; the one next to
//! `V1` (Bob) receives `B` and `y` and keeps the prover's register `R`. At
//! every step they run the nonlocal computation of `U_{x,y}` on `A` versus
//! `B ⊗ R` without talking, then exchange their classical outputs in one
//! crossing round, correct `A` and `B`, and answer their own verifier.
//! Bob never corrects `R`; its Pauli frame is folded into the next step's
//! unitary.
//!
//! The quantum part is simulated step by step on one statevector; the
//! message pattern is then replayed through the event engine.

use std::collections::BTreeMap;

use rand::{Rng, RngCore};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::montecarlo::map_trials;
use crate::protocols::{
    assemble_run, measure_out, replay_timing, reply_bits, run_generic_honest, GenericRun, GenericScheme, PvSetup,
    ReplyKind,
};
use crate::qsim::{fidelity_up_to_global_phase, Statevector};
use crate::spacetime::Position;
use crate::teleport::{apply_correction, nonlocal_apply, reconcile_corrections, Outcomes, PauliKey};

/// Per-step bookkeeping of one attack run.
#[derive(Clone, Debug, Serialize)]
pub struct AttackStep {
    pub success: bool,
    pub inqc_rounds: usize,
    pub epr_pairs: usize,
    pub log2_worst_case_epr_pairs: f64,
    /// Fidelity of the corrected post-step state with the honest one.
    pub fidelity: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AttackRun {
    pub run: GenericRun,
    pub steps: Vec<AttackStep>,
}

impl AttackRun {
    pub fn all_succeeded(&self) -> bool {
        self.steps.len() == self.run.observations.len() && self.steps.iter().all(|s| s.success)
    }
}

/// One attack execution against `scheme`.
pub fn generic_attack_run<R: RngCore>(
    scheme: &GenericScheme,
    setup: &PvSetup,
    coalition: &[Position<f64>],
    rounds_cap: usize,
    rng: &mut R,
) -> Result<AttackRun> {
    scheme.validate()?;
    let secrets = scheme.draw_secrets(rng);
    let n_r = scheme.n_r;
    let mut state = Statevector::zero(n_r);
    let r: Vec<usize> = (0..n_r).collect();
    let mut frame = PauliKey::identity(n_r);
    let mut bits = Vec::new();
    let mut steps = Vec::new();
    for (i, (step, sec)) in scheme.steps.iter().zip(&secrets).enumerate() {
        let (a, b) = scheme.prepare(&mut state, i, sec)?;
        let u = step.unitary.get(sec.x, sec.y)?;
        let mut bob = b.clone();
        bob.extend_from_slice(&r);

        // Oracle: what the honest prover would leave behind.
        let mut honest = state.clone();
        apply_correction(&mut honest, &r, &frame)?;
        crate::protocols::generic_pv_step(&mut honest, &a, &b, &r, u)?;

        let fold = u.matmul(&PauliKey::identity(step.n_a + step.n_b).concat(&frame).matrix::<f64>());
        let t = nonlocal_apply(&mut state, &a, &bob, &fold, sec.x, step.unitary.x_count(), rounds_cap, &mut Outcomes::Sample, rng)?;
        let mut record = AttackStep {
            success: t.succeeded(),
            inqc_rounds: t.rounds.len(),
            epr_pairs: t.epr_pairs_consumed,
            log2_worst_case_epr_pairs: t.log2_worst_case_epr_pairs,
            fidelity: 0.0,
        };
        if !t.succeeded() {
            steps.push(record);
            break;
        }
        let c = reconcile_corrections(&t)?;
        let nb = step.n_b;
        let corr_b = c.b.slice(0..nb);
        frame = c.b.slice(nb..nb + n_r);

        let mut check = state.clone();
        apply_correction(&mut check, &a, &c.a)?;
        apply_correction(&mut check, &b, &corr_b)?;
        apply_correction(&mut check, &r, &frame)?;
        record.fidelity = fidelity_up_to_global_phase(&check, &honest)?;
        steps.push(record);

        // Broadcast replies: Alice measures before she knows her
        // correction and fixes the bits after the crossing round.
        let (a_bits, b_bits) = match step.reply {
            ReplyKind::MeasuredBroadcast => {
                let raw = measure_out(&mut state, &a, rng)?;
                let fixed = raw.iter().zip(c.a.paulis()).map(|(&m, p)| m ^ p.x_bit()).collect();
                (fixed, Vec::new())
            }
            ReplyKind::Quantum => {
                apply_correction(&mut state, &a, &c.a)?;
                apply_correction(&mut state, &b, &corr_b)?;
                let mut both = a.clone();
                both.extend_from_slice(&b);
                let out = measure_out(&mut state, &both, rng)?;
                let (x, y) = out.split_at(step.n_a);
                (x.to_vec(), y.to_vec())
            }
        };
        bits.push(reply_bits(step.reply, a_bits, b_bits));
    }
    let mut ok = vec![false; scheme.n_steps()];
    for (s, rec) in steps.iter().enumerate() {
        ok[s] = rec.success;
    }
    let (arrivals, flags, transcript) = replay_timing(setup, Some(coalition), &ok)?;
    Ok(AttackRun { run: assemble_run(scheme, secrets, bits, arrivals, flags, transcript), steps })
}

/// Chi-square test of homogeneity between two samples of categories.
#[derive(Clone, Debug, Serialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub categories: usize,
}

pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> Result<ChiSquareReport> {
    let mut counts: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    for &c in a {
        counts.entry(c).or_default().0 += 1.0;
    }
    for &c in b {
        counts.entry(c).or_default().1 += 1.0;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Domain("chi-square needs two nonempty samples".into()));
    }
    let total = na + nb;
    let mut stat = 0.0;
    for &(ca, cb) in counts.values() {
        let col = ca + cb;
        let ea = col * na / total;
        let eb = col * nb / total;
        stat += (ca - ea).powi(2) / ea + (cb - eb).powi(2) / eb;
    }
    let k = counts.len();
    if k < 2 {
        return Ok(ChiSquareReport { statistic: 0.0, dof: 0, p_value: 1.0, categories: k });
    }
    let dist = ChiSquared::new((k - 1) as f64).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(ChiSquareReport { statistic: stat, dof: k - 1, p_value: 1.0 - dist.cdf(stat), categories: k })
}

#[derive(Clone, Debug, Serialize)]
pub struct GenericAttackReport {
    pub scheme: String,
    pub trials: u64,
    pub rounds_cap: usize,
    /// Runs where every step's nonlocal computation succeeded.
    pub inqc_successes: u64,
    pub conditional_accepts: u64,
    pub unconditional_accepts: u64,
    pub honest_accepts: u64,
    pub conditional_acceptance: f64,
    pub unconditional_acceptance: f64,
    /// `Π_steps (1 − (1 − 4^{−n})^cap)`.
    pub predicted_success: f64,
    pub min_fidelity: f64,
    pub max_epr_pairs: usize,
    pub log2_worst_case_epr_pairs: f64,
    pub attack_always_in_time: bool,
    pub chi_square: ChiSquareReport,
    /// First attack run and first honest run, for auditing.
    pub attack_sample: Option<AttackRun>,
    pub honest_sample: Option<GenericRun>,
}

pub fn predicted_success(scheme: &GenericScheme, rounds_cap: usize) -> f64 {
    scheme
        .steps
        .iter()
        .map(|s| {
            let n = s.n_a + s.n_b + scheme.n_r;
            let fail = 1.0 - 0.25f64.powi(n as i32);
            1.0 - fail.powi(rounds_cap as i32)
        })
        .product()
}

/// Runs `trials` attack runs and `trials` honest runs and compares what the
/// verifiers observe.
pub fn run_generic_inqc_attack(
    scheme: &GenericScheme,
    setup: &PvSetup,
    coalition: &[Position<f64>],
    rounds_cap: usize,
    trials: u64,
    seed: u64,
) -> Result<GenericAttackReport> {
    if trials == 0 {
        return Err(Error::config("trials", "must be at least 1"));
    }
    let attacks = map_trials(seed, trials, |_, rng| generic_attack_run(scheme, setup, coalition, rounds_cap, rng))?;
    let honest = map_trials(seed ^ 0x9e37_79b9_7f4a_7c15, trials, |_, rng| run_generic_honest(scheme, setup, rng))?;

    let successful: Vec<&AttackRun> = attacks.iter().filter(|a| a.all_succeeded()).collect();
    let conditional_accepts = successful.iter().filter(|a| a.run.accept).count() as u64;
    let unconditional_accepts = attacks.iter().filter(|a| a.run.accept).count() as u64;
    let attack_cats: Vec<u64> = successful.iter().map(|a| a.run.category()).collect();
    let honest_cats: Vec<u64> = honest.iter().map(GenericRun::category).collect();
    let chi_square = chi_square_homogeneity(&attack_cats, &honest_cats)?;
    let min_fidelity = successful
        .iter()
        .flat_map(|a| a.steps.iter().map(|s| s.fidelity))
        .fold(1.0f64, f64::min);
    let max_epr_pairs = attacks.iter().map(|a| a.steps.iter().map(|s| s.epr_pairs).sum::<usize>()).max().unwrap_or(0);
    let log2_worst = attacks
        .iter()
        .flat_map(|a| a.steps.iter().map(|s| s.log2_worst_case_epr_pairs))
        .fold(f64::NEG_INFINITY, f64::max);
    let attack_always_in_time = successful
        .iter()
        .all(|a| a.run.observations.iter().all(|o| o.v0_in_time && o.v1_in_time));
    let n_ok = successful.len() as u64;
    Ok(GenericAttackReport {
        scheme: scheme.id.clone(),
        trials,
        rounds_cap,
        inqc_successes: n_ok,
        conditional_accepts,
        unconditional_accepts,
        honest_accepts: honest.iter().filter(|h| h.accept).count() as u64,
        conditional_acceptance: if n_ok == 0 { 0.0 } else { conditional_accepts as f64 / n_ok as f64 },
        unconditional_acceptance: unconditional_accepts as f64 / trials as f64,
        predicted_success: predicted_success(scheme, rounds_cap),
        min_fidelity,
        max_epr_pairs,
        log2_worst_case_epr_pairs: log2_worst,
        attack_always_in_time,
        chi_square,
        attack_sample: attacks.into_iter().next(),
        honest_sample: honest.into_iter().next(),
    })
}

/// Draws a random coalition placement on the line: one adversary strictly
/// inside each half, at least `Δ` from the claimed position.
pub fn random_line_coalition<R: Rng + ?Sized>(setup: &PvSetup, rng: &mut R) -> Result<Vec<Position<f64>>> {
    let l = &setup.layout;
    if l.dim() != 1 || l.verifiers.len() != 2 {
        return Err(Error::config("layout", "random placement is defined on the line"));
    }
    let (v0, v1, p) = (l.verifiers[0].coords()[0], l.verifiers[1].coords()[0], l.prover.coords()[0]);
    let d = setup.timing.delta;
    let lo = v0.min(p - d);
    let hi = v1.max(p + d);
    let left = if p - d > lo { rng.random_range(lo..p - d) } else { p - d };
    let right = if hi > p + d { rng.random_range(p + d..hi) } else { p + d };
    Ok(vec![Position::line(left), Position::line(right)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bb84_recast_attack_accepts_on_success() {
        let setup = PvSetup::line_default();
        let coalition = setup.layout.midpoints();
        let scheme = GenericScheme::bb84_recast();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let run = generic_attack_run(&scheme, &setup, &coalition, 64, &mut rng).unwrap();
            if run.all_succeeded() {
                assert!(run.run.accept);
                assert!(run.steps[0].fidelity > 1.0 - 1e-9);
            }
        }
    }

    #[test]
    fn toy_attack_keeps_frame() {
        let setup = PvSetup::line_default();
        let coalition = setup.layout.midpoints();
        let scheme = GenericScheme::interleaved_toy();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut ok = 0;
        for _ in 0..40 {
            let run = generic_attack_run(&scheme, &setup, &coalition, 64, &mut rng).unwrap();
            if run.all_succeeded() {
                ok += 1;
                assert!(run.run.accept);
                assert!(run.steps.iter().all(|s| s.fidelity > 1.0 - 1e-9));
            }
        }
        assert!(ok > 30);
    }

    #[test]
    fn chi_square_identical_samples() {
        let a = [0, 1, 1, 2, 2, 2];
        let r = chi_square_homogeneity(&a, &a).unwrap();
        assert!(r.statistic.abs() < 1e-12);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }
}
