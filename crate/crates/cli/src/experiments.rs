//! One function per experiment id. Each returns rows with their embedded
//! checks evaluated; provenance fields are filled in by the caller.

use qpv_core::adversary::{
    attack_by_id, breidbart_exact_success, run_generic_inqc_attack, AttackKind, AttackStrategy, SplitStrategy,
};
use qpv_core::auth::{
    auth_run, code_is_dominating, completeness_bound, default_impersonation_success, desync_schedule, dominates,
    honest_schedule, is_embedding, key_exchange, pair_satisfies, wauth_substitution_bound, AuthBackend, AuthParams,
    BalancedRepetitionCode, Codeword, DominationVerdict, KeyExchangeConfig, Tamper,
};
use qpv_core::entropy::{conditional_entropy_assembled, conditional_entropy_hybrid, soundness_epsilon, HybridState};
use qpv_core::montecarlo::{map_trials, Tally};
use qpv_core::protocols::{
    pv_ddim_round, pv_sequential, run_pv_round, GenericScheme, Layout, Prover, PvSetup, RoundOptions, SecurityModel,
};
use qpv_core::qsim::{fidelity_up_to_global_phase, Gate, Statevector};
use qpv_core::teleport::{
    apply_correction, reconcile_corrections, run_inqc_2party, run_inqc_nparty, NPartyFamily, Pauli, UnitaryFamily,
};
use rand::Rng;
use serde_json::{json, Value};

use crate::{CliError, Experiment, ExperimentConfig, ResultRow};

const FIDELITY_TOL: f64 = 1e-9;

/// Independent seed for the `k`-th sample set inside one experiment.
fn sub_seed(seed: u64, k: u64) -> u64 {
    seed ^ k.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

struct Rows {
    experiment: &'static str,
    rows: Vec<ResultRow>,
}

impl Rows {
    fn new(e: Experiment) -> Self {
        Self { experiment: e.id(), rows: Vec::new() }
    }

    fn push(&mut self, metric: &str, params: Value, tally: Tally, reference: Option<f64>, check: Option<bool>) {
        self.push_value(metric, params, tally, None, reference, check);
    }

    fn push_value(
        &mut self,
        metric: &str,
        params: Value,
        tally: Tally,
        value: Option<f64>,
        reference: Option<f64>,
        check: Option<bool>,
    ) {
        self.rows.push(ResultRow {
            experiment: self.experiment.to_string(),
            metric: metric.to_string(),
            params: params.to_string(),
            successes: tally.successes,
            trials: tally.trials,
            frequency: tally.frequency(),
            stderr: tally.stderr(),
            value,
            reference,
            check,
            seed: 0,
            version: String::new(),
            wall_time_s: None,
        });
    }
}

fn count(flags: impl IntoIterator<Item = bool>) -> Tally {
    let (mut s, mut t) = (0, 0);
    for f in flags {
        s += u64::from(f);
        t += 1;
    }
    Tally::new(s, t)
}

pub fn run_rows(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, CliError> {
    let rows = match cfg.experiment {
        Experiment::PvHonest => pv_honest(cfg)?,
        Experiment::PvAttack => pv_attack(cfg)?,
        Experiment::PvSequential => pv_sequential_exp(cfg)?,
        Experiment::PvDdim => pv_ddim(cfg)?,
        Experiment::Inqc => inqc(cfg)?,
        Experiment::InqcNparty => inqc_nparty(cfg)?,
        Experiment::GenericAttack => generic_attack(cfg)?,
        Experiment::CitAudit => cit_audit(cfg)?,
        Experiment::Auth => auth(cfg)?,
        Experiment::Domination => domination(cfg)?,
        Experiment::Keyex => keyex(cfg)?,
    };
    Ok(rows.rows)
}

fn strategy(cfg: &ExperimentConfig, setup: &PvSetup) -> Result<AttackStrategy, CliError> {
    let s = attack_by_id(&cfg.scenario.attack, &setup.layout).map_err(|e| CliError::config("attack", e))?;
    Ok(s.at(cfg.scenario.adversary_positions(&setup.layout)?))
}

fn pv_honest(cfg: &ExperimentConfig) -> Result<Rows, CliError> {
    let setup = cfg.scenario.setup()?;
    let n = cfg.trials();
    let accepts = map_trials(cfg.seed, n, |_, rng| {
        Ok(run_pv_round(&setup, Prover::Honest, &RoundOptions::default(), rng)?.joint_accept)
    })?;
    let t = count(accepts);
    let mut rows = Rows::new(cfg.experiment);
    rows.push("accept", json!({"verifiers": setup.layout.verifiers.len()}), t, Some(1.0), Some(t.successes == n));
    Ok(rows)
}

fn pv_attack(cfg: &ExperimentConfig) -> Result<Rows, CliError> {
    let setup = cfg.scenario.setup()?;
    let strat = strategy(cfg, &setup)?;
    let n = cfg.trials();
    let outcomes = map_trials(cfg.seed, n, |_, rng| {
        let v = run_pv_round(&setup, Prover::Attack(&strat), &RoundOptions::default(), rng)?;
        Ok((v.joint_accept, v.all_in_time()))
    })?;
    let accepts = count(outcomes.iter().map(|o| o.0));
    let late = count(outcomes.iter().map(|o| !o.1));
    let params = json!({"attack": strat.id, "model": setup.model});
    let eps = soundness_epsilon();
    let mut rows = Rows::new(cfg.experiment);
    match &strat.kind {
        AttackKind::Breidbart => {
            let p = breidbart_exact_success();
            let ok = (accepts.frequency() - p).abs() <= 0.01;
            rows.push("accept", params.clone(), accepts, Some(p), Some(ok));
        }
        AttackKind::RandomBasis => {
            rows.push("accept", params.clone(), accepts, Some(0.75), Some(accepts.consistent_with(0.75, 4.0)));
        }
        AttackKind::StoreAndWait | AttackKind::Forward => {
            rows.push("accept", params.clone(), accepts, Some(0.0), Some(accepts.successes == 0));
            rows.push("late-reply", params.clone(), late, Some(1.0), Some(late.successes == n));
        }
        AttackKind::TeleportPreShared { .. } => {
            rows.push("accept", params.clone(), accepts, Some(1.0), Some(accepts.successes == n));
            rows.push("late-reply", params.clone(), late, Some(0.0), Some(late.successes == 0));
            let exhaustive = teleport_exhaustive(&setup, &strat, cfg.seed)?;
            rows.push("exhaustive-16", params.clone(), exhaustive, Some(1.0), Some(exhaustive.successes == 16));
        }
        AttackKind::Split(_) => rows.push("accept", params.clone(), accepts, None, None),
    }
    if setup.model == SecurityModel::NoPe && strat.epr_budget == 0 {
        // The single-round ceiling 1 − h⁻¹(1/2), with the ±0.001 tolerance.
        rows.push("no-pe-ceiling", params, accepts, Some(eps), Some(accepts.frequency() <= eps + 0.001));
    }
    Ok(rows)
}

/// Every forced Bell outcome against every challenge `(θ, x)`: 16 rounds,
/// each of which must be accepted with every reply in time.
fn teleport_exhaustive(setup: &PvSetup, strat: &AttackStrategy, seed: u64) -> Result<Tally, CliError> {
    let mut flags = Vec::with_capacity(16);
    for (i, key) in [Pauli::I, Pauli::X, Pauli::Z, Pauli::XZ].into_iter().enumerate() {
        let forced = AttackStrategy::new(&strat.id, AttackKind::TeleportPreShared { forced_key: Some(key) }, strat.positions.clone());
        for theta in 0..2u8 {
            for x in 0..2u8 {
                let opts = RoundOptions { purified: false, challenge: Some((theta, x)) };
                let mut rng = qpv_core::montecarlo::trial_rng(seed, (4 * i) as u64 + u64::from(2 * theta + x));
                let v = run_pv_round(setup, Prover::Attack(&forced), &opts, &mut rng)?;
                flags.push(v.joint_accept && v.all_in_time());
            }
        }
    }
    Ok(count(flags))
}

fn pv_sequential_exp(cfg: &ExperimentConfig) -> Result<Rows, CliError> {
    let setup = cfg.scenario.setup()?;
    let strat = strategy(cfg, &setup)?;
    let rounds = cfg.scenario.sequential_rounds;
    let accepts = count(map_trials(cfg.seed, cfg.trials(), |_, rng| {
        Ok(pv_sequential(rounds, &setup, Prover::Attack(&strat), &RoundOptions::default(), rng)?.joint_accept)
    })?);
    let params = json!({"attack": strat.id, "rounds": rounds});
    let mut rows = Rows::new(cfg.experiment);
    if matches!(strat.kind, AttackKind::Breidbart) {
        let p = breidbart_exact_success().powi(rounds as i32);
        rows.push("accept", params.clone(), accepts, Some(p), Some((accepts.frequency() - p).abs() <= 0.02));
    } else {
        rows.push("accept", params.clone(), accepts, None, None);
    }
    if setup.model == SecurityModel::NoPe && strat.epr_budget == 0 {
        let ceiling = soundness_epsilon().powi(rounds as i32);
        rows.push("no-pe-ceiling", params, accepts, Some(ceiling), Some(accepts.frequency() <= ceiling));
    }
    Ok(rows)
}

fn pv_ddim(cfg: &ExperimentConfig) -> Result<Rows, CliError> {
    let d = cfg.scenario.ddim;
    let base = cfg.scenario.setup()?;
    let setup = PvSetup::new(Layout::simplex(d), base.timing, base.model);
    let n = cfg.trials();
    let outcomes = map_trials(cfg.seed, n, |_, rng| {
        let v = pv_ddim_round(d, &setup, Prover::Honest, rng)?;
        Ok((v.joint_accept, v.all_in_time()))
    })?;
    let accepts = count(outcomes.iter().map(|o| o.0));
    let timely = count(outcomes.iter().map(|o| o.1));
    let mut rows = Rows::new(cfg.experiment);
    rows.push("honest-accept", json!({"d": d}), accepts, Some(1.0), Some(accepts.successes == n));
    rows.push("in-time", json!({"d": d}), timely, Some(1.0), Some(timely.successes == n));
    Ok(rows)
}

/// Per run: succeeded, rounds executed, corrected fidelity, pairs consumed, log2 worst case.
type InqcSample = (bool, u64, f64, usize, f64);

fn inqc(cfg: &ExperimentConfig) -> Result<Rows, CliError> {
    let spec = &cfg.scenario.inqc;
    let (na, nb, cap) = (spec.n_a, spec.n_b, spec.rounds_cap);
    let n = na + nb;
    let samples: Vec<InqcSample> = map_trials(cfg.seed, cfg.trials(), |_, rng| {
        let fam = UnitaryFamily::<f64>::random(na, nb, 2, 2, rng);
        let (x, y) = (rng.random_range(0..2), rng.random_range(0..2));
        // One extra reference qubit keeps the check sensitive to entanglement.
        let psi = Statevector::random(n + 1, rng);
        let run = run_inqc_2party(&fam, x, y, &psi, cap, rng)?;
        let t = &run.transcript;
        let mut fid = f64::NAN;
        if t.succeeded() {
            let c = reconcile_corrections(t)?;
            let mut out = run.output.clone();
            apply_correction(&mut out, &(0..n).collect::<Vec<_>>(), &c.joined())?;
            let want = psi.apply_gate(&Gate::Unitary(fam.get(x, y)?.clone()), &(0..n).collect::<Vec<_>>())?;
            fid = fidelity_up_to_global_phase(&out, &want)?;
        }
        Ok((t.succeeded(), t.rounds.len() as u64, fid, t.epr_pairs_consumed, t.log2_worst_case_epr_pairs))
    })?;
    Ok(inqc_rows(cfg, json!({"n_a": na, "n_b": nb, "rounds_cap": cap}), n, cap, &samples, true))
}

fn inqc_rows(cfg: &ExperimentConfig, params: Value, n: usize, cap: usize, samples: &[InqcSample], per_round: bool) -> Rows {
    let mut rows = Rows::new(cfg.experiment);
    let runs = count(samples.iter().map(|s| s.0));
    let p = 0.25f64.powi(n as i32);
    rows.push("run-success", params.clone(), runs, Some(1.0 - (1.0 - p).powi(cap as i32)), None);
    if per_round {
        // Each executed round is an independent Bernoulli(4^{-n}) trial.
        let rounds = Tally::new(runs.successes, samples.iter().map(|s| s.1).sum());
        rows.push("per-round-success", params.clone(), rounds, Some(p), Some(rounds.consistent_with(p, 3.0)));
    }
    let succeeded: Vec<&InqcSample> = samples.iter().filter(|s| s.0).collect();
    let min_fid = succeeded.iter().map(|s| s.2).fold(1.0f64, f64::min);
    let fid = count(succeeded.iter().map(|s| s.2 >= 1.0 - FIDELITY_TOL));
    rows.push_value(
        "corrected-fidelity",
        params.clone(),
        fid,
        Some(min_fid),
        Some(1.0 - FIDELITY_TOL),
        Some(fid.successes == fid.trials && fid.trials > 0),
    );
    let mean_pairs = samples.iter().map(|s| s.3 as f64).sum::<f64>() / samples.len().max(1) as f64;
    rows.push_value("epr-pairs-consumed-mean", params.clone(), runs, Some(mean_pairs), None, None);
    let worst = samples.iter().map(|s| s.4).fold(f64::NEG_INFINITY, f64::max);
    rows.push_value("log2-worst-case-epr-pairs", params, runs, Some(worst), None, None);
    rows
}

fn inqc_nparty(cfg: &ExperimentConfig) -> Result<Rows, CliError> {
    let spec = &cfg.scenario.inqc;
    let (n, parties, cap) = (spec.n_a, spec.parties, spec.rounds_cap);
    let samples: Vec<InqcSample> = map_trials(cfg.seed, cfg.trials(), |_, rng| {
        let fam = NPartyFamily::<f64>::random(n, vec![2; parties], rng);
        let labels: Vec<usize> = (0..parties).map(|_| rng.random_range(0..2)).collect();
        let psi = Statevector::random(n + 1, rng);
        let run = run_inqc_nparty(&fam, &labels, &psi, cap, rng)?;
        let t = &run.transcript;
        let mut fid = f64::NAN;
        if t.succeeded() {
            let c = reconcile_corrections(t)?;
            let mut out = run.output.clone();
            apply_correction(&mut out, &(0..n).collect::<Vec<_>>(), &c.joined())?;
            let want = psi.apply_gate(&Gate::Unitary(fam.get(&labels)?.clone()), &(0..n).collect::<Vec<_>>())?;
            fid = fidelity_up_to_global_phase(&out, &want)?;
        }
        Ok((t.succeeded(), t.rounds.len() as u64, fid, t.epr_pairs_consumed, t.log2_worst_case_epr_pairs))
    })?;
    let mut rows = inqc_rows(cfg, json!({"n": n, "parties": parties, "rounds_cap": cap}), n, cap, &samples, false);
    // The two-party law does not apply to the nested chain.
    rows.rows[0].reference = None;
    Ok(rows)
}

fn generic_attack(cfg: &ExperimentConfig) -> Result<Rows, CliError> {
    let setup = cfg.scenario.setup()?;
    let spec = &cfg.scenario.generic;
    let scheme = GenericScheme::builtin(&spec.scheme).map_err(|e| CliError::config("generic.scheme", e))?;
    let coalition = cfg.scenario.adversary_positions(&setup.layout)?;
    let n = cfg.trials();
    let r = run_generic_inqc_attack(&scheme, &setup, &coalition, spec.rounds_cap, n, cfg.seed)?;
    let params = json!({"scheme": spec.scheme, "rounds_cap": spec.rounds_cap});
    let mut rows = Rows::new(cfg.experiment);
    let cond = Tally::new(r.conditional_accepts, r.inqc_successes);
    rows.push("conditional-accept", params.clone(), cond, Some(1.0), Some(cond.successes == cond.trials && cond.trials > 0));
    let uncond = Tally::new(r.unconditional_accepts, n);
    rows.push_value(
        "unconditional-accept",
        params.clone(),
        uncond,
        Some(r.predicted_success),
        Some(0.999),
        Some(uncond.frequency() >= 0.999),
    );
    let honest = Tally::new(r.honest_accepts, n);
    rows.push("honest-accept", params.clone(), honest, Some(1.0), Some(honest.successes == n));
    let mut chi_params = params.clone();
    chi_params["statistic"] = json!(r.chi_square.statistic);
    chi_params["dof"] = json!(r.chi_square.dof);
    rows.push_value(
        "chi-square-p",
        chi_params,
        Tally::new(r.inqc_successes, n),
        Some(r.chi_square.p_value),
        Some(0.01),
        Some(r.chi_square.p_value > 0.01),
    );
    rows.push_value(
        "min-fidelity",
        params.clone(),
        Tally::new(r.inqc_successes, n),
        Some(r.min_fidelity),
        Some(1.0 - FIDELITY_TOL),
        Some(r.min_fidelity >= 1.0 - FIDELITY_TOL),
    );
    let timely = Tally::new(u64::from(r.attack_always_in_time), 1);
    rows.push("attack-in-time", params.clone(), timely, Some(1.0), Some(r.attack_always_in_time));
    rows.push_value("log2-worst-case-epr-pairs", params, uncond, Some(r.log2_worst_case_epr_pairs), None, None);
    Ok(rows)
}

fn cit_audit(cfg: &ExperimentConfig) -> Result<Rows, CliError> {
    let spec = &cfg.scenario.cit;
    let eps = soundness_epsilon();
    let audits = map_trials(cfg.seed, cfg.trials(), |_, rng| {
        let split = SplitStrategy::random(rng, spec.max_width);
        let report = split.audit_cit()?;
        Ok((report.holds, report.lhs, split.exact_acceptance()?))
    })?;
    let params = json!({"max_width": spec.max_width});
    let mut rows = Rows::new(cfg.experiment);
    let holds = count(audits.iter().map(|a| a.0));
    let min_lhs = audits.iter().map(|a| a.1).fold(f64::INFINITY, f64::min);
    rows.push_value("cit-holds", params.clone(), holds, Some(min_lhs), Some(1.0 - 1e-7), Some(holds.successes == holds.trials));
    let under = count(audits.iter().map(|a| a.2 <= eps + 1e-9));
    let max_acc = audits.iter().map(|a| a.2).fold(0.0f64, f64::max);
    rows.push_value("acceptance-ceiling", params, under, Some(max_acc), Some(eps), Some(under.successes == under.trials));

    let devs = map_trials(sub_seed(cfg.seed, 1), spec.hybrid_states, |_, rng| {
        let h = HybridState::<f64>::random(rng.random_range(1..=3), (1, 1), rng)?;
        Ok((conditional_entropy_hybrid(&h)? - conditional_entropy_assembled(&h)?).abs())
    })?;
    let agree = count(devs.iter().map(|&d| d <= 1e-8));
    let max_dev = devs.iter().copied().fold(0.0f64, f64::max);
    rows.push_value(
        "hybrid-two-path",
        json!({"states": spec.hybrid_states}),
        agree,
        Some(max_dev),
        Some(1e-8),
        Some(agree.successes == agree.trials),
    );
    Ok(rows)
}

fn backend(cfg: &ExperimentConfig) -> Result<AuthBackend, CliError> {
    Ok(match cfg.scenario.auth.backend.as_str() {
        "replay" => AuthBackend::replay(cfg.scenario.setup()?),
        _ => AuthBackend::sampled_breidbart(),
    })
}

fn random_message<R: Rng + ?Sized>(mu: usize, rng: &mut R) -> Vec<u8> {
    (0..mu).map(|_| rng.random_range(0..2u8)).collect()
}

fn auth(cfg: &ExperimentConfig) -> Result<Rows, CliError> {
    let spec = &cfg.scenario.auth;
    let params = spec.params()?;
    let code = spec.code()?;
    let be = backend(cfg)?;
    let n = cfg.trials();
    let failures = count(map_trials(cfg.seed, n, |_, rng| {
        let m = random_message(code.mu, rng);
        Ok(!auth_run(&m, &m, &code, &params, &honest_schedule(code.n()), &be, rng)?.outcome.accept)
    })?);
    let bound = completeness_bound(code.n(), &params);
    let mut rows = Rows::new(cfg.experiment);
    rows.push(
        "honest-failure",
        json!({"lambda": params.lambda, "q": params.q, "ell": code.ell, "mu": code.mu, "backend": spec.backend}),
        failures,
        Some(bound),
        Some(failures.frequency() <= bound + 3.0 * failures.stderr()),
    );

    let trend_trials = spec.trend_trials.unwrap_or(n);
    let mut freqs = Vec::new();
    for (k, &lambda) in spec.trend_lambdas.iter().enumerate() {
        let p = AuthParams::new(spec.q, lambda)?;
        let code = BalancedRepetitionCode::new(4 * lambda, spec.mu)?;
        let schedule = desync_schedule(code.n());
        let accepts = count(map_trials(sub_seed(cfg.seed, k as u64 + 1), trend_trials, |_, rng| {
            // Prover on 0, verifiers on 1: the shifted 0-block of the prover
            // then faces the verifiers' 1-block, and no impersonated bit
            // has to answer a verifier 0 with ⊥.
            let m = vec![0u8; code.mu];
            let mut mp = m.clone();
            mp[0] = 1;
            Ok(auth_run(&m, &mp, &code, &p, &schedule, &be, rng)?.outcome.accept)
        })?);
        freqs.push(accepts.frequency());
        rows.push("desync-accept", json!({"lambda": lambda, "q": spec.q, "ell": code.ell, "mu": code.mu}), accepts, None, None);
    }
    if freqs.len() >= 2 {
        let steps = count(freqs.windows(2).map(|w| w[1] < w[0]));
        rows.push(
            "desync-trend-decreasing",
            json!({"lambdas": spec.trend_lambdas}),
            steps,
            Some(1.0),
            Some(steps.successes == steps.trials),
        );
    }
    Ok(rows)
}

fn verdict_json(v: &DominationVerdict) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn domination(cfg: &ExperimentConfig) -> Result<Rows, CliError> {
    let spec = &cfg.scenario.domination;
    let mut rows = Rows::new(cfg.experiment);
    for &(ell, mu) in &spec.codes {
        let code = BalancedRepetitionCode::new(ell, mu)?;
        let lambda = code.guaranteed_lambda();
        let r = code_is_dominating(&code, lambda, spec.budget)?;
        let ok = r.dominating && !r.budget_exhausted;
        rows.push_value(
            "code-dominating",
            json!({"ell": ell, "mu": mu, "lambda": lambda, "exhaustive": r.exhaustive, "budget": spec.budget,
                   "budget_exhausted": r.budget_exhausted,
                   "failure": r.failure.as_ref().map(|(c, cp, v)| json!({"c": c.to_string(), "c_prime": cp.to_string(), "verdict": verdict_json(v)}))}),
            Tally::new(u64::from(ok), 1),
            Some(r.pairs_checked as f64),
            None,
            Some(ok),
        );
    }
    for pair in &spec.pairs {
        let c = Codeword::parse(&pair.c)?;
        let cp = Codeword::parse(&pair.c_prime)?;
        let v = dominates(&c, &cp, pair.lambda, spec.budget)?;
        // A reported witness is re-checked from scratch.
        let witness_ok = match &v {
            DominationVerdict::Counterexample { e, e_prime } => {
                is_embedding(e, &c) && is_embedding(e_prime, &cp) && !pair_satisfies(e, e_prime, pair.lambda)
            }
            _ => true,
        };
        let decided = !matches!(v, DominationVerdict::BudgetExhausted { .. });
        let check = pair.expect_dominates.map(|want| decided && witness_ok && v.is_dominating() == want);
        rows.push(
            "pair-dominates",
            json!({"c": pair.c, "c_prime": pair.c_prime, "lambda": pair.lambda, "verdict": verdict_json(&v),
                   "witness": match &v {
                       DominationVerdict::Counterexample { e, e_prime } => json!({"e": e.to_string(), "e_prime": e_prime.to_string()}),
                       _ => Value::Null,
                   }}),
            Tally::new(u64::from(v.is_dominating()), 1),
            pair.expect_dominates.map(|b| f64::from(u8::from(b))),
            check,
        );
    }
    Ok(rows)
}

fn keyex(cfg: &ExperimentConfig) -> Result<Rows, CliError> {
    let spec = &cfg.scenario.keyex;
    let params = spec.params()?;
    let be = AuthBackend::sampled_breidbart();
    let n = cfg.trials();
    let honest_cfg = KeyExchangeConfig { qkd_rounds: spec.qkd_rounds, params, tamper: Tamper::None };
    let honest = map_trials(cfg.seed, n, |_, rng| {
        let run = key_exchange(&honest_cfg, &be, rng)?;
        Ok((run.keys_agree(), run.verifier_key.len()))
    })?;
    let agree = count(honest.iter().map(|h| h.0));
    let mean_len = honest.iter().map(|h| h.1 as f64).sum::<f64>() / n as f64;
    let base = json!({"lambda": params.lambda, "q": params.q, "qkd_rounds": spec.qkd_rounds});
    let mut rows = Rows::new(cfg.experiment);
    rows.push_value("honest-keys-agree", base.clone(), agree, Some(mean_len), Some(1.0), Some(agree.successes == n));

    let tamper_cfg = KeyExchangeConfig { tamper: spec.tamper(), ..honest_cfg };
    let rejected = count(map_trials(sub_seed(cfg.seed, 1), n, |_, rng| {
        Ok(key_exchange(&tamper_cfg, &be, rng)?.verifier_key.is_empty())
    })?);
    // One flipped echo bit changes one block pair: ℓ = 4λ positions where a
    // 0 must pass as a 1, each surviving with probability at most δ.
    let delta = wauth_substitution_bound(params.q, default_impersonation_success())?;
    let reference = 1.0 - delta.powi((4 * params.lambda) as i32);
    let mut tp = base;
    tp["tamper_bit"] = json!(spec.tamper_bit);
    rows.push(
        "tamper-empty-key",
        tp,
        rejected,
        Some(reference),
        Some(rejected.frequency() >= reference - 3.0 * rejected.stderr_at(reference)),
    );
    Ok(rows)
}
