use qpv_core::adversary::{attack_breidbart, attack_teleport_pre_shared};
use qpv_core::montecarlo::{run_trials, trial_rng};
use qpv_core::protocols::{pv_bb84_purified_round, pv_ddim_round, run_pv_round, Prover, PvSetup, RoundOptions, SecurityModel};
use qpv_core::spacetime::Position;
use qpv_core::Error;

#[test]
fn honest_prover_is_accepted_in_every_dimension() {
    for d in 1..=3 {
        let setup = PvSetup::simplex_default(d);
        let t = run_trials(d as u64, 200, |rng| Ok(pv_ddim_round(d, &setup, Prover::Honest, rng)?.joint_accept)).unwrap();
        assert_eq!(t.successes, 200, "d = {d}");
    }
}

#[test]
fn purified_round_matches_prepared_round_for_breidbart() {
    let setup = PvSetup::line_default();
    let attack = attack_breidbart(&setup.layout);
    let p = qpv_core::adversary::breidbart_exact_success();
    let t = run_trials(2, 20_000, |rng| Ok(pv_bb84_purified_round(&setup, Prover::Attack(&attack), rng)?.joint_accept)).unwrap();
    assert!(t.consistent_with(p, 4.0), "{}", t.frequency());
}

#[test]
fn entanglement_is_refused_under_no_pe() {
    let setup = PvSetup::line_default();
    let attack = attack_teleport_pre_shared(&setup.layout);
    let err = run_pv_round(&setup, Prover::Attack(&attack), &RoundOptions::default(), &mut trial_rng(3, 0)).unwrap_err();
    assert!(matches!(err, Error::EntanglementForbidden { .. }));
    let open = setup.with_model(SecurityModel::Unrestricted);
    assert!(run_pv_round(&open, Prover::Attack(&attack), &RoundOptions::default(), &mut trial_rng(3, 0)).unwrap().joint_accept);
}

#[test]
fn adversaries_inside_the_exclusion_radius_are_refused() {
    let setup = PvSetup::line_default();
    let attack = attack_breidbart(&setup.layout).at(vec![Position::line(0.45), Position::line(0.9)]);
    let err = run_pv_round(&setup, Prover::Attack(&attack), &RoundOptions::default(), &mut trial_rng(4, 0)).unwrap_err();
    assert!(matches!(err, Error::TooClose { index: 0, .. }));
}
