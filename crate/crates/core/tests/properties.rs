use proptest::prelude::*;
use qpv_core::adversary::{generic_attack_run, SplitStrategy};
use qpv_core::auth::{dominates_brute_force, dominates_search, Codeword, DominationVerdict};
use qpv_core::entropy::{binary_entropy, binary_entropy_inverse, von_neumann_entropy};
use qpv_core::montecarlo::{map_trials, trial_rng};
use qpv_core::protocols::{GenericScheme, PvSetup};
use qpv_core::qsim::{fidelity_up_to_global_phase, Gate, Statevector};
use qpv_core::spacetime::{distance, Position};
use qpv_core::teleport::{apply_correction, teleport_in_place, Outcomes, Pauli, PauliKey};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pauli() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Z), Just(Pauli::XZ)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn corrected_teleport_is_identity(seed in any::<u64>(), keys in prop::collection::vec(pauli(), 1..4)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = keys.len();
        let psi = Statevector::<f64>::random(n + 1, &mut rng);
        let mut s = psi.clone();
        let data: Vec<usize> = (0..n).collect();
        let key = teleport_in_place(&mut s, &data, &mut Outcomes::script([PauliKey::new(keys.clone())]), &mut rng).unwrap();
        prop_assert_eq!(key.paulis(), keys.as_slice());
        apply_correction(&mut s, &data, &key).unwrap();
        prop_assert!(fidelity_up_to_global_phase(&s, &psi).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn f32_teleport_agrees_with_f64(seed in any::<u64>(), k in pauli()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = Statevector::<f32>::random(1, &mut rng);
        let mut s = psi.clone();
        let key = teleport_in_place(&mut s, &[0], &mut Outcomes::script([PauliKey::new(vec![k])]), &mut rng).unwrap();
        apply_correction(&mut s, &[0], &key).unwrap();
        prop_assert!(fidelity_up_to_global_phase(&s, &psi).unwrap() > 1.0 - 1e-5);
    }

    #[test]
    fn pauli_key_matrix_is_multiplicative(a in prop::collection::vec(pauli(), 2), b in prop::collection::vec(pauli(), 2), seed in any::<u64>()) {
        let (ka, kb) = (PauliKey::new(a), PauliKey::new(b));
        let psi = Statevector::<f64>::random(2, &mut ChaCha8Rng::seed_from_u64(seed));
        let sequential = psi
            .apply_gate(&Gate::Unitary(kb.matrix()), &[0, 1]).unwrap()
            .apply_gate(&Gate::Unitary(ka.matrix()), &[0, 1]).unwrap();
        let composed = psi.apply_gate(&Gate::Unitary(ka.compose(&kb).matrix()), &[0, 1]).unwrap();
        prop_assert!(fidelity_up_to_global_phase(&sequential, &composed).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn binary_entropy_inverse_round_trips(y in 0.0f64..1.0) {
        let p = binary_entropy_inverse(y).unwrap();
        prop_assert!((0.0..=0.5).contains(&p));
        prop_assert!((binary_entropy(p).unwrap() - y).abs() < 1e-9);
    }

    #[test]
    fn reduced_entropy_is_symmetric_and_bounded(seed in any::<u64>(), na in 1usize..3) {
        let psi = Statevector::<f64>::random(3, &mut ChaCha8Rng::seed_from_u64(seed));
        let a: Vec<usize> = (0..na).collect();
        let b: Vec<usize> = (na..3).collect();
        let sa = von_neumann_entropy(&psi.partial_trace(&a).unwrap()).unwrap();
        let sb = von_neumann_entropy(&psi.partial_trace(&b).unwrap()).unwrap();
        prop_assert!((sa - sb).abs() < 1e-8);
        prop_assert!(sa >= -1e-12 && sa <= na.min(3 - na) as f64 + 1e-9);
    }

    #[test]
    fn distance_is_a_metric(a in prop::collection::vec(-5.0f64..5.0, 2), b in prop::collection::vec(-5.0f64..5.0, 2), c in prop::collection::vec(-5.0f64..5.0, 2)) {
        let (a, b, c) = (Position::new(a).unwrap(), Position::new(b).unwrap(), Position::new(c).unwrap());
        let ab = distance(&a, &b).unwrap();
        prop_assert!((ab - distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(ab <= distance(&a, &c).unwrap() + distance(&c, &b).unwrap() + 1e-12);
    }

    #[test]
    fn cit_holds_for_random_splits(seed in any::<u64>()) {
        let split = SplitStrategy::random(&mut ChaCha8Rng::seed_from_u64(seed), 2);
        let r = split.audit_cit().unwrap();
        prop_assert!(r.holds, "lhs {}", r.lhs);
        prop_assert!(split.exact_acceptance().unwrap() <= qpv_core::entropy::soundness_epsilon() + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn search_agrees_with_brute_force(
        c in prop::collection::vec(0u8..2, 1..=6),
        flips in prop::collection::vec(any::<bool>(), 6),
        lambda in 1usize..=2,
    ) {
        let cp: Vec<u8> = c.iter().zip(&flips).map(|(&b, &f)| b ^ u8::from(f)).collect();
        let (c, cp) = (Codeword::new(c).unwrap(), Codeword::new(cp).unwrap());
        let brute = dominates_brute_force(&c, &cp, lambda).unwrap();
        let search = dominates_search(&c, &cp, lambda, 1_000_000).unwrap();
        let exhausted = matches!(search, DominationVerdict::BudgetExhausted { .. });
        prop_assert!(!exhausted);
        prop_assert_eq!(brute.is_dominating(), search.is_dominating());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// The generic attack works for any per-step unitary family, not only
    /// the built-in schemes.
    #[test]
    fn generic_attack_accepts_random_schemes(scheme_seed in any::<u64>(), steps in 1usize..3, seed in any::<u64>()) {
        let scheme = GenericScheme::builtin(&format!("random:{steps}:1:{scheme_seed}")).unwrap();
        let setup = PvSetup::line_default();
        let coalition = setup.layout.midpoints();
        let mut rng = trial_rng(seed, 0);
        let run = generic_attack_run(&scheme, &setup, &coalition, 64, &mut rng).unwrap();
        if run.all_succeeded() {
            prop_assert!(run.run.accept);
            for s in &run.steps {
                prop_assert!(s.fidelity > 1.0 - 1e-9);
            }
        }
    }
}

#[test]
fn trials_do_not_depend_on_thread_count() {
    let f = |_: u64, r: &mut ChaCha8Rng| Ok(r.random::<u64>());
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| map_trials(11, 257, f)).unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| map_trials(11, 257, f)).unwrap();
    assert_eq!(one, four);
}
