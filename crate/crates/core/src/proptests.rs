#[path = "../tests/common/mod.rs"]
mod common;

use bellgame_core::classical::classical_bound;
use bellgame_core::nonsignaling::algebraic_max;
use bellgame_core::quantum::evaluate_quantum_strategy;
use bellgame_core::seesaw::random_strategy;
use bellgame_core::{
    advisor_distribution, deviation_gain, expected_payoff, functional_from_game,
    game_from_functional, ns_bound, quantum_value, sequential_consistency_check,
    strategy_distribution, to_canonical_json, BellScenario, ConditionalDistribution, Memory,
    MultistageGame, Shape,
};
use proptest::prelude::*;

fn binary_shape() -> impl Strategy<Value = Shape> {
    (2usize..=3).prop_flat_map(|n| {
        prop::collection::vec(1usize..=2, n).prop_map(move |t| Shape::new(t, vec![2; n]).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn advisor_is_mixture_of_profiles((game, advisor) in common::game_with_advisor()) {
        let s = game.scenario();
        let mixed = advisor_distribution(&advisor, s).unwrap();
        let parts: Vec<ConditionalDistribution> =
            advisor.profiles.iter().map(|p| strategy_distribution(p, s).unwrap()).collect();
        let weighted: Vec<(f64, &ConditionalDistribution)> =
            advisor.weights.iter().copied().zip(&parts).collect();
        let reference = ConditionalDistribution::mixture(game.shape(), &weighted).unwrap();
        prop_assert!(mixed.max_abs_diff(&reference) <= 1e-12);
        prop_assert!(sequential_consistency_check(&mixed, 1e-12));
    }

    #[test]
    fn deviation_gain_is_nonnegative((game, advisor) in common::game_with_advisor()) {
        for i in 0..game.players() {
            prop_assert!(deviation_gain(&game, &advisor, i).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn payoff_equals_functional_value((game, advisor) in common::game_with_advisor()) {
        let dist = advisor_distribution(&advisor, game.scenario()).unwrap();
        for i in 0..game.players() {
            let f = functional_from_game(&game, i).unwrap();
            let u = expected_payoff(&game, &dist, i).unwrap();
            prop_assert!((f.value(&dist).unwrap() - u).abs() <= 1e-12);
        }
    }

    #[test]
    fn game_functional_round_trip(game in common::game()) {
        let f = functional_from_game(&game, 0).unwrap();
        let back = game_from_functional(&f, game.prior().to_vec(), game.memory().clone()).unwrap();
        let g = functional_from_game(&back, 0).unwrap();
        prop_assert!(f.max_abs_diff(&g) <= 1e-12);
    }

    #[test]
    fn canonical_json_is_stable(game in common::game()) {
        let text = to_canonical_json(&game).unwrap();
        let back: MultistageGame = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &game);
        prop_assert_eq!(to_canonical_json(&back).unwrap(), text);
    }

    #[test]
    fn more_memory_never_lowers_the_classical_bound(
        (f, a, b) in common::small_shape().prop_flat_map(|shape| {
            let n = shape.players();
            (common::functional(shape), common::depths(n), common::depths(n))
        })
    ) {
        let lo: Vec<usize> = a.iter().zip(&b).map(|(x, y)| *x.min(y)).collect();
        let hi: Vec<usize> = a.iter().zip(&b).map(|(x, y)| *x.max(y)).collect();
        let (mlo, mhi) = (Memory::from_depths(&lo), Memory::from_depths(&hi));
        prop_assert!(mlo.is_subset_of(&mhi));
        let vlo = classical_bound(&f, &mlo).unwrap().value;
        let vhi = classical_bound(&f, &mhi).unwrap().value;
        prop_assert!(vlo <= vhi + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn bounds_are_sandwiched(
        (f, m, seed) in binary_shape().prop_flat_map(|shape| {
            let n = shape.players();
            (common::functional(shape), common::depths(n), any::<u64>())
        })
    ) {
        let memory = Memory::from_depths(&m);
        let scenario = BellScenario::new(f.shape().clone(), memory.clone()).unwrap();
        let classical = classical_bound(&f, &memory).unwrap().value;
        let ns = ns_bound(&f, &memory).unwrap().value;
        let alg = algebraic_max(&f);
        let qs = random_strategy(&scenario, &vec![2; scenario.players()], seed).unwrap();
        let q = quantum_value(&qs, &f, &memory).unwrap();
        prop_assert!(classical <= ns + 1e-7, "classical {} > ns {}", classical, ns);
        prop_assert!(q <= ns + 1e-7, "quantum {} > ns {}", q, ns);
        prop_assert!(ns <= alg + 1e-7, "ns {} > algebraic {}", ns, alg);
    }

    #[test]
    fn quantum_rows_are_normalized(
        (shape, m, seed) in binary_shape().prop_flat_map(|shape| {
            let n = shape.players();
            (Just(shape), common::depths(n), any::<u64>())
        })
    ) {
        let scenario = BellScenario::new(shape, Memory::from_depths(&m)).unwrap();
        let qs = random_strategy(&scenario, &vec![2; scenario.players()], seed).unwrap();
        let dist = evaluate_quantum_strategy(&qs, &scenario).unwrap();
        for t in 0..scenario.shape.type_profiles() {
            let s: f64 = dist.row(t).iter().sum();
            prop_assert!((s - 1.0).abs() <= 1e-10);
        }
        prop_assert!(sequential_consistency_check(&dist, 1e-10));
    }
}
