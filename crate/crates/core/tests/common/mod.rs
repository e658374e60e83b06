#![allow(dead_code)]

use bellgame_core::{
    Advisor, BellFunctional, BellScenario, DeterministicStrategy, Memory, MultistageGame, Shape,
};
use proptest::prelude::*;

/// Small shapes whose profile spaces stay in the low thousands under full
/// memory: up to three players, binary actions when there are three.
pub fn small_shape() -> impl Strategy<Value = Shape> {
    (1usize..=3).prop_flat_map(|n| {
        let max_actions = if n == 3 { 2 } else { 3 };
        (
            prop::collection::vec(1usize..=2, n),
            prop::collection::vec(2usize..=max_actions, n),
        )
            .prop_map(|(t, a)| Shape::new(t, a).unwrap())
    })
}

/// Depths m_i ∈ [0, i].
pub fn depths(players: usize) -> impl Strategy<Value = Vec<usize>> {
    (0..players).map(|i| 0..=i).collect::<Vec<_>>()
}

fn normalized(raw: Vec<f64>) -> Vec<f64> {
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

pub fn functional(shape: Shape) -> impl Strategy<Value = BellFunctional> {
    prop::collection::vec(-1.0f64..1.0, shape.cells())
        .prop_map(move |c| BellFunctional::new(shape.clone(), c).unwrap())
}

pub fn game() -> impl Strategy<Value = MultistageGame> {
    small_shape().prop_flat_map(|shape| {
        let n = shape.players();
        let priors: Vec<_> = shape
            .types()
            .iter()
            .map(|&t| prop::collection::vec(0.05f64..1.0, t).prop_map(normalized))
            .collect();
        let payoffs = prop::collection::vec(prop::collection::vec(-1.0f64..1.0, shape.cells()), n);
        (Just(shape), depths(n), priors, payoffs).prop_map(|(shape, m, prior, payoffs)| {
            let scenario = BellScenario::new(shape, Memory::from_depths(&m)).unwrap();
            MultistageGame::new(scenario, prior, payoffs).unwrap()
        })
    })
}

pub fn profile(scenario: &BellScenario) -> impl Strategy<Value = DeterministicStrategy> {
    let scenario = scenario.clone();
    let tables: Vec<_> = (0..scenario.players())
        .map(|i| prop::collection::vec(0..scenario.shape.actions()[i], scenario.setting_count(i)))
        .collect();
    tables.prop_map(move |t| DeterministicStrategy::new(&scenario, t).unwrap())
}

pub fn advisor(scenario: &BellScenario) -> impl Strategy<Value = Advisor> {
    let scenario = scenario.clone();
    (1usize..=4).prop_flat_map(move |k| {
        (
            prop::collection::vec(0.05f64..1.0, k).prop_map(normalized),
            prop::collection::vec(profile(&scenario), k),
        )
            .prop_map(|(w, p)| Advisor::new(w, p).unwrap())
    })
}

pub fn game_with_advisor() -> impl Strategy<Value = (MultistageGame, Advisor)> {
    game().prop_flat_map(|g| {
        let a = advisor(g.scenario());
        (Just(g), a)
    })
}
