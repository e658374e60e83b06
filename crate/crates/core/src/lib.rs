//! Multistage games of incomplete information treated as Bell scenarios in
//! which later players receive earlier players' outcomes.
//!
//! Payoff bounds come in four flavours: classical advisors (exhaustive
//! enumeration of deterministic strategies), quantum advisors (explicit
//! strategies and see-saw optimization), no-signaling boxes (linear
//! programming) and the algebraic ceiling.

// lets shared test helpers name the crate by its external path
#[cfg(test)]
extern crate self as bellgame_core;

pub mod classical;
pub mod distributions;
pub mod error;
pub mod game;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod nonsignaling;
#[cfg(test)]
mod proptests;
pub mod quantum;
pub mod scenarios;
pub mod seesaw;
pub mod shape;

pub use classical::{
    classical_bound, classical_bound_limited, deviation_gain, enumerate_profiles,
    is_correlated_equilibrium, payoff_vertices, support_function, weighted_functional,
    ClassicalBound, ProfileSpace, DEFAULT_PROFILE_LIMIT,
};
pub use distributions::{
    advisor_distribution, compose_behaviors, sequential_consistency_check, strategy_distribution,
    Advisor, BehaviorProfile, ConditionalDistribution, DeterministicStrategy,
};
pub use error::{Diagnostic, Error, Result};
pub use game::{
    expected_payoff, functional_from_game, game_from_functional, validate_game, BellFunctional,
    GameFile, MultistageGame, PayoffWeights, ReferenceBounds,
};
pub use io::{read_json, to_canonical_json, write_canonical};
pub use nonsignaling::{
    algebraic_max, ns_bound, ns_problem_size, wire_box, AugmentedBox, NsBound, Wiring,
    MAX_NS_VARIABLES,
};
pub use quantum::{
    evaluate_quantum_strategy, make_ghz_svetlichny, make_singlet_triangle, make_tripartite_qecd,
    quantum_value, validate_quantum, MeasurementFamily, QuantumState, QuantumStrategy,
};
pub use scenarios::{
    list_scenarios, load_scenario, verify_scenario, Builtin, Check, Quantity, Reference,
    ScenarioRecord,
};
pub use seesaw::{
    quantum_equilibrium_gain, seesaw_optimize, SeesawOptions, SeesawResult, SeesawRun,
};
pub use shape::{BellScenario, Memory, Shape, Window};
