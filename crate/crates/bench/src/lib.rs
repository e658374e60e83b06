//! Shared fixtures for the benchmarks in `benches/`.

use bellgame_core::{load_scenario, BellFunctional, Memory};

/// Functional and memory of a catalog scenario.
pub fn fixture(name: &str) -> (BellFunctional, Memory) {
    let rec = load_scenario(name).expect("catalog scenario");
    let memory = rec.memory().clone();
    (rec.functional, memory)
}
