//! See-saw optimization of quantum payoffs: alternate exact single-player
//! best responses with a best-state update. Yields lower bounds only.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{functional_from_game, BellFunctional, MultistageGame};
use crate::linalg::{c, identity, outer, positive_part, top_eigenpair, trace, CMatrix, CVector};
use crate::quantum::{for_each_branch, MeasurementFamily, QuantumState, QuantumStrategy};
use crate::shape::{BellScenario, Memory};

/// Largest total Hilbert-space dimension the optimizer accepts.
pub const MAX_TOTAL_DIM: usize = 1 << 10;

/// Eigenvalues at or below this count as non-positive in updates.
const POSITIVE_CUTOFF: f64 = 1e-12;

fn scenario_for(functional: &BellFunctional, memory: &Memory) -> Result<BellScenario> {
    BellScenario::new(functional.shape().clone(), memory.clone())
}

fn require_binary(scenario: &BellScenario, player: usize) -> Result<()> {
    let a = scenario.shape.actions()[player];
    if a != 2 {
        return Err(Error::Unsupported(format!(
            "see-saw updates need binary outcomes; player {} has {a}",
            player + 1
        )));
    }
    Ok(())
}

/// Σ α_{a,θ} Tr[(⊗ M) ρ] without re-validating the strategy.
fn value_of(functional: &BellFunctional, qs: &QuantumStrategy, scenario: &BellScenario) -> f64 {
    let width = scenario.shape.action_profiles();
    let alpha = functional.coefficients();
    let mut total = 0.0;
    for_each_branch(qs, scenario, None, |t, a, x| {
        total += alpha[t * width + scenario.shape.action_index(a)] * x[(0, 0)].re;
    });
    total
}

/// Optimal binary POVMs for `player` with everything else fixed, and the
/// resulting functional value. For each setting the new M_0 projects onto
/// the strictly positive eigenspace of F_0 − F_1.
pub fn best_response_update(
    functional: &BellFunctional,
    qs: &QuantumStrategy,
    memory: &Memory,
    player: usize,
) -> Result<(MeasurementFamily, f64)> {
    let scenario = scenario_for(functional, memory)?;
    qs.check_scenario(&scenario)?;
    require_binary(&scenario, player)?;
    let shape = &scenario.shape;
    let d = qs.dims()[player];
    let settings = scenario.setting_count(player);
    let width = shape.action_profiles();
    let alpha = functional.coefficients();
    let mut f = vec![[CMatrix::zeros(d, d), CMatrix::zeros(d, d)]; settings];
    let mut theta = vec![0; shape.players()];
    for_each_branch(qs, &scenario, Some(player), |t, a, x| {
        let w = alpha[t * width + shape.action_index(a)];
        if w != 0.0 {
            shape.decode_types(t, &mut theta);
            let s = scenario.setting_index(player, theta[player], a);
            f[s][a[player]] += x * c(w, 0.0);
        }
    });
    let mut value = 0.0;
    let povms = f
        .iter()
        .map(|[f0, f1]| {
            let (m0, gain) = positive_part(&(f0 - f1), POSITIVE_CUTOFF);
            value += trace(f1).re + gain;
            let m1 = identity(d) - &m0;
            vec![m0, m1]
        })
        .collect();
    Ok((MeasurementFamily::new(povms)?, value))
}

/// B = Σ α_{a,θ} ⊗_i M^{(θ_i,h_i)}_{a_i} over realized histories.
fn payoff_operator(
    functional: &BellFunctional,
    qs: &QuantumStrategy,
    scenario: &BellScenario,
) -> CMatrix {
    let shape = &scenario.shape;
    let n = shape.players();
    let d: usize = qs.dims().iter().product();
    let mut b = CMatrix::zeros(d, d);
    let mut theta = vec![0; n];
    let mut a = vec![0; n];
    for t in 0..shape.type_profiles() {
        shape.decode_types(t, &mut theta);
        for k in 0..shape.action_profiles() {
            let w = functional.coefficient(t, k);
            if w == 0.0 {
                continue;
            }
            shape.decode_actions(k, &mut a);
            let mut op = CMatrix::from_element(1, 1, c(w, 0.0));
            for i in 0..n {
                let s = scenario.setting_index(i, theta[i], &a);
                op = op.kronecker(qs.family(i).element(s, a[i]));
            }
            b += op;
        }
    }
    b
}

/// Replaces ρ by the top eigenvector of the payoff operator; the value is
/// its eigenvalue.
pub fn state_update(
    functional: &BellFunctional,
    qs: &QuantumStrategy,
    memory: &Memory,
) -> Result<(QuantumState, f64)> {
    let scenario = scenario_for(functional, memory)?;
    qs.check_scenario(&scenario)?;
    let b = payoff_operator(functional, qs, &scenario);
    let (value, v) = top_eigenpair(&b);
    Ok((QuantumState::pure(qs.dims().to_vec(), &v)?, value))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeesawOptions {
    pub restarts: usize,
    pub seed: u64,
    /// stop once a sweep improves the value by less than this
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            seed: 0,
            tol: 1e-10,
            max_sweeps: 500,
        }
    }
}

/// One restart: the value after every sweep (index 0 is the random start).
#[derive(Debug, Clone)]
pub struct SeesawRun {
    pub values: Vec<f64>,
    pub strategy: QuantumStrategy,
}

impl SeesawRun {
    pub fn value(&self) -> f64 {
        *self.values.last().expect("at least the initial value")
    }
}

#[derive(Debug, Clone)]
pub struct SeesawResult {
    pub best_value: f64,
    pub best_restart: usize,
    pub best: QuantumStrategy,
    pub runs: Vec<SeesawRun>,
}

impl SeesawResult {
    /// Final value of every restart, in restart order.
    pub fn restart_values(&self) -> Vec<f64> {
        self.runs.iter().map(SeesawRun::value).collect()
    }
}

fn gaussian_vector(rng: &mut ChaCha8Rng, d: usize) -> CVector {
    let v = CVector::from_fn(d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im)
    });
    let norm = v.norm();
    v / c(norm, 0.0)
}

/// Haar-random pure state and random rank-1 projective binary POVMs.
pub fn random_strategy(
    scenario: &BellScenario,
    dims: &[usize],
    seed: u64,
) -> Result<QuantumStrategy> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: usize = dims.iter().product();
    let state = QuantumState::pure(dims.to_vec(), &gaussian_vector(&mut rng, total))?;
    let families = (0..scenario.players())
        .map(|i| {
            let d = dims[i];
            let povms = (0..scenario.setting_count(i))
                .map(|_| {
                    let m0 = outer(&gaussian_vector(&mut rng, d));
                    let m1 = identity(d) - &m0;
                    vec![m0, m1]
                })
                .collect();
            MeasurementFamily::new(povms)
        })
        .collect::<Result<Vec<_>>>()?;
    QuantumStrategy::new(state, families)
}

fn run_once(
    functional: &BellFunctional,
    memory: &Memory,
    scenario: &BellScenario,
    dims: &[usize],
    seed: u64,
    opts: &SeesawOptions,
) -> Result<SeesawRun> {
    let mut qs = random_strategy(scenario, dims, seed)?;
    let mut values = vec![value_of(functional, &qs, scenario)];
    for _ in 0..opts.max_sweeps {
        let before = *values.last().expect("nonempty");
        for k in 0..scenario.players() {
            let (family, _) = best_response_update(functional, &qs, memory, k)?;
            qs = qs.with_family(k, family)?;
        }
        let (state, value) = state_update(functional, &qs, memory)?;
        qs = qs.with_state(state)?;
        values.push(value);
        if value - before < opts.tol {
            break;
        }
    }
    Ok(SeesawRun {
        values,
        strategy: qs,
    })
}

/// Best value over `opts.restarts` independent see-saw runs. Restart r is
/// seeded with `seed + r`, so the result does not depend on scheduling.
pub fn seesaw_optimize(
    functional: &BellFunctional,
    dims: &[usize],
    memory: &Memory,
    opts: &SeesawOptions,
) -> Result<SeesawResult> {
    let scenario = scenario_for(functional, memory)?;
    if dims.len() != scenario.players() {
        return Err(Error::Shape(format!(
            "{} local dimensions for {} players",
            dims.len(),
            scenario.players()
        )));
    }
    if dims.contains(&0) {
        return Err(Error::Shape("local dimension 0".into()));
    }
    let fits = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .is_some_and(|t| t <= MAX_TOTAL_DIM);
    if !fits {
        return Err(Error::TooLarge(format!(
            "total dimension of {dims:?} exceeds {MAX_TOTAL_DIM}"
        )));
    }
    for i in 0..scenario.players() {
        require_binary(&scenario, i)?;
    }
    if opts.restarts == 0 {
        return Err(Error::Shape("at least one restart is required".into()));
    }
    let runs = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            run_once(
                functional,
                memory,
                &scenario,
                dims,
                opts.seed.wrapping_add(r as u64),
                opts,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let (best_restart, best_value) = runs.iter().map(SeesawRun::value).enumerate().fold(
        (0, f64::NEG_INFINITY),
        |(bi, bv), (i, v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        },
    );
    Ok(SeesawResult {
        best_value,
        best_restart,
        best: runs[best_restart].strategy.clone(),
        runs,
    })
}

/// How much `player` could raise its own expected payoff by changing only
/// its measurements. Non-negative up to rounding.
pub fn quantum_equilibrium_gain(
    game: &MultistageGame,
    qs: &QuantumStrategy,
    player: usize,
) -> Result<f64> {
    let functional = functional_from_game(game, player)?;
    let scenario = game.scenario();
    qs.check_scenario(scenario)?;
    let current = value_of(&functional, qs, scenario);
    let (_, best) = best_response_update(&functional, qs, game.memory(), player)?;
    Ok(best - current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{
        make_ghz_svetlichny, make_singlet_triangle, quantum_value, rotate_setting,
    };
    use crate::shape::Shape;
    use approx::assert_relative_eq;

    fn triangle() -> BellFunctional {
        BellFunctional::from_fn(Shape::uniform(2, 3, 2).unwrap(), |t, a| {
            let parity = if (a[0] + a[1]) % 2 == 0 { 1.0 } else { -1.0 };
            -(((t[0] + t[1]) % 3) as f64 - 1.0) * parity
        })
        .unwrap()
    }

    fn svetlichny3() -> BellFunctional {
        BellFunctional::from_fn(Shape::uniform(3, 2, 2).unwrap(), |t, a| {
            let s: usize = t.iter().sum();
            if (s * (s + 1) / 2 + a.iter().sum::<usize>()).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            }
        })
        .unwrap()
    }

    fn triangle_game() -> MultistageGame {
        let scen = BellScenario::new(Shape::uniform(2, 3, 2).unwrap(), Memory::none(2)).unwrap();
        let prior = MultistageGame::uniform_prior(&scen.shape);
        let f = triangle();
        MultistageGame::from_fn(scen, prior, |_, t, a| {
            let shape = f.shape();
            9.0 * f.coefficient(shape.type_index(t), shape.action_index(a))
        })
        .unwrap()
    }

    #[test]
    fn triangle_is_a_fixed_point() {
        let qs = make_singlet_triangle();
        let m = Memory::none(2);
        let before = quantum_value(&qs, &triangle(), &m).unwrap();
        for k in 0..2 {
            let (_, v) = best_response_update(&triangle(), &qs, &m, k).unwrap();
            assert!((v - before).abs() <= 1e-9, "{v} vs {before}");
        }
        let (_, v) = state_update(&triangle(), &qs, &m).unwrap();
        assert_relative_eq!(v, 3.0 * 3f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn trivial_measurements_improve() {
        let qs = make_singlet_triangle();
        let id = identity(2);
        let zero = CMatrix::zeros(2, 2);
        let trivial = MeasurementFamily::new(vec![vec![id.clone(), zero.clone()]; 3]).unwrap();
        let qs = qs.with_family(0, trivial).unwrap();
        let m = Memory::none(2);
        assert_relative_eq!(
            quantum_value(&qs, &triangle(), &m).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        let (_, v) = best_response_update(&triangle(), &qs, &m, 0).unwrap();
        assert!(v > 1.0, "{v}");
    }

    #[test]
    fn zero_functional_stays_zero() {
        let f = BellFunctional::new(Shape::uniform(2, 3, 2).unwrap(), vec![0.0; 36]).unwrap();
        let qs = make_singlet_triangle();
        let m = Memory::none(2);
        assert_eq!(best_response_update(&f, &qs, &m, 1).unwrap().1, 0.0);
        assert_eq!(state_update(&f, &qs, &m).unwrap().1, 0.0);
    }

    #[test]
    fn ghz_measurements_give_four_root_two() {
        let qs = make_ghz_svetlichny(3).unwrap();
        let (_, v) = state_update(&svetlichny3(), &qs, &Memory::none(3)).unwrap();
        assert_relative_eq!(v, 4.0 * 2f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn seesaw_finds_triangle_value_and_is_reproducible() {
        let opts = SeesawOptions {
            restarts: 8,
            seed: 3,
            ..SeesawOptions::default()
        };
        let f = triangle();
        let m = Memory::none(2);
        let r = seesaw_optimize(&f, &[2, 2], &m, &opts).unwrap();
        assert!(r.best_value >= 3.0 * 3f64.sqrt() - 1e-6);
        for run in &r.runs {
            assert!(run.values.windows(2).all(|w| w[1] >= w[0] - 1e-10));
        }
        let check = quantum_value(&r.best, &f, &m).unwrap();
        assert_relative_eq!(check, r.best_value, epsilon = 1e-9);
        let again = seesaw_optimize(&f, &[2, 2], &m, &opts).unwrap();
        assert_eq!(again.restart_values(), r.restart_values());
    }

    #[test]
    fn guards() {
        let f = triangle();
        let m = Memory::none(2);
        let opts = SeesawOptions::default();
        assert!(seesaw_optimize(&f, &[64, 32], &m, &opts)
            .unwrap_err()
            .is_size_guard());
        assert!(seesaw_optimize(&f, &[2], &m, &opts).is_err());
        let ternary = BellFunctional::new(Shape::uniform(2, 2, 3).unwrap(), vec![0.0; 36]).unwrap();
        assert!(matches!(
            seesaw_optimize(&ternary, &[2, 2], &m, &opts),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn equilibrium_gain_at_and_off_the_triangle() {
        let g = triangle_game();
        let qs = make_singlet_triangle();
        for k in 0..2 {
            assert!(quantum_equilibrium_gain(&g, &qs, k).unwrap() <= 1e-7);
        }
        let detuned = rotate_setting(qs.family(0), 0, 20f64.to_radians());
        let qs = qs.with_family(0, detuned).unwrap();
        assert!(quantum_equilibrium_gain(&g, &qs, 0).unwrap() > 1e-3);
    }
}
