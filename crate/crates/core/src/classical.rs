//! Classical advisors: exhaustive search over deterministic strategy
//! profiles. By convexity every advisor-achievable payoff is a mixture of
//! deterministic ones, so maxima over profiles are the classical bounds.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::distributions::{Advisor, DeterministicStrategy};
use crate::error::{Error, Result};
use crate::game::{BellFunctional, MultistageGame, PayoffWeights};
use crate::shape::{BellScenario, Memory};

/// Refuse enumerations above this many profiles unless overridden.
pub const DEFAULT_PROFILE_LIMIT: u64 = 1 << 26;

const CHUNK: u64 = 1 << 12;

/// The set of deterministic profiles of a scenario, ordered
/// lexicographically by the concatenated per-player lookup tables
/// (player 1's table first, setting 0 most significant).
#[derive(Debug, Clone)]
pub struct ProfileSpace {
    scenario: BellScenario,
    /// radix of every digit, in order
    radices: Vec<usize>,
    /// digit offset of each player's table
    offsets: Vec<usize>,
    count: u64,
}

impl ProfileSpace {
    pub fn new(scenario: &BellScenario) -> Result<Self> {
        let mut radices = Vec::new();
        let mut offsets = Vec::new();
        let mut count: u64 = 1;
        let too_large = || {
            Error::TooLarge(format!(
                "more than 2^63 deterministic profiles for types {:?} actions {:?}",
                scenario.shape.types(),
                scenario.shape.actions()
            ))
        };
        for i in 0..scenario.players() {
            offsets.push(radices.len());
            let a = scenario.shape.actions()[i];
            let x = scenario.setting_count(i);
            radices.extend(std::iter::repeat_n(a, x));
            let per_player = u32::try_from(x)
                .ok()
                .and_then(|x| (a as u64).checked_pow(x))
                .ok_or_else(too_large)?;
            count = count.checked_mul(per_player).ok_or_else(too_large)?;
        }
        if count > 1 << 63 {
            return Err(too_large());
        }
        offsets.push(radices.len());
        Ok(Self {
            scenario: scenario.clone(),
            radices,
            offsets,
            count,
        })
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn scenario(&self) -> &BellScenario {
        &self.scenario
    }

    pub fn check_limit(&self, limit: u64) -> Result<()> {
        if self.count > limit {
            return Err(Error::TooLarge(format!(
                "{} deterministic profiles exceed the limit of {limit}",
                self.count
            )));
        }
        Ok(())
    }

    fn digits_at(&self, mut k: u64) -> Vec<usize> {
        let mut digits = vec![0; self.radices.len()];
        for (d, &r) in digits.iter_mut().zip(&self.radices).rev() {
            *d = (k % r as u64) as usize;
            k /= r as u64;
        }
        digits
    }

    /// Advances the odometer; false after the last profile.
    fn step(&self, digits: &mut [usize]) -> bool {
        for (d, &r) in digits.iter_mut().zip(&self.radices).rev() {
            *d += 1;
            if *d < r {
                return true;
            }
            *d = 0;
        }
        false
    }

    fn to_strategy(&self, digits: &[usize]) -> DeterministicStrategy {
        let tables = self
            .offsets
            .windows(2)
            .map(|w| digits[w[0]..w[1]].to_vec())
            .collect();
        DeterministicStrategy::new_unchecked(tables)
    }

    /// The k-th profile in enumeration order.
    pub fn profile_at(&self, k: u64) -> DeterministicStrategy {
        assert!(k < self.count, "profile index out of range");
        self.to_strategy(&self.digits_at(k))
    }

    pub fn iter(&self) -> Profiles<'_> {
        Profiles {
            space: self,
            digits: Some(vec![0; self.radices.len()]),
        }
    }

    /// Splits `0..count` into chunks and folds each chunk in parallel;
    /// results come back in chunk order.
    fn par_chunks<T, F>(&self, visit: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut Cursor<'_>) -> T + Sync,
    {
        let thetas = self.type_profiles();
        let chunks = self.count.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK;
                let mut cursor = Cursor {
                    space: self,
                    thetas: &thetas,
                    digits: self.digits_at(start),
                    outcomes: vec![0; thetas.len()],
                    actions: vec![0; self.scenario.players()],
                    next: start,
                    end: (start + CHUNK).min(self.count),
                    primed: false,
                };
                visit(&mut cursor)
            })
            .collect()
    }

    fn type_profiles(&self) -> Vec<Vec<usize>> {
        let shape = &self.scenario.shape;
        (0..shape.type_profiles())
            .map(|t| {
                let mut theta = vec![0; shape.players()];
                shape.decode_types(t, &mut theta);
                theta
            })
            .collect()
    }
}

/// Walks one chunk of the profile space, exposing for each profile the
/// realized action profile index of every type profile.
struct Cursor<'a> {
    space: &'a ProfileSpace,
    thetas: &'a [Vec<usize>],
    digits: Vec<usize>,
    outcomes: Vec<usize>,
    actions: Vec<usize>,
    next: u64,
    end: u64,
    primed: bool,
}

impl Cursor<'_> {
    fn advance(&mut self) -> Option<(u64, &[usize])> {
        if self.next >= self.end {
            return None;
        }
        if self.primed {
            self.space.step(&mut self.digits);
        }
        self.primed = true;
        let space = self.space;
        let digits = &self.digits;
        for (o, theta) in self.outcomes.iter_mut().zip(self.thetas) {
            space.scenario.play(theta, &mut self.actions, |i, s| {
                digits[space.offsets[i] + s]
            });
            *o = space.scenario.shape.action_index(&self.actions);
        }
        let k = self.next;
        self.next += 1;
        Some((k, &self.outcomes))
    }

    fn strategy(&self) -> DeterministicStrategy {
        self.space.to_strategy(&self.digits)
    }
}

pub struct Profiles<'a> {
    space: &'a ProfileSpace,
    digits: Option<Vec<usize>>,
}

impl Iterator for Profiles<'_> {
    type Item = DeterministicStrategy;

    fn next(&mut self) -> Option<Self::Item> {
        let digits = self.digits.as_mut()?;
        let out = self.space.to_strategy(digits);
        if !self.space.step(digits) {
            self.digits = None;
        }
        Some(out)
    }
}

/// All deterministic profiles of `scenario`, in enumeration order.
/// Count = ∏_i |A_i|^(number of settings of i).
pub fn enumerate_profiles(scenario: &BellScenario) -> Result<ProfileSpace> {
    ProfileSpace::new(scenario)
}

/// A classical maximum and the first profile attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalBound {
    pub value: f64,
    pub witness: DeterministicStrategy,
    pub profiles: u64,
}

fn maximize(space: &ProfileSpace, coefficients: &[f64]) -> ClassicalBound {
    let width = space.scenario.shape.action_profiles();
    let best = space
        .par_chunks(|cursor| {
            let mut best: Option<(f64, u64, DeterministicStrategy)> = None;
            while let Some((k, outcomes)) = cursor.advance() {
                let v: f64 = outcomes
                    .iter()
                    .enumerate()
                    .map(|(t, &a)| coefficients[t * width + a])
                    .sum();
                if best.as_ref().is_none_or(|(b, _, _)| v > *b) {
                    best = Some((v, k, cursor.strategy()));
                }
            }
            best
        })
        .into_iter()
        .flatten()
        // chunks are in order, so strict improvement keeps the first witness
        .fold(
            None::<(f64, u64, DeterministicStrategy)>,
            |acc, cand| match acc {
                Some(a) if a.0 >= cand.0 => Some(a),
                _ => Some(cand),
            },
        )
        .expect("profile space is never empty");
    ClassicalBound {
        value: best.0,
        witness: best.2,
        profiles: space.count,
    }
}

/// Maximum of the functional over deterministic profiles with the given
/// history access, refusing more than [`DEFAULT_PROFILE_LIMIT`] profiles.
pub fn classical_bound(functional: &BellFunctional, memory: &Memory) -> Result<ClassicalBound> {
    classical_bound_limited(functional, memory, DEFAULT_PROFILE_LIMIT)
}

pub fn classical_bound_limited(
    functional: &BellFunctional,
    memory: &Memory,
    limit: u64,
) -> Result<ClassicalBound> {
    let scenario = BellScenario::new(functional.shape().clone(), memory.clone())?;
    let space = ProfileSpace::new(&scenario)?;
    space.check_limit(limit)?;
    Ok(maximize(&space, functional.coefficients()))
}

/// The functional Σ_j β_j·p(θ)u_j(a,θ).
pub fn weighted_functional(
    game: &MultistageGame,
    weights: &PayoffWeights,
) -> Result<BellFunctional> {
    if weights.beta.len() != game.players() {
        return Err(Error::Shape(format!(
            "{} weights for {} players",
            weights.beta.len(),
            game.players()
        )));
    }
    let parts = (0..game.players())
        .map(|j| crate::game::functional_from_game(game, j))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<(f64, &BellFunctional)> = weights.beta.iter().copied().zip(&parts).collect();
    BellFunctional::combine(game.shape(), &refs)
}

/// Support function of the classical payoff polytope in direction β:
/// max over deterministic profiles of Σ_j β_j U_j.
pub fn support_function(
    game: &MultistageGame,
    weights: &PayoffWeights,
    memory: &Memory,
) -> Result<ClassicalBound> {
    classical_bound(&weighted_functional(game, weights)?, memory)
}

/// Payoff vectors (U_1, ..., U_n) of every deterministic profile,
/// deduplicated within 1e-9 and kept in first-appearance order. Their
/// convex hull is the classical payoff polytope.
pub fn payoff_vertices(game: &MultistageGame, memory: &Memory) -> Result<Vec<Vec<f64>>> {
    let scenario = BellScenario::new(game.shape().clone(), memory.clone())?;
    let space = ProfileSpace::new(&scenario)?;
    space.check_limit(DEFAULT_PROFILE_LIMIT)?;
    let functionals = (0..game.players())
        .map(|j| crate::game::functional_from_game(game, j))
        .collect::<Result<Vec<_>>>()?;
    let width = scenario.shape.action_profiles();
    let key = |v: &[f64]| -> Vec<i64> { v.iter().map(|x| (x * 1e9).round() as i64).collect() };
    let per_chunk = space.par_chunks(|cursor| {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        while let Some((_, outcomes)) = cursor.advance() {
            let v: Vec<f64> = functionals
                .iter()
                .map(|f| {
                    outcomes
                        .iter()
                        .enumerate()
                        .map(|(t, &a)| f.coefficients()[t * width + a])
                        .sum()
                })
                .collect();
            if seen.insert(key(&v)) {
                out.push(v);
            }
        }
        out
    });
    let mut seen = HashSet::new();
    Ok(per_chunk
        .into_iter()
        .flatten()
        .filter(|v| seen.insert(key(v)))
        .collect())
}

/// Largest gain player `player` can obtain by deviating from the advisor's
/// recommendation. The deviator sees the signal λ, its type and its
/// accessible history; later players keep following their recommended
/// responses to the realized history. Always ≥ 0.
pub fn deviation_gain(game: &MultistageGame, advisor: &Advisor, player: usize) -> Result<f64> {
    game.check_player(player)?;
    let scenario = game.scenario();
    advisor.check(scenario)?;
    let shape = game.shape();
    let n = shape.players();
    let prior = game.joint_prior();
    let u = game.payoffs(player);
    let options = shape.actions()[player];
    let settings = scenario.setting_count(player);
    let mut theta = vec![0; n];
    let mut a = vec![0; n];
    let mut gain = 0.0;
    for (w, profile) in advisor.weights.iter().zip(&advisor.profiles) {
        // acc[setting][alternative] = Σ_θ p(θ) u(θ, a with a_player = alternative)
        let mut acc = vec![0.0; settings * options];
        for t in 0..shape.type_profiles() {
            shape.decode_types(t, &mut theta);
            for i in 0..player {
                a[i] = profile.action(i, scenario.setting_index(i, theta[i], &a));
            }
            let s = scenario.setting_index(player, theta[player], &a);
            for alt in 0..options {
                a[player] = alt;
                for i in player + 1..n {
                    a[i] = profile.action(i, scenario.setting_index(i, theta[i], &a));
                }
                acc[s * options + alt] += prior[t] * u[shape.cell(t, shape.action_index(&a))];
            }
        }
        let (best, current) = (0..settings).fold((0.0, 0.0), |(b, c), s| {
            let row = &acc[s * options..(s + 1) * options];
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (b + max, c + row[profile.action(player, s)])
        });
        gain += w * (best - current);
    }
    Ok(gain.max(0.0))
}

/// True iff no player gains more than `tol` by deviating.
pub fn is_correlated_equilibrium(
    game: &MultistageGame,
    advisor: &Advisor,
    tol: f64,
) -> Result<bool> {
    for i in 0..game.players() {
        if deviation_gain(game, advisor, i)? > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::Shape;

    fn chsh() -> BellFunctional {
        let shape = Shape::uniform(2, 2, 2).unwrap();
        BellFunctional::from_fn(shape, |t, a| {
            let s = if (t[0] * t[1] + a[0] + a[1]) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            0.25 * s - 0.125
        })
        .unwrap()
    }

    fn triangle_sign(t: &[usize]) -> f64 {
        -(((t[0] + t[1]) % 3) as f64 - 1.0)
    }

    fn triangle() -> BellFunctional {
        let shape = Shape::uniform(2, 3, 2).unwrap();
        BellFunctional::from_fn(shape, |t, a| {
            let parity = if (a[0] + a[1]) % 2 == 0 { 1.0 } else { -1.0 };
            triangle_sign(t) * parity
        })
        .unwrap()
    }

    fn svetlichny(n: usize) -> BellFunctional {
        let shape = Shape::uniform(n, 2, 2).unwrap();
        BellFunctional::from_fn(shape, |t, a| {
            let s: usize = t.iter().sum();
            let e = s * (s + 1) / 2 + a.iter().sum::<usize>();
            if e.is_multiple_of(2) {
                1.0
            } else {
                -1.0
            }
        })
        .unwrap()
    }

    #[test]
    fn profile_counts() {
        let count = |shape: Shape, m: Memory| {
            ProfileSpace::new(&BellScenario::new(shape, m).unwrap())
                .unwrap()
                .count()
        };
        assert_eq!(count(Shape::uniform(2, 2, 2).unwrap(), Memory::none(2)), 16);
        assert_eq!(
            count(Shape::uniform(2, 3, 2).unwrap(), Memory::chain(2)),
            512
        );
        assert_eq!(
            count(Shape::uniform(3, 2, 2).unwrap(), Memory::chain(3)),
            1024
        );
    }

    #[test]
    fn iterator_and_index_agree() {
        let scen = BellScenario::new(Shape::uniform(2, 2, 2).unwrap(), Memory::chain(2)).unwrap();
        let space = enumerate_profiles(&scen).unwrap();
        let all: Vec<_> = space.iter().collect();
        assert_eq!(all.len() as u64, space.count());
        assert_eq!(all[37], space.profile_at(37));
        let distinct: HashSet<_> = all.iter().cloned().collect();
        assert_eq!(distinct.len(), all.len());
        assert_eq!(all[0].tables(), &[vec![0, 0], vec![0, 0, 0, 0]]);
        assert_eq!(all[1].tables(), &[vec![0, 0], vec![0, 0, 0, 1]]);
    }

    #[test]
    fn overflow_is_refused() {
        let scen = BellScenario::new(Shape::uniform(3, 8, 4).unwrap(), Memory::chain(3)).unwrap();
        assert!(ProfileSpace::new(&scen).unwrap_err().is_size_guard());
        let f = svetlichny(5);
        let err = classical_bound_limited(&f, &Memory::chain(5), 1000).unwrap_err();
        assert!(err.is_size_guard());
    }

    #[test]
    fn chsh_bounds() {
        let f = chsh();
        assert_eq!(classical_bound(&f, &Memory::none(2)).unwrap().value, 0.0);
        let ecd = classical_bound(&f, &Memory::chain(2)).unwrap();
        assert_eq!(ecd.value, 0.5);
        let scen = BellScenario::new(f.shape().clone(), Memory::chain(2)).unwrap();
        let dist = crate::distributions::strategy_distribution(&ecd.witness, &scen).unwrap();
        assert_eq!(f.value(&dist).unwrap(), 0.5);
    }

    #[test]
    fn witness_is_first_maximizer() {
        let f = chsh();
        let scen = BellScenario::new(f.shape().clone(), Memory::none(2)).unwrap();
        let space = enumerate_profiles(&scen).unwrap();
        let first = space
            .iter()
            .find(|p| {
                let d = crate::distributions::strategy_distribution(p, &scen).unwrap();
                f.value(&d).unwrap() == 0.0
            })
            .unwrap();
        assert_eq!(
            classical_bound(&f, &Memory::none(2)).unwrap().witness,
            first
        );
    }

    #[test]
    fn triangle_bound_is_four() {
        let f = triangle();
        let b = classical_bound(&f, &Memory::chain(2)).unwrap();
        assert_eq!((b.value, b.profiles), (4.0, 512));
        assert_eq!(classical_bound(&f, &Memory::none(2)).unwrap().value, 4.0);
    }

    #[test]
    fn svetlichny_bounds_depend_on_who_sees_whom() {
        let f = svetlichny(3);
        assert_eq!(classical_bound(&f, &Memory::none(3)).unwrap().value, 4.0);
        assert_eq!(classical_bound(&f, &Memory::star(3)).unwrap().value, 4.0);
        assert_eq!(classical_bound(&f, &Memory::chain(3)).unwrap().value, 6.0);
    }

    fn triangle_game(memory: Memory) -> MultistageGame {
        let scen = BellScenario::new(Shape::uniform(2, 3, 2).unwrap(), memory).unwrap();
        let prior = MultistageGame::uniform_prior(&scen.shape);
        MultistageGame::from_fn(scen, prior, |_, t, a| {
            let parity = if (a[0] + a[1]) % 2 == 0 { 1.0 } else { -1.0 };
            9.0 * triangle_sign(t) * parity
        })
        .unwrap()
    }

    #[test]
    fn support_matches_bound_along_axes() {
        let g = triangle_game(Memory::chain(2));
        let m = Memory::chain(2);
        let e1 = support_function(&g, &PayoffWeights::unit(2, 0), &m).unwrap();
        assert!((e1.value - 4.0).abs() < 1e-12);
        let half = support_function(&g, &PayoffWeights::new(vec![0.5, 0.5], 0.0), &m).unwrap();
        assert!((half.value - 4.0).abs() < 1e-12);
        let direct =
            classical_bound(&crate::game::functional_from_game(&g, 1).unwrap(), &m).unwrap();
        let e2 = support_function(&g, &PayoffWeights::unit(2, 1), &m).unwrap();
        assert_eq!(e2.value, direct.value);
        assert!(support_function(&g, &PayoffWeights::unit(3, 0), &m).is_err());
    }

    #[test]
    fn vertices_are_deduplicated() {
        let g = triangle_game(Memory::none(2));
        let v = payoff_vertices(&g, &Memory::none(2)).unwrap();
        // symmetric game: every vertex lies on the diagonal
        assert!(v.iter().all(|p| (p[0] - p[1]).abs() < 1e-9));
        let keys: HashSet<i64> = v.iter().map(|p| (p[0] * 1e6).round() as i64).collect();
        assert_eq!(keys.len(), v.len());
        assert!(v.iter().any(|p| (p[0] - 4.0).abs() < 1e-9));
    }

    #[test]
    fn constant_advisor_is_an_equilibrium_in_triangle_game() {
        let g = triangle_game(Memory::chain(2));
        let adv = Advisor::pure(DeterministicStrategy::constant(g.scenario(), 0).unwrap());
        for i in 0..2 {
            assert!(deviation_gain(&g, &adv, i).unwrap().abs() < 1e-12);
        }
        assert!(is_correlated_equilibrium(&g, &adv, 1e-9).unwrap());
    }

    #[test]
    fn dominated_recommendation_is_not_an_equilibrium() {
        let scen = BellScenario::new(Shape::uniform(2, 2, 2).unwrap(), Memory::none(2)).unwrap();
        let prior = MultistageGame::uniform_prior(&scen.shape);
        // player 1 is paid 1 for action 1 regardless of anything
        let g = MultistageGame::from_fn(
            scen,
            prior,
            |i, _, a| if i == 0 { a[0] as f64 } else { 0.0 },
        )
        .unwrap();
        let adv = Advisor::pure(DeterministicStrategy::constant(g.scenario(), 0).unwrap());
        assert!((deviation_gain(&g, &adv, 0).unwrap() - 1.0).abs() < 1e-12);
        assert!(!is_correlated_equilibrium(&g, &adv, 1e-9).unwrap());
    }

    #[test]
    fn single_player_gain_is_best_response_gap() {
        let scen =
            BellScenario::new(Shape::new(vec![3], vec![3]).unwrap(), Memory::none(1)).unwrap();
        let prior = vec![vec![0.5, 0.25, 0.25]];
        let g =
            MultistageGame::from_fn(scen, prior, |_, t, a| ((t[0] + 2 * a[0]) % 3) as f64).unwrap();
        let profile = DeterministicStrategy::new(g.scenario(), vec![vec![0, 0, 0]]).unwrap();
        let adv = Advisor::pure(profile);
        // per type: max is 2, current is θ
        let expected = 0.5 * 2.0 + 0.25 * 1.0 + 0.25 * 0.0;
        assert!((deviation_gain(&g, &adv, 0).unwrap() - expected).abs() < 1e-12);
    }
}
