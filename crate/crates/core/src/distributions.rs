//! Conditional distributions p(a|θ) and the classical objects that generate
//! them: behavior profiles, deterministic strategies and advisors.

use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, Error, Result};
use crate::shape::{BellScenario, Shape};

const LOAD_TOL: f64 = 1e-9;
const NEG_TOL: f64 = 1e-12;

/// A table p(a|θ) in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionDoc", into = "DistributionDoc")]
pub struct ConditionalDistribution {
    shape: Shape,
    table: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DistributionDoc {
    types: Vec<usize>,
    actions: Vec<usize>,
    table: Vec<f64>,
}

impl TryFrom<DistributionDoc> for ConditionalDistribution {
    type Error = Error;
    fn try_from(doc: DistributionDoc) -> Result<Self> {
        Self::from_table(Shape::new(doc.types, doc.actions)?, doc.table)
    }
}

impl From<ConditionalDistribution> for DistributionDoc {
    fn from(d: ConditionalDistribution) -> Self {
        DistributionDoc {
            types: d.shape.types().to_vec(),
            actions: d.shape.actions().to_vec(),
            table: d.table,
        }
    }
}

impl ConditionalDistribution {
    /// Accepts an externally produced table. Entries down to -1e-12 are
    /// clamped to zero; rows within 1e-9 of normalized are renormalized,
    /// anything further off is rejected.
    pub fn from_table(shape: Shape, mut table: Vec<f64>) -> Result<Self> {
        if table.len() != shape.cells() {
            return Err(Error::Shape(format!(
                "distribution table has {} entries, expected {}",
                table.len(),
                shape.cells()
            )));
        }
        let mut diags = Vec::new();
        let width = shape.action_profiles();
        for (t, row) in table.chunks_mut(width).enumerate() {
            for (a, p) in row.iter_mut().enumerate() {
                if !p.is_finite() || *p < -NEG_TOL {
                    diags.push(Diagnostic::new(
                        "table",
                        format!("entry (type profile {t}, action profile {a}) = {p}"),
                    ));
                }
                *p = p.max(0.0);
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > LOAD_TOL {
                diags.push(Diagnostic::new(
                    "table",
                    format!("row for type profile {t} sums to {sum}"),
                ));
            } else {
                row.iter_mut().for_each(|p| *p /= sum);
            }
        }
        if !diags.is_empty() {
            return Err(Error::invalid("distribution", diags));
        }
        Ok(Self { shape, table })
    }

    /// Internal constructor for tables that are normalized by construction.
    pub(crate) fn exact(shape: Shape, table: Vec<f64>) -> Self {
        debug_assert_eq!(table.len(), shape.cells());
        Self { shape, table }
    }

    pub fn uniform(shape: Shape) -> Self {
        let p = 1.0 / shape.action_profiles() as f64;
        let table = vec![p; shape.cells()];
        Self { shape, table }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn prob(&self, type_profile: usize, action_profile: usize) -> f64 {
        self.table[self.shape.cell(type_profile, action_profile)]
    }

    pub fn row(&self, type_profile: usize) -> &[f64] {
        let w = self.shape.action_profiles();
        &self.table[type_profile * w..(type_profile + 1) * w]
    }

    /// Largest entrywise difference to another distribution of the same shape.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.table
            .iter()
            .zip(&other.table)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    /// Convex combination `Σ w_k d_k`; weights are used as given.
    pub fn mixture(shape: &Shape, parts: &[(f64, &ConditionalDistribution)]) -> Result<Self> {
        let mut table = vec![0.0; shape.cells()];
        for (w, d) in parts {
            shape.check_same(&d.shape, "mixture component")?;
            for (acc, p) in table.iter_mut().zip(&d.table) {
                *acc += w * p;
            }
        }
        Ok(Self::exact(shape.clone(), table))
    }
}

/// Per-player behaviors σ_i(a_i | θ_i, h_i), each stored as a flat
/// `[setting][action]` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorProfile {
    tables: Vec<Vec<f64>>,
}

impl BehaviorProfile {
    pub fn new(scenario: &BellScenario, tables: Vec<Vec<f64>>) -> Result<Self> {
        if tables.len() != scenario.players() {
            return Err(Error::Shape(format!(
                "{} behavior tables for {} players",
                tables.len(),
                scenario.players()
            )));
        }
        let mut diags = Vec::new();
        for (i, t) in tables.iter().enumerate() {
            let a = scenario.shape.actions()[i];
            let expected = scenario.setting_count(i) * a;
            if t.len() != expected {
                return Err(Error::Shape(format!(
                    "behavior table of player {} has {} entries, expected {expected}",
                    i + 1,
                    t.len()
                )));
            }
            for (s, slice) in t.chunks(a).enumerate() {
                let sum: f64 = slice.iter().sum();
                if slice.iter().any(|&p| p < -NEG_TOL || !p.is_finite())
                    || (sum - 1.0).abs() > LOAD_TOL
                {
                    diags.push(Diagnostic::new(
                        format!("behavior[{}]", i + 1),
                        format!("setting {s} is not a probability vector (sum {sum})"),
                    ));
                }
            }
        }
        if !diags.is_empty() {
            return Err(Error::invalid("behavior profile", diags));
        }
        Ok(Self { tables })
    }

    pub fn uniform(scenario: &BellScenario) -> Self {
        let tables = (0..scenario.players())
            .map(|i| {
                let a = scenario.shape.actions()[i];
                vec![1.0 / a as f64; scenario.setting_count(i) * a]
            })
            .collect();
        Self { tables }
    }

    /// Indicator behaviors of a deterministic strategy.
    pub fn from_strategy(scenario: &BellScenario, strategy: &DeterministicStrategy) -> Self {
        let tables = strategy
            .tables
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let a = scenario.shape.actions()[i];
                let mut out = vec![0.0; t.len() * a];
                for (s, &act) in t.iter().enumerate() {
                    out[s * a + act] = 1.0;
                }
                out
            })
            .collect();
        Self { tables }
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.tables
    }
}

/// One deterministic response function per player, as a lookup table over
/// canonical setting indices (θ_i, h_i).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeterministicStrategy {
    tables: Vec<Vec<usize>>,
}

impl DeterministicStrategy {
    pub fn new(scenario: &BellScenario, tables: Vec<Vec<usize>>) -> Result<Self> {
        let s = Self { tables };
        s.check(scenario)?;
        Ok(s)
    }

    pub(crate) fn new_unchecked(tables: Vec<Vec<usize>>) -> Self {
        Self { tables }
    }

    /// Every player always plays `action`.
    pub fn constant(scenario: &BellScenario, action: usize) -> Result<Self> {
        let tables = (0..scenario.players())
            .map(|i| vec![action; scenario.setting_count(i)])
            .collect();
        Self::new(scenario, tables)
    }

    pub fn check(&self, scenario: &BellScenario) -> Result<()> {
        if self.tables.len() != scenario.players() {
            return Err(Error::Shape(format!(
                "strategy has {} tables for {} players",
                self.tables.len(),
                scenario.players()
            )));
        }
        for (i, t) in self.tables.iter().enumerate() {
            if t.len() != scenario.setting_count(i) {
                return Err(Error::Shape(format!(
                    "strategy table of player {} covers {} settings, expected {}",
                    i + 1,
                    t.len(),
                    scenario.setting_count(i)
                )));
            }
            let a = scenario.shape.actions()[i];
            if let Some(bad) = t.iter().position(|&x| x >= a) {
                return Err(Error::invalid(
                    "strategy",
                    vec![Diagnostic::new(
                        format!("strategy[{}]", i + 1),
                        format!("setting {bad} maps to action {} >= {a}", t[bad]),
                    )],
                ));
            }
        }
        Ok(())
    }

    pub fn tables(&self) -> &[Vec<usize>] {
        &self.tables
    }

    pub fn action(&self, player: usize, setting: usize) -> usize {
        self.tables[player][setting]
    }

    /// Forward play for one type profile.
    pub fn play(&self, scenario: &BellScenario, theta: &[usize], actions: &mut [usize]) {
        scenario.play(theta, actions, |i, s| self.tables[i][s]);
    }
}

/// A correlation device: a distribution over deterministic strategy
/// profiles, independent of the players' types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Advisor {
    pub weights: Vec<f64>,
    pub profiles: Vec<DeterministicStrategy>,
}

impl Advisor {
    pub fn new(weights: Vec<f64>, profiles: Vec<DeterministicStrategy>) -> Result<Self> {
        let a = Self { weights, profiles };
        a.validate_weights()?;
        Ok(a)
    }

    /// Single-signal advisor.
    pub fn pure(profile: DeterministicStrategy) -> Self {
        Self {
            weights: vec![1.0],
            profiles: vec![profile],
        }
    }

    fn validate_weights(&self) -> Result<()> {
        if self.profiles.is_empty() {
            return Err(Error::invalid(
                "advisor",
                vec![Diagnostic::new("profiles", "empty support")],
            ));
        }
        if self.weights.len() != self.profiles.len() {
            return Err(Error::Shape(format!(
                "{} weights for {} profiles",
                self.weights.len(),
                self.profiles.len()
            )));
        }
        let sum: f64 = self.weights.iter().sum();
        if self.weights.iter().any(|&w| w < 0.0 || !w.is_finite()) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "advisor",
                vec![Diagnostic::new(
                    "weights",
                    format!("not a probability vector (sum {sum})"),
                )],
            ));
        }
        Ok(())
    }

    pub fn check(&self, scenario: &BellScenario) -> Result<()> {
        self.validate_weights()?;
        self.profiles.iter().try_for_each(|p| p.check(scenario))
    }
}

/// p(a|θ) = ∏_j σ_j(a_j | θ_j, h_j(a)).
pub fn compose_behaviors(
    profile: &BehaviorProfile,
    scenario: &BellScenario,
) -> Result<ConditionalDistribution> {
    // re-run the shape checks against this scenario
    let profile = BehaviorProfile::new(scenario, profile.tables.clone())?;
    let shape = &scenario.shape;
    let n = shape.players();
    let mut theta = vec![0; n];
    let mut a = vec![0; n];
    let mut table = vec![0.0; shape.cells()];
    for t in 0..shape.type_profiles() {
        shape.decode_types(t, &mut theta);
        for k in 0..shape.action_profiles() {
            shape.decode_actions(k, &mut a);
            let mut p = 1.0;
            for i in 0..n {
                let s = scenario.setting_index(i, theta[i], &a);
                p *= profile.tables[i][s * shape.actions()[i] + a[i]];
                if p == 0.0 {
                    break;
                }
            }
            table[shape.cell(t, k)] = p;
        }
    }
    Ok(ConditionalDistribution::exact(shape.clone(), table))
}

/// The 0/1 table obtained by forward-playing a deterministic profile.
pub fn strategy_distribution(
    strategy: &DeterministicStrategy,
    scenario: &BellScenario,
) -> Result<ConditionalDistribution> {
    strategy.check(scenario)?;
    let shape = &scenario.shape;
    let n = shape.players();
    let mut theta = vec![0; n];
    let mut a = vec![0; n];
    let mut table = vec![0.0; shape.cells()];
    for t in 0..shape.type_profiles() {
        shape.decode_types(t, &mut theta);
        strategy.play(scenario, &theta, &mut a);
        table[shape.cell(t, shape.action_index(&a))] = 1.0;
    }
    Ok(ConditionalDistribution::exact(shape.clone(), table))
}

/// p(a|θ) = Σ_λ p(λ) ∏_i δ(a_i, f_{i,λ}(θ_i, h_i)).
pub fn advisor_distribution(
    advisor: &Advisor,
    scenario: &BellScenario,
) -> Result<ConditionalDistribution> {
    advisor.check(scenario)?;
    let shape = &scenario.shape;
    let n = shape.players();
    let mut theta = vec![0; n];
    let mut a = vec![0; n];
    let mut table = vec![0.0; shape.cells()];
    for (w, profile) in advisor.weights.iter().zip(&advisor.profiles) {
        for t in 0..shape.type_profiles() {
            shape.decode_types(t, &mut theta);
            profile.play(scenario, &theta, &mut a);
            table[shape.cell(t, shape.action_index(&a))] += w;
        }
    }
    Ok(ConditionalDistribution::exact(shape.clone(), table))
}

/// True iff for every k the marginal of players 1..k is independent of the
/// types of players k+1..n (within `tol`). Holds for every distribution
/// generated stage by stage.
pub fn sequential_consistency_check(dist: &ConditionalDistribution, tol: f64) -> bool {
    let shape = dist.shape();
    let n = shape.players();
    let actions = shape.actions();
    let mut theta = vec![0; n];
    for k in 1..n {
        let prefix_count: usize = actions[..k].iter().product();
        let suffix_count: usize = actions[k..].iter().product();
        let marginal = |t: usize| -> Vec<f64> {
            let row = dist.row(t);
            (0..prefix_count)
                .map(|p| row[p * suffix_count..(p + 1) * suffix_count].iter().sum())
                .collect()
        };
        for t in 0..shape.type_profiles() {
            shape.decode_types(t, &mut theta);
            if theta[k..].iter().all(|&x| x == 0) {
                continue;
            }
            theta[k..].iter_mut().for_each(|x| *x = 0);
            let reference = marginal(shape.type_index(&theta));
            let here = marginal(t);
            if reference
                .iter()
                .zip(&here)
                .any(|(x, y)| (x - y).abs() > tol)
            {
                return false;
            }
        }
    }
    true
}
