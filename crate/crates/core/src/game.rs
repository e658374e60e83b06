//! Multistage games of incomplete information and their Bell functionals.
//!
//! A game and a Bell functional are linked by α_{a,θ} = p(θ)·u_i(a,θ): the
//! expected payoff of player i under any p(a|θ) equals the functional
//! evaluated on p(a|θ).

use serde::{Deserialize, Serialize};

use crate::distributions::ConditionalDistribution;
use crate::error::{Diagnostic, Error, Result};
use crate::shape::{BellScenario, Memory, Shape};

const PRIOR_TOL: f64 = 1e-12;

/// Serialized form of a game; also the input of [`validate_game`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameFile {
    pub players: usize,
    pub types: Vec<usize>,
    pub actions: Vec<usize>,
    pub memory: Memory,
    pub prior: Vec<Vec<f64>>,
    pub payoffs: Vec<Vec<f64>>,
}

/// One diagnostic per violated invariant; empty iff the data describes a
/// valid game.
pub fn validate_game(game: &GameFile) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let n = game.players;
    if n == 0 {
        out.push(Diagnostic::new(
            "players",
            "at least one player is required",
        ));
        return out;
    }
    for (name, len) in [
        ("types", game.types.len()),
        ("actions", game.actions.len()),
        ("memory", game.memory.players()),
        ("prior", game.prior.len()),
        ("payoffs", game.payoffs.len()),
    ] {
        if len != n {
            out.push(Diagnostic::new(
                name,
                format!("{len} entries for {n} players"),
            ));
        }
    }
    if !out.is_empty() {
        return out;
    }
    for (i, (&t, &a)) in game.types.iter().zip(&game.actions).enumerate() {
        if t == 0 {
            out.push(Diagnostic::new(
                format!("types[{}]", i + 1),
                "|Θ_i| must be >= 1",
            ));
        }
        if a == 0 {
            out.push(Diagnostic::new(
                format!("actions[{}]", i + 1),
                "|A_i| must be >= 1",
            ));
        }
    }
    out.extend(game.memory.validate());
    for (i, p) in game.prior.iter().enumerate() {
        let field = format!("prior[{}]", i + 1);
        if p.len() != game.types[i] {
            out.push(Diagnostic::new(
                field,
                format!("{} probabilities for {} types", p.len(), game.types[i]),
            ));
            continue;
        }
        if p.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            out.push(Diagnostic::new(
                field.clone(),
                "negative or non-finite probability",
            ));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > PRIOR_TOL {
            out.push(Diagnostic::new(
                field,
                format!("prior not normalized (sum {sum})"),
            ));
        }
    }
    let cells: usize = game.types.iter().chain(&game.actions).product();
    for (i, u) in game.payoffs.iter().enumerate() {
        let field = format!("payoffs[{}]", i + 1);
        if u.len() != cells {
            out.push(Diagnostic::new(
                field,
                format!("{} entries, expected {cells}", u.len()),
            ));
        } else if let Some(k) = u.iter().position(|x| !x.is_finite()) {
            out.push(Diagnostic::new(field, format!("entry {k} is not finite")));
        }
    }
    out
}

/// A validated game: one player per stage, product prior, dense payoffs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameFile", into = "GameFile")]
pub struct MultistageGame {
    scenario: BellScenario,
    prior: Vec<Vec<f64>>,
    payoffs: Vec<Vec<f64>>,
}

impl TryFrom<GameFile> for MultistageGame {
    type Error = Error;
    fn try_from(file: GameFile) -> Result<Self> {
        let diags = validate_game(&file);
        if !diags.is_empty() {
            return Err(Error::invalid("game", diags));
        }
        let shape = Shape::new(file.types, file.actions)?;
        Ok(Self {
            scenario: BellScenario::new(shape, file.memory)?,
            prior: file.prior,
            payoffs: file.payoffs,
        })
    }
}

impl From<MultistageGame> for GameFile {
    fn from(g: MultistageGame) -> Self {
        GameFile {
            players: g.scenario.players(),
            types: g.scenario.shape.types().to_vec(),
            actions: g.scenario.shape.actions().to_vec(),
            memory: g.scenario.memory,
            prior: g.prior,
            payoffs: g.payoffs,
        }
    }
}

impl MultistageGame {
    pub fn new(
        scenario: BellScenario,
        prior: Vec<Vec<f64>>,
        payoffs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let file = GameFile {
            players: scenario.players(),
            types: scenario.shape.types().to_vec(),
            actions: scenario.shape.actions().to_vec(),
            memory: scenario.memory,
            prior,
            payoffs,
        };
        Self::try_from(file)
    }

    /// Builds payoffs cell by cell from `u(player, θ, a)`.
    pub fn from_fn<F>(scenario: BellScenario, prior: Vec<Vec<f64>>, mut u: F) -> Result<Self>
    where
        F: FnMut(usize, &[usize], &[usize]) -> f64,
    {
        let shape = &scenario.shape;
        let n = shape.players();
        let mut theta = vec![0; n];
        let mut a = vec![0; n];
        let mut payoffs = vec![vec![0.0; shape.cells()]; n];
        for t in 0..shape.type_profiles() {
            shape.decode_types(t, &mut theta);
            for k in 0..shape.action_profiles() {
                shape.decode_actions(k, &mut a);
                for (i, table) in payoffs.iter_mut().enumerate() {
                    table[shape.cell(t, k)] = u(i, &theta, &a);
                }
            }
        }
        Self::new(scenario, prior, payoffs)
    }

    pub fn uniform_prior(shape: &Shape) -> Vec<Vec<f64>> {
        shape
            .types()
            .iter()
            .map(|&t| vec![1.0 / t as f64; t])
            .collect()
    }

    pub fn scenario(&self) -> &BellScenario {
        &self.scenario
    }

    pub fn shape(&self) -> &Shape {
        &self.scenario.shape
    }

    pub fn memory(&self) -> &Memory {
        &self.scenario.memory
    }

    pub fn players(&self) -> usize {
        self.scenario.players()
    }

    /// One player per stage.
    pub fn stage_count(&self) -> usize {
        self.players()
    }

    pub fn prior(&self) -> &[Vec<f64>] {
        &self.prior
    }

    pub fn payoffs(&self, player: usize) -> &[f64] {
        &self.payoffs[player]
    }

    /// Same game under a different information structure.
    pub fn with_memory(&self, memory: Memory) -> Result<Self> {
        Ok(Self {
            scenario: BellScenario::new(self.scenario.shape.clone(), memory)?,
            prior: self.prior.clone(),
            payoffs: self.payoffs.clone(),
        })
    }

    /// p(θ) = ∏ p(θ_i) for every type profile.
    pub fn joint_prior(&self) -> Vec<f64> {
        joint_prior(&self.scenario.shape, &self.prior)
    }

    pub(crate) fn check_player(&self, player: usize) -> Result<()> {
        if player >= self.players() {
            return Err(Error::Shape(format!(
                "player {} out of range 1..={}",
                player + 1,
                self.players()
            )));
        }
        Ok(())
    }
}

pub(crate) fn joint_prior(shape: &Shape, prior: &[Vec<f64>]) -> Vec<f64> {
    let mut theta = vec![0; shape.players()];
    (0..shape.type_profiles())
        .map(|t| {
            shape.decode_types(t, &mut theta);
            theta
                .iter()
                .enumerate()
                .map(|(i, &x)| prior[i][x])
                .product()
        })
        .collect()
}

/// Optional reference values attached to a functional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReferenceBounds {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub classical: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub quantum: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nonsignaling: Option<f64>,
}

/// Linear form Σ α_{a,θ} p(a|θ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionalFile", into = "FunctionalFile")]
pub struct BellFunctional {
    shape: Shape,
    coefficients: Vec<f64>,
    reference: Option<ReferenceBounds>,
}

#[derive(Serialize, Deserialize)]
struct FunctionalFile {
    types: Vec<usize>,
    actions: Vec<usize>,
    coefficients: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    reference_bounds: Option<ReferenceBounds>,
}

impl TryFrom<FunctionalFile> for BellFunctional {
    type Error = Error;
    fn try_from(f: FunctionalFile) -> Result<Self> {
        let mut out = Self::new(Shape::new(f.types, f.actions)?, f.coefficients)?;
        out.reference = f.reference_bounds;
        Ok(out)
    }
}

impl From<BellFunctional> for FunctionalFile {
    fn from(f: BellFunctional) -> Self {
        FunctionalFile {
            types: f.shape.types().to_vec(),
            actions: f.shape.actions().to_vec(),
            coefficients: f.coefficients,
            reference_bounds: f.reference,
        }
    }
}

impl BellFunctional {
    pub fn new(shape: Shape, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != shape.cells() {
            return Err(Error::Shape(format!(
                "{} coefficients, expected {}",
                coefficients.len(),
                shape.cells()
            )));
        }
        if let Some(k) = coefficients.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid(
                "functional",
                vec![Diagnostic::new(
                    "coefficients",
                    format!("entry {k} is not finite"),
                )],
            ));
        }
        Ok(Self {
            shape,
            coefficients,
            reference: None,
        })
    }

    /// Builds coefficients cell by cell from `alpha(θ, a)`.
    pub fn from_fn<F>(shape: Shape, mut alpha: F) -> Result<Self>
    where
        F: FnMut(&[usize], &[usize]) -> f64,
    {
        let n = shape.players();
        let mut theta = vec![0; n];
        let mut a = vec![0; n];
        let mut coefficients = vec![0.0; shape.cells()];
        for t in 0..shape.type_profiles() {
            shape.decode_types(t, &mut theta);
            for k in 0..shape.action_profiles() {
                shape.decode_actions(k, &mut a);
                coefficients[shape.cell(t, k)] = alpha(&theta, &a);
            }
        }
        Self::new(shape, coefficients)
    }

    pub fn with_reference(mut self, reference: ReferenceBounds) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficient(&self, type_profile: usize, action_profile: usize) -> f64 {
        self.coefficients[self.shape.cell(type_profile, action_profile)]
    }

    pub fn reference(&self) -> Option<&ReferenceBounds> {
        self.reference.as_ref()
    }

    /// Σ α_{a,θ} p(a|θ).
    pub fn value(&self, dist: &ConditionalDistribution) -> Result<f64> {
        self.shape.check_same(dist.shape(), "distribution")?;
        Ok(self
            .coefficients
            .iter()
            .zip(dist.table())
            .map(|(c, p)| c * p)
            .sum())
    }

    /// Σ_k w_k·f_k over functionals of the same shape.
    pub fn combine(shape: &Shape, parts: &[(f64, &BellFunctional)]) -> Result<Self> {
        let mut coefficients = vec![0.0; shape.cells()];
        for (w, f) in parts {
            shape.check_same(&f.shape, "functional")?;
            for (acc, c) in coefficients.iter_mut().zip(&f.coefficients) {
                *acc += w * c;
            }
        }
        Self::new(shape.clone(), coefficients)
    }

    /// Largest coefficientwise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// Direction β (and offset β_0) of a payoff inequality Σ β_j U_j ≤ β_0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffWeights {
    pub beta: Vec<f64>,
    pub offset: f64,
}

impl PayoffWeights {
    pub fn new(beta: Vec<f64>, offset: f64) -> Self {
        Self { beta, offset }
    }

    /// Unit vector e_player.
    pub fn unit(players: usize, player: usize) -> Self {
        let mut beta = vec![0.0; players];
        beta[player] = 1.0;
        Self { beta, offset: 0.0 }
    }
}

/// U_i = Σ_{a,θ} p(θ) p(a|θ) u_i(a,θ).
pub fn expected_payoff(
    game: &MultistageGame,
    dist: &ConditionalDistribution,
    player: usize,
) -> Result<f64> {
    game.check_player(player)?;
    game.shape().check_same(dist.shape(), "distribution")?;
    let prior = game.joint_prior();
    let width = game.shape().action_profiles();
    let u = game.payoffs(player);
    Ok(prior
        .iter()
        .enumerate()
        .map(|(t, &pt)| {
            let row = &u[t * width..(t + 1) * width];
            pt * row.iter().zip(dist.row(t)).map(|(x, p)| x * p).sum::<f64>()
        })
        .sum())
}

/// α_{a,θ} = p(θ)·u_player(a,θ).
pub fn functional_from_game(game: &MultistageGame, player: usize) -> Result<BellFunctional> {
    game.check_player(player)?;
    let prior = game.joint_prior();
    let width = game.shape().action_profiles();
    let coefficients = game
        .payoffs(player)
        .iter()
        .enumerate()
        .map(|(cell, u)| prior[cell / width] * u)
        .collect();
    BellFunctional::new(game.shape().clone(), coefficients)
}

/// Symmetric game whose every player receives u = α / p(θ).
pub fn game_from_functional(
    functional: &BellFunctional,
    prior: Vec<Vec<f64>>,
    memory: Memory,
) -> Result<MultistageGame> {
    let shape = functional.shape().clone();
    if prior.len() != shape.players() {
        return Err(Error::Shape(format!(
            "{} prior vectors for {} players",
            prior.len(),
            shape.players()
        )));
    }
    for (i, p) in prior.iter().enumerate() {
        if p.len() != shape.types()[i] {
            return Err(Error::Shape(format!(
                "prior of player {} has {} entries, expected {}",
                i + 1,
                p.len(),
                shape.types()[i]
            )));
        }
        if let Some(ty) = p.iter().position(|&x| x == 0.0) {
            return Err(Error::ZeroPrior { player: i + 1, ty });
        }
    }
    let joint = joint_prior(&shape, &prior);
    let width = shape.action_profiles();
    let u: Vec<f64> = functional
        .coefficients()
        .iter()
        .enumerate()
        .map(|(cell, a)| a / joint[cell / width])
        .collect();
    let scenario = BellScenario::new(shape.clone(), memory)?;
    MultistageGame::new(scenario, prior, vec![u; shape.players()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{strategy_distribution, DeterministicStrategy};

    fn triangle_file() -> GameFile {
        let shape = Shape::uniform(2, 3, 2).unwrap();
        let scen = BellScenario::new(shape.clone(), Memory::from_depths(&[0, 1])).unwrap();
        let g = MultistageGame::from_fn(scen, MultistageGame::uniform_prior(&shape), |_, t, a| {
            let c = -((((t[0] + t[1]) % 3) as f64) - 1.0);
            9.0 * c * if (a[0] + a[1]) % 2 == 0 { 1.0 } else { -1.0 }
        })
        .unwrap();
        g.into()
    }

    #[test]
    fn well_formed_game_has_no_diagnostics() {
        assert!(validate_game(&triangle_file()).is_empty());
    }

    #[test]
    fn memory_too_deep_is_diagnosed() {
        let mut f = triangle_file();
        f.memory = Memory::from_depths(&[0, 2]);
        let d = validate_game(&f);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].to_string(), "memory: m_2 > 1");
    }

    #[test]
    fn unnormalized_prior_is_diagnosed() {
        let mut f = triangle_file();
        f.types = vec![2, 3];
        f.prior[0] = vec![0.5, 0.6];
        f.payoffs.iter_mut().for_each(|u| u.truncate(24));
        let d = validate_game(&f);
        assert_eq!(d.len(), 1, "{d:?}");
        assert!(d[0].message.starts_with("prior not normalized"));
        assert_eq!(d[0].field, "prior[1]");
    }

    #[test]
    fn payoff_length_and_finiteness_are_checked() {
        let mut f = triangle_file();
        f.payoffs[1].pop();
        f.payoffs[0][3] = f64::NAN;
        let d = validate_game(&f);
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn all_zero_strategy_earns_nothing_in_triangle_game() {
        let g = MultistageGame::try_from(triangle_file()).unwrap();
        let zero = DeterministicStrategy::constant(g.scenario(), 0).unwrap();
        let d = strategy_distribution(&zero, g.scenario()).unwrap();
        assert_eq!(expected_payoff(&g, &d, 0).unwrap(), 0.0);
        let uniform = ConditionalDistribution::uniform(g.shape().clone());
        assert!(expected_payoff(&g, &uniform, 1).unwrap().abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch_names_dimensions() {
        let g = MultistageGame::try_from(triangle_file()).unwrap();
        let d = ConditionalDistribution::uniform(Shape::uniform(2, 2, 2).unwrap());
        let err = expected_payoff(&g, &d, 0).unwrap_err().to_string();
        assert!(err.contains("[3, 3]") && err.contains("[2, 2]"), "{err}");
    }

    #[test]
    fn zero_payoffs_give_zero_coefficients() {
        let shape = Shape::uniform(2, 2, 2).unwrap();
        let scen = BellScenario::new(shape.clone(), Memory::none(2)).unwrap();
        let g = MultistageGame::from_fn(scen, MultistageGame::uniform_prior(&shape), |_, _, _| 0.0)
            .unwrap();
        let f = functional_from_game(&g, 1).unwrap();
        assert!(f.coefficients().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn zero_prior_cell_is_rejected() {
        let shape = Shape::uniform(2, 2, 2).unwrap();
        let f = BellFunctional::new(shape, vec![1.0; 16]).unwrap();
        let err = game_from_functional(&f, vec![vec![1.0, 0.0], vec![0.5, 0.5]], Memory::none(2))
            .unwrap_err();
        assert!(matches!(err, Error::ZeroPrior { player: 1, ty: 1 }));
        assert!(err.to_string().contains("division by zero prior cell"));
    }

    #[test]
    fn game_json_round_trip_is_byte_stable() {
        let g = MultistageGame::try_from(triangle_file()).unwrap();
        let s = crate::io::to_canonical_json(&g).unwrap();
        assert!(s.starts_with("{\"players\":2,\"types\":[3,3],\"actions\":[2,2],\"memory\":[0,1],"));
        let back: MultistageGame = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert_eq!(crate::io::to_canonical_json(&back).unwrap(), s);
    }

    #[test]
    fn invalid_game_file_fails_to_load() {
        let mut f = triangle_file();
        f.prior[1] = vec![0.2, 0.2, 0.2];
        let s = serde_json::to_string(&f).unwrap();
        assert!(serde_json::from_str::<MultistageGame>(&s).is_err());
    }

    #[test]
    fn functional_json_keeps_reference_bounds() {
        let shape = Shape::uniform(1, 1, 2).unwrap();
        let f = BellFunctional::new(shape, vec![1.0, -1.0])
            .unwrap()
            .with_reference(ReferenceBounds {
                classical: Some(1.0),
                ..Default::default()
            });
        let s = crate::io::to_canonical_json(&f).unwrap();
        assert!(s.contains("\"reference_bounds\":{\"classical\":"));
        assert_eq!(serde_json::from_str::<BellFunctional>(&s).unwrap(), f);
    }
}
