//! No-signaling bounds. Communication is modelled by an augmented scenario
//! in which every player's observed history is an extra free input; the
//! realized history only enters through which inputs the functional reads.

use serde::{Deserialize, Serialize};

use crate::distributions::ConditionalDistribution;
use crate::error::{Diagnostic, Error, Result};
use crate::game::BellFunctional;
use crate::lp;
use crate::shape::{decode_into, BellScenario, Memory, Shape};

/// Largest LP (in variables) that [`ns_bound`] will attempt.
pub const MAX_NS_VARIABLES: usize = 1024;

const TOL: f64 = 1e-9;

/// A no-signaling box P(a | x̃) over augmented inputs, stored in canonical
/// order with inputs in the role of types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoxFile", into = "BoxFile")]
pub struct AugmentedBox {
    shape: Shape,
    table: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct BoxFile {
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    table: Vec<f64>,
}

impl TryFrom<BoxFile> for AugmentedBox {
    type Error = Error;

    fn try_from(f: BoxFile) -> Result<Self> {
        AugmentedBox::new(f.inputs, f.outputs, f.table)
    }
}

impl From<AugmentedBox> for BoxFile {
    fn from(b: AugmentedBox) -> Self {
        BoxFile {
            inputs: b.shape.types().to_vec(),
            outputs: b.shape.actions().to_vec(),
            table: b.table,
        }
    }
}

/// Subsets S (as bitmasks) that are nonempty and proper.
fn proper_subsets(n: usize) -> impl Iterator<Item = usize> {
    1..(1usize << n) - 1
}

impl AugmentedBox {
    /// Validates normalization and full no-signaling within 1e-9.
    pub fn new(inputs: Vec<usize>, outputs: Vec<usize>, table: Vec<f64>) -> Result<Self> {
        let shape = Shape::new(inputs, outputs)?;
        if table.len() != shape.cells() {
            return Err(Error::Shape(format!(
                "box table has {} entries, expected {}",
                table.len(),
                shape.cells()
            )));
        }
        let b = Self { shape, table };
        let diags = b.diagnose();
        if !diags.is_empty() {
            return Err(Error::invalid("box", diags));
        }
        Ok(b)
    }

    fn diagnose(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let width = self.shape.action_profiles();
        if let Some(cell) = self.table.iter().position(|&p| p < -TOL || !p.is_finite()) {
            out.push(Diagnostic::new(
                format!("table[{cell}]"),
                format!("entry {} is not a probability", self.table[cell]),
            ));
        }
        for x in 0..self.shape.type_profiles() {
            let s: f64 = self.table[x * width..(x + 1) * width].iter().sum();
            if (s - 1.0).abs() > TOL {
                out.push(Diagnostic::new(
                    "table",
                    format!("input profile {x} sums to {s}"),
                ));
            }
        }
        let v = self.signaling();
        if v > TOL {
            out.push(Diagnostic::new("table", format!("signaling by {v:e}")));
        }
        out
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn inputs(&self) -> &[usize] {
        self.shape.types()
    }

    pub fn outputs(&self) -> &[usize] {
        self.shape.actions()
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn prob(&self, inputs: &[usize], outputs: &[usize]) -> f64 {
        self.table[self.shape.cell(
            self.shape.type_index(inputs),
            self.shape.action_index(outputs),
        )]
    }

    /// Largest change of any subset marginal under a change of the
    /// complement's inputs.
    pub fn signaling(&self) -> f64 {
        let shape = &self.shape;
        let n = shape.players();
        let mut x = vec![0; n];
        let mut a = vec![0; n];
        let mut worst = 0.0_f64;
        for mask in proper_subsets(n) {
            let inside: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let radices: Vec<usize> = inside.iter().map(|&i| shape.actions()[i]).collect();
            let count: usize = radices.iter().product();
            let mut marg = |x: &[usize]| -> Vec<f64> {
                let mut m = vec![0.0; count];
                let t = shape.type_index(x);
                for k in 0..shape.action_profiles() {
                    shape.decode_actions(k, &mut a);
                    let key = inside
                        .iter()
                        .fold(0, |acc, &i| acc * shape.actions()[i] + a[i]);
                    m[key] += self.table[shape.cell(t, k)];
                }
                m
            };
            for t in 0..shape.type_profiles() {
                shape.decode_types(t, &mut x);
                let here = marg(&x);
                for j in (0..n).filter(|j| mask >> j & 1 == 0) {
                    x[j] = 0;
                }
                let reference = marg(&x);
                for (p, q) in here.iter().zip(&reference) {
                    worst = worst.max((p - q).abs());
                }
            }
        }
        worst
    }

    /// Popescu–Rohrlich box: P = ½ iff a_1 ⊕ a_2 = x_1 x_2.
    pub fn pr_box() -> Self {
        let shape = Shape::uniform(2, 2, 2).expect("2x2");
        let mut table = vec![0.0; 16];
        for x in 0..4 {
            for a in 0..4 {
                if (a >> 1) ^ (a & 1) == (x >> 1) & (x & 1) {
                    table[x * 4 + a] = 0.5;
                }
            }
        }
        Self { shape, table }
    }
}

/// For each player, the augmented input used at each `(θ_i, h_i)` setting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Wiring {
    maps: Vec<Vec<usize>>,
}

impl Wiring {
    pub fn new(maps: Vec<Vec<usize>>) -> Self {
        Self { maps }
    }

    /// Setting (θ_i, h_i) ↦ θ_i: every player ignores what it receives.
    pub fn types_only(scenario: &BellScenario) -> Self {
        Self::new(
            (0..scenario.players())
                .map(|i| {
                    (0..scenario.setting_count(i))
                        .map(|s| scenario.decode_setting(i, s).0)
                        .collect()
                })
                .collect(),
        )
    }

    /// Setting s ↦ s: the box sees exactly the realized setting.
    pub fn settings(scenario: &BellScenario) -> Self {
        Self::new(
            (0..scenario.players())
                .map(|i| (0..scenario.setting_count(i)).collect())
                .collect(),
        )
    }

    pub fn maps(&self) -> &[Vec<usize>] {
        &self.maps
    }

    fn check(&self, scenario: &BellScenario, inputs: &[usize]) -> Result<()> {
        if self.maps.len() != scenario.players() || inputs.len() != scenario.players() {
            return Err(Error::Shape(format!(
                "wiring for {} players, box for {}, scenario for {}",
                self.maps.len(),
                inputs.len(),
                scenario.players()
            )));
        }
        for (i, map) in self.maps.iter().enumerate() {
            if map.len() != scenario.setting_count(i) {
                return Err(Error::Shape(format!(
                    "wiring of player {} covers {} settings, scenario has {}",
                    i + 1,
                    map.len(),
                    scenario.setting_count(i)
                )));
            }
            if let Some(&bad) = map.iter().find(|&&x| x >= inputs[i]) {
                return Err(Error::Shape(format!(
                    "wiring of player {} targets input {bad} of {}",
                    i + 1,
                    inputs[i]
                )));
            }
        }
        Ok(())
    }
}

/// p(a|θ) = q(a | f_1(θ_1, h_1), ..., f_n(θ_n, h_n)) with h_i the realized
/// earlier outputs.
pub fn wire_box(
    q: &AugmentedBox,
    wiring: &Wiring,
    scenario: &BellScenario,
) -> Result<ConditionalDistribution> {
    wiring.check(scenario, q.inputs())?;
    if q.outputs() != scenario.shape.actions() {
        return Err(Error::Shape(format!(
            "box outputs {:?} != actions {:?}",
            q.outputs(),
            scenario.shape.actions()
        )));
    }
    let shape = &scenario.shape;
    let n = shape.players();
    let mut theta = vec![0; n];
    let mut a = vec![0; n];
    let mut x = vec![0; n];
    let mut table = vec![0.0; shape.cells()];
    for t in 0..shape.type_profiles() {
        shape.decode_types(t, &mut theta);
        for k in 0..shape.action_profiles() {
            shape.decode_actions(k, &mut a);
            for i in 0..n {
                x[i] = wiring.maps[i][scenario.setting_index(i, theta[i], &a)];
            }
            table[shape.cell(t, k)] = q.prob(&x, &a);
        }
    }
    ConditionalDistribution::from_table(shape.clone(), table)
}

/// Σ_θ max_a α_{a,θ}: the value of the best normalized distribution.
pub fn algebraic_max(functional: &BellFunctional) -> f64 {
    functional
        .coefficients()
        .chunks(functional.shape().action_profiles())
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum()
}

fn augmented_shape(shape: &Shape, memory: &Memory) -> Result<(BellScenario, Shape)> {
    let scenario = BellScenario::new(shape.clone(), memory.clone())?;
    let inputs = (0..shape.players())
        .map(|i| scenario.setting_count(i))
        .collect();
    let aug = Shape::new(inputs, shape.actions().to_vec())?;
    Ok((scenario, aug))
}

/// Number of LP variables and equality constraints for `shape` under
/// `memory`: one normalization row per augmented input profile plus, for
/// every nonempty proper subset S of players, one row per (x̃ with
/// x̃_{S^c} ≠ 0, a_S with every a_i < A_i − 1) equating the S-marginal
/// with its value at x̃_{S^c} = 0.
pub fn ns_problem_size(shape: &Shape, memory: &Memory) -> Result<(usize, usize)> {
    let (_, aug) = augmented_shape(shape, memory)?;
    let n = aug.players();
    let x = aug.types();
    let a = aug.actions();
    let mut rows = aug.type_profiles();
    for mask in proper_subsets(n) {
        let mut inside = 1;
        let mut outside = 1;
        for i in 0..n {
            if mask >> i & 1 == 1 {
                inside *= x[i] * (a[i] - 1);
            } else {
                outside *= x[i];
            }
        }
        rows += inside * (outside - 1);
    }
    Ok((aug.cells(), rows))
}

#[derive(Debug, Clone)]
pub struct NsBound {
    pub value: f64,
    pub variables: usize,
    pub constraints: usize,
    pub redundant_constraints: usize,
    /// an optimal box
    pub solution: AugmentedBox,
}

/// Maximum of the functional over no-signaling boxes on the augmented
/// inputs, each player's input being its realized `(θ_i, h_i)`.
pub fn ns_bound(functional: &BellFunctional, memory: &Memory) -> Result<NsBound> {
    let (scenario, aug) = augmented_shape(functional.shape(), memory)?;
    let (variables, constraints) = ns_problem_size(functional.shape(), memory)?;
    if variables > MAX_NS_VARIABLES {
        return Err(Error::TooLarge(format!(
            "no-signaling LP needs {variables} variables, limit is {MAX_NS_VARIABLES}"
        )));
    }
    let shape = functional.shape();
    let n = shape.players();
    let width = aug.action_profiles();

    let mut cost = vec![0.0; variables];
    let mut theta = vec![0; n];
    let mut a = vec![0; n];
    let mut x = vec![0; n];
    for t in 0..shape.type_profiles() {
        shape.decode_types(t, &mut theta);
        for k in 0..shape.action_profiles() {
            shape.decode_actions(k, &mut a);
            for i in 0..n {
                x[i] = scenario.setting_index(i, theta[i], &a);
            }
            cost[aug.cell(aug.type_index(&x), k)] += functional.coefficient(t, k);
        }
    }

    let mut rows = Vec::with_capacity(constraints);
    for xi in 0..aug.type_profiles() {
        let mut row = vec![0.0; variables];
        row[xi * width..(xi + 1) * width]
            .iter_mut()
            .for_each(|v| *v = 1.0);
        rows.push(row);
    }
    let mut reference = vec![0; n];
    for mask in proper_subsets(n) {
        let inside: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let outside: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).collect();
        // reduced outcome tuples a_S
        let reduced: Vec<usize> = inside.iter().map(|&i| aug.actions()[i] - 1).collect();
        let reduced_count: usize = reduced.iter().product();
        let out_radices: Vec<usize> = outside.iter().map(|&j| aug.actions()[j]).collect();
        let out_count: usize = out_radices.iter().product();
        let mut a_in = vec![0; inside.len()];
        let mut a_out = vec![0; outside.len()];
        for xi in 0..aug.type_profiles() {
            aug.decode_types(xi, &mut x);
            if outside.iter().all(|&j| x[j] == 0) {
                continue;
            }
            reference.copy_from_slice(&x);
            for &j in &outside {
                reference[j] = 0;
            }
            let xr = aug.type_index(&reference);
            for r in 0..reduced_count {
                decode_into(r, &reduced, &mut a_in);
                let mut row = vec![0.0; variables];
                for o in 0..out_count {
                    decode_into(o, &out_radices, &mut a_out);
                    for (&i, &v) in inside.iter().zip(&a_in) {
                        a[i] = v;
                    }
                    for (&j, &v) in outside.iter().zip(&a_out) {
                        a[j] = v;
                    }
                    let k = aug.action_index(&a);
                    row[aug.cell(xi, k)] += 1.0;
                    row[aug.cell(xr, k)] -= 1.0;
                }
                rows.push(row);
            }
        }
    }
    debug_assert_eq!(rows.len(), constraints);
    let mut rhs = vec![0.0; rows.len()];
    rhs[..aug.type_profiles()].iter_mut().for_each(|b| *b = 1.0);

    let sol = lp::maximize(&cost, &rows, &rhs)?;
    let table = sol.x.iter().map(|&p| p.max(0.0)).collect();
    Ok(NsBound {
        value: sol.value,
        variables,
        constraints,
        redundant_constraints: sol.redundant_rows,
        solution: AugmentedBox { shape: aug, table },
    })
}
