//! Quantum advisors: a shared state plus one measurement family per player,
//! where a player's POVM may depend on its type and on observed actions.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distributions::ConditionalDistribution;
use crate::error::{Diagnostic, Error, Result};
use crate::game::BellFunctional;
use crate::linalg::{
    bloch, c, hermiticity_error, identity, min_eigenvalue, outer, pauli, trace, CMatrix, CVector,
    ZERO,
};
use crate::shape::{BellScenario, Memory};

/// Density operator on ⊗_i C^{d_i}, player 1 most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    dims: Vec<usize>,
    rho: CMatrix,
}

impl QuantumState {
    /// Checks dimensions only; see [`validate_quantum`] for the physical
    /// invariants.
    pub fn new(dims: Vec<usize>, rho: CMatrix) -> Result<Self> {
        let d: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Shape(format!("invalid local dimensions {dims:?}")));
        }
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::Shape(format!(
                "state is {}x{} but dims {dims:?} need {d}x{d}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        Ok(Self { dims, rho })
    }

    /// |ψ⟩⟨ψ|, used as given (not renormalized).
    pub fn pure(dims: Vec<usize>, psi: &CVector) -> Result<Self> {
        Self::new(dims, outer(psi))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    fn diagnose(&self, tol: f64, out: &mut Vec<Diagnostic>) {
        let herm = hermiticity_error(&self.rho);
        if herm > tol {
            out.push(Diagnostic::new(
                "state",
                format!("not Hermitian (deviation {herm:e})"),
            ));
            return;
        }
        let low = min_eigenvalue(&self.rho);
        if low < -tol {
            out.push(Diagnostic::new(
                "state",
                format!("negative eigenvalue {low:e}"),
            ));
        }
        let tr = trace(&self.rho).re;
        if (tr - 1.0).abs() > tol {
            out.push(Diagnostic::new(
                "state",
                format!("trace = {}", (tr * 1e9).round() / 1e9),
            ));
        }
    }
}

/// One player's POVMs, indexed `[setting][outcome]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementFamily {
    povms: Vec<Vec<CMatrix>>,
}

impl MeasurementFamily {
    pub fn new(povms: Vec<Vec<CMatrix>>) -> Result<Self> {
        let first = povms.first().and_then(|p| p.first()).ok_or_else(|| {
            Error::Shape("measurement family needs a setting and an outcome".into())
        })?;
        let d = first.nrows();
        let outcomes = povms[0].len();
        for (x, povm) in povms.iter().enumerate() {
            if povm.len() != outcomes {
                return Err(Error::Shape(format!(
                    "setting {x} has {} outcomes, setting 0 has {outcomes}",
                    povm.len()
                )));
            }
            if povm.iter().any(|m| m.nrows() != d || m.ncols() != d) {
                return Err(Error::Shape(format!(
                    "setting {x} mixes operator dimensions"
                )));
            }
        }
        Ok(Self { povms })
    }

    /// Binary POVMs with M_0 − M_1 = O for each observable O.
    pub fn from_observables(observables: &[CMatrix]) -> Result<Self> {
        Self::new(
            observables
                .iter()
                .map(|o| {
                    let id = identity(o.nrows());
                    vec![(&id + o) * c(0.5, 0.0), (&id - o) * c(0.5, 0.0)]
                })
                .collect(),
        )
    }

    pub fn settings(&self) -> usize {
        self.povms.len()
    }

    pub fn outcomes(&self) -> usize {
        self.povms[0].len()
    }

    pub fn dim(&self) -> usize {
        self.povms[0][0].nrows()
    }

    pub fn povm(&self, setting: usize) -> &[CMatrix] {
        &self.povms[setting]
    }

    pub fn element(&self, setting: usize, outcome: usize) -> &CMatrix {
        &self.povms[setting][outcome]
    }

    pub(crate) fn set_povm(&mut self, setting: usize, povm: Vec<CMatrix>) {
        self.povms[setting] = povm;
    }

    fn diagnose(&self, player: usize, dim: usize, tol: f64, out: &mut Vec<Diagnostic>) {
        for (x, povm) in self.povms.iter().enumerate() {
            let mut sum = CMatrix::zeros(dim, dim);
            for (a, m) in povm.iter().enumerate() {
                let field = format!("families[{player}][{x}][{a}]");
                if m.nrows() != dim {
                    out.push(Diagnostic::new(
                        field,
                        format!("dimension {} != {dim}", m.nrows()),
                    ));
                    return;
                }
                let herm = hermiticity_error(m);
                if herm > tol {
                    out.push(Diagnostic::new(
                        field,
                        format!("not Hermitian (deviation {herm:e})"),
                    ));
                    continue;
                }
                let low = min_eigenvalue(m);
                if low < -tol {
                    out.push(Diagnostic::new(
                        field,
                        format!("negative eigenvalue {low:e}"),
                    ));
                }
                sum += m;
            }
            let dev = (sum - identity(dim))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            if dev > tol {
                out.push(Diagnostic::new(
                    format!("families[{player}][{x}]"),
                    format!("elements do not sum to identity (deviation {dev:e})"),
                ));
            }
        }
    }
}

/// Shared state plus per-player measurement families. The setting index of
/// player i is the canonical `(θ_i, h_i)` index of the scenario it is
/// evaluated in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StrategyFile", into = "StrategyFile")]
pub struct QuantumStrategy {
    state: QuantumState,
    families: Vec<MeasurementFamily>,
}

impl QuantumStrategy {
    pub fn new(state: QuantumState, families: Vec<MeasurementFamily>) -> Result<Self> {
        if families.len() != state.dims.len() {
            return Err(Error::Shape(format!(
                "{} measurement families for {} subsystems",
                families.len(),
                state.dims.len()
            )));
        }
        for (i, (f, &d)) in families.iter().zip(&state.dims).enumerate() {
            if f.dim() != d {
                return Err(Error::Shape(format!(
                    "player {} measures dimension {} but holds dimension {d}",
                    i + 1,
                    f.dim()
                )));
            }
        }
        Ok(Self { state, families })
    }

    pub fn dims(&self) -> &[usize] {
        &self.state.dims
    }

    pub fn players(&self) -> usize {
        self.families.len()
    }

    pub fn state(&self) -> &QuantumState {
        &self.state
    }

    pub fn families(&self) -> &[MeasurementFamily] {
        &self.families
    }

    pub fn family(&self, player: usize) -> &MeasurementFamily {
        &self.families[player]
    }

    pub fn with_state(mut self, state: QuantumState) -> Result<Self> {
        if state.dims != self.state.dims {
            return Err(Error::Shape(format!(
                "state dims {:?} != {:?}",
                state.dims, self.state.dims
            )));
        }
        self.state = state;
        Ok(self)
    }

    pub fn with_family(mut self, player: usize, family: MeasurementFamily) -> Result<Self> {
        if family.dim() != self.state.dims[player] {
            return Err(Error::Shape(format!(
                "family dimension {} != {}",
                family.dim(),
                self.state.dims[player]
            )));
        }
        self.families[player] = family;
        Ok(self)
    }

    /// Re-indexes type-only families by the `(θ, h)` settings of `scenario`,
    /// ignoring the history. Families already matching are kept.
    pub fn ignoring_history(&self, scenario: &BellScenario) -> Result<Self> {
        self.check_players(scenario)?;
        let mut out = self.clone();
        for i in 0..scenario.players() {
            let want = scenario.setting_count(i);
            let fam = &self.families[i];
            if fam.settings() == want {
                continue;
            }
            if fam.settings() != scenario.shape.types()[i] {
                return Err(Error::Shape(format!(
                    "player {} has {} settings, expected {} types or {want} settings",
                    i + 1,
                    fam.settings(),
                    scenario.shape.types()[i]
                )));
            }
            let povms = (0..want)
                .map(|s| fam.povms[scenario.decode_setting(i, s).0].clone())
                .collect();
            out.families[i] = MeasurementFamily { povms };
        }
        Ok(out)
    }

    fn check_players(&self, scenario: &BellScenario) -> Result<()> {
        if self.players() != scenario.players() {
            return Err(Error::Shape(format!(
                "strategy has {} players, scenario has {}",
                self.players(),
                scenario.players()
            )));
        }
        Ok(())
    }

    /// Setting and outcome counts must match the scenario exactly.
    pub fn check_scenario(&self, scenario: &BellScenario) -> Result<()> {
        self.check_players(scenario)?;
        for (i, f) in self.families.iter().enumerate() {
            let (x, a) = (scenario.setting_count(i), scenario.shape.actions()[i]);
            if f.settings() != x || f.outcomes() != a {
                return Err(Error::Shape(format!(
                    "player {}: family has {} settings x {} outcomes, scenario needs {x} x {a}",
                    i + 1,
                    f.settings(),
                    f.outcomes()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct StrategyFile {
    dims: Vec<usize>,
    state: Vec<Complex64>,
    families: Vec<Vec<Vec<Vec<Complex64>>>>,
}

fn flatten(m: &CMatrix) -> Vec<Complex64> {
    m.transpose().iter().copied().collect()
}

fn unflatten(d: usize, flat: &[Complex64], what: &str) -> Result<CMatrix> {
    if flat.len() != d * d {
        return Err(Error::Shape(format!(
            "{what} has {} entries, expected {}",
            flat.len(),
            d * d
        )));
    }
    Ok(CMatrix::from_row_slice(d, d, flat))
}

impl TryFrom<StrategyFile> for QuantumStrategy {
    type Error = Error;

    fn try_from(f: StrategyFile) -> Result<Self> {
        let d: usize = f.dims.iter().product();
        let state = QuantumState::new(f.dims.clone(), unflatten(d, &f.state, "state")?)?;
        let families = f
            .families
            .iter()
            .enumerate()
            .map(|(i, fam)| {
                let di = *f.dims.get(i).ok_or_else(|| {
                    Error::Shape(format!(
                        "{} families for {} dims",
                        f.families.len(),
                        f.dims.len()
                    ))
                })?;
                let povms = fam
                    .iter()
                    .map(|povm| {
                        povm.iter()
                            .map(|op| unflatten(di, op, &format!("families[{i}] operator")))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                MeasurementFamily::new(povms)
            })
            .collect::<Result<Vec<_>>>()?;
        QuantumStrategy::new(state, families)
    }
}

impl From<QuantumStrategy> for StrategyFile {
    fn from(q: QuantumStrategy) -> Self {
        StrategyFile {
            dims: q.state.dims.clone(),
            state: flatten(&q.state.rho),
            families: q
                .families
                .iter()
                .map(|f| {
                    f.povms
                        .iter()
                        .map(|p| p.iter().map(flatten).collect())
                        .collect()
                })
                .collect(),
        }
    }
}

/// Diagnostics for every PSD, trace and completeness violation beyond `tol`.
pub fn validate_quantum(qs: &QuantumStrategy, tol: f64) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    qs.state.diagnose(tol, &mut out);
    for (i, f) in qs.families.iter().enumerate() {
        f.diagnose(i, qs.state.dims[i], tol, &mut out);
    }
    out
}

/// Tr_p[(M ⊗ 1) X] for the factor at position `pos` of a tensor with local
/// dimensions `dims`.
fn contract_one(x: &CMatrix, dims: &[usize], pos: usize, m: &CMatrix) -> CMatrix {
    let d = dims[pos];
    let pre: usize = dims[..pos].iter().product();
    let post: usize = dims[pos + 1..].iter().product();
    let n = pre * post;
    let mut out = CMatrix::zeros(n, n);
    for c0 in 0..pre {
        for c1 in 0..post {
            for r0 in 0..pre {
                for r1 in 0..post {
                    let mut acc = ZERO;
                    for xi in 0..d {
                        let col = (c0 * d + xi) * post + c1;
                        for yi in 0..d {
                            acc += m[(xi, yi)] * x[((r0 * d + yi) * post + r1, col)];
                        }
                    }
                    out[(r0 * post + r1, c0 * post + c1)] = acc;
                }
            }
        }
    }
    out
}

fn is_zero(m: &CMatrix) -> bool {
    m.iter().all(|z| *z == ZERO)
}

struct Walker<'a, F> {
    qs: &'a QuantumStrategy,
    scenario: &'a BellScenario,
    keep: Option<usize>,
    theta: Vec<usize>,
    a: Vec<usize>,
    t: usize,
    visit: F,
}

impl<F: FnMut(usize, &[usize], &CMatrix)> Walker<'_, F> {
    fn go(&mut self, k: usize, x: &CMatrix, dims: &[usize]) {
        if k == self.theta.len() {
            (self.visit)(self.t, &self.a, x);
            return;
        }
        let s = self.scenario.setting_index(k, self.theta[k], &self.a);
        for ak in 0..self.scenario.shape.actions()[k] {
            self.a[k] = ak;
            if self.keep == Some(k) {
                self.go(k + 1, x, dims);
                continue;
            }
            let m = self.qs.families[k].element(s, ak);
            if is_zero(m) {
                continue;
            }
            let pos = usize::from(self.keep.is_some_and(|j| j < k));
            let y = contract_one(x, dims, pos, m);
            let mut rest = dims.to_vec();
            rest.remove(pos);
            self.go(k + 1, &y, &rest);
        }
        self.a[k] = 0;
    }
}

/// Calls `visit(type_profile, actions, reduced)` for every branch with a
/// nonzero operator product, where `reduced` is ρ with every player but
/// `keep` contracted against its POVM element on the realized history, so
/// that p(a|θ) = Tr[M_keep · reduced] (or the 1×1 `reduced` itself when
/// `keep` is `None`). Expects `qs.check_scenario(scenario)` to hold.
pub(crate) fn for_each_branch<F>(
    qs: &QuantumStrategy,
    scenario: &BellScenario,
    keep: Option<usize>,
    visit: F,
) where
    F: FnMut(usize, &[usize], &CMatrix),
{
    let n = scenario.players();
    let shape = &scenario.shape;
    let mut w = Walker {
        qs,
        scenario,
        keep,
        theta: vec![0; n],
        a: vec![0; n],
        t: 0,
        visit,
    };
    for t in 0..shape.type_profiles() {
        shape.decode_types(t, &mut w.theta);
        w.t = t;
        w.go(0, &qs.state.rho, &qs.state.dims);
    }
}

/// p(a|θ) = Tr[(⊗_i M^{(θ_i, h_i(a))}_{a_i}) ρ].
pub fn evaluate_quantum_strategy(
    qs: &QuantumStrategy,
    scenario: &BellScenario,
) -> Result<ConditionalDistribution> {
    qs.check_scenario(scenario)?;
    let diags = validate_quantum(qs, 1e-8);
    if !diags.is_empty() {
        return Err(Error::invalid("quantum strategy", diags));
    }
    let shape = &scenario.shape;
    let mut table = vec![0.0; shape.cells()];
    for_each_branch(qs, scenario, None, |t, a, x| {
        table[shape.cell(t, shape.action_index(a))] = x[(0, 0)].re.max(0.0);
    });
    for t in 0..shape.type_profiles() {
        let row = &table[t * shape.action_profiles()..(t + 1) * shape.action_profiles()];
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-8 {
            return Err(Error::Shape(format!(
                "quantum probabilities for type profile {t} sum to {sum}"
            )));
        }
    }
    Ok(ConditionalDistribution::exact(shape.clone(), table))
}

/// Σ α_{a,θ} p(a|θ) for the strategy played under `memory`.
pub fn quantum_value(
    qs: &QuantumStrategy,
    functional: &BellFunctional,
    memory: &Memory,
) -> Result<f64> {
    let scenario = BellScenario::new(functional.shape().clone(), memory.clone())?;
    functional.value(&evaluate_quantum_strategy(qs, &scenario)?)
}

/// Singlet (|01⟩ − |10⟩)/√2.
pub fn singlet() -> QuantumState {
    let s = FRAC_1_SQRT_2;
    let psi = CVector::from_vec(vec![ZERO, c(s, 0.0), c(-s, 0.0), ZERO]);
    QuantumState::pure(vec![2, 2], &psi).expect("2x2 state")
}

/// Measurement directions of the triangle strategy with k = z and k⊥ = x.
pub fn triangle_vectors() -> [[[f64; 3]; 3]; 2] {
    let h = 3f64.sqrt() / 2.0;
    let k = [0.0, 0.0, 1.0];
    let kp = [1.0, 0.0, 0.0];
    let lin = |p: f64, u: [f64; 3], q: f64, v: [f64; 3]| {
        [
            p * u[0] + q * v[0],
            p * u[1] + q * v[1],
            p * u[2] + q * v[2],
        ]
    };
    [
        [k, lin(-0.5, k, h, kp), lin(-0.5, k, -h, kp)],
        [lin(-0.5, kp, -h, k), kp, lin(-0.5, kp, h, k)],
    ]
}

/// Singlet shared by two players whose three rank-1 projective measurements
/// point at the vertices of an equilateral triangle (M_0 − M_1 = v·σ).
/// Settings are indexed by type only.
pub fn make_singlet_triangle() -> QuantumStrategy {
    let families = triangle_vectors()
        .iter()
        .map(|vs| {
            let obs: Vec<CMatrix> = vs.iter().map(|&v| bloch(v)).collect();
            MeasurementFamily::from_observables(&obs).expect("qubit observables")
        })
        .collect();
    QuantumStrategy::new(singlet(), families).expect("consistent dims")
}

/// Largest player count accepted by [`make_ghz_svetlichny`].
pub const MAX_GHZ_PLAYERS: usize = 10;

fn ghz_vector(n: usize, amplitude: f64) -> CVector {
    let d = 1 << n;
    let mut psi = CVector::zeros(d);
    psi[0] = c(amplitude, 0.0);
    psi[d - 1] = c(amplitude, 0.0);
    psi
}

fn ghz_families(n: usize) -> Vec<MeasurementFamily> {
    let [x, y, _] = pauli();
    // overall sign making the value positive for every n
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let s = sign * FRAC_1_SQRT_2;
    let first = [(&y + &x) * c(s, 0.0), (&y - &x) * c(s, 0.0)];
    let rest = [-x.clone(), -y.clone()];
    (0..n)
        .map(|i| {
            let obs = if i == 0 { &first } else { &rest };
            MeasurementFamily::from_observables(obs).expect("qubit observables")
        })
        .collect()
}

fn check_ghz_players(n: usize) -> Result<()> {
    if !(2..=MAX_GHZ_PLAYERS).contains(&n) {
        return Err(Error::Shape(format!(
            "GHZ strategy needs 2..={MAX_GHZ_PLAYERS} players, got {n}"
        )));
    }
    Ok(())
}

/// n-qubit GHZ state (|0…0⟩ + |1…1⟩)/√2 with the Svetlichny-optimal
/// observables (σ_y ± σ_x)/√2 for player 1 and −σ_x, −σ_y for the others.
/// Player 1's observable carries the sign (−1)^{n−1} so the value is
/// +2^{n−1}√2 for every n. Settings are indexed by type only.
pub fn make_ghz_svetlichny(n: usize) -> Result<QuantumStrategy> {
    check_ghz_players(n)?;
    let state = QuantumState::pure(vec![2; n], &ghz_vector(n, FRAC_1_SQRT_2))?;
    QuantumStrategy::new(state, ghz_families(n))
}

/// As [`make_ghz_svetlichny`] but with the unnormalized prefactor ½ on the
/// GHZ state; fails validation with a trace diagnostic.
pub fn make_ghz_svetlichny_half_prefactor(n: usize) -> Result<QuantumStrategy> {
    check_ghz_players(n)?;
    let state = QuantumState::pure(vec![2; n], &ghz_vector(n, 0.5))?;
    QuantumStrategy::new(state, ghz_families(n))
}

/// POVM scale κ of player 1 in the tripartite strategy.
pub const QECD_KAPPA: f64 = 0.4989;
pub const QECD_A: [f64; 3] = [-0.4368, -0.3031, -0.8469];
pub const QECD_B: [f64; 3] = [-0.2855, -0.9581, 0.0214];
pub const QECD_C: [f64; 3] = [0.1391, 0.9556, -0.2599];

/// Amplitudes of the two pure states mixed with equal weight.
pub fn qecd_amplitudes() -> [[Complex64; 8]; 2] {
    [
        [
            c(0.0609, -0.0704),
            c(-0.0296, 0.6751),
            c(-0.0421, -0.6386),
            c(0.1811, -0.1257),
            c(0.0260, -0.0067),
            c(-0.1178, 0.1548),
            c(0.0949, -0.1579),
            c(0.0634, 0.0),
        ],
        [
            c(0.6644, -0.0953),
            c(0.0685, -0.0543),
            c(0.0211, 0.2330),
            c(0.5264, -0.3653),
            c(0.1728, 0.0865),
            c(0.0251, -0.0016),
            c(-0.0332, 0.0586),
            c(0.1845, 0.0),
        ],
    ]
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Three-qubit QECD strategy for the Svetlichny game with chain memory:
/// player 2's settings are indexed by (θ_2, a_1), player 3's by (θ_3, a_2).
/// With `renormalize` the printed 4-decimal state vectors and measurement
/// directions are rescaled to unit length first; without it the data is
/// used verbatim.
pub fn make_tripartite_qecd_with(renormalize: bool) -> QuantumStrategy {
    let fix = |v: [f64; 3]| if renormalize { unit(v) } else { v };
    let (a, b, cv) = (fix(QECD_A), fix(QECD_B), fix(QECD_C));
    let id = identity(2);
    let half = c(0.5, 0.0);

    let mut rho = CMatrix::zeros(8, 8);
    for amps in qecd_amplitudes() {
        let mut psi = CVector::from_row_slice(&amps);
        if renormalize {
            psi /= c(psi.norm(), 0.0);
        }
        rho += outer(&psi) * half;
    }

    let e = (&id + bloch(a)) * c(QECD_KAPPA / 2.0, 0.0);
    let not_e = &id - &e;
    let alice = vec![vec![not_e.clone(), e.clone()], vec![e, not_e]];

    let bob = (0..4)
        .map(|s| {
            let (t2, a1) = (s / 2, s % 2);
            (0..2)
                .map(|a2| {
                    let diag = f64::from(u8::from(a2 != a1)) + f64::from(u8::from(a2 == t2));
                    let sign = if a2 == 0 { 1.0 } else { -1.0 };
                    let tilt = ((t2 ^ a1 ^ 1) as f64) / 2.0;
                    &id * c(diag / 2.0, 0.0) - bloch(b) * c(sign * tilt, 0.0)
                })
                .collect()
        })
        .collect();

    let charlie = (0..4)
        .map(|s| {
            let (t3, a2) = (s / 2, s % 2);
            (0..2)
                .map(|a3| {
                    if t3 == a2 {
                        if a3 == 0 {
                            id.clone()
                        } else {
                            CMatrix::zeros(2, 2)
                        }
                    } else {
                        let sign = if (a3 + a2) % 2 == 0 { 1.0 } else { -1.0 };
                        (&id + bloch(cv) * c(sign, 0.0)) * half
                    }
                })
                .collect()
        })
        .collect();

    let families = [alice, bob, charlie]
        .into_iter()
        .map(|p| MeasurementFamily::new(p).expect("qubit POVMs"))
        .collect();
    QuantumStrategy::new(
        QuantumState::new(vec![2, 2, 2], rho).expect("8x8 state"),
        families,
    )
    .expect("consistent dims")
}

/// The tripartite QECD strategy with renormalized data.
pub fn make_tripartite_qecd() -> QuantumStrategy {
    make_tripartite_qecd_with(true)
}

/// Rotation of a qubit family's Bloch vectors about the y axis by `angle`
/// radians, applied to one setting. Handy for detuning a strategy.
pub fn rotate_setting(family: &MeasurementFamily, setting: usize, angle: f64) -> MeasurementFamily {
    let (s, co) = (angle / 2.0).sin_cos();
    let u = CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)]);
    let mut out = family.clone();
    let povm = family
        .povm(setting)
        .iter()
        .map(|m| &u * m * u.adjoint())
        .collect();
    out.set_povm(setting, povm);
    out
}
