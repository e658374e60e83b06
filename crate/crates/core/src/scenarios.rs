//! Catalog of named games with their functionals, builtin quantum
//! strategies and reference values.

use std::f64::consts::SQRT_2;

use crate::classical::classical_bound;
use crate::error::{Diagnostic, Error, Result};
use crate::game::{functional_from_game, BellFunctional, MultistageGame, ReferenceBounds};
use crate::nonsignaling::{algebraic_max, ns_bound};
use crate::quantum::{
    make_ghz_svetlichny, make_singlet_triangle, make_tripartite_qecd, quantum_value,
    QuantumStrategy, MAX_GHZ_PLAYERS,
};
use crate::shape::{BellScenario, Memory, Shape};

const SVETLICHNY_SIZES: std::ops::RangeInclusive<usize> = 2..=6;

pub fn list_scenarios() -> Vec<String> {
    let mut names = vec!["chsh".to_string(), "chaves-triangle".to_string()];
    names.extend(SVETLICHNY_SIZES.map(|n| format!("svetlichny-{n}")));
    names.extend(
        [
            "svetlichny-3-fig2",
            "tripartite-qecd",
            "asymmetric",
            "zero-sum",
        ]
        .map(String::from),
    );
    names
}

/// Explicit quantum strategies shipped with the catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    SingletTriangle,
    GhzSvetlichny(usize),
    TripartiteQecd,
}

impl Builtin {
    pub fn name(&self) -> String {
        match self {
            Builtin::SingletTriangle => "singlet-triangle".into(),
            Builtin::GhzSvetlichny(n) => format!("ghz-svetlichny-{n}"),
            Builtin::TripartiteQecd => "tripartite-qecd".into(),
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "singlet-triangle" => Some(Builtin::SingletTriangle),
            "tripartite-qecd" => Some(Builtin::TripartiteQecd),
            _ => name
                .strip_prefix("ghz-svetlichny-")
                .and_then(|n| n.parse().ok())
                .filter(|n| (2..=MAX_GHZ_PLAYERS).contains(n))
                .map(Builtin::GhzSvetlichny),
        }
    }

    /// The strategy with its native setting indexing.
    pub fn build(&self) -> QuantumStrategy {
        match *self {
            Builtin::SingletTriangle => make_singlet_triangle(),
            Builtin::GhzSvetlichny(n) => {
                make_ghz_svetlichny(n).expect("catalog sizes are in range")
            }
            Builtin::TripartiteQecd => make_tripartite_qecd(),
        }
    }

    /// The strategy re-indexed for play under `scenario`.
    pub fn for_scenario(&self, scenario: &BellScenario) -> Result<QuantumStrategy> {
        self.build().ignoring_history(scenario)
    }
}

/// What a reference value refers to.
#[derive(Debug, Clone, PartialEq)]
pub enum Quantity {
    /// classical maximum under the given history access
    Classical(Memory),
    /// value of a builtin strategy under the given history access
    Quantum(Builtin, Memory),
    /// no-signaling maximum under the given history access
    Nonsignaling(Memory),
    Algebraic,
}

impl Quantity {
    pub fn label(&self) -> String {
        let mem = |m: &Memory| serde_json::to_string(m).expect("memory serializes");
        match self {
            Quantity::Classical(m) => format!("classical {}", mem(m)),
            Quantity::Quantum(b, m) => format!("quantum {} {}", b.name(), mem(m)),
            Quantity::Nonsignaling(m) => format!("nonsignaling {}", mem(m)),
            Quantity::Algebraic => "algebraic".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub quantity: Quantity,
    pub value: f64,
    /// 0 means the computed value must match exactly
    pub tolerance: f64,
    pub note: &'static str,
}

#[derive(Debug, Clone)]
pub struct ScenarioRecord {
    pub name: String,
    pub description: &'static str,
    pub game: MultistageGame,
    /// The functional whose bounds the references describe.
    pub functional: BellFunctional,
    pub builtin: Option<Builtin>,
    pub references: Vec<Reference>,
}

impl ScenarioRecord {
    pub fn memory(&self) -> &Memory {
        self.game.memory()
    }
}

fn parity(a: &[usize]) -> f64 {
    if a.iter().sum::<usize>() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// ¼(−1)^{θ_1θ_2 + a_1 + a_2} − ⅛, i.e. (S − 2)/4 for the CHSH correlator
/// sum S; classical CCD bound 0.
pub fn chsh_functional() -> BellFunctional {
    let shape = Shape::uniform(2, 2, 2).expect("2x2");
    BellFunctional::from_fn(shape, |t, a| {
        let sign = if t[0] * t[1] == 1 { -1.0 } else { 1.0 };
        0.25 * sign * parity(a) - 0.125
    })
    .expect("finite coefficients")
}

/// Probability form p(00|00) + p(00|01) + p(00|10) − p(00|11) − p_1(0|0) −
/// p_2(0|0), with both marginals read at θ = (0, 0). Agrees with
/// [`chsh_functional`] on CCD behaviors but not once player 2 sees a_1.
pub fn chsh_literal_functional() -> BellFunctional {
    let shape = Shape::uniform(2, 2, 2).expect("2x2");
    BellFunctional::from_fn(shape, |t, a| {
        let mut v = 0.0;
        if a == [0, 0] {
            v += if t == [1, 1] { -1.0 } else { 1.0 };
        }
        if t == [0, 0] {
            if a[0] == 0 {
                v -= 1.0;
            }
            if a[1] == 0 {
                v -= 1.0;
            }
        }
        v
    })
    .expect("finite coefficients")
}

/// −[(θ_1 + θ_2 mod 3) − 1](−1)^{a_1 + a_2}.
pub fn triangle_functional() -> BellFunctional {
    let shape = Shape::uniform(2, 3, 2).expect("3x2");
    BellFunctional::from_fn(shape, |t, a| {
        -(((t[0] + t[1]) % 3) as f64 - 1.0) * parity(a)
    })
    .expect("finite coefficients")
}

/// (−1)^{s(s+1)/2 + Σa} with s = Σθ.
pub fn svetlichny_functional(n: usize) -> Result<BellFunctional> {
    let shape = Shape::uniform(n, 2, 2)?;
    BellFunctional::from_fn(shape, |t, a| {
        let s: usize = t.iter().sum();
        if (s * (s + 1) / 2).is_multiple_of(2) {
            parity(a)
        } else {
            -parity(a)
        }
    })
}

/// Σ_terms c · ⟨A_i B_j⟩ as a functional on 3-type, binary-action games.
fn correlator_functional(terms: &[(usize, usize, f64)]) -> BellFunctional {
    let shape = Shape::uniform(2, 3, 2).expect("3x2");
    BellFunctional::from_fn(shape, |t, a| {
        terms
            .iter()
            .filter(|&&(i, j, _)| t == [i, j])
            .map(|&(_, _, c)| c * parity(a))
            .sum()
    })
    .expect("finite coefficients")
}

const TRIANGLE_TERMS: [(usize, usize, f64); 6] = [
    (0, 0, 1.0),
    (0, 2, -1.0),
    (1, 1, -1.0),
    (1, 2, 1.0),
    (2, 0, -1.0),
    (2, 1, 1.0),
];
const ASYMMETRIC_U1: [(usize, usize, f64); 3] = [(0, 0, 1.0), (0, 2, -1.0), (2, 0, -1.0)];
const ASYMMETRIC_U2: [(usize, usize, f64); 3] = [(1, 2, 1.0), (2, 1, 1.0), (1, 1, -1.0)];

/// Game paying `payoffs[i](θ, a)` with a uniform prior.
fn uniform_game<F>(shape: Shape, memory: Memory, payoff: F) -> MultistageGame
where
    F: FnMut(usize, &[usize], &[usize]) -> f64,
{
    let scenario = BellScenario::new(shape, memory).expect("catalog memory is valid");
    let prior = MultistageGame::uniform_prior(&scenario.shape);
    MultistageGame::from_fn(scenario, prior, payoff).expect("catalog game is valid")
}

/// Game whose every player is paid α/p(θ) under a uniform prior.
fn symmetric_game(functional: &BellFunctional, memory: Memory) -> MultistageGame {
    let shape = functional.shape().clone();
    let scale = shape.type_profiles() as f64;
    let f = functional.clone();
    uniform_game(shape, memory, move |_, t, a| {
        let s = f.shape();
        scale * f.coefficient(s.type_index(t), s.action_index(a))
    })
}

fn exact(quantity: Quantity, value: f64, note: &'static str) -> Reference {
    Reference {
        quantity,
        value,
        tolerance: 0.0,
        note,
    }
}

fn approx(quantity: Quantity, value: f64, tolerance: f64, note: &'static str) -> Reference {
    Reference {
        quantity,
        value,
        tolerance,
        note,
    }
}

fn attach(functional: BellFunctional, refs: &[Reference]) -> BellFunctional {
    let pick =
        |want: fn(&Quantity) -> bool| refs.iter().find(|r| want(&r.quantity)).map(|r| r.value);
    functional.with_reference(ReferenceBounds {
        classical: pick(|q| matches!(q, Quantity::Classical(_))),
        quantum: pick(|q| matches!(q, Quantity::Quantum(..))),
        nonsignaling: pick(|q| matches!(q, Quantity::Nonsignaling(_))),
    })
}

fn chsh() -> ScenarioRecord {
    let f = chsh_functional();
    let refs = vec![
        exact(
            Quantity::Classical(Memory::none(2)),
            0.0,
            "canonical device: CHSH bound",
        ),
        exact(
            Quantity::Classical(Memory::chain(2)),
            0.5,
            "player 2 sees a_1: copying it wins three of four rounds",
        ),
        approx(Quantity::Nonsignaling(Memory::none(2)), 0.5, 1e-7, "PR box"),
        approx(
            Quantity::Nonsignaling(Memory::chain(2)),
            0.5,
            1e-7,
            "PR box",
        ),
        exact(Quantity::Algebraic, 0.5, "sum of row maxima"),
    ];
    let memory = Memory::chain(2);
    ScenarioRecord {
        name: "chsh".into(),
        description: "CHSH game; player 2 may see player 1's action",
        game: symmetric_game(&f, memory.clone()),
        functional: attach(f, &refs),
        builtin: None,
        references: refs,
    }
}

fn triangle() -> ScenarioRecord {
    let f = triangle_functional();
    let memory = Memory::chain(2);
    let refs = vec![
        exact(
            Quantity::Classical(memory.clone()),
            4.0,
            "published classical bound",
        ),
        exact(
            Quantity::Classical(Memory::none(2)),
            4.0,
            "published classical bound",
        ),
        approx(
            Quantity::Quantum(Builtin::SingletTriangle, memory.clone()),
            3.0 * 3f64.sqrt(),
            1e-9,
            "singlet with triangle measurements, 3√3",
        ),
        approx(
            Quantity::Nonsignaling(memory.clone()),
            6.0,
            1e-7,
            "algebraic maximum",
        ),
        exact(Quantity::Algebraic, 6.0, "sum of row maxima"),
    ];
    ScenarioRecord {
        name: "chaves-triangle".into(),
        description: "three types, binary actions, payoff sign set by θ_1 + θ_2 mod 3",
        game: symmetric_game(&f, memory.clone()),
        functional: attach(f, &refs),
        builtin: Some(Builtin::SingletTriangle),
        references: refs,
    }
}

fn svetlichny(n: usize, memory: Memory, name: String, description: &'static str) -> ScenarioRecord {
    let f = svetlichny_functional(n).expect("catalog size");
    let top = (1u64 << n) as f64;
    let mut refs = vec![
        exact(
            Quantity::Classical(memory.clone()),
            top / 2.0,
            "published bound for partially paired communication",
        ),
        approx(
            Quantity::Quantum(Builtin::GhzSvetlichny(n), memory.clone()),
            top / 2.0 * SQRT_2,
            1e-9,
            "GHZ state, 2^(n-1)√2",
        ),
    ];
    if n == 3 && memory == Memory::chain(3) {
        refs.push(approx(
            Quantity::Quantum(Builtin::TripartiteQecd, memory.clone()),
            6.0,
            2e-2,
            "mixed state and non-projective measurements, parameters given to 4 decimals",
        ));
    }
    if n <= 3 {
        refs.push(approx(
            Quantity::Nonsignaling(memory.clone()),
            top,
            1e-7,
            "algebraic maximum",
        ));
    }
    refs.push(exact(Quantity::Algebraic, top, "sum of row maxima"));
    ScenarioRecord {
        name,
        description,
        game: symmetric_game(&f, memory.clone()),
        functional: attach(f, &refs),
        builtin: Some(Builtin::GhzSvetlichny(n)),
        references: refs,
    }
}

fn tripartite_qecd() -> ScenarioRecord {
    let mut rec = svetlichny(
        3,
        Memory::chain(3),
        "tripartite-qecd".into(),
        "three-player Svetlichny game with chain memory and the QECD strategy",
    );
    rec.builtin = Some(Builtin::TripartiteQecd);
    rec
}

fn asymmetric() -> ScenarioRecord {
    let u1 = correlator_functional(&ASYMMETRIC_U1);
    let u2 = correlator_functional(&ASYMMETRIC_U2);
    let memory = Memory::chain(2);
    let game = uniform_game(
        Shape::uniform(2, 3, 2).expect("3x2"),
        memory.clone(),
        |i, t, a| {
            let f = if i == 0 { &u1 } else { &u2 };
            let s = f.shape();
            9.0 * f.coefficient(s.type_index(t), s.action_index(a))
        },
    );
    let sum = BellFunctional::combine(
        game.shape(),
        &[
            (1.0, &functional_from_game(&game, 0).expect("player 1")),
            (1.0, &functional_from_game(&game, 1).expect("player 2")),
        ],
    )
    .expect("same shape");
    let refs = vec![
        exact(
            Quantity::Classical(memory.clone()),
            4.0,
            "published bound on U_1 + U_2",
        ),
        approx(
            Quantity::Quantum(Builtin::SingletTriangle, memory.clone()),
            3.0 * 3f64.sqrt(),
            1e-9,
            "U_1 + U_2 under the triangle strategy",
        ),
        approx(
            Quantity::Nonsignaling(memory.clone()),
            6.0,
            1e-7,
            "algebraic maximum",
        ),
        exact(Quantity::Algebraic, 6.0, "sum of row maxima"),
    ];
    ScenarioRecord {
        name: "asymmetric".into(),
        description: "conflicting interests; references bound U_1 + U_2",
        functional: attach(sum, &refs),
        game,
        builtin: Some(Builtin::SingletTriangle),
        references: refs,
    }
}

fn zero_sum() -> ScenarioRecord {
    let f = triangle_functional();
    let memory = Memory::chain(2);
    let game = uniform_game(f.shape().clone(), memory.clone(), |i, t, a| {
        let s = f.shape();
        let u2 = 9.0 * f.coefficient(s.type_index(t), s.action_index(a));
        if i == 0 {
            -u2
        } else {
            u2
        }
    });
    let refs = vec![
        exact(
            Quantity::Classical(memory.clone()),
            4.0,
            "published bound on U_2",
        ),
        approx(
            Quantity::Quantum(Builtin::SingletTriangle, memory.clone()),
            3.0 * 3f64.sqrt(),
            1e-9,
            "U_2 under the triangle strategy",
        ),
        approx(
            Quantity::Nonsignaling(memory.clone()),
            6.0,
            1e-7,
            "algebraic maximum",
        ),
        exact(Quantity::Algebraic, 6.0, "sum of row maxima"),
    ];
    ScenarioRecord {
        name: "zero-sum".into(),
        description: "u_1 = −u_2; references bound player 2's payoff",
        functional: attach(functional_from_game(&game, 1).expect("player 2"), &refs),
        game,
        builtin: Some(Builtin::SingletTriangle),
        references: refs,
    }
}

pub fn load_scenario(name: &str) -> Result<ScenarioRecord> {
    let svet = name
        .strip_prefix("svetlichny-")
        .and_then(|n| n.parse::<usize>().ok())
        .filter(|n| SVETLICHNY_SIZES.contains(n));
    Ok(match (name, svet) {
        ("chsh", _) => chsh(),
        ("chaves-triangle", _) => triangle(),
        ("svetlichny-3-fig2", _) => svetlichny(
            3,
            Memory::star(3),
            name.into(),
            "three-player Svetlichny game; players 2 and 3 see a_1 only",
        ),
        ("tripartite-qecd", _) => tripartite_qecd(),
        ("asymmetric", _) => asymmetric(),
        ("zero-sum", _) => zero_sum(),
        (_, Some(n)) => svetlichny(
            n,
            Memory::chain(n),
            name.into(),
            "n-player Svetlichny game; each player sees the previous action",
        ),
        _ => {
            return Err(Error::UnknownScenario {
                name: name.into(),
                valid: list_scenarios(),
            })
        }
    })
}

fn compare(
    out: &mut Vec<Diagnostic>,
    field: &str,
    a: &BellFunctional,
    b: &BellFunctional,
    tol: f64,
) {
    let d = a.max_abs_diff(b);
    if d > tol {
        out.push(Diagnostic::new(
            field,
            format!("coefficients differ by {d:e} (tolerance {tol:e})"),
        ));
    }
}

/// Cross-checks the tensor-built payoffs against independent correlator
/// expressions. Empty when everything agrees.
pub fn consistency_report(record: &ScenarioRecord) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let game = &record.game;
    let own = |i| functional_from_game(game, i).expect("valid player");
    match record.name.as_str() {
        "chaves-triangle" => {
            let reference = correlator_functional(&TRIANGLE_TERMS);
            compare(&mut out, "u_1", &own(0), &reference, 1e-12);
            compare(
                &mut out,
                "functional",
                &record.functional,
                &reference,
                1e-12,
            );
        }
        "asymmetric" => {
            compare(
                &mut out,
                "u_1",
                &own(0),
                &correlator_functional(&ASYMMETRIC_U1),
                1e-12,
            );
            compare(
                &mut out,
                "u_2",
                &own(1),
                &correlator_functional(&ASYMMETRIC_U2),
                1e-12,
            );
            compare(
                &mut out,
                "u_1 + u_2",
                &record.functional,
                &correlator_functional(&TRIANGLE_TERMS),
                1e-12,
            );
        }
        "zero-sum" => {
            let bad = game
                .payoffs(0)
                .iter()
                .zip(game.payoffs(1))
                .position(|(x, y)| x + y != 0.0);
            if let Some(cell) = bad {
                out.push(Diagnostic::new(
                    "payoffs",
                    format!("u_1 + u_2 != 0 at cell {cell}"),
                ));
            }
            compare(
                &mut out,
                "u_2",
                &own(1),
                &correlator_functional(&TRIANGLE_TERMS),
                1e-12,
            );
        }
        "chsh" => {
            // ¼ Σ ±⟨A_i B_j⟩ − ½ spread over the four type profiles
            let shape = record.functional.shape().clone();
            let reference = BellFunctional::from_fn(shape, |t, a| {
                let c = if t == [1, 1] { -0.25 } else { 0.25 };
                c * parity(a) - 0.5 / 4.0
            })
            .expect("finite");
            compare(
                &mut out,
                "functional",
                &record.functional,
                &reference,
                1e-12,
            );
        }
        _ => {
            if !record
                .functional
                .coefficients()
                .iter()
                .all(|c| c.abs() == 1.0)
            {
                out.push(Diagnostic::new(
                    "functional",
                    "Svetlichny coefficients must be ±1",
                ));
            }
        }
    }
    let symmetric = record.name.starts_with("svetlichny")
        || record.name == "chaves-triangle"
        || record.name == "chsh";
    if symmetric {
        compare(&mut out, "functional", &own(0), &record.functional, 1e-12);
    }
    out
}

/// Outcome of recomputing one reference value.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub reference: f64,
    pub tolerance: f64,
    /// `Err` holds the message of a failed computation
    pub computed: std::result::Result<f64, String>,
    pub note: &'static str,
}

impl Check {
    pub fn passed(&self) -> bool {
        match self.computed {
            Ok(v) if self.tolerance == 0.0 => v == self.reference,
            Ok(v) => (v - self.reference).abs() <= self.tolerance,
            Err(_) => false,
        }
    }
}

fn compute(record: &ScenarioRecord, quantity: &Quantity) -> Result<f64> {
    let f = &record.functional;
    match quantity {
        Quantity::Classical(m) => Ok(classical_bound(f, m)?.value),
        Quantity::Quantum(b, m) => {
            let scenario = BellScenario::new(f.shape().clone(), m.clone())?;
            quantum_value(&b.for_scenario(&scenario)?, f, m)
        }
        Quantity::Nonsignaling(m) => Ok(ns_bound(f, m)?.value),
        Quantity::Algebraic => Ok(algebraic_max(f)),
    }
}

/// Recomputes every reference value of the record, plus the payoff
/// consistency checks.
pub fn verify_scenario(record: &ScenarioRecord) -> Vec<Check> {
    let mut checks: Vec<Check> = record
        .references
        .iter()
        .map(|r| Check {
            label: r.quantity.label(),
            reference: r.value,
            tolerance: r.tolerance,
            computed: compute(record, &r.quantity).map_err(|e| e.to_string()),
            note: r.note,
        })
        .collect();
    let diags = consistency_report(record);
    checks.push(Check {
        label: "payoff consistency".into(),
        reference: 0.0,
        tolerance: 0.0,
        computed: if diags.is_empty() {
            Ok(0.0)
        } else {
            Err(diags
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; "))
        },
        note: "tensor payoffs against correlator expressions",
    });
    checks
}
