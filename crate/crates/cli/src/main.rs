use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use bellgame_core::game::expected_payoff;
use bellgame_core::nonsignaling::algebraic_max;
use bellgame_core::quantum::evaluate_quantum_strategy;
use bellgame_core::{
    classical_bound_limited, deviation_gain, functional_from_game, list_scenarios, load_scenario,
    ns_bound, payoff_vertices, quantum_equilibrium_gain, quantum_value, read_json, seesaw_optimize,
    support_function, to_canonical_json, verify_scenario, write_canonical, Advisor, BellFunctional,
    BellScenario, Builtin, Error, Memory, MultistageGame, PayoffWeights, QuantumStrategy,
    ScenarioRecord, SeesawOptions, DEFAULT_PROFILE_LIMIT,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

const EXIT_USAGE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_TOO_LARGE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "bellgame",
    version,
    about = "Payoff bounds for multistage games seen as Bell scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum over deterministic strategy profiles
    ClassicalBound {
        #[command(flatten)]
        source: Source,
        /// Refuse scenarios with more profiles than this
        #[arg(long, default_value_t = DEFAULT_PROFILE_LIMIT)]
        limit: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Classical maximum of Σ β_j U_j + β_0 over the payoff polytope
    Support {
        #[command(flatten)]
        source: Source,
        /// Comma-separated weights β_1,...,β_n
        #[arg(long)]
        beta: String,
        #[arg(long, default_value_t = 0.0)]
        offset: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Sum of per-type-profile coefficient maxima
    AlgebraicMax {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        output: Output,
    },
    /// Maximum over no-signaling boxes on the augmented inputs
    NsBound {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        output: Output,
    },
    /// Value of an explicit quantum strategy
    QuantumEval {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        strategy: StrategySource,
        #[command(flatten)]
        output: Output,
    },
    /// See-saw lower bound on the quantum value
    Seesaw {
        #[command(flatten)]
        source: Source,
        /// Local dimensions d1,d2,...; qubits by default
        #[arg(long)]
        dims: Option<String>,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-sweep improvement below which a restart stops
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        max_sweeps: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Unilateral deviation gains of a classical advisor or quantum strategy
    EquilibriumCheck {
        #[command(flatten)]
        source: Source,
        /// Advisor file (classical check)
        #[arg(long, conflicts_with_all = ["strategy", "builtin"])]
        advisor: Option<PathBuf>,
        #[command(flatten)]
        strategy: StrategySource,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Payoff vectors of all deterministic profiles
    Vertices {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        output: Output,
    },
    /// Built-in scenario catalog
    Scenario {
        #[command(subcommand)]
        action: ScenarioCommand,
    },
}

#[derive(Subcommand)]
enum ScenarioCommand {
    List {
        #[command(flatten)]
        output: Output,
    },
    /// Write game.json, functional.json and strategy.json
    Emit {
        name: String,
        #[arg(long, default_value = ".")]
        dir: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Recompute every reference value; exit 2 if any is missed
    Verify {
        name: String,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args, Clone)]
struct Source {
    /// Game file
    #[arg(long, conflicts_with_all = ["scenario", "functional"])]
    game: Option<PathBuf>,
    /// Catalog scenario name
    #[arg(long, conflicts_with = "functional")]
    scenario: Option<String>,
    /// Functional file
    #[arg(long)]
    functional: Option<PathBuf>,
    /// 1-based player whose payoff defines the functional
    #[arg(long)]
    player: Option<usize>,
    /// History depths m1,m2,... or a JSON window list such as [0,[0],[0]]
    #[arg(long)]
    memory: Option<String>,
}

#[derive(Args, Clone)]
struct StrategySource {
    /// Quantum strategy file
    #[arg(long, conflicts_with = "builtin")]
    strategy: Option<PathBuf>,
    /// singlet-triangle, ghz-svetlichny-N or tripartite-qecd
    #[arg(long)]
    builtin: Option<String>,
}

#[derive(Args, Clone)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the optimal strategy or box here
    #[arg(long)]
    witness: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::TooLarge(_) => EXIT_TOO_LARGE,
            Error::UnknownScenario { .. } | Error::Io(_) => EXIT_USAGE,
            _ => EXIT_INVALID,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

struct Report {
    command: &'static str,
    inputs: BTreeMap<String, Value>,
    results: BTreeMap<String, Value>,
    witness: Option<String>,
    /// exit code of a completed run that found a violation
    verdict: u8,
}

impl Report {
    fn new(command: &'static str) -> Self {
        Self {
            command,
            inputs: BTreeMap::new(),
            results: BTreeMap::new(),
            witness: None,
            verdict: 0,
        }
    }

    fn input(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.inputs.insert(key.into(), value.into());
        self
    }

    fn result(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.results.insert(key.into(), value.into());
        self
    }
}

/// A resolved functional together with the game and memory it came from.
struct Problem {
    game: Option<MultistageGame>,
    functional: BellFunctional,
    memory: Memory,
    record: Option<ScenarioRecord>,
}

impl Problem {
    fn scenario(&self) -> CliResult<BellScenario> {
        Ok(BellScenario::new(
            self.functional.shape().clone(),
            self.memory.clone(),
        )?)
    }

    fn require_game(&self) -> CliResult<MultistageGame> {
        let game = self
            .game
            .as_ref()
            .ok_or_else(|| Failure::usage("this command needs --game or --scenario"))?;
        Ok(game.with_memory(self.memory.clone())?)
    }
}

fn parse_list<T: std::str::FromStr>(flag: &str, text: &str) -> CliResult<Vec<T>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Failure::usage(format!("--{flag}: cannot parse {s:?}")))
        })
        .collect()
}

fn parse_memory(text: &str) -> CliResult<Memory> {
    let memory = if text.trim_start().starts_with('[') {
        serde_json::from_str(text).map_err(|e| Failure::usage(format!("--memory: {e}")))?
    } else {
        Memory::from_depths(&parse_list::<usize>("memory", text)?)
    };
    let diags = memory.validate();
    if !diags.is_empty() {
        let joined: Vec<String> = diags.iter().map(ToString::to_string).collect();
        return Err(Failure::invalid(format!(
            "invalid memory: {}",
            joined.join("; ")
        )));
    }
    Ok(memory)
}

fn resolve(src: &Source, report: &mut Report) -> CliResult<Problem> {
    let player = |game: &MultistageGame| -> CliResult<Option<usize>> {
        match src.player {
            None => Ok(None),
            Some(k) if (1..=game.players()).contains(&k) => Ok(Some(k - 1)),
            Some(k) => Err(Failure::usage(format!(
                "--player {k}: the game has {} players",
                game.players()
            ))),
        }
    };
    let (game, functional, record) = if let Some(name) = &src.scenario {
        report.input("scenario", name.as_str());
        let record = load_scenario(name)?;
        let functional = match player(&record.game)? {
            Some(i) => functional_from_game(&record.game, i)?,
            None => record.functional.clone(),
        };
        (Some(record.game.clone()), functional, Some(record))
    } else if let Some(path) = &src.game {
        report.input("game", path.display().to_string());
        let game: MultistageGame = read_json(path)?;
        let i = player(&game)?.unwrap_or(0);
        let functional = functional_from_game(&game, i)?;
        (Some(game), functional, None)
    } else if let Some(path) = &src.functional {
        report.input("functional", path.display().to_string());
        if src.player.is_some() {
            return Err(Failure::usage("--player needs --game or --scenario"));
        }
        (None, read_json::<BellFunctional>(path)?, None)
    } else {
        return Err(Failure::usage(
            "one of --game, --scenario or --functional is required",
        ));
    };
    if let Some(k) = src.player {
        report.input("player", k);
    }
    let memory = match (&src.memory, &game) {
        (Some(text), _) => parse_memory(text)?,
        (None, Some(g)) => g.memory().clone(),
        (None, None) => Memory::none(functional.shape().players()),
    };
    report.input(
        "memory",
        serde_json::to_value(&memory).expect("memory serializes"),
    );
    Ok(Problem {
        game,
        functional,
        memory,
        record,
    })
}

fn write_witness<T: serde::Serialize>(
    out: &Output,
    value: &T,
    report: &mut Report,
) -> CliResult<()> {
    if let Some(path) = &out.witness {
        write_canonical(path, value)?;
        report.witness = Some(path.display().to_string());
    }
    Ok(())
}

fn resolve_strategy(
    src: &StrategySource,
    problem: &Problem,
    report: &mut Report,
) -> CliResult<QuantumStrategy> {
    let scenario = problem.scenario()?;
    let qs = if let Some(path) = &src.strategy {
        report.input("strategy", path.display().to_string());
        read_json::<QuantumStrategy>(path)?
    } else {
        let builtin = match &src.builtin {
            Some(name) => Builtin::parse(name)
                .ok_or_else(|| Failure::usage(format!("unknown builtin strategy {name:?}")))?,
            None => problem
                .record
                .as_ref()
                .and_then(|r| r.builtin)
                .ok_or_else(|| Failure::usage("--strategy or --builtin is required"))?,
        };
        report.input("builtin", builtin.name());
        builtin.build()
    };
    Ok(qs.ignoring_history(&scenario)?)
}

fn run(cli: Cli) -> CliResult<(Report, Output)> {
    match cli.command {
        Command::ClassicalBound {
            source,
            limit,
            output,
        } => {
            let mut report = Report::new("classical-bound");
            let p = resolve(&source, &mut report)?;
            let bound = classical_bound_limited(&p.functional, &p.memory, limit)?;
            report
                .result("value", bound.value)
                .result("profiles", bound.profiles);
            write_witness(&output, &bound.witness, &mut report)?;
            Ok((report, output))
        }
        Command::Support {
            source,
            beta,
            offset,
            output,
        } => {
            let mut report = Report::new("support");
            let p = resolve(&source, &mut report)?;
            let game = p.require_game()?;
            let beta: Vec<f64> = parse_list("beta", &beta)?;
            report.input("beta", beta.clone()).input("offset", offset);
            let bound = support_function(&game, &PayoffWeights::new(beta, offset), &p.memory)?;
            report
                .result("value", bound.value + offset)
                .result("profiles", bound.profiles);
            write_witness(&output, &bound.witness, &mut report)?;
            Ok((report, output))
        }
        Command::AlgebraicMax { source, output } => {
            let mut report = Report::new("algebraic-max");
            let p = resolve(&source, &mut report)?;
            report.result("value", algebraic_max(&p.functional));
            Ok((report, output))
        }
        Command::NsBound { source, output } => {
            let mut report = Report::new("ns-bound");
            let p = resolve(&source, &mut report)?;
            let bound = ns_bound(&p.functional, &p.memory)?;
            report
                .result("value", bound.value)
                .result("variables", bound.variables)
                .result("constraints", bound.constraints)
                .result("redundant_constraints", bound.redundant_constraints);
            write_witness(&output, &bound.solution, &mut report)?;
            Ok((report, output))
        }
        Command::QuantumEval {
            source,
            strategy,
            output,
        } => {
            let mut report = Report::new("quantum-eval");
            let p = resolve(&source, &mut report)?;
            let qs = resolve_strategy(&strategy, &p, &mut report)?;
            report.result("value", quantum_value(&qs, &p.functional, &p.memory)?);
            if let Some(game) = &p.game {
                let game = game.with_memory(p.memory.clone())?;
                let dist = evaluate_quantum_strategy(&qs, game.scenario())?;
                let payoffs = (0..game.players())
                    .map(|i| expected_payoff(&game, &dist, i))
                    .collect::<Result<Vec<_>, _>>()?;
                report.result("payoffs", payoffs);
            }
            Ok((report, output))
        }
        Command::Seesaw {
            source,
            dims,
            restarts,
            seed,
            tol,
            max_sweeps,
            output,
        } => {
            let mut report = Report::new("seesaw");
            let p = resolve(&source, &mut report)?;
            let dims = match dims {
                Some(text) => parse_list::<usize>("dims", &text)?,
                None => vec![2; p.functional.shape().players()],
            };
            if restarts == 0 {
                return Err(Failure::usage("--restarts must be at least 1"));
            }
            report
                .input("dims", dims.clone())
                .input("restarts", restarts)
                .input("seed", seed)
                .input("tol", tol)
                .input("max_sweeps", max_sweeps);
            let opts = SeesawOptions {
                restarts,
                seed,
                tol,
                max_sweeps,
            };
            let result = seesaw_optimize(&p.functional, &dims, &p.memory, &opts)?;
            report
                .result("value", result.best_value)
                .result("best_restart", result.best_restart)
                .result("restart_values", result.restart_values())
                .result(
                    "sweeps",
                    result
                        .runs
                        .iter()
                        .map(|r| r.values.len() - 1)
                        .collect::<Vec<_>>(),
                );
            write_witness(&output, &result.best, &mut report)?;
            Ok((report, output))
        }
        Command::EquilibriumCheck {
            source,
            advisor,
            strategy,
            tol,
            output,
        } => {
            let mut report = Report::new("equilibrium-check");
            let p = resolve(&source, &mut report)?;
            let game = p.require_game()?;
            report.input("tol", tol);
            let gains = if let Some(path) = &advisor {
                report.input("advisor", path.display().to_string());
                let advisor: Advisor = read_json(path)?;
                (0..game.players())
                    .map(|i| deviation_gain(&game, &advisor, i))
                    .collect::<Result<Vec<_>, _>>()?
            } else {
                let qs = resolve_strategy(&strategy, &p, &mut report)?;
                (0..game.players())
                    .map(|i| quantum_equilibrium_gain(&game, &qs, i))
                    .collect::<Result<Vec<_>, _>>()?
            };
            let max = gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let equilibrium = max <= tol;
            report
                .result("gains", gains)
                .result("max_gain", max)
                .result("equilibrium", equilibrium);
            if !equilibrium {
                report.verdict = EXIT_INVALID;
            }
            Ok((report, output))
        }
        Command::Vertices { source, output } => {
            let mut report = Report::new("vertices");
            let p = resolve(&source, &mut report)?;
            let game = p.require_game()?;
            let vertices = payoff_vertices(&game, &p.memory)?;
            report
                .result("count", vertices.len())
                .result("vertices", vertices);
            Ok((report, output))
        }
        Command::Scenario { action } => scenario_command(action),
    }
}

fn scenario_command(action: ScenarioCommand) -> CliResult<(Report, Output)> {
    match action {
        ScenarioCommand::List { output } => {
            let mut report = Report::new("scenario list");
            let rows: Vec<Value> = list_scenarios()
                .iter()
                .map(|name| {
                    let rec = load_scenario(name).expect("listed scenarios load");
                    json!({
                        "name": name,
                        "players": rec.game.players(),
                        "description": rec.description,
                    })
                })
                .collect();
            report.result("scenarios", rows);
            Ok((report, output))
        }
        ScenarioCommand::Emit { name, dir, output } => {
            let mut report = Report::new("scenario emit");
            report.input("scenario", name.as_str());
            let rec = load_scenario(&name)?;
            std::fs::create_dir_all(&dir).map_err(Error::from)?;
            let mut files = vec![
                emit(&dir, "game.json", &rec.game)?,
                emit(&dir, "functional.json", &rec.functional)?,
            ];
            if let Some(b) = rec.builtin {
                let qs = b.for_scenario(rec.game.scenario())?;
                files.push(emit(&dir, "strategy.json", &qs)?);
            }
            report.result("files", files);
            Ok((report, output))
        }
        ScenarioCommand::Verify { name, output } => {
            let mut report = Report::new("scenario verify");
            report.input("scenario", name.as_str());
            let rec = load_scenario(&name)?;
            let checks = verify_scenario(&rec);
            let all = checks.iter().all(|c| c.passed());
            let rows: Vec<Value> = checks
                .iter()
                .map(|c| {
                    let mut row = json!({
                        "check": c.label,
                        "reference": c.reference,
                        "tolerance": c.tolerance,
                        "passed": c.passed(),
                        "note": c.note,
                    });
                    match &c.computed {
                        Ok(v) => row["computed"] = json!(v),
                        Err(e) => row["error"] = json!(e),
                    }
                    row
                })
                .collect();
            report.result("checks", rows).result("passed", all);
            if !all {
                report.verdict = EXIT_INVALID;
            }
            Ok((report, output))
        }
    }
}

fn emit<T: serde::Serialize>(dir: &Path, file: &str, value: &T) -> CliResult<String> {
    let path = dir.join(file);
    write_canonical(&path, value)?;
    Ok(path.display().to_string())
}

fn number(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            if x != 0.0 && x.abs() < 1e-4 {
                format!("{x:.1e}")
            } else {
                format!("{x:.6}")
            }
        }
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(number).collect();
            format!("[{}]", parts.join(", "))
        }
        Value::Object(map) => {
            let parts: Vec<String> = map
                .iter()
                .map(|(k, v)| format!("{k}={}", number(v)))
                .collect();
            parts.join("  ")
        }
        other => other.to_string(),
    }
}

fn render_table(report: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", report.command);
    let width = report.results.keys().map(String::len).max().unwrap_or(0);
    for (key, value) in &report.results {
        match value {
            Value::Array(items) if items.iter().any(|v| v.is_array() || v.is_object()) => {
                let _ = writeln!(s, "{key}:");
                for item in items {
                    let _ = writeln!(s, "  {}", number(item));
                }
            }
            _ => {
                let _ = writeln!(s, "{key:<width$}  {}", number(value));
            }
        }
    }
    if let Some(w) = &report.witness {
        let _ = writeln!(s, "{:<width$}  {w}", "witness");
    }
    s
}

fn render_json(report: &Report, seconds: f64) -> CliResult<String> {
    let doc = json!({
        "command": report.command,
        "inputs": report.inputs,
        "results": report.results,
        "witness": report.witness,
        "wall_time": seconds,
    });
    Ok(to_canonical_json(&doc)?)
}

fn configure_threads() -> CliResult<()> {
    let Ok(text) = std::env::var("BELLGAME_THREADS") else {
        return Ok(());
    };
    let n: usize = text.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::usage(format!(
            "BELLGAME_THREADS={text:?} is not a positive integer"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let started = Instant::now();
    let outcome = configure_threads()
        .and_then(|()| run(cli))
        .and_then(|(report, output)| {
            let text = match output.format {
                Format::Table => render_table(&report),
                Format::Json => render_json(&report, started.elapsed().as_secs_f64())?,
            };
            match &output.out {
                Some(path) => std::fs::write(path, text).map_err(Error::from)?,
                None => print!("{text}"),
            }
            Ok(report.verdict)
        });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
