use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lingame_core::game::materialize;
use lingame_core::proofs::{check_proof, search_bounded, DEFAULT_SEARCH_BOUND};
use lingame_core::semantics::{STD_POOL_BRANCHING, STD_POOL_DEPTH};
use lingame_core::strategy::PlayStatus;
use lingame_core::{
    demo, entails, equiv, parse, solve, valid_naive, AtomPool, BangMode, ExplicitTree, ProofTree, Referee, Role,
    RuleKind, RuleSet, SearchOutcome, Sequent, ValidityConfig, Verdict,
};
use lingame_cli::service::{self, ServiceConfig};
use lingame_cli::{build, single_env, AtomSource, Engine, EngineKind};
use serde_json::json;

#[derive(Parser)]
#[command(name = "lingame", version, about = "Linear-logic formulas as client/server games")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Opts {
    /// Largest copy count the client may announce for `!`.
    #[arg(long, global = true, default_value_t = 2)]
    bang_cap: u32,
    /// Exponential discipline.
    #[arg(long, global = true, default_value = "consistent")]
    bang_mode: BangMode,
    /// Atom interpretations: `unit`, `pool/std`, or a JSON env or pool file.
    #[arg(long, global = true, default_value = "unit")]
    atoms: String,
    /// Pool file for validity checks (default: the standard pool).
    #[arg(long, global = true)]
    pool: Option<PathBuf>,
    /// Generate a validity pool of this many random trees instead.
    #[arg(long, global = true)]
    pool_size: Option<usize>,
    /// Seed for generated pools, sampling, and the random engine.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Assignments checked exhaustively before switching to sampling.
    #[arg(long, global = true, default_value_t = ValidityConfig::default().sample_limit)]
    sample_limit: usize,
    /// Node budget for materialized trees and proof search steps.
    #[arg(long, global = true, default_value_t = 200_000)]
    node_budget: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Export {
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Paper,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a formula and show its normal form, dual and atoms.
    Parse { formula: String },
    /// Materialize the game tree of a formula.
    Game {
        formula: String,
        #[arg(long, value_enum, default_value_t = Export::Text)]
        export: Export,
    },
    /// Decide who wins, per interpretation.
    Solve {
        formula: String,
        /// Print the winner's strategy (single interpretation only).
        #[arg(long)]
        strategy: bool,
    },
    /// Check that the first formula entails the second over the pool.
    Entails { premise: String, conclusion: String },
    /// Check entailment in both directions over the pool.
    Equiv { left: String, right: String },
    /// Check validity over the pool.
    Valid { formula: String },
    /// Search for a cut-free proof of a sequent such as `a, b |- a`.
    Prove {
        sequent: String,
        #[arg(long)]
        thinning: bool,
        /// Hypothesis sequent usable as a leaf (repeatable).
        #[arg(long = "hyp")]
        hypotheses: Vec<String>,
        /// Also write the proof as JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a JSON proof file.
    CheckProof {
        file: PathBuf,
        #[arg(long)]
        thinning: bool,
        #[arg(long)]
        cut: bool,
        #[arg(long = "hyp")]
        hypotheses: Vec<String>,
    },
    /// Play a formula against the engine.
    Play {
        formula: String,
        /// The side you play.
        #[arg(long, default_value = "client")]
        side: Role,
        #[arg(long, value_enum, default_value_t = EngineKind::Solver)]
        engine: EngineKind,
        /// Comma-separated moves to play instead of reading stdin.
        #[arg(long)]
        moves: Option<String>,
    },
    /// Run a reproduction suite.
    Demo {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Serve the session API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Interface to bind; loopback unless told otherwise.
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, value_enum, default_value_t = EngineKind::Solver)]
        engine: EngineKind,
    },
}

/// Exit status of a completed command.
enum Outcome {
    Ok,
    Negative,
}

fn main() -> ExitCode {
    // die quietly on a closed pipe (`lingame game ... | head`) instead of panicking
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let o = &cli.opts;
    match cli.command {
        Command::Parse { formula } => cmd_parse(o, &formula),
        Command::Game { formula, export } => cmd_game(o, &formula, export),
        Command::Solve { formula, strategy } => cmd_solve(o, &formula, strategy),
        Command::Entails { premise, conclusion } => {
            let (f, g) = (parse(&premise)?, parse(&conclusion)?);
            report_verdict(o, entails(&f, &g, &pool(o)?, &validity_config(o)))
        }
        Command::Equiv { left, right } => {
            let (f, g) = (parse(&left)?, parse(&right)?);
            report_verdict(o, equiv(&f, &g, &pool(o)?, &validity_config(o)))
        }
        Command::Valid { formula } => report_verdict(o, valid_naive(&parse(&formula)?, &pool(o)?, &validity_config(o))),
        Command::Prove {
            sequent,
            thinning,
            hypotheses,
            out,
        } => cmd_prove(o, &sequent, thinning, &hypotheses, out),
        Command::CheckProof {
            file,
            thinning,
            cut,
            hypotheses,
        } => cmd_check_proof(&file, thinning, cut, &hypotheses),
        Command::Play {
            formula,
            side,
            engine,
            moves,
        } => cmd_play(o, &formula, side, engine, moves.as_deref()),
        Command::Demo { suite: Suite::Paper } => cmd_demo(o),
        Command::Serve { port, host, engine } => {
            let addr = format!("{host}:{port}");
            let config = ServiceConfig {
                bang_cap: o.bang_cap,
                bang_mode: o.bang_mode,
                engine,
                seed: o.seed,
            };
            eprintln!("serving on http://{addr}");
            tokio::runtime::Runtime::new()?.block_on(service::serve(&addr, config))?;
            Ok(Outcome::Ok)
        }
    }
}

fn validity_config(o: &Opts) -> ValidityConfig {
    ValidityConfig {
        cap: o.bang_cap,
        mode: o.bang_mode,
        sample_limit: o.sample_limit,
        seed: o.seed,
    }
}

fn pool(o: &Opts) -> Result<AtomPool> {
    match (&o.pool, o.pool_size) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(AtomPool::from_json(&text)?)
        }
        (None, Some(n)) => Ok(AtomPool::generate("generated", n, STD_POOL_DEPTH, STD_POOL_BRANCHING, o.seed)),
        (None, None) => Ok(AtomPool::standard()),
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json values serialize"));
}

fn cmd_parse(o: &Opts, text: &str) -> Result<Outcome> {
    let f = parse(text)?;
    let (normal, dual) = (f.normalize(), f.dualize());
    match o.format {
        Format::Json => print_json(&json!({
            "formula": f.to_string(),
            "normalized": normal.to_string(),
            "dual": dual.to_string(),
            "atoms": f.atoms(),
            "connectives": f.connective_count(),
        })),
        Format::Text => {
            println!("formula:     {f}");
            println!("normal form: {normal}");
            println!("dual:        {dual}");
            println!("atoms:       {}", f.atoms().join(", "));
            println!("connectives: {}", f.connective_count());
        }
    }
    Ok(Outcome::Ok)
}

fn tree_text(t: &ExplicitTree, depth: usize, label: &str, out: &mut String) {
    out.push_str(&format!("{:indent$}{label}{}\n", "", t.turn.letter(), indent = depth * 2));
    for (m, child) in &t.moves {
        tree_text(child, depth + 1, &format!("{m} -> "), out);
    }
}

fn cmd_game(o: &Opts, text: &str, export: Export) -> Result<Outcome> {
    let f = parse(text)?;
    let env = single_env(&AtomSource::parse(&o.atoms)?, &f)?;
    let (_, p) = build(text, &env, o.bang_cap, o.bang_mode)?;
    let tree = materialize(&p, o.node_budget)?;
    match export {
        Export::Dot => print!("{}", tree.to_dot()),
        Export::Json => println!("{}", serde_json::to_string_pretty(&tree)?),
        Export::Text => {
            let mut out = String::new();
            tree_text(&tree, 0, "", &mut out);
            print!("{out}");
            println!("depth {}, {} nodes", tree.depth(), tree.size());
        }
    }
    Ok(Outcome::Ok)
}

fn cmd_solve(o: &Opts, text: &str, show_strategy: bool) -> Result<Outcome> {
    let f = parse(text)?;
    let source = AtomSource::parse(&o.atoms)?;
    let envs = source.envs(&f, o.sample_limit);
    if show_strategy && envs.len() > 1 {
        bail!("--strategy needs a single interpretation");
    }
    let mut rows = Vec::new();
    for (label, env) in &envs {
        let (_, p) = build(text, env, o.bang_cap, o.bang_mode)?;
        let solution = solve(&p);
        if o.format == Format::Text {
            match &source {
                AtomSource::Pool(_) => println!("{label}: winner: {}", solution.winner),
                _ => println!("winner: {}", solution.winner),
            }
            if show_strategy {
                for (state, mv) in solution.strategy.dump() {
                    println!("  {state} => {mv}");
                }
            }
        }
        rows.push(json!({ "atoms": label, "winner": solution.winner }));
    }
    if o.format == Format::Json {
        print_json(&json!(rows));
    }
    Ok(Outcome::Ok)
}

fn report_verdict(o: &Opts, v: Verdict) -> Result<Outcome> {
    match o.format {
        Format::Text => println!("{v}"),
        Format::Json => print_json(&match &v {
            Verdict::Valid {
                pool,
                tested,
                exhaustive,
            } => json!({ "verdict": "valid over pool", "pool": pool, "tested": tested, "exhaustive": exhaustive }),
            Verdict::Refuted {
                pool,
                countermodel,
                assignment,
                index,
                seed,
            } => json!({
                "verdict": "refuted",
                "pool": pool,
                "assignment": assignment,
                "countermodel": countermodel,
                "index": index,
                "seed": seed,
            }),
        }),
    }
    Ok(if v.is_valid() { Outcome::Ok } else { Outcome::Negative })
}

fn parse_hypotheses(texts: &[String]) -> Result<Vec<Sequent>> {
    texts.iter().map(|h| Ok(Sequent::parse(h)?)).collect()
}

fn cmd_prove(o: &Opts, text: &str, thinning: bool, hyps: &[String], out: Option<PathBuf>) -> Result<Outcome> {
    let sequent = Sequent::parse(text)?;
    let hyps = parse_hypotheses(hyps)?;
    let mut rules = RuleSet::mall();
    if thinning {
        rules = rules.with(RuleKind::Thinning);
    }
    if !hyps.is_empty() {
        rules = rules.with(RuleKind::Hypothesis);
    }
    let bound = o.node_budget.max(DEFAULT_SEARCH_BOUND);
    match search_bounded(&sequent, &rules, &hyps, bound) {
        SearchOutcome::Proved(t) => {
            if let Some(path) = out {
                std::fs::write(&path, t.to_json()).with_context(|| format!("writing {}", path.display()))?;
            }
            match o.format {
                Format::Json => println!("{}", t.to_json()),
                Format::Text => {
                    println!("provable: {sequent}");
                    print!("{t}");
                }
            }
            Ok(Outcome::Ok)
        }
        SearchOutcome::Unprovable => {
            println!("unprovable: {sequent}");
            Ok(Outcome::Negative)
        }
        SearchOutcome::BoundExceeded { bound } => {
            println!("gave up on {sequent} after {bound} steps");
            Ok(Outcome::Negative)
        }
    }
}

fn cmd_check_proof(file: &PathBuf, thinning: bool, cut: bool, hyps: &[String]) -> Result<Outcome> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let proof = ProofTree::from_json(&text)?;
    let hyps = parse_hypotheses(hyps)?;
    let mut rules = RuleSet::mall().with(RuleKind::Hypothesis);
    if thinning {
        rules = rules.with(RuleKind::Thinning);
    }
    if cut {
        rules = rules.with(RuleKind::Cut);
    }
    match check_proof(&proof, &rules, &hyps) {
        Ok(()) => {
            println!("ok: {} ({} rule applications)", proof.conclusion, proof.size());
            Ok(Outcome::Ok)
        }
        Err(e) => {
            println!("invalid: {e}");
            Ok(Outcome::Negative)
        }
    }
}

fn cmd_play(o: &Opts, text: &str, human: Role, kind: EngineKind, script: Option<&str>) -> Result<Outcome> {
    let f = parse(text)?;
    let env = single_env(&AtomSource::parse(&o.atoms)?, &f)?;
    let (_, p) = build(text, &env, o.bang_cap, o.bang_mode)?;
    let mut engine = Engine::new(&p, human.opponent(), kind, o.seed);
    let mut referee = Referee::new(p);
    let mut scripted = script.map(|s| s.split(',').map(str::trim).filter(|m| !m.is_empty()).map(String::from));
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    while referee.status() == PlayStatus::Ongoing {
        if referee.turn() == engine.role().turn() {
            let m = engine.choose(&referee).expect("ongoing plays have moves");
            println!("{} plays {m}", engine.role());
            referee.apply_move(&m)?;
            continue;
        }
        let legal: Vec<String> = referee.legal_moves().iter().map(ToString::to_string).collect();
        let input = match scripted.as_mut() {
            Some(it) => match it.next() {
                Some(m) => m,
                None => bail!("script ended with moves left: {}", legal.join(" ")),
            },
            None => {
                print!("your move ({}): ", legal.join(" "));
                std::io::stdout().flush()?;
                match lines.next() {
                    Some(line) => line?.trim().to_string(),
                    None => bail!("input ended mid-play"),
                }
            }
        };
        match referee.find_move(&input) {
            Some(m) => {
                referee.apply_move(&m)?;
            }
            None if script.is_some() => bail!("illegal move `{input}` (legal: {})", legal.join(" ")),
            None => println!("illegal move `{input}`"),
        }
    }
    print!("{}", referee.trace());
    let human_lost = referee.status() == PlayStatus::Stuck(human);
    Ok(if human_lost { Outcome::Negative } else { Outcome::Ok })
}

fn cmd_demo(o: &Opts) -> Result<Outcome> {
    let checks = demo::run_all();
    let all = checks.iter().all(|c| c.passed);
    match o.format {
        Format::Json => print_json(&json!(checks
            .iter()
            .map(|c| json!({
                "check": c.name,
                "passed": c.passed,
                "seconds": c.elapsed.as_secs_f64(),
                "detail": c.detail,
            }))
            .collect::<Vec<_>>())),
        Format::Text => {
            for c in &checks {
                println!("{c}");
            }
            let passed = checks.iter().filter(|c| c.passed).count();
            println!("{passed}/{} checks passed", checks.len());
        }
    }
    Ok(if all { Outcome::Ok } else { Outcome::Negative })
}
