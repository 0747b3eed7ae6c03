//! The reproduction suite: one check per headline result, shared by the
//! `lingame demo paper` command and the acceptance tests.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formula::{Formula, Sequent};
use crate::game::{
    atom_protocol, bang_p, bot_p, dual, interpret, materialize, one_p, par_p, plus_p, tensor_p, top_p, with_p, zero_p,
    AtomEnv, BangMode, ExplicitTree, GameError, Protocol, Turn,
};
use crate::proofs::{check_proof, note6_hypotheses, note6_proof, search, RuleKind, RuleSet, SearchOutcome};
use crate::semantics::{
    entails, equiv, has_choice_then_reply, iso_check, random_formula_with, random_suite, scan_consistency, three_bit,
    valid_naive, x1, x2, x_product, AtomPool, ValidityConfig, X1Reading,
};
use crate::strategy::{copycat, copycat_protocol, extract_behavior, is_behavior, oracle, server_wins, stuck_server_leaves};

pub const SUITE_SEED: u64 = 7;
pub const SUITE_SIZE: usize = 1000;
pub const SUITE_DEPTH: usize = 6;
pub const SUITE_BRANCHING: usize = 3;
const FORMULA_SEED: u64 = 11;
const STRUCTURAL_SEED: u64 = 13;
const NODE_BUDGET: usize = 200_000;

/// Outcome of one reproduction check.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    /// Wall-clock budget, when the check has one.
    pub limit: Option<Duration>,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{mark}  {:<24} {:>8.2?}", self.name, self.elapsed)?;
        if let Some(limit) = self.limit {
            write!(f, " (limit {limit:?})")?;
        }
        write!(f, "  {}", self.detail)
    }
}

fn timed(
    name: &'static str,
    limit: Option<Duration>,
    body: impl FnOnce() -> Result<String, String>,
) -> Check {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    let within = limit.is_none_or(|l| elapsed < l);
    let (passed, mut detail) = match outcome {
        Ok(d) => (within, d),
        Err(d) => (false, d),
    };
    if !within {
        detail.push_str("; over time limit");
    }
    Check {
        name,
        passed,
        detail,
        elapsed,
        limit,
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn suite() -> Vec<ExplicitTree> {
    random_suite(SUITE_SIZE, SUITE_DEPTH, SUITE_BRANCHING, SUITE_SEED)
}

fn protocol(tree: &ExplicitTree) -> Protocol {
    atom_protocol(tree).expect("generated trees are well formed")
}

/// Random pool assignment for the atoms of `f`.
fn random_env(f: &Formula, pool: &AtomPool, rng: &mut impl Rng) -> AtomEnv {
    let mut env = AtomEnv::new();
    for a in f.atoms() {
        env.insert(a, pool.games[rng.random_range(0..pool.len())].tree.clone());
    }
    env
}

pub fn determinacy() -> Check {
    timed("determinacy", Some(Duration::from_secs(30)), || {
        let games = suite();
        let mut both = 0;
        for (i, t) in games.iter().enumerate() {
            let p = protocol(t);
            let (s, c) = (server_wins(&p), server_wins(&dual(&p)));
            ensure(s || c, || format!("game #{i}: neither side wins"))?;
            both += usize::from(s && c);
        }
        Ok(format!("{} games determined ({both} won by both sides)", games.len()))
    })
}

pub fn solver_oracle() -> Check {
    timed("solver-oracle", None, || {
        for (i, t) in suite().iter().enumerate() {
            let p = protocol(t);
            ensure(server_wins(&p) == oracle::naive_server_wins(&p), || format!("suite game #{i} disagrees"))?;
        }
        let pool = AtomPool::standard();
        let mut rng = ChaCha8Rng::seed_from_u64(FORMULA_SEED);
        let atoms = ["a", "b", "c"];
        let (mut formulas, mut skipped) = (0, 0);
        while formulas < 200 {
            let f = random_formula_with(&mut rng, 4, &atoms);
            if f.connective_count() > 6 {
                continue;
            }
            let env = random_env(&f, &pool, &mut rng);
            let p = interpret(&f, &env, 2, BangMode::Consistent).map_err(|e| e.to_string())?;
            if materialize(&p, NODE_BUDGET).is_err() {
                skipped += 1;
                continue;
            }
            ensure(server_wins(&p) == oracle::naive_server_wins(&p), || format!("formula {f} disagrees under {env}"))?;
            formulas += 1;
        }
        Ok(format!(
            "{SUITE_SIZE} suite games and {formulas} formulas agree ({skipped} formulas over the node budget redrawn)"
        ))
    })
}

pub fn over_generation() -> Check {
    timed("over-generation", Some(Duration::from_secs(10)), || {
        let pool = AtomPool::standard();
        let f = Formula::plus(Formula::dual(Formula::atom("a")), Formula::atom("a"));
        for g in &pool.games {
            let mut env = AtomEnv::new();
            env.insert("a", g.tree.clone());
            let p = interpret(&f, &env, 2, BangMode::Consistent).map_err(|e| e.to_string())?;
            ensure(server_wins(&p), || format!("server loses a^ + a with a = {}", g.name))?;
        }
        let outcome = search(&Sequent::new([f.clone()]), &RuleSet::mall(), &[]);
        ensure(outcome == SearchOutcome::Unprovable, || format!("search outcome: {outcome:?}"))?;
        Ok(format!("server wins {f} for all {} pool atoms; |- {f} unprovable", pool.len()))
    })
}

pub fn copycat_totality() -> Check {
    timed("copy-cat", None, || {
        let pool = AtomPool::standard();
        for g in &pool.games {
            let p = copycat_protocol(&g.tree).map_err(|e| e.to_string())?;
            let s = copycat(&g.tree).map_err(|e| e.to_string())?;
            let b = extract_behavior(&p, &s, NODE_BUDGET).map_err(|e| format!("{}: {e}", g.name))?;
            ensure(is_behavior(&p, &b, false).map_err(|e| e.to_string())?, || {
                format!("{}: not a behavior", g.name)
            })?;
            let stuck = stuck_server_leaves(&p, &b).map_err(|e| e.to_string())?;
            ensure(stuck.is_empty(), || format!("{}: {} stuck server leaves", g.name, stuck.len()))?;
        }
        Ok(format!("{} pool atoms, all behaviors total", pool.len()))
    })
}

fn parse(text: &str) -> Formula {
    crate::formula::parse(text).expect("built-in formula parses")
}

fn provable_checked(hyp: &Formula, concl: &Formula) -> Result<(), String> {
    let s = Sequent::from_two_sided(std::slice::from_ref(hyp), std::slice::from_ref(concl));
    match search(&s, &RuleSet::mall(), &[]) {
        SearchOutcome::Proved(t) => check_proof(&t, &RuleSet::mall(), &[]).map_err(|e| format!("{s}: {e}")),
        other => Err(format!("{s}: {other:?}")),
    }
}

fn unprovable(hyp: &Formula, concl: &Formula) -> Result<(), String> {
    let s = Sequent::from_two_sided(std::slice::from_ref(hyp), std::slice::from_ref(concl));
    match search(&s, &RuleSet::mall(), &[]) {
        SearchOutcome::Unprovable => Ok(()),
        other => Err(format!("{s} expected unprovable, got {other:?}")),
    }
}

pub fn distributivity() -> Check {
    timed("distributivity", Some(Duration::from_secs(10)), || {
        let pool = AtomPool::standard();
        let cfg = ValidityConfig::default();
        let laws = [
            (parse("a * (b + c)"), parse("(a * b) + (a * c)")),
            (parse("(a1 + a2) * (b1 + b2)"), parse("(a1 * b1) + (a1 * b2) + (a2 * b1) + (a2 * b2)")),
        ];
        let mut notes = Vec::new();
        for (lhs, rhs) in &laws {
            let v = equiv(lhs, rhs, &pool, &cfg);
            ensure(v.is_valid(), || format!("{lhs} vs {rhs}: {v}"))?;
            provable_checked(lhs, rhs)?;
            provable_checked(rhs, lhs)?;
            notes.push(v.to_string());
        }
        Ok(format!("both laws provable both ways; {}", notes.join("; ")))
    })
}

pub fn x_chain() -> Check {
    timed("x-chain", None, || {
        let pool = AtomPool::standard();
        let cfg = ValidityConfig::default();
        let (prod, x1v, x1c, x2) = (x_product(), x1(X1Reading::Verbatim), x1(X1Reading::Corrected), x2());
        provable_checked(&prod, &x1v)?;
        provable_checked(&x1v, &x2)?;
        unprovable(&x1v, &prod)?;
        unprovable(&x2, &x1v)?;
        let v = entails(&x1v, &prod, &pool, &cfg);
        ensure(v.is_valid(), || format!("X1 -o product: {v}"))?;
        let corrected_ok = provable_checked(&prod, &x1c).is_ok()
            && provable_checked(&x1c, &x2).is_ok()
            && unprovable(&x1c, &prod).is_ok()
            && unprovable(&x2, &x1c).is_ok();
        let corrected_sem = entails(&x1c, &prod, &pool, &cfg);
        let converse = entails(&x2, &x1v, &pool, &cfg);
        Ok(format!(
            "X1 -o product {v}; corrected X1 proof pattern {}, semantics {}; X2 -o X1: {}",
            if corrected_ok { "same" } else { "differs" },
            if corrected_sem.is_valid() { "valid" } else { "refuted" },
            if converse.is_valid() { "valid over pool" } else { "refuted" },
        ))
    })
}

pub fn thinning() -> Check {
    timed("thinning", None, || {
        let f = parse("a^ @ b^ @ a");
        let v = valid_naive(&f, &AtomPool::standard(), &ValidityConfig::default());
        let env = v.countermodel().ok_or_else(|| format!("{f} not refuted: {v}"))?;
        ensure(
            env.get("a") == Some(&ExplicitTree::leaf(Turn::Terminated)) && env.get("b") == Some(&ExplicitTree::leaf(Turn::Client)),
            || format!("unexpected countermodel {env}"),
        )?;
        let names = v.assignment().expect("refuted");
        Ok(format!("countermodel a -> {}, b -> {}", names["a"], names["b"]))
    })
}

pub fn note6() -> Check {
    timed("note6", None, || {
        let (a, gamma) = (Formula::atom("a"), [Formula::atom("b")]);
        let rules = RuleSet::mall().with(RuleKind::Cut).with(RuleKind::Thinning).with(RuleKind::Hypothesis);
        let hyps = note6_hypotheses(&a, &gamma);
        let proof = note6_proof(&a, &gamma, &rules).map_err(|e| e.to_string())?;
        check_proof(&proof, &rules, &hyps).map_err(|e| e.to_string())?;
        let strict = rules.clone().without(RuleKind::Thinning);
        ensure(check_proof(&proof, &strict, &hyps).is_err(), || "accepted without thinning".into())?;
        ensure(note6_proof(&a, &gamma, &strict).is_err(), || "built without thinning".into())?;
        Ok(format!("{} rule applications, rejected without thinning", proof.size()))
    })
}

pub fn exponential() -> Check {
    timed("exponential", None, || {
        let pool = AtomPool::standard();
        let candidates: Vec<_> = pool.games.iter().filter(|g| has_choice_then_reply(&g.tree)).collect();
        ensure(!candidates.is_empty(), || "no pool atom opens with a choice then a reply".into())?;
        let mut witnesses = Vec::new();
        for g in &candidates {
            let a = protocol(&g.tree);
            let scan = scan_consistency(&bang_p(&a, 2, BangMode::Consistent), false, NODE_BUDGET).map_err(|e| e.to_string())?;
            ensure(scan.violation.is_none(), || format!("{}: inconsistent play in consistent mode", g.name))?;
            let stream = scan_consistency(&bang_p(&a, 2, BangMode::Stream), true, NODE_BUDGET).map_err(|e| e.to_string())?;
            if stream.violation.is_some() {
                witnesses.push(g.name.clone());
            }
        }
        ensure(!witnesses.is_empty(), || "no stream-mode violation found".into())?;
        Ok(format!(
            "{} atoms consistent under the consistent mode; stream violations for {}",
            candidates.len(),
            witnesses.join(", ")
        ))
    })
}

fn iso(p: &Protocol, q: &Protocol) -> Result<bool, String> {
    iso_check(p, q, NODE_BUDGET).map_err(|e| e.to_string())
}

pub fn structural() -> Check {
    timed("structural", None, || {
        let pool = AtomPool::standard();
        let mut rng = ChaCha8Rng::seed_from_u64(STRUCTURAL_SEED);
        let atoms = ["a", "b"];
        ensure(iso(&one_p(), &bot_p())?, || "1 and bot differ".into())?;
        ensure(iso(&dual(&top_p()), &zero_p())?, || "dual(top) differs from 0".into())?;
        let (mut done, mut skipped) = (0, 0);
        while done < 200 {
            let fa = random_formula_with(&mut rng, 2, &atoms);
            let fb = random_formula_with(&mut rng, 2, &atoms);
            let env = random_env(&Formula::tensor(fa.clone(), fb.clone()), &pool, &mut rng);
            let build = |f: &Formula| interpret(f, &env, 2, BangMode::Consistent).map_err(|e| e.to_string());
            let (a, b) = (build(&fa)?, build(&fb)?);
            let (da, db) = (dual(&a), dual(&b));
            let syntactic = build(&Formula::dual(fa.clone()))?;
            let laws = [
                ("involution", dual(&dual(&a)), a.clone()),
                ("dual tensor", dual(&tensor_p(&a, &b)), par_p(&da, &db)),
                ("dual par", dual(&par_p(&a, &b)), tensor_p(&da, &db)),
                ("dual with", dual(&with_p(&a, &b)), plus_p(&da, &db)),
                ("dual plus", dual(&plus_p(&a, &b)), with_p(&da, &db)),
                ("syntactic dual", syntactic, da.clone()),
            ];
            let mut verdicts = Vec::new();
            for (law, p, q) in &laws {
                match iso_check(p, q, NODE_BUDGET) {
                    Ok(same) => verdicts.push((*law, same)),
                    Err(GameError::BudgetExceeded { .. }) => break,
                    Err(e) => return Err(e.to_string()),
                }
            }
            if verdicts.len() < laws.len() {
                skipped += 1;
                continue;
            }
            if let Some((law, _)) = verdicts.iter().find(|(_, same)| !same) {
                return Err(format!("{law} fails for A = {fa}, B = {fb} under {env}"));
            }
            done += 1;
        }
        Ok(format!("{done} instances ({skipped} over budget skipped), units agree"))
    })
}

pub fn three_bit_depth() -> Check {
    timed("three-bit", None, || {
        let f = three_bit();
        let p = interpret(&f, &AtomEnv::unit_for(&f), 2, BangMode::Consistent).map_err(|e| e.to_string())?;
        let depth = materialize(&p, NODE_BUDGET).map_err(|e| e.to_string())?.depth();
        ensure(depth == 3, || format!("depth {depth}"))?;
        Ok(format!("{f}: depth {depth}"))
    })
}

/// Every check, in presentation order.
pub fn run_all() -> Vec<Check> {
    vec![
        determinacy(),
        solver_oracle(),
        over_generation(),
        copycat_totality(),
        distributivity(),
        x_chain(),
        thinning(),
        note6(),
        exponential(),
        structural(),
        three_bit_depth(),
    ]
}
