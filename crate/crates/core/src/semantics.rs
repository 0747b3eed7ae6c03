//! Validity, entailment and equivalence over finite pools of atom games,
//! plus the seeded generators used by the test suites.
//!
//! Validity here always means "valid over the pool": refutations are sound
//! for every interpretation, successes only for the games tried.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::formula::Formula;
use crate::game::{interpret, materialize, AtomEnv, BangMode, ExplicitTree, GameError, Move, Protocol, Turn};
use crate::strategy::server_wins;

/// Seed of the standard pool.
pub const STD_POOL_SEED: u64 = 2024;
pub const STD_POOL_RANDOM: usize = 50;
pub const STD_POOL_DEPTH: usize = 4;
pub const STD_POOL_BRANCHING: usize = 3;

/// Relative odds of each turn label in generated trees.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TurnWeights {
    pub client: u32,
    pub server: u32,
    pub terminated: u32,
}

impl Default for TurnWeights {
    fn default() -> Self {
        TurnWeights {
            client: 2,
            server: 2,
            terminated: 1,
        }
    }
}

impl TurnWeights {
    fn draw(&self, rng: &mut impl Rng) -> Turn {
        let total = self.client + self.server + self.terminated;
        let x = rng.random_range(0..total.max(1));
        if x < self.client {
            Turn::Client
        } else if x < self.client + self.server {
            Turn::Server
        } else {
            Turn::Terminated
        }
    }
}

/// A random explicit tree of depth at most `depth`. Non-terminated nodes get
/// between zero and `branching` children, labelled `e1`, `e2`, ...
pub fn random_protocol_with(rng: &mut impl Rng, depth: usize, branching: usize, weights: &TurnWeights) -> ExplicitTree {
    let turn = weights.draw(rng);
    if turn == Turn::Terminated || depth == 0 {
        return ExplicitTree::leaf(turn);
    }
    let width = rng.random_range(0..=branching);
    ExplicitTree::node(
        turn,
        (1..=width).map(|i| (format!("e{i}"), random_protocol_with(rng, depth - 1, branching, weights))),
    )
}

pub fn random_protocol(depth: usize, branching: usize, seed: u64) -> ExplicitTree {
    random_protocol_with(&mut ChaCha8Rng::seed_from_u64(seed), depth, branching, &TurnWeights::default())
}

/// `count` trees drawn from one seeded stream.
pub fn random_suite(count: usize, depth: usize, branching: usize, seed: u64) -> Vec<ExplicitTree> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = TurnWeights::default();
    (0..count).map(|_| random_protocol_with(&mut rng, depth, branching, &weights)).collect()
}

/// A random formula of depth at most `depth` over `atoms`, using every
/// connective and constant.
pub fn random_formula_with<R: Rng>(rng: &mut R, depth: usize, atoms: &[&str]) -> Formula {
    if depth == 0 || rng.random_range(0..4) == 0 {
        return match rng.random_range(0..10) {
            0 => Formula::Top,
            1 => Formula::Zero,
            2 => Formula::One,
            3 => Formula::Bot,
            _ if atoms.is_empty() => Formula::One,
            _ => Formula::atom(atoms[rng.random_range(0..atoms.len())]),
        };
    }
    let op = rng.random_range(0..8);
    let a = random_formula_with(rng, depth - 1, atoms);
    if op == 0 {
        return Formula::dual(a);
    }
    if op >= 6 {
        return if op == 6 { Formula::bang(a) } else { Formula::quest(a) };
    }
    let b = random_formula_with(rng, depth - 1, atoms);
    match op {
        1 => Formula::tensor(a, b),
        2 => Formula::par(a, b),
        3 => Formula::with(a, b),
        4 => Formula::plus(a, b),
        _ => Formula::lolli(a, b),
    }
}

pub fn random_formula(depth: usize, atoms: &[&str], seed: u64) -> Formula {
    random_formula_with(&mut ChaCha8Rng::seed_from_u64(seed), depth, atoms)
}

/// A named game of a pool.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolGame {
    pub name: String,
    #[serde(flatten)]
    pub tree: ExplicitTree,
}

/// An ordered list of candidate atom interpretations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomPool {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub games: Vec<PoolGame>,
}

fn constant_games() -> Vec<PoolGame> {
    [("top", Turn::Client), ("zero", Turn::Server), ("one", Turn::Terminated), ("bot", Turn::Terminated)]
        .into_iter()
        .map(|(name, turn)| PoolGame {
            name: name.into(),
            tree: ExplicitTree::leaf(turn),
        })
        .collect()
}

impl AtomPool {
    /// The constants followed by `size` seeded random trees.
    pub fn generate(name: &str, size: usize, depth: usize, branching: usize, seed: u64) -> Self {
        let mut games = constant_games();
        let random = random_suite(size, depth, branching, seed);
        games.extend(random.into_iter().enumerate().map(|(i, tree)| PoolGame {
            name: format!("r{i:02}"),
            tree,
        }));
        AtomPool {
            name: name.into(),
            seed: Some(seed),
            games,
        }
    }

    /// Constants plus 50 random trees of depth at most 4.
    pub fn standard() -> Self {
        Self::generate("std", STD_POOL_RANDOM, STD_POOL_DEPTH, STD_POOL_BRANCHING, STD_POOL_SEED)
    }

    pub fn constants() -> Self {
        AtomPool {
            name: "constants".into(),
            seed: None,
            games: constant_games(),
        }
    }

    pub fn len(&self) -> usize {
        self.games.len()
    }

    pub fn is_empty(&self) -> bool {
        self.games.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&ExplicitTree> {
        self.games.iter().find(|g| g.name == name).map(|g| &g.tree)
    }

    /// Non-empty, well-formed, and containing the three constant leaves.
    pub fn validate(&self) -> Result<(), GameError> {
        for g in &self.games {
            g.tree.validate().map_err(|_| GameError::MalformedTree { path: g.name.clone() })?;
        }
        for turn in [Turn::Client, Turn::Server, Turn::Terminated] {
            if !self.games.iter().any(|g| g.tree == ExplicitTree::leaf(turn)) {
                return Err(GameError::Format(format!("pool `{}` lacks the {turn} leaf", self.name)));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, GameError> {
        let pool: AtomPool = serde_json::from_str(text).map_err(|e| GameError::Format(e.to_string()))?;
        pool.validate()?;
        Ok(pool)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pool serialization is infallible")
    }

    fn leaf_indices(&self) -> Vec<usize> {
        (0..self.games.len()).filter(|&i| self.games[i].tree.moves.is_empty()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidityConfig {
    pub cap: u32,
    pub mode: BangMode,
    /// Largest assignment count checked exhaustively; beyond it, this many
    /// assignments are sampled.
    pub sample_limit: usize,
    pub seed: u64,
}

impl Default for ValidityConfig {
    fn default() -> Self {
        ValidityConfig {
            cap: 2,
            mode: BangMode::Consistent,
            sample_limit: 4096,
            seed: 0,
        }
    }
}

/// The outcome of a pool validity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Valid {
        pool: String,
        tested: usize,
        exhaustive: bool,
    },
    Refuted {
        pool: String,
        /// The failing interpretation.
        countermodel: AtomEnv,
        /// Atom name to pool game name.
        assignment: BTreeMap<String, String>,
        /// Position of the countermodel in the test order.
        index: usize,
        seed: u64,
    },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid { .. })
    }

    pub fn countermodel(&self) -> Option<&AtomEnv> {
        match self {
            Verdict::Refuted { countermodel, .. } => Some(countermodel),
            Verdict::Valid { .. } => None,
        }
    }

    pub fn assignment(&self) -> Option<&BTreeMap<String, String>> {
        match self {
            Verdict::Refuted { assignment, .. } => Some(assignment),
            Verdict::Valid { .. } => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid {
                pool,
                tested,
                exhaustive,
            } => {
                let how = if *exhaustive { "exhaustive" } else { "sampled" };
                write!(f, "valid over pool {pool} ({tested} interpretations, {how})")
            }
            Verdict::Refuted {
                pool,
                countermodel,
                assignment,
                index,
                seed,
            } => {
                let names: Vec<String> = assignment.iter().map(|(a, g)| format!("{a} -> {g}")).collect();
                writeln!(f, "refuted over pool {pool} (interpretation #{index}, seed {seed})")?;
                writeln!(f, "countermodel: {}", names.join(", "))?;
                write!(f, "env: {countermodel}")
            }
        }
    }
}

/// Pool indices for each atom, in the order they are tried.
fn assignments(k: usize, pool: &AtomPool, cfg: &ValidityConfig) -> (Vec<Vec<usize>>, bool) {
    let n = pool.len();
    let total = u32::try_from(k).ok().and_then(|k| n.checked_pow(k));
    let decode = |mut idx: usize, radix: usize| {
        let mut digits = vec![0; k];
        for d in digits.iter_mut().rev() {
            *d = idx % radix;
            idx /= radix;
        }
        digits
    };
    match total {
        Some(total) if total <= cfg.sample_limit => ((0..total).map(|i| decode(i, n)).collect(), true),
        _ => {
            let leaves = pool.leaf_indices();
            let mut out: Vec<Vec<usize>> = Vec::new();
            if let Some(corners) = u32::try_from(k).ok().and_then(|k| leaves.len().checked_pow(k)) {
                if corners <= cfg.sample_limit / 2 {
                    out.extend((0..corners).map(|i| decode(i, leaves.len()).into_iter().map(|d| leaves[d]).collect()));
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            while out.len() < cfg.sample_limit {
                out.push((0..k).map(|_| rng.random_range(0..n)).collect());
            }
            (out, false)
        }
    }
}

fn env_for(atoms: &[String], choice: &[usize], pool: &AtomPool) -> AtomEnv {
    let mut env = AtomEnv::new();
    for (a, &i) in atoms.iter().zip(choice) {
        env.insert(a.clone(), pool.games[i].tree.clone());
    }
    env
}

/// Whether the server wins `f` under every tested assignment of pool games
/// to its atoms. Assignments are enumerated with the last atom (in sorted
/// order) varying fastest; the first failing one is reported.
pub fn valid_naive(f: &Formula, pool: &AtomPool, cfg: &ValidityConfig) -> Verdict {
    let atoms = f.atoms();
    let (tried, exhaustive) = assignments(atoms.len(), pool, cfg);
    let fails = |choice: &Vec<usize>| {
        let env = env_for(&atoms, choice, pool);
        let p = interpret(f, &env, cfg.cap, cfg.mode).expect("pool binds every atom");
        !server_wins(&p)
    };
    match tried.par_iter().enumerate().find_first(|(_, c)| fails(c)) {
        None => Verdict::Valid {
            pool: pool.name.clone(),
            tested: tried.len(),
            exhaustive,
        },
        Some((index, choice)) => Verdict::Refuted {
            pool: pool.name.clone(),
            countermodel: env_for(&atoms, choice, pool),
            assignment: atoms
                .iter()
                .zip(choice)
                .map(|(a, &i)| (a.clone(), pool.games[i].name.clone()))
                .collect(),
            index,
            seed: cfg.seed,
        },
    }
}

/// Validity of `f -o g`; atoms shared by both sides get one game.
pub fn entails(f: &Formula, g: &Formula, pool: &AtomPool, cfg: &ValidityConfig) -> Verdict {
    valid_naive(&Formula::lolli(f.clone(), g.clone()), pool, cfg)
}

/// Both entailments; the first failing direction is reported.
pub fn equiv(f: &Formula, g: &Formula, pool: &AtomPool, cfg: &ValidityConfig) -> Verdict {
    let forward = entails(f, g, pool, cfg);
    if !forward.is_valid() {
        return forward;
    }
    let backward = entails(g, f, pool, cfg);
    match (forward, backward) {
        (
            Verdict::Valid {
                pool,
                tested: t1,
                exhaustive: e1,
            },
            Verdict::Valid {
                tested: t2,
                exhaustive: e2,
                ..
            },
        ) => Verdict::Valid {
            pool,
            tested: t1 + t2,
            exhaustive: e1 && e2,
        },
        (_, refuted) => refuted,
    }
}

/// Equality of the materialized trees.
pub fn iso_check(p: &Protocol, q: &Protocol, max_nodes: usize) -> Result<bool, GameError> {
    Ok(materialize(p, max_nodes)? == materialize(q, max_nodes)?)
}

/// Which fourth conjunct of X1 to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum X1Reading {
    /// `a1 * (b1 & b2)` repeated, as printed.
    #[default]
    Verbatim,
    /// `a2 * (b1 & b2)` as the fourth conjunct.
    Corrected,
}

fn f(text: &str) -> Formula {
    crate::formula::parse(text).expect("built-in formula parses")
}

/// `(a1 & a2) * (b1 & b2)`.
pub fn x_product() -> Formula {
    f("(a1 & a2) * (b1 & b2)")
}

pub fn x1(reading: X1Reading) -> Formula {
    let last = match reading {
        X1Reading::Verbatim => "a1",
        X1Reading::Corrected => "a2",
    };
    f(&format!(
        "((a1 & a2) * b1) & ((a1 & a2) * b2) & (a1 * (b1 & b2)) & ({last} * (b1 & b2))"
    ))
}

pub fn x2() -> Formula {
    f("(a1 * b1) & (a2 * b1) & (a1 * b2) & (a2 * b2)")
}

/// `[(a&b)+(c&d)] & [(e&f)+(g&h)]`.
pub fn three_bit() -> Formula {
    f("((a & b) + (c & d)) & ((e & f) + (g & h))")
}

/// Local history of each copy of a `!` play, each move tagged with whether
/// the server made it. Moves outside copies are ignored.
pub fn copy_histories(p: &Protocol, play: &[Move]) -> Result<Vec<Vec<(Move, bool)>>, GameError> {
    let mut copies: Vec<Vec<(Move, bool)>> = Vec::new();
    let mut state = p.initial();
    for m in play {
        let server = p.turn(&state) == Turn::Server;
        match m {
            Move::Count(n) => copies = vec![Vec::new(); *n as usize],
            Move::InCopy(i, inner) => {
                if let Some(h) = copies.get_mut(*i as usize) {
                    h.push(((**inner).clone(), server));
                }
            }
            _ => {}
        }
        state = p.play(&state, m)?;
    }
    Ok(copies)
}

/// Two copies whose histories agree up to some position where both carry a
/// server move, and those moves differ: `(i, j, position)`.
pub fn inconsistent_reply(copies: &[Vec<(Move, bool)>]) -> Option<(usize, usize, usize)> {
    for i in 0..copies.len() {
        for j in i + 1..copies.len() {
            let (a, b) = (&copies[i], &copies[j]);
            let k = a.iter().zip(b).take_while(|(x, y)| x == y).count();
            if let (Some((ma, true)), Some((mb, true))) = (a.get(k), b.get(k)) {
                if ma != mb {
                    return Some((i, j, k));
                }
            }
        }
    }
    None
}

/// Result of scanning the plays of a protocol for inconsistent replies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsistencyScan {
    /// Histories visited.
    pub visited: usize,
    /// First history with an inconsistent reply, if any.
    pub violation: Option<Vec<Move>>,
}

/// Depth-first scan of the histories of `p` for an inconsistent reply
/// between copies. With `winning_only`, only server-winning states are
/// entered: a violation found then lies on the plays of some winning
/// strategy (follow it where it leads, play any winning move elsewhere).
/// With no winning strategy at all, nothing is visited.
pub fn scan_consistency(p: &Protocol, winning_only: bool, max_histories: usize) -> Result<ConsistencyScan, GameError> {
    let mut solver = crate::strategy::Solver::new(p);
    let mut visited = 0;
    let mut stack = Vec::new();
    if !winning_only || solver.wins(&p.initial()) {
        stack.push((Vec::new(), p.initial()));
    }
    while let Some((h, state)) = stack.pop() {
        visited += 1;
        if visited > max_histories {
            return Err(GameError::BudgetExceeded { count: max_histories });
        }
        if inconsistent_reply(&copy_histories(p, &h)?).is_some() {
            return Ok(ConsistencyScan {
                visited,
                violation: Some(h),
            });
        }
        for m in p.legal_moves(&state) {
            let next = p.next(&state, &m).expect("legal move applies");
            if winning_only && !solver.wins(&next) {
                continue;
            }
            let mut h2 = h.clone();
            h2.push(m);
            stack.push((h2, next));
        }
    }
    Ok(ConsistencyScan {
        visited,
        violation: None,
    })
}

/// Whether `tree` opens with a client move leading to a server node with at
/// least two replies.
pub fn has_choice_then_reply(tree: &ExplicitTree) -> bool {
    tree.turn == Turn::Client
        && tree
            .moves
            .values()
            .any(|c| c.turn == Turn::Server && c.moves.len() >= 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::game::{atom_protocol, dual, one_p, bot_p, par_p, tensor_p};

    fn quick() -> ValidityConfig {
        ValidityConfig::default()
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(random_protocol(5, 3, 9), random_protocol(5, 3, 9));
        assert_eq!(random_formula(4, &["a", "b"], 9), random_formula(4, &["a", "b"], 9));
        let leaf = random_protocol(0, 3, 1);
        assert!(leaf.moves.is_empty());
        for t in random_suite(200, 6, 3, 5) {
            assert!(t.depth() <= 6);
            assert!(t.moves.len() <= 3);
            t.validate().unwrap();
        }
    }

    #[test]
    fn standard_pool_shape() {
        let pool = AtomPool::standard();
        assert_eq!(pool.len(), 4 + STD_POOL_RANDOM);
        assert_eq!(pool.games[0].name, "top");
        pool.validate().unwrap();
        assert!(pool.games.iter().all(|g| g.tree.depth() <= STD_POOL_DEPTH));
        let back = AtomPool::from_json(&pool.to_json()).unwrap();
        assert_eq!(back, pool);
        let missing = AtomPool {
            name: "x".into(),
            seed: None,
            games: vec![],
        };
        assert!(missing.validate().is_err());
    }

    #[test]
    fn excluded_middle_valid_but_thinning_refuted() {
        let pool = AtomPool::standard();
        assert!(valid_naive(&parse("a^ + a").unwrap(), &pool, &quick()).is_valid());
        assert!(valid_naive(&parse("a^ @ a").unwrap(), &pool, &quick()).is_valid());
        let thin = parse("a^ @ b^ @ a").unwrap();
        let v = valid_naive(&thin, &pool, &quick());
        let assignment = v.assignment().expect("refuted");
        assert_eq!(assignment["a"], "one");
        assert_eq!(assignment["b"], "top");
        assert_eq!(valid_naive(&thin, &pool, &quick()), v);
        assert!(v.to_string().contains("a -> one, b -> top"));
    }

    #[test]
    fn entailment_examples() {
        let pool = AtomPool::standard();
        let a = Formula::atom("a");
        assert!(entails(&a, &a, &pool, &quick()).is_valid());
        assert!(!entails(&parse("a * b").unwrap(), &a, &pool, &quick()).is_valid());
        assert!(equiv(&Formula::One, &Formula::Bot, &pool, &quick()).is_valid());
        assert!(!equiv(&Formula::One, &Formula::Top, &pool, &quick()).is_valid());
    }

    #[test]
    fn sampling_kicks_in() {
        let pool = AtomPool::standard();
        let cfg = ValidityConfig {
            sample_limit: 100,
            ..quick()
        };
        match valid_naive(&parse("a^ + a").unwrap(), &pool, &cfg) {
            Verdict::Valid { tested, exhaustive, .. } => {
                assert_eq!(tested, 54);
                assert!(exhaustive);
            }
            other => panic!("{other}"),
        }
        match valid_naive(&parse("(a * b) -o (b * a)").unwrap(), &pool, &cfg) {
            Verdict::Valid { tested, exhaustive, .. } => {
                assert_eq!(tested, 100);
                assert!(!exhaustive);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn iso_examples() {
        let pool = AtomPool::standard();
        for g in pool.games.iter().take(12) {
            for h in pool.games.iter().skip(20).take(6) {
                let a = atom_protocol(&g.tree).unwrap();
                let b = atom_protocol(&h.tree).unwrap();
                assert!(iso_check(&par_p(&a, &b), &dual(&tensor_p(&dual(&a), &dual(&b))), 1_000_000).unwrap());
            }
        }
        assert!(iso_check(&one_p(), &bot_p(), 10).unwrap());
    }

    #[test]
    fn x_chain_formulas() {
        assert_ne!(x1(X1Reading::Verbatim), x1(X1Reading::Corrected));
        assert_eq!(x1(X1Reading::Verbatim).atoms(), vec!["a1", "a2", "b1", "b2"]);
        assert_eq!(x2().connective_count(), 7);
        let unit = AtomEnv::unit_for(&three_bit());
        let p = interpret(&three_bit(), &unit, 2, BangMode::Consistent).unwrap();
        assert_eq!(materialize(&p, 1000).unwrap().depth(), 3);
    }

    #[test]
    fn bang_consistency_modes() {
        use crate::game::{atom_protocol, bang_p};
        let g = ExplicitTree::node(
            Turn::Client,
            [(
                "x",
                ExplicitTree::node(Turn::Server, [("r1", ExplicitTree::leaf(Turn::Terminated)), ("r2", ExplicitTree::leaf(Turn::Terminated))]),
            )],
        );
        assert!(has_choice_then_reply(&g));
        let a = atom_protocol(&g).unwrap();
        let consistent = scan_consistency(&bang_p(&a, 2, BangMode::Consistent), false, 10_000).unwrap();
        assert_eq!(consistent.violation, None);
        assert!(consistent.visited > 5);
        let stream = scan_consistency(&bang_p(&a, 2, BangMode::Stream), true, 10_000).unwrap();
        let witness = stream.violation.expect("stream mode lets copies diverge");
        let copies = copy_histories(&bang_p(&a, 2, BangMode::Stream), &witness).unwrap();
        assert_eq!(inconsistent_reply(&copies), Some((0, 1, 1)));
    }
}
