//! Behaviors, winners and strategies.
//!
//! The server wins a play if it never gets stuck (due to move with no legal
//! move). A terminated play and a stuck client both count as server wins, so
//! on a vacuous protocol both the server and the client (as server of the
//! dual) win.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;
use rustc_hash::FxHashMap;

use crate::game::{self, AtomGame, ExplicitTree, GameError, GameState, Move, Protocol, Role, Turn};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("history {history} is not a legal play")]
    NotAPlay { history: String },
    #[error("behavior exceeds budget of {max} histories")]
    BudgetExceeded { max: usize },
    #[error("strategy undefined at reached state {state}")]
    Undefined { state: String },
    #[error(transparent)]
    Game(#[from] GameError),
}

/// A set of histories of a protocol (the server's behavior when it passes
/// [`is_behavior`]).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Behavior {
    pub histories: BTreeSet<Vec<Move>>,
}

impl Behavior {
    pub fn new(histories: impl IntoIterator<Item = Vec<Move>>) -> Self {
        Behavior {
            histories: histories.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.histories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.histories.is_empty()
    }

    pub fn contains(&self, h: &[Move]) -> bool {
        self.histories.contains(h)
    }
}

fn render_history(h: &[Move]) -> String {
    let parts: Vec<String> = h.iter().map(Move::to_string).collect();
    format!("[{}]", parts.join(" "))
}

/// Checks the three behavior conditions: the empty history is present,
/// client-turn members contain every one-move extension, and server-turn
/// members contain exactly one (`relaxed`: at least one).
pub fn is_behavior(p: &Protocol, b: &Behavior, relaxed: bool) -> Result<bool, StrategyError> {
    let mut states = Vec::with_capacity(b.len());
    for h in &b.histories {
        let s = p.replay(h).map_err(|_| StrategyError::NotAPlay {
            history: render_history(h),
        })?;
        states.push((h, s));
    }
    if !b.contains(&[]) {
        return Ok(false);
    }
    let mut ext = Vec::new();
    for (h, s) in &states {
        let present = p
            .legal_moves(s)
            .into_iter()
            .filter(|m| {
                ext.clear();
                ext.extend(h.iter().cloned());
                ext.push(m.clone());
                b.contains(&ext)
            })
            .count();
        let ok = match p.turn(s) {
            Turn::Client => present == p.legal_moves(s).len(),
            Turn::Server if relaxed => present >= 1,
            Turn::Server => present == 1,
            Turn::Terminated => true,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Histories in `b` where the server is due with no legal move.
pub fn stuck_server_leaves(p: &Protocol, b: &Behavior) -> Result<Vec<Vec<Move>>, StrategyError> {
    let mut out = Vec::new();
    for h in &b.histories {
        let s = p.replay(h).map_err(|_| StrategyError::NotAPlay {
            history: render_history(h),
        })?;
        if p.turn(&s) == Turn::Server && p.legal_moves(&s).is_empty() {
            out.push(h.clone());
        }
    }
    Ok(out)
}

/// Memoized backward induction over states.
pub struct Solver<'a> {
    protocol: &'a Protocol,
    memo: FxHashMap<GameState, bool>,
}

impl<'a> Solver<'a> {
    pub fn new(protocol: &'a Protocol) -> Self {
        Solver {
            protocol,
            memo: FxHashMap::default(),
        }
    }

    /// Whether the server can avoid getting stuck from `state` on.
    pub fn wins(&mut self, state: &GameState) -> bool {
        let p = self.protocol;
        let turn = p.turn(state);
        if turn == Turn::Terminated {
            return true;
        }
        if let Some(&v) = self.memo.get(state) {
            return v;
        }
        let v = match turn {
            Turn::Terminated => true,
            Turn::Client => !p.any_successor(state, &mut |c| !self.wins(&c)),
            Turn::Server => p.any_successor(state, &mut |c| self.wins(&c)),
        };
        self.memo.insert(state.clone(), v);
        v
    }

    /// First legal move (in legal-move order) leading to a server win.
    pub fn winning_move(&mut self, state: &GameState) -> Option<Move> {
        let p = self.protocol;
        p.legal_moves(state)
            .into_iter()
            .find(|m| self.wins(&p.next(state, m).expect("legal move applies")))
    }

    pub fn states_solved(&self) -> usize {
        self.memo.len()
    }
}

pub fn server_wins(p: &Protocol) -> bool {
    Solver::new(p).wins(&p.initial())
}

/// Unmemoized exhaustive recursion over the play tree, kept independent of
/// [`Solver`] as a cross-check.
pub mod oracle {
    use crate::game::{GameState, Protocol, Turn};

    pub fn naive_server_wins(p: &Protocol) -> bool {
        fn go(p: &Protocol, s: &GameState) -> bool {
            let children: Vec<GameState> = p
                .legal_moves(s)
                .iter()
                .map(|m| p.next(s, m).expect("legal move applies"))
                .collect();
            match p.turn(s) {
                Turn::Terminated => true,
                Turn::Client => children.iter().all(|c| go(p, c)),
                Turn::Server => children.iter().any(|c| go(p, c)),
            }
        }
        go(p, &p.initial())
    }
}

/// A deterministic server strategy keyed by state.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Strategy {
    pub choices: BTreeMap<GameState, Move>,
}

impl Strategy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, state: GameState, mv: Move) {
        self.choices.insert(state, mv);
    }

    pub fn move_at(&self, state: &GameState) -> Option<&Move> {
        self.choices.get(state)
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    /// `(state encoding, rendered move)` pairs in canonical state order.
    pub fn dump(&self) -> Vec<(String, String)> {
        self.choices.iter().map(|(s, m)| (s.to_string(), m.to_string())).collect()
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, m) in self.dump() {
            writeln!(f, "{s}\t{m}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub winner: Role,
    /// The winner's strategy, phrased as a server strategy: of `p` when the
    /// server wins, of `dual(p)` (the client's spoiling strategy) otherwise.
    pub strategy: Strategy,
}

pub fn solve(p: &Protocol) -> Solution {
    let mut solver = Solver::new(p);
    if solver.wins(&p.initial()) {
        return Solution {
            winner: Role::Server,
            strategy: synthesize(p, &mut solver),
        };
    }
    let d = game::dual(p);
    let mut solver = Solver::new(&d);
    assert!(solver.wins(&d.initial()), "finite protocols are determined");
    Solution {
        winner: Role::Client,
        strategy: synthesize(&d, &mut solver),
    }
}

/// Winning strategy on every state reachable from the (winning) initial
/// state under all client moves.
fn synthesize(p: &Protocol, solver: &mut Solver<'_>) -> Strategy {
    let mut strategy = Strategy::new();
    let mut seen = HashSet::new();
    let mut stack = vec![p.initial()];
    while let Some(s) = stack.pop() {
        if !seen.insert(s.clone()) {
            continue;
        }
        match p.turn(&s) {
            Turn::Terminated => {}
            Turn::Client => {
                for m in p.legal_moves(&s) {
                    stack.push(p.next(&s, &m).expect("legal move applies"));
                }
            }
            Turn::Server => {
                if let Some(m) = solver.winning_move(&s) {
                    stack.push(p.next(&s, &m).expect("legal move applies"));
                    strategy.insert(s, m);
                }
            }
        }
    }
    strategy
}

/// All histories reachable under every client move and the strategy's
/// server moves. A server-due history with no legal move is kept as a leaf.
pub fn extract_behavior(p: &Protocol, s: &Strategy, max_nodes: usize) -> Result<Behavior, StrategyError> {
    let mut histories = BTreeSet::new();
    let mut stack = vec![(Vec::new(), p.initial())];
    while let Some((h, state)) = stack.pop() {
        let moves = match p.turn(&state) {
            Turn::Terminated => Vec::new(),
            Turn::Client => p.legal_moves(&state),
            Turn::Server => {
                let legal = p.legal_moves(&state);
                if legal.is_empty() {
                    Vec::new()
                } else {
                    match s.move_at(&state) {
                        Some(m) if legal.contains(m) => vec![m.clone()],
                        _ => {
                            return Err(StrategyError::Undefined {
                                state: state.to_string(),
                            })
                        }
                    }
                }
            }
        };
        for m in moves {
            let next = p.next(&state, &m).expect("legal move applies");
            let mut h2 = h.clone();
            h2.push(m);
            stack.push((h2, next));
        }
        histories.insert(h);
        if histories.len() > max_nodes {
            return Err(StrategyError::BudgetExceeded { max: max_nodes });
        }
    }
    Ok(Behavior { histories })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlayStatus {
    Ongoing,
    Terminated,
    Stuck(Role),
}

impl fmt::Display for PlayStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlayStatus::Ongoing => f.write_str("ongoing"),
            PlayStatus::Terminated => f.write_str("terminated"),
            PlayStatus::Stuck(r) => write!(f, "stuck({r})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub state: GameState,
    pub turn: Turn,
    pub mv: Move,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlayTrace {
    pub steps: Vec<TraceStep>,
    pub status: PlayStatus,
}

impl fmt::Display for PlayTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, step) in self.steps.iter().enumerate() {
            writeln!(f, "{:>3} {:<6} {:<20} {}", i + 1, step.turn, step.mv, step.state)?;
        }
        writeln!(f, "    {}", self.status)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefereeError {
    #[error("illegal move `{0}`")]
    Illegal(String),
    #[error("play is already over ({0})")]
    Finished(PlayStatus),
}

/// A single play in progress. Rejected moves leave the session untouched.
#[derive(Clone, Debug)]
pub struct Referee {
    protocol: Protocol,
    state: GameState,
    steps: Vec<TraceStep>,
}

impl Referee {
    pub fn new(protocol: Protocol) -> Self {
        let state = protocol.initial();
        Referee {
            protocol,
            state,
            steps: Vec::new(),
        }
    }

    pub fn protocol(&self) -> &Protocol {
        &self.protocol
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn turn(&self) -> Turn {
        self.protocol.turn(&self.state)
    }

    pub fn legal_moves(&self) -> Vec<Move> {
        match self.turn() {
            Turn::Terminated => Vec::new(),
            _ => self.protocol.legal_moves(&self.state),
        }
    }

    pub fn status(&self) -> PlayStatus {
        match self.turn() {
            Turn::Terminated => PlayStatus::Terminated,
            t if self.protocol.legal_moves(&self.state).is_empty() => PlayStatus::Stuck(match t {
                Turn::Client => Role::Client,
                _ => Role::Server,
            }),
            _ => PlayStatus::Ongoing,
        }
    }

    pub fn apply_move(&mut self, mv: &Move) -> Result<PlayStatus, RefereeError> {
        let status = self.status();
        if status != PlayStatus::Ongoing {
            return Err(RefereeError::Finished(status));
        }
        if !self.protocol.legal_moves(&self.state).contains(mv) {
            return Err(RefereeError::Illegal(mv.to_string()));
        }
        let next = self
            .protocol
            .next(&self.state, mv)
            .ok_or_else(|| RefereeError::Illegal(mv.to_string()))?;
        let turn = self.turn();
        let prev = std::mem::replace(&mut self.state, next);
        self.steps.push(TraceStep {
            state: prev,
            turn,
            mv: mv.clone(),
        });
        Ok(self.status())
    }

    /// Finds a legal move by its rendering.
    pub fn find_move(&self, rendered: &str) -> Option<Move> {
        self.legal_moves().into_iter().find(|m| m.to_string() == rendered)
    }

    pub fn history(&self) -> Vec<Move> {
        self.steps.iter().map(|s| s.mv.clone()).collect()
    }

    pub fn trace(&self) -> PlayTrace {
        PlayTrace {
            steps: self.steps.clone(),
            status: self.status(),
        }
    }
}

/// `a^ @ a` over the tree `g`, with the atom named `a`.
pub fn copycat_protocol(g: &ExplicitTree) -> Result<Protocol, GameError> {
    let arena = std::sync::Arc::new(AtomGame::new(g)?);
    let a = game::named_atom("a", arena);
    Ok(game::par_p(&game::dual(&a), &a))
}

/// The copy-cat strategy for [`copycat_protocol`]: at each server turn,
/// replay in the lagging component the next move the client made in the
/// other one.
pub fn copycat(g: &ExplicitTree) -> Result<Strategy, GameError> {
    let arena = AtomGame::new(g)?;
    let p = copycat_protocol(g)?;
    let mut strategy = Strategy::new();
    let mut seen = HashSet::new();
    let mut stack = vec![p.initial()];
    while let Some(s) = stack.pop() {
        if !seen.insert(s.clone()) {
            continue;
        }
        let moves = match p.turn(&s) {
            Turn::Terminated => Vec::new(),
            Turn::Client => p.legal_moves(&s),
            Turn::Server => match copy_move(&arena, &s) {
                Some(m) => {
                    strategy.insert(s.clone(), m.clone());
                    vec![m]
                }
                None => Vec::new(),
            },
        };
        for m in moves {
            stack.push(p.next(&s, &m).expect("legal move applies"));
        }
    }
    Ok(strategy)
}

fn copy_move(arena: &AtomGame, s: &GameState) -> Option<Move> {
    use crate::game::Side;
    let GameState::Pair(pair) = s else { return None };
    let (GameState::Node(x), GameState::Node(y)) = (&pair.0, &pair.1) else {
        return None;
    };
    let (side, label) = if arena.is_strict_ancestor(*x, *y) {
        (Side::L, arena.step_toward(*x, *y)?)
    } else if arena.is_strict_ancestor(*y, *x) {
        (Side::R, arena.step_toward(*y, *x)?)
    } else {
        return None;
    };
    Some(Move::InComponent(side, Box::new(Move::Atom(label))))
}

/// Experimental uniformity check: along every play consistent with `s`,
/// whenever the strategy moves inside an atom occurrence at local history
/// `h`, some occurrence of the same atom with opposite polarity must already
/// have a local history strictly extending `h` (so the move it is about to
/// make was first made there by the client).
pub fn lorenzen_uniform(p: &Protocol, s: &Strategy) -> Result<bool, StrategyError> {
    if !p.is_interpreted() {
        return Err(GameError::NotInterpreted.into());
    }
    let mut seen = HashSet::new();
    let mut stack = vec![p.initial()];
    while let Some(state) = stack.pop() {
        if !seen.insert(state.clone()) {
            continue;
        }
        let moves = match p.turn(&state) {
            Turn::Terminated => Vec::new(),
            Turn::Client => p.legal_moves(&state),
            Turn::Server => match s.move_at(&state) {
                None => Vec::new(),
                Some(m) => {
                    if let Some(occ) = p.locate_move(&state, m)? {
                        let here = occ.game.history(occ.position);
                        let informed = p.atom_occurrences(&state)?.into_iter().any(|o| {
                            o.name == occ.name && o.positive != occ.positive && {
                                let there = o.game.history(o.position);
                                there.len() > here.len() && there.starts_with(&here)
                            }
                        });
                        if !informed {
                            return Ok(false);
                        }
                    }
                    vec![m.clone()]
                }
            },
        };
        for m in moves {
            if let Some(next) = p.next(&state, &m) {
                stack.push(next);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::game::{atom_protocol, interpret, one_p, plus_p, top_p, with_p, zero_p, AtomEnv, BangMode, Side};
    use std::sync::Arc;

    fn t() -> ExplicitTree {
        ExplicitTree::leaf(Turn::Terminated)
    }

    fn choice(side: Side) -> Move {
        Move::Choice(side)
    }

    #[test]
    fn behavior_conditions() {
        assert!(is_behavior(&top_p(), &Behavior::new([vec![]]), false).unwrap());
        assert!(!is_behavior(&zero_p(), &Behavior::new([vec![]]), false).unwrap());
        let p = plus_p(&one_p(), &one_p());
        assert!(is_behavior(&p, &Behavior::new([vec![], vec![choice(Side::L)]]), false).unwrap());
        let both = Behavior::new([vec![], vec![choice(Side::L)], vec![choice(Side::R)]]);
        assert!(!is_behavior(&p, &both, false).unwrap());
        assert!(is_behavior(&p, &both, true).unwrap());
        assert!(!is_behavior(&p, &Behavior::new([vec![choice(Side::L)]]), false).unwrap());
    }

    #[test]
    fn behavior_rejects_illegal_histories() {
        let bogus = Behavior::new([vec![], vec![Move::Count(3)]]);
        assert!(matches!(
            is_behavior(&one_p(), &bogus, false),
            Err(StrategyError::NotAPlay { .. })
        ));
    }

    #[test]
    fn constants_winners() {
        assert!(!server_wins(&zero_p()));
        assert!(server_wins(&one_p()));
        assert!(server_wins(&top_p()));
        assert!(server_wins(&crate::game::bot_p()));
    }

    #[test]
    fn solve_picks_only_winning_branch() {
        let p = plus_p(&zero_p(), &one_p());
        let sol = solve(&p);
        assert_eq!(sol.winner, Role::Server);
        assert_eq!(sol.strategy.move_at(&p.initial()), Some(&choice(Side::R)));

        let z = solve(&zero_p());
        assert_eq!(z.winner, Role::Client);
        assert!(z.strategy.is_empty());
    }

    #[test]
    fn extract_behavior_examples() {
        assert_eq!(
            extract_behavior(&top_p(), &Strategy::new(), 10).unwrap(),
            Behavior::new([vec![]])
        );
        let p = plus_p(&one_p(), &one_p());
        let mut s = Strategy::new();
        s.insert(p.initial(), choice(Side::L));
        assert_eq!(
            extract_behavior(&p, &s, 10).unwrap(),
            Behavior::new([vec![], vec![choice(Side::L)]])
        );
        assert!(matches!(
            extract_behavior(&p, &Strategy::new(), 10),
            Err(StrategyError::Undefined { .. })
        ));
        assert!(matches!(
            extract_behavior(&with_p(&one_p(), &one_p()), &Strategy::new(), 2),
            Err(StrategyError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn referee_sessions() {
        let mut r = Referee::new(with_p(&one_p(), &one_p()));
        assert_eq!(r.apply_move(&choice(Side::L)), Ok(PlayStatus::Terminated));
        assert!(matches!(r.apply_move(&choice(Side::L)), Err(RefereeError::Finished(_))));

        let r = Referee::new(zero_p());
        assert_eq!(r.status(), PlayStatus::Stuck(Role::Server));

        let mut r = Referee::new(plus_p(&one_p(), &one_p()));
        let before = r.state().clone();
        assert!(matches!(r.apply_move(&Move::Count(1)), Err(RefereeError::Illegal(_))));
        assert_eq!(r.state(), &before);
        assert!(r.history().is_empty());
    }

    #[test]
    fn referee_three_bit_example() {
        let f = parse("((a&b)+(c&d)) & ((e&f)+(g&h))").unwrap();
        let p = interpret(&f, &AtomEnv::unit_for(&f), 2, BangMode::Consistent).unwrap();
        let mut r = Referee::new(p);
        let mut turns = Vec::new();
        while r.status() == PlayStatus::Ongoing {
            turns.push(r.turn());
            let m = r.legal_moves()[1].clone();
            r.apply_move(&m).unwrap();
        }
        assert_eq!(turns, [Turn::Client, Turn::Server, Turn::Client]);
        assert_eq!(r.status(), PlayStatus::Terminated);
        assert_eq!(r.trace().steps.len(), 3);
        assert_eq!(r.find_move("x"), None);
    }

    #[test]
    fn copycat_echoes_client_move() {
        let g = ExplicitTree::node(Turn::Server, [("e1", t()), ("e2", t())]);
        let p = copycat_protocol(&g).unwrap();
        let s = copycat(&g).unwrap();
        let e1 = |side| Move::InComponent(side, Box::new(Move::Atom(Arc::from("e1"))));
        let after = p.play(&p.initial(), &e1(Side::L)).unwrap();
        assert_eq!(p.turn(&after), Turn::Server);
        assert_eq!(s.move_at(&after), Some(&e1(Side::R)));
        let b = extract_behavior(&p, &s, 1000).unwrap();
        assert!(is_behavior(&p, &b, false).unwrap());
        assert!(stuck_server_leaves(&p, &b).unwrap().is_empty());
    }

    #[test]
    fn copycat_on_terminated_leaf() {
        let p = copycat_protocol(&t()).unwrap();
        assert_eq!(p.turn(&p.initial()), Turn::Terminated);
        assert!(copycat(&t()).unwrap().is_empty());
    }

    #[test]
    fn lorenzen_examples() {
        let g = ExplicitTree::node(
            Turn::Client,
            [("x", ExplicitTree::node(Turn::Server, [("r1", t()), ("r2", t())]))],
        );
        let mut env = AtomEnv::new();
        env.insert("a", g.clone());
        let par = interpret(&parse("a^ @ a").unwrap(), &env, 2, BangMode::Consistent).unwrap();
        assert!(lorenzen_uniform(&par, &copycat(&g).unwrap()).unwrap());

        // the server loses a^ here, so it must pick a and move first inside it
        let witness = ExplicitTree::node(Turn::Server, [("e", ExplicitTree::leaf(Turn::Client))]);
        let mut env = AtomEnv::new();
        env.insert("a", witness);
        let em = interpret(&parse("a^ + a").unwrap(), &env, 2, BangMode::Consistent).unwrap();
        let sol = solve(&em);
        assert_eq!(sol.winner, Role::Server);
        assert!(!lorenzen_uniform(&em, &sol.strategy).unwrap());

        let consts = interpret(&parse("1 + 0").unwrap(), &env, 2, BangMode::Consistent).unwrap();
        assert!(lorenzen_uniform(&consts, &solve(&consts).strategy).unwrap());

        let raw = atom_protocol(&g).unwrap();
        assert!(matches!(
            lorenzen_uniform(&raw, &Strategy::new()),
            Err(StrategyError::Game(GameError::NotInterpreted))
        ));
    }

    #[test]
    fn strategy_dump_is_sorted_pairs() {
        let p = plus_p(&zero_p(), &one_p());
        let dump = solve(&p).strategy.dump();
        assert_eq!(dump, vec![("?".to_owned(), "R".to_owned())]);
    }
}
