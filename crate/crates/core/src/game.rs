//! Protocols (games) built connective by connective.
//!
//! A [`Protocol`] is a finite, lazily explored transition system: an initial
//! [`GameState`], a turn function, legal moves per state and a successor
//! function. The set of move sequences legal from the initial state is the
//! history set of the protocol; `turn` replayed along a history gives its
//! labelling into client / server / terminated.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Formula;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Turn {
    #[serde(rename = "c")]
    Client,
    #[serde(rename = "s")]
    Server,
    #[serde(rename = "t")]
    Terminated,
}

impl Turn {
    /// Client and server exchange roles; terminated is fixed.
    pub fn swap(self) -> Turn {
        match self {
            Turn::Client => Turn::Server,
            Turn::Server => Turn::Client,
            Turn::Terminated => Turn::Terminated,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Turn::Client => 'c',
            Turn::Server => 's',
            Turn::Terminated => 't',
        }
    }
}

impl fmt::Display for Turn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Turn::Client => "client",
            Turn::Server => "server",
            Turn::Terminated => "terminated",
        })
    }
}

/// A protocol participant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Client,
    Server,
}

impl Role {
    pub fn opponent(self) -> Role {
        match self {
            Role::Client => Role::Server,
            Role::Server => Role::Client,
        }
    }

    pub fn turn(self) -> Turn {
        match self {
            Role::Client => Turn::Client,
            Role::Server => Turn::Server,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Client => "client",
            Role::Server => "server",
        })
    }
}

impl std::str::FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "client" | "c" => Ok(Role::Client),
            "server" | "s" => Ok(Role::Server),
            other => Err(format!("unknown side `{other}` (expected client or server)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    L,
    R,
}

impl Side {
    fn index(self) -> u32 {
        match self {
            Side::L => 0,
            Side::R => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BangMode {
    /// Equal client prefixes across copies force equal server replies.
    #[default]
    Consistent,
    /// Every copy is independent.
    Stream,
}

impl std::str::FromStr for BangMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "consistent" => Ok(BangMode::Consistent),
            "stream" => Ok(BangMode::Stream),
            other => Err(format!("unknown bang mode `{other}` (expected consistent or stream)")),
        }
    }
}

/// Order in which a server due in several tensor components is scheduled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Serialization {
    #[default]
    LeftmostFirst,
    RightmostFirst,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    Choice(Side),
    Count(u32),
    InComponent(Side, Box<Move>),
    InCopy(u32, Box<Move>),
    Atom(Arc<str>),
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Choice(side) => write!(f, "{side:?}"),
            Move::Count(n) => write!(f, "#{n}"),
            Move::InComponent(side, inner) => write!(f, "{side:?}:{inner}"),
            Move::InCopy(i, inner) => write!(f, "{i}:{inner}"),
            Move::Atom(label) => f.write_str(label),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("malformed tree at {path}: terminated node has moves")]
    MalformedTree { path: String },
    #[error("atom `{0}` has no interpretation")]
    UnboundAtom(String),
    #[error("node budget exceeded after {count} nodes")]
    BudgetExceeded { count: usize },
    #[error("illegal move `{mv}`")]
    IllegalMove { mv: String },
    #[error("protocol was not built by interpret (unnamed atom)")]
    NotInterpreted,
    #[error("invalid tree document: {0}")]
    Format(String),
}

/// An explicitly given game tree; also the export format of [`materialize`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplicitTree {
    pub turn: Turn,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub moves: BTreeMap<String, ExplicitTree>,
}

impl ExplicitTree {
    pub fn leaf(turn: Turn) -> Self {
        ExplicitTree {
            turn,
            moves: BTreeMap::new(),
        }
    }

    pub fn node<S: Into<String>>(turn: Turn, moves: impl IntoIterator<Item = (S, ExplicitTree)>) -> Self {
        ExplicitTree {
            turn,
            moves: moves.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    /// Terminated nodes must be childless.
    pub fn validate(&self) -> Result<(), GameError> {
        fn go(t: &ExplicitTree, path: &mut Vec<String>) -> Result<(), GameError> {
            if t.turn == Turn::Terminated && !t.moves.is_empty() {
                return Err(GameError::MalformedTree {
                    path: if path.is_empty() { "root".into() } else { path.join("/") },
                });
            }
            for (label, child) in &t.moves {
                path.push(label.clone());
                go(child, path)?;
                path.pop();
            }
            Ok(())
        }
        go(self, &mut Vec::new())
    }

    /// Length of the longest root-to-node path.
    pub fn depth(&self) -> usize {
        self.moves.values().map(|c| 1 + c.depth()).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.moves.values().map(ExplicitTree::size).sum::<usize>()
    }

    /// The role-swapped tree.
    pub fn dual(&self) -> ExplicitTree {
        ExplicitTree {
            turn: self.turn.swap(),
            moves: self.moves.iter().map(|(k, v)| (k.clone(), v.dual())).collect(),
        }
    }

    pub fn to_dot(&self) -> String {
        fn go(t: &ExplicitTree, id: &mut usize, out: &mut String) -> usize {
            let me = *id;
            *id += 1;
            out.push_str(&format!("  n{me} [label=\"{}\"];\n", t.turn.letter()));
            for (label, child) in &t.moves {
                let c = go(child, id, out);
                out.push_str(&format!("  n{me} -> n{c} [label=\"{}\"];\n", label.replace('"', "\\\"")));
            }
            me
        }
        let mut out = String::from("digraph protocol {\n");
        go(self, &mut 0, &mut out);
        out.push_str("}\n");
        out
    }
}

/// Assignment of explicit game trees to atom names.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomEnv {
    pub atoms: BTreeMap<String, ExplicitTree>,
}

impl AtomEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, tree: ExplicitTree) -> &mut Self {
        self.atoms.insert(name.into(), tree);
        self
    }

    pub fn get(&self, name: &str) -> Option<&ExplicitTree> {
        self.atoms.get(name)
    }

    /// Every atom of `f` bound to the terminated leaf.
    pub fn unit_for(f: &Formula) -> Self {
        AtomEnv {
            atoms: f.atoms().into_iter().map(|a| (a, ExplicitTree::leaf(Turn::Terminated))).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), GameError> {
        self.atoms.values().try_for_each(ExplicitTree::validate)
    }

    pub fn from_json(text: &str) -> Result<Self, GameError> {
        let env: AtomEnv = serde_json::from_str(text).map_err(|e| GameError::Format(e.to_string()))?;
        env.validate()?;
        Ok(env)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serialization is infallible")
    }
}

impl fmt::Display for AtomEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serde_json::to_string(self).map_err(|_| fmt::Error)?)
    }
}

#[derive(Debug)]
struct AtomNode {
    turn: Turn,
    children: Vec<(Arc<str>, u32)>,
    parent: Option<u32>,
}

/// An explicit tree flattened into an indexed arena; states of atom protocols
/// are node indices.
#[derive(Debug)]
pub struct AtomGame {
    nodes: Vec<AtomNode>,
    depth: usize,
}

impl AtomGame {
    pub fn new(tree: &ExplicitTree) -> Result<Self, GameError> {
        tree.validate()?;
        let mut nodes = Vec::new();
        fn push(t: &ExplicitTree, parent: Option<u32>, nodes: &mut Vec<AtomNode>) -> u32 {
            let me = nodes.len() as u32;
            nodes.push(AtomNode {
                turn: t.turn,
                children: Vec::with_capacity(t.moves.len()),
                parent,
            });
            for (label, child) in &t.moves {
                let c = push(child, Some(me), nodes);
                nodes[me as usize].children.push((Arc::from(label.as_str()), c));
            }
            me
        }
        push(tree, None, &mut nodes);
        Ok(AtomGame {
            nodes,
            depth: tree.depth(),
        })
    }

    pub fn turn(&self, node: u32) -> Turn {
        self.nodes[node as usize].turn
    }

    /// True iff `ancestor` lies strictly above `node`.
    pub fn is_strict_ancestor(&self, ancestor: u32, node: u32) -> bool {
        let mut cur = self.nodes[node as usize].parent;
        while let Some(p) = cur {
            if p == ancestor {
                return true;
            }
            cur = self.nodes[p as usize].parent;
        }
        false
    }

    /// Label of the first move on the path from `from` down to `to`.
    pub fn step_toward(&self, from: u32, to: u32) -> Option<Arc<str>> {
        let mut cur = to;
        loop {
            let parent = self.nodes[cur as usize].parent?;
            if parent == from {
                let (label, _) = self.nodes[from as usize].children.iter().find(|(_, c)| *c == cur)?;
                return Some(label.clone());
            }
            cur = parent;
        }
    }

    /// Labels along the path from the root to `node`.
    pub fn history(&self, node: u32) -> Vec<Arc<str>> {
        let mut out = Vec::new();
        let mut cur = node;
        while let Some(parent) = self.nodes[cur as usize].parent {
            let (label, _) = self.nodes[parent as usize]
                .children
                .iter()
                .find(|(_, c)| *c == cur)
                .expect("arena parent links are consistent");
            out.push(label.clone());
            cur = parent;
        }
        out.reverse();
        out
    }
}

/// Position inside a protocol. Equal states behave identically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GameState {
    Leaf,
    Node(u32),
    Choice(Option<Arc<(Side, GameState)>>),
    Pair(Arc<(GameState, GameState)>),
    Bang(Option<Arc<Copies>>),
}

/// The announced copies of a `!` protocol. Local histories are only kept in
/// consistent mode, tagged with whether each move was a server move.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Copies {
    pub states: Vec<GameState>,
    pub histories: Vec<Vec<(Move, bool)>>,
}

impl fmt::Display for GameState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GameState::Leaf => f.write_str("."),
            GameState::Node(n) => write!(f, "n{n}"),
            GameState::Choice(None) => f.write_str("?"),
            GameState::Choice(Some(c)) => write!(f, "{:?}>{}", c.0, c.1),
            GameState::Pair(p) => write!(f, "({},{})", p.0, p.1),
            GameState::Bang(None) => f.write_str("!?"),
            GameState::Bang(Some(c)) => {
                f.write_str("![")?;
                for (i, s) in c.states.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{s}")?;
                    if let Some(h) = c.histories.get(i) {
                        f.write_str("|")?;
                        for (j, (m, _)) in h.iter().enumerate() {
                            if j > 0 {
                                f.write_str(",")?;
                            }
                            write!(f, "{m}")?;
                        }
                    }
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Debug)]
enum Node {
    Const(Turn),
    Atom {
        game: Arc<AtomGame>,
        name: Option<Arc<str>>,
    },
    Dual(Protocol),
    Choice {
        chooser: Role,
        left: Protocol,
        right: Protocol,
    },
    Tensor {
        left: Protocol,
        right: Protocol,
        order: Serialization,
    },
    Bang {
        inner: Protocol,
        cap: u32,
        mode: BangMode,
    },
}

/// An immutable, cheaply clonable protocol.
#[derive(Clone, Debug)]
pub struct Protocol(Arc<Node>);

impl Protocol {
    fn from_node(node: Node) -> Self {
        Protocol(Arc::new(node))
    }

    pub fn initial(&self) -> GameState {
        match &*self.0 {
            Node::Const(_) => GameState::Leaf,
            Node::Atom { .. } => GameState::Node(0),
            Node::Dual(p) => p.initial(),
            Node::Choice { .. } => GameState::Choice(None),
            Node::Tensor { left, right, .. } => GameState::Pair(Arc::new((left.initial(), right.initial()))),
            Node::Bang { .. } => GameState::Bang(None),
        }
    }

    pub fn turn(&self, state: &GameState) -> Turn {
        match (&*self.0, state) {
            (Node::Const(t), _) => *t,
            (Node::Atom { game, .. }, GameState::Node(n)) => game.turn(*n),
            (Node::Dual(p), s) => p.turn(s).swap(),
            (Node::Choice { chooser, .. }, GameState::Choice(None)) => chooser.turn(),
            (Node::Choice { left, right, .. }, GameState::Choice(Some(c))) => match c.0 {
                Side::L => left.turn(&c.1),
                Side::R => right.turn(&c.1),
            },
            (Node::Tensor { left, right, .. }, GameState::Pair(p)) => {
                combined_turn([left.turn(&p.0), right.turn(&p.1)])
            }
            (Node::Bang { .. }, GameState::Bang(None)) => Turn::Client,
            (Node::Bang { inner, .. }, GameState::Bang(Some(c))) => {
                combined_turn(c.states.iter().map(|s| inner.turn(s)))
            }
            _ => panic!("state {state} does not belong to this protocol"),
        }
    }

    pub fn legal_moves(&self, state: &GameState) -> Vec<Move> {
        match (&*self.0, state) {
            (Node::Const(_), _) => Vec::new(),
            (Node::Atom { game, .. }, GameState::Node(n)) => game.nodes[*n as usize]
                .children
                .iter()
                .map(|(label, _)| Move::Atom(label.clone()))
                .collect(),
            (Node::Dual(p), s) => p.legal_moves(s),
            (Node::Choice { .. }, GameState::Choice(None)) => vec![Move::Choice(Side::L), Move::Choice(Side::R)],
            (Node::Choice { left, right, .. }, GameState::Choice(Some(c))) => match c.0 {
                Side::L => left.legal_moves(&c.1),
                Side::R => right.legal_moves(&c.1),
            },
            (Node::Tensor { left, right, order }, GameState::Pair(p)) => {
                let turns = [left.turn(&p.0), right.turn(&p.1)];
                let comps = [(Side::L, left, &p.0), (Side::R, right, &p.1)];
                match combined_turn(turns) {
                    Turn::Terminated => Vec::new(),
                    Turn::Server => {
                        let due = |i: &usize| turns[*i] == Turn::Server;
                        let pick = match order {
                            Serialization::LeftmostFirst => (0..2).find(due),
                            Serialization::RightmostFirst => (0..2).rev().find(due),
                        };
                        let (side, proto, s) = comps[pick.expect("server turn has a server-due component")];
                        proto
                            .legal_moves(s)
                            .into_iter()
                            .map(|m| Move::InComponent(side, Box::new(m)))
                            .collect()
                    }
                    Turn::Client => comps
                        .iter()
                        .zip(turns)
                        .filter(|(_, t)| *t == Turn::Client)
                        .flat_map(|((side, proto, s), _)| {
                            proto
                                .legal_moves(s)
                                .into_iter()
                                .map(move |m| Move::InComponent(*side, Box::new(m)))
                        })
                        .collect(),
                }
            }
            (Node::Bang { cap, .. }, GameState::Bang(None)) => (0..=*cap).map(Move::Count).collect(),
            (Node::Bang { inner, mode, .. }, GameState::Bang(Some(c))) => {
                let turns: Vec<Turn> = c.states.iter().map(|s| inner.turn(s)).collect();
                match combined_turn(turns.iter().copied()) {
                    Turn::Terminated => Vec::new(),
                    Turn::Server => {
                        let i = turns.iter().position(|t| *t == Turn::Server).expect("server-due copy");
                        let moves = inner.legal_moves(&c.states[i]);
                        moves
                            .into_iter()
                            .filter(|m| *mode == BangMode::Stream || consistent_reply(c, i, m))
                            .map(|m| Move::InCopy(i as u32, Box::new(m)))
                            .collect()
                    }
                    Turn::Client => turns
                        .iter()
                        .enumerate()
                        .filter(|(_, t)| **t == Turn::Client)
                        .flat_map(|(i, _)| {
                            inner
                                .legal_moves(&c.states[i])
                                .into_iter()
                                .map(move |m| Move::InCopy(i as u32, Box::new(m)))
                        })
                        .collect(),
                }
            }
            _ => panic!("state {state} does not belong to this protocol"),
        }
    }

    /// Feeds successor states to `f` in legal-move order until it returns
    /// `true`; reports whether it did.
    pub fn any_successor(&self, state: &GameState, f: &mut dyn FnMut(GameState) -> bool) -> bool {
        match (&*self.0, state) {
            (Node::Const(_), _) => false,
            (Node::Atom { game, .. }, GameState::Node(n)) => {
                game.nodes[*n as usize].children.iter().any(|(_, c)| f(GameState::Node(*c)))
            }
            (Node::Dual(p), s) => p.any_successor(s, f),
            (Node::Choice { left, right, .. }, GameState::Choice(None)) => {
                f(GameState::Choice(Some(Arc::new((Side::L, left.initial())))))
                    || f(GameState::Choice(Some(Arc::new((Side::R, right.initial())))))
            }
            (Node::Choice { left, right, .. }, GameState::Choice(Some(c))) => {
                let proto = if c.0 == Side::L { left } else { right };
                proto.any_successor(&c.1, &mut |s| f(GameState::Choice(Some(Arc::new((c.0, s))))))
            }
            (Node::Tensor { left, right, order }, GameState::Pair(p)) => {
                let turns = [left.turn(&p.0), right.turn(&p.1)];
                let in_left = |f: &mut dyn FnMut(GameState) -> bool| {
                    left.any_successor(&p.0, &mut |a| f(GameState::Pair(Arc::new((a, p.1.clone())))))
                };
                let in_right = |f: &mut dyn FnMut(GameState) -> bool| {
                    right.any_successor(&p.1, &mut |b| f(GameState::Pair(Arc::new((p.0.clone(), b)))))
                };
                match combined_turn(turns) {
                    Turn::Terminated => false,
                    Turn::Server => {
                        let left_first = match order {
                            Serialization::LeftmostFirst => turns[0] == Turn::Server,
                            Serialization::RightmostFirst => turns[1] != Turn::Server,
                        };
                        if left_first {
                            in_left(f)
                        } else {
                            in_right(f)
                        }
                    }
                    Turn::Client => {
                        (turns[0] == Turn::Client && in_left(f)) || (turns[1] == Turn::Client && in_right(f))
                    }
                }
            }
            _ => self
                .legal_moves(state)
                .iter()
                .any(|m| f(self.next(state, m).expect("legal move applies"))),
        }
    }

    /// Applies `mv` structurally. Returns `None` when the move does not fit
    /// the state's shape; legality against [`Protocol::legal_moves`] is the
    /// caller's responsibility (see [`Protocol::play`]).
    pub fn next(&self, state: &GameState, mv: &Move) -> Option<GameState> {
        match (&*self.0, state, mv) {
            (Node::Atom { game, .. }, GameState::Node(n), Move::Atom(label)) => game.nodes[*n as usize]
                .children
                .iter()
                .find(|(l, _)| l == label)
                .map(|(_, c)| GameState::Node(*c)),
            (Node::Dual(p), s, m) => p.next(s, m),
            (Node::Choice { left, right, .. }, GameState::Choice(None), Move::Choice(side)) => {
                let init = match side {
                    Side::L => left.initial(),
                    Side::R => right.initial(),
                };
                Some(GameState::Choice(Some(Arc::new((*side, init)))))
            }
            (Node::Choice { left, right, .. }, GameState::Choice(Some(c)), m) => {
                let proto = match c.0 {
                    Side::L => left,
                    Side::R => right,
                };
                let s = proto.next(&c.1, m)?;
                Some(GameState::Choice(Some(Arc::new((c.0, s)))))
            }
            (Node::Tensor { left, right, .. }, GameState::Pair(p), Move::InComponent(side, m)) => {
                let (a, b) = &**p;
                Some(GameState::Pair(Arc::new(match side {
                    Side::L => (left.next(a, m)?, b.clone()),
                    Side::R => (a.clone(), right.next(b, m)?),
                })))
            }
            (Node::Bang { cap, mode, inner }, GameState::Bang(None), Move::Count(n)) if n <= cap => {
                let n = *n as usize;
                Some(GameState::Bang(Some(Arc::new(Copies {
                    states: vec![inner.initial(); n],
                    histories: match mode {
                        BangMode::Consistent => vec![Vec::new(); n],
                        BangMode::Stream => Vec::new(),
                    },
                }))))
            }
            (Node::Bang { inner, mode, .. }, GameState::Bang(Some(c)), Move::InCopy(i, m)) => {
                let i = *i as usize;
                let cur = c.states.get(i)?;
                let was_server = inner.turn(cur) == Turn::Server;
                let nxt = inner.next(cur, m)?;
                let mut copies = (**c).clone();
                copies.states[i] = nxt;
                if *mode == BangMode::Consistent {
                    copies.histories[i].push(((**m).clone(), was_server));
                }
                Some(GameState::Bang(Some(Arc::new(copies))))
            }
            _ => None,
        }
    }

    /// Applies `mv` after checking it is legal at `state`.
    pub fn play(&self, state: &GameState, mv: &Move) -> Result<GameState, GameError> {
        let illegal = || GameError::IllegalMove { mv: mv.to_string() };
        if self.turn(state) == Turn::Terminated || !self.legal_moves(state).contains(mv) {
            return Err(illegal());
        }
        self.next(state, mv).ok_or_else(illegal)
    }

    /// Replays a move sequence from the initial state.
    pub fn replay<'a>(&self, moves: impl IntoIterator<Item = &'a Move>) -> Result<GameState, GameError> {
        moves.into_iter().try_fold(self.initial(), |s, m| self.play(&s, m))
    }

    /// Upper bound on the length of any play.
    pub fn depth_bound(&self) -> usize {
        match &*self.0 {
            Node::Const(_) => 0,
            Node::Atom { game, .. } => game.depth,
            Node::Dual(p) => p.depth_bound(),
            Node::Choice { left, right, .. } => 1 + left.depth_bound().max(right.depth_bound()),
            Node::Tensor { left, right, .. } => left.depth_bound() + right.depth_bound(),
            Node::Bang { inner, cap, .. } => 1 + *cap as usize * inner.depth_bound(),
        }
    }

    /// Locates the atom occurrences live at `state`.
    ///
    /// Fails with [`GameError::NotInterpreted`] if an atom without a name
    /// (built by [`atom_protocol`] rather than [`interpret`]) is reached.
    pub fn atom_occurrences(&self, state: &GameState) -> Result<Vec<AtomOccurrence>, GameError> {
        let mut out = Vec::new();
        self.collect_occurrences(state, true, &mut Vec::new(), &mut out)?;
        Ok(out)
    }

    fn collect_occurrences(
        &self,
        state: &GameState,
        positive: bool,
        address: &mut Vec<u32>,
        out: &mut Vec<AtomOccurrence>,
    ) -> Result<(), GameError> {
        match (&*self.0, state) {
            (Node::Const(_), _) => Ok(()),
            (Node::Atom { game, name }, GameState::Node(n)) => {
                let name = name.clone().ok_or(GameError::NotInterpreted)?;
                out.push(AtomOccurrence {
                    name,
                    positive,
                    address: address.clone(),
                    position: *n,
                    game: game.clone(),
                });
                Ok(())
            }
            (Node::Dual(p), s) => p.collect_occurrences(s, !positive, address, out),
            (Node::Choice { .. }, GameState::Choice(None)) => Ok(()),
            (Node::Choice { left, right, .. }, GameState::Choice(Some(c))) => {
                address.push(c.0.index());
                let proto = if c.0 == Side::L { left } else { right };
                let r = proto.collect_occurrences(&c.1, positive, address, out);
                address.pop();
                r
            }
            (Node::Tensor { left, right, .. }, GameState::Pair(p)) => {
                address.push(0);
                left.collect_occurrences(&p.0, positive, address, out)?;
                address.pop();
                address.push(1);
                right.collect_occurrences(&p.1, positive, address, out)?;
                address.pop();
                Ok(())
            }
            (Node::Bang { .. }, GameState::Bang(None)) => Ok(()),
            (Node::Bang { inner, .. }, GameState::Bang(Some(c))) => {
                for (i, s) in c.states.iter().enumerate() {
                    address.push(i as u32);
                    inner.collect_occurrences(s, positive, address, out)?;
                    address.pop();
                }
                Ok(())
            }
            _ => panic!("state {state} does not belong to this protocol"),
        }
    }

    /// The atom occurrence that `mv` acts in, or `None` for connective moves
    /// (choices and counts).
    pub fn locate_move(&self, state: &GameState, mv: &Move) -> Result<Option<AtomOccurrence>, GameError> {
        self.locate(state, mv, true, &mut Vec::new())
    }

    fn locate(
        &self,
        state: &GameState,
        mv: &Move,
        positive: bool,
        address: &mut Vec<u32>,
    ) -> Result<Option<AtomOccurrence>, GameError> {
        match (&*self.0, state, mv) {
            (Node::Atom { game, name }, GameState::Node(n), Move::Atom(_)) => {
                let name = name.clone().ok_or(GameError::NotInterpreted)?;
                Ok(Some(AtomOccurrence {
                    name,
                    positive,
                    address: address.clone(),
                    position: *n,
                    game: game.clone(),
                }))
            }
            (Node::Dual(p), s, m) => p.locate(s, m, !positive, address),
            (Node::Choice { left, right, .. }, GameState::Choice(Some(c)), m) => {
                address.push(c.0.index());
                let proto = if c.0 == Side::L { left } else { right };
                proto.locate(&c.1, m, positive, address)
            }
            (Node::Tensor { left, right, .. }, GameState::Pair(p), Move::InComponent(side, m)) => {
                address.push(side.index());
                match side {
                    Side::L => left.locate(&p.0, m, positive, address),
                    Side::R => right.locate(&p.1, m, positive, address),
                }
            }
            (Node::Bang { inner, .. }, GameState::Bang(Some(c)), Move::InCopy(i, m)) => {
                address.push(*i);
                match c.states.get(*i as usize) {
                    Some(s) => inner.locate(s, m, positive, address),
                    None => Ok(None),
                }
            }
            _ => Ok(None),
        }
    }

    /// True iff every atom in the protocol carries a name.
    pub fn is_interpreted(&self) -> bool {
        match &*self.0 {
            Node::Const(_) => true,
            Node::Atom { name, .. } => name.is_some(),
            Node::Dual(p) => p.is_interpreted(),
            Node::Choice { left, right, .. } | Node::Tensor { left, right, .. } => {
                left.is_interpreted() && right.is_interpreted()
            }
            Node::Bang { inner, .. } => inner.is_interpreted(),
        }
    }
}

/// An atom occurrence at a state: the atom's name, whether it occurs
/// positively (an even number of role swaps above it), its component
/// address, and its current position in the atom's tree.
#[derive(Clone, Debug)]
pub struct AtomOccurrence {
    pub name: Arc<str>,
    pub positive: bool,
    pub address: Vec<u32>,
    pub position: u32,
    pub game: Arc<AtomGame>,
}

fn combined_turn(turns: impl IntoIterator<Item = Turn>) -> Turn {
    let mut any_client = false;
    for t in turns {
        match t {
            Turn::Server => return Turn::Server,
            Turn::Client => any_client = true,
            Turn::Terminated => {}
        }
    }
    if any_client {
        Turn::Client
    } else {
        Turn::Terminated
    }
}

fn consistent_reply(copies: &Copies, i: usize, mv: &Move) -> bool {
    let own = &copies.histories[i];
    copies.histories.iter().enumerate().all(|(j, other)| {
        if j == i || other.len() <= own.len() || !other.starts_with(own) {
            return true;
        }
        let (earlier, was_server) = &other[own.len()];
        !*was_server || earlier == mv
    })
}

pub fn atom_protocol(tree: &ExplicitTree) -> Result<Protocol, GameError> {
    Ok(Protocol::from_node(Node::Atom {
        game: Arc::new(AtomGame::new(tree)?),
        name: None,
    }))
}

/// An atom protocol tagged with the atom's name, for occurrence tracking.
pub fn named_atom(name: &str, game: Arc<AtomGame>) -> Protocol {
    Protocol::from_node(Node::Atom {
        game,
        name: Some(Arc::from(name)),
    })
}

/// Role swap.
pub fn dual(p: &Protocol) -> Protocol {
    match &*p.0 {
        Node::Dual(inner) => inner.clone(),
        Node::Const(t) => Protocol::from_node(Node::Const(t.swap())),
        _ => Protocol::from_node(Node::Dual(p.clone())),
    }
}

pub fn with_p(a: &Protocol, b: &Protocol) -> Protocol {
    Protocol::from_node(Node::Choice {
        chooser: Role::Client,
        left: a.clone(),
        right: b.clone(),
    })
}

pub fn plus_p(a: &Protocol, b: &Protocol) -> Protocol {
    Protocol::from_node(Node::Choice {
        chooser: Role::Server,
        left: a.clone(),
        right: b.clone(),
    })
}

pub fn tensor_p(a: &Protocol, b: &Protocol) -> Protocol {
    tensor_with_serialization(a, b, Serialization::LeftmostFirst)
}

/// Tensor with an explicit order for scheduling the server across components.
pub fn tensor_with_serialization(a: &Protocol, b: &Protocol, order: Serialization) -> Protocol {
    Protocol::from_node(Node::Tensor {
        left: a.clone(),
        right: b.clone(),
        order,
    })
}

pub fn par_p(a: &Protocol, b: &Protocol) -> Protocol {
    dual(&tensor_p(&dual(a), &dual(b)))
}

pub fn lolli_p(a: &Protocol, b: &Protocol) -> Protocol {
    par_p(&dual(a), b)
}

pub fn top_p() -> Protocol {
    Protocol::from_node(Node::Const(Turn::Client))
}

pub fn zero_p() -> Protocol {
    Protocol::from_node(Node::Const(Turn::Server))
}

pub fn one_p() -> Protocol {
    Protocol::from_node(Node::Const(Turn::Terminated))
}

pub fn bot_p() -> Protocol {
    Protocol::from_node(Node::Const(Turn::Terminated))
}

pub fn bang_p(a: &Protocol, cap: u32, mode: BangMode) -> Protocol {
    Protocol::from_node(Node::Bang {
        inner: a.clone(),
        cap,
        mode,
    })
}

pub fn quest_p(a: &Protocol, cap: u32, mode: BangMode) -> Protocol {
    dual(&bang_p(&dual(a), cap, mode))
}

/// Compiles `f` (after normalization) into a protocol over `env`.
pub fn interpret(f: &Formula, env: &AtomEnv, cap: u32, mode: BangMode) -> Result<Protocol, GameError> {
    let mut games: HashMap<String, Arc<AtomGame>> = HashMap::new();
    for name in f.atoms() {
        let tree = env.get(&name).ok_or_else(|| GameError::UnboundAtom(name.clone()))?;
        games.insert(name, Arc::new(AtomGame::new(tree)?));
    }
    Ok(compile(&f.normalize(), &games, cap, mode))
}

fn compile(f: &Formula, games: &HashMap<String, Arc<AtomGame>>, cap: u32, mode: BangMode) -> Protocol {
    let go = |g: &Formula| compile(g, games, cap, mode);
    match f {
        Formula::Atom(name) => named_atom(name, games[name].clone()),
        Formula::Dual(inner) => dual(&go(inner)),
        Formula::Tensor(a, b) => tensor_p(&go(a), &go(b)),
        Formula::Par(a, b) => par_p(&go(a), &go(b)),
        Formula::With(a, b) => with_p(&go(a), &go(b)),
        Formula::Plus(a, b) => plus_p(&go(a), &go(b)),
        Formula::Lolli(a, b) => lolli_p(&go(a), &go(b)),
        Formula::Bang(a) => bang_p(&go(a), cap, mode),
        Formula::Quest(a) => quest_p(&go(a), cap, mode),
        Formula::Top => top_p(),
        Formula::Zero => zero_p(),
        Formula::One => one_p(),
        Formula::Bot => bot_p(),
    }
}

/// Explicit tree of all histories reachable in `p`, keyed by rendered moves.
pub fn materialize(p: &Protocol, max_nodes: usize) -> Result<ExplicitTree, GameError> {
    fn go(p: &Protocol, s: &GameState, count: &mut usize, max: usize) -> Result<ExplicitTree, GameError> {
        *count += 1;
        if *count > max {
            return Err(GameError::BudgetExceeded { count: *count - 1 });
        }
        let mut moves = BTreeMap::new();
        for m in p.legal_moves(s) {
            let child = p.next(s, &m).expect("legal moves apply");
            moves.insert(m.to_string(), go(p, &child, count, max)?);
        }
        Ok(ExplicitTree { turn: p.turn(s), moves })
    }
    go(p, &p.initial(), &mut 0, max_nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn t() -> ExplicitTree {
        ExplicitTree::leaf(Turn::Terminated)
    }

    fn tree(p: &Protocol) -> ExplicitTree {
        materialize(p, 100_000).unwrap()
    }

    fn choice_l() -> Move {
        Move::Choice(Side::L)
    }

    #[test]
    fn atom_protocol_follows_tree() {
        let g = ExplicitTree::node(Turn::Server, [("e1", t()), ("e2", t())]);
        let p = atom_protocol(&g).unwrap();
        assert_eq!(p.turn(&p.initial()), Turn::Server);
        assert_eq!(p.legal_moves(&p.initial()).len(), 2);
        assert_eq!(tree(&p), g);
        assert_eq!(tree(&atom_protocol(&ExplicitTree::leaf(Turn::Server)).unwrap()), tree(&zero_p()));
    }

    #[test]
    fn malformed_tree_rejected() {
        let bad = ExplicitTree::node(Turn::Terminated, [("x", t())]);
        assert!(matches!(atom_protocol(&bad), Err(GameError::MalformedTree { .. })));
        let nested = ExplicitTree::node(Turn::Client, [("x", bad)]);
        assert_eq!(
            nested.validate(),
            Err(GameError::MalformedTree { path: "x".into() })
        );
    }

    #[test]
    fn constants() {
        let top = top_p();
        assert_eq!(top.turn(&top.initial()), Turn::Client);
        assert!(top.legal_moves(&top.initial()).is_empty());
        assert_eq!(zero_p().turn(&GameState::Leaf), Turn::Server);
        assert_eq!(tree(&one_p()), tree(&bot_p()));
        assert_eq!(tree(&dual(&top_p())), tree(&zero_p()));
        assert_eq!(tree(&dual(&one_p())), tree(&bot_p()));
    }

    #[test]
    fn dual_swaps_roles_only() {
        let g = ExplicitTree::node(Turn::Client, [("x", ExplicitTree::node(Turn::Server, [("y", t())]))]);
        let p = atom_protocol(&g).unwrap();
        assert_eq!(tree(&dual(&p)), g.dual());
        assert_eq!(tree(&dual(&dual(&p))), g);
    }

    #[test]
    fn with_and_plus() {
        let w = with_p(&one_p(), &one_p());
        assert_eq!(w.turn(&w.initial()), Turn::Client);
        assert_eq!(w.legal_moves(&w.initial()), vec![Move::Choice(Side::L), Move::Choice(Side::R)]);
        let after = w.play(&w.initial(), &choice_l()).unwrap();
        assert_eq!(w.turn(&after), Turn::Terminated);
        let a = atom_protocol(&ExplicitTree::node(Turn::Server, [("x", t())])).unwrap();
        let b = top_p();
        assert_eq!(tree(&plus_p(&a, &b)), tree(&dual(&with_p(&dual(&a), &dual(&b)))));
    }

    #[test]
    fn tensor_server_first() {
        let p = tensor_p(&plus_p(&one_p(), &one_p()), &with_p(&one_p(), &one_p()));
        let s0 = p.initial();
        assert_eq!(p.turn(&s0), Turn::Server);
        assert_eq!(
            p.legal_moves(&s0),
            vec![
                Move::InComponent(Side::L, Box::new(Move::Choice(Side::L))),
                Move::InComponent(Side::L, Box::new(Move::Choice(Side::R))),
            ]
        );

        let q = tensor_p(&plus_p(&one_p(), &one_p()), &plus_p(&one_p(), &one_p()));
        let s1 = q.play(&q.initial(), &Move::InComponent(Side::L, Box::new(choice_l()))).unwrap();
        assert_eq!(q.turn(&s1), Turn::Server);
        assert!(q
            .legal_moves(&s1)
            .iter()
            .all(|m| matches!(m, Move::InComponent(Side::R, _))));
    }

    #[test]
    fn tensor_with_terminated_component_behaves_as_other() {
        let g = ExplicitTree::node(Turn::Client, [("x", ExplicitTree::node(Turn::Server, [("y", t())]))]);
        let p = atom_protocol(&g).unwrap();
        let mut expected = BTreeMap::new();
        expected.insert(
            "R:x".to_owned(),
            ExplicitTree::node(Turn::Server, [("R:y", t())]),
        );
        assert_eq!(tree(&tensor_p(&one_p(), &p)), ExplicitTree { turn: Turn::Client, moves: expected });
    }

    #[test]
    fn par_gives_server_the_scheduling() {
        let g = ExplicitTree::node(Turn::Server, [("e1", t()), ("e2", t())]);
        let a = atom_protocol(&g).unwrap();
        let p = par_p(&dual(&a), &a);
        assert_eq!(p.turn(&p.initial()), Turn::Client);
        let both_server = par_p(&a, &a);
        assert_eq!(both_server.legal_moves(&both_server.initial()).len(), 4);
        let terminated = par_p(&one_p(), &bot_p());
        assert_eq!(terminated.turn(&terminated.initial()), Turn::Terminated);
    }

    #[test]
    fn bang_counts_and_copies() {
        let b = bang_p(&zero_p(), 2, BangMode::Consistent);
        assert_eq!(b.turn(&b.initial()), Turn::Client);
        assert_eq!(b.legal_moves(&b.initial()), vec![Move::Count(0), Move::Count(1), Move::Count(2)]);
        let s0 = b.play(&b.initial(), &Move::Count(0)).unwrap();
        assert_eq!(b.turn(&s0), Turn::Terminated);
        let s1 = b.play(&b.initial(), &Move::Count(1)).unwrap();
        assert_eq!(b.turn(&s1), Turn::Server);
        assert!(b.legal_moves(&s1).is_empty());
    }

    #[test]
    fn bang_consistency_forces_equal_replies() {
        let reply = ExplicitTree::node(Turn::Server, [("r1", t()), ("r2", t())]);
        let g = ExplicitTree::node(Turn::Client, [("x", reply)]);
        let a = atom_protocol(&g).unwrap();
        let at = |i: u32, l: &str| Move::InCopy(i, Box::new(Move::Atom(Arc::from(l))));
        for (mode, expected_replies) in [(BangMode::Consistent, 1), (BangMode::Stream, 2)] {
            let b = bang_p(&a, 2, mode);
            let s = b
                .replay(&[Move::Count(2), at(0, "x"), at(0, "r1"), at(1, "x")])
                .unwrap();
            assert_eq!(b.turn(&s), Turn::Server);
            assert_eq!(b.legal_moves(&s).len(), expected_replies, "{mode:?}");
        }
    }

    #[test]
    fn interpret_examples() {
        let g = ExplicitTree::node(Turn::Client, [("x", t())]);
        let mut env = AtomEnv::new();
        env.insert("a", g.clone());
        let p = interpret(&parse("a^ + a").unwrap(), &env, 2, BangMode::Consistent).unwrap();
        assert_eq!(p.turn(&p.initial()), Turn::Server);
        let unit = interpret(&parse("1 * 1").unwrap(), &env, 2, BangMode::Consistent).unwrap();
        assert_eq!(unit.turn(&unit.initial()), Turn::Terminated);
        let ga = atom_protocol(&g).unwrap();
        let lolli = interpret(&parse("a -o a").unwrap(), &env, 2, BangMode::Consistent).unwrap();
        assert_eq!(tree(&lolli), tree(&par_p(&dual(&ga), &ga)));
        assert_eq!(
            interpret(&parse("b").unwrap(), &env, 2, BangMode::Consistent).err(),
            Some(GameError::UnboundAtom("b".into()))
        );
    }

    #[test]
    fn three_bit_example_has_depth_three() {
        let f = parse("((a&b)+(c&d)) & ((e&f)+(g&h))").unwrap();
        let p = interpret(&f, &AtomEnv::unit_for(&f), 2, BangMode::Consistent).unwrap();
        assert_eq!(tree(&p).depth(), 3);
    }

    #[test]
    fn materialize_budget() {
        assert_eq!(tree(&top_p()), ExplicitTree::leaf(Turn::Client));
        assert_eq!(
            tree(&with_p(&one_p(), &one_p())),
            ExplicitTree::node(Turn::Client, [("L", t()), ("R", t())])
        );
        let p = with_p(&one_p(), &one_p());
        assert_eq!(materialize(&p, 2), Err(GameError::BudgetExceeded { count: 2 }));
    }

    #[test]
    fn env_json_round_trip_and_dot() {
        let json = r#"{"atoms": {"a": {"turn": "s", "moves": {"e1": {"turn": "t"}, "e2": {"turn": "t"}}}}}"#;
        let env = AtomEnv::from_json(json).unwrap();
        assert_eq!(env.get("a").unwrap().moves.len(), 2);
        assert_eq!(AtomEnv::from_json(&env.to_json()).unwrap(), env);
        let bad = r#"{"atoms": {"a": {"turn": "t", "moves": {"e": {"turn": "t"}}}}}"#;
        assert!(matches!(AtomEnv::from_json(bad), Err(GameError::MalformedTree { .. })));
        let dot = env.get("a").unwrap().to_dot();
        assert!(dot.contains("n0 [label=\"s\"]"));
        assert!(dot.contains("n0 -> n1 [label=\"e1\"]"));
    }

    #[test]
    fn depth_bound_covers_plays() {
        let g = ExplicitTree::node(Turn::Client, [("x", ExplicitTree::node(Turn::Server, [("y", t())]))]);
        let a = atom_protocol(&g).unwrap();
        let p = bang_p(&tensor_p(&a, &dual(&a)), 2, BangMode::Stream);
        assert!(tree(&p).depth() <= p.depth_bound());
        assert_eq!(p.depth_bound(), 9);
    }

    #[test]
    fn arena_navigation() {
        let g = ExplicitTree::node(
            Turn::Client,
            [("x", ExplicitTree::node(Turn::Server, [("y", t())])), ("z", t())],
        );
        let game = AtomGame::new(&g).unwrap();
        // preorder: 0 root, 1 x, 2 x.y, 3 z
        assert!(game.is_strict_ancestor(0, 2));
        assert!(!game.is_strict_ancestor(2, 2));
        assert!(!game.is_strict_ancestor(3, 2));
        assert_eq!(game.step_toward(0, 2).as_deref(), Some("x"));
        assert_eq!(game.history(2).iter().map(|s| &**s).collect::<Vec<_>>(), ["x", "y"]);
    }
}
