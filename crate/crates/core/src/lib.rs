//! Linear-logic formulas read as finite client/server protocols.
//!
//! - [`formula`]: syntax, parsing, printing, negation normal form, sequents.
//! - [`game`]: protocol constructors per connective and formula interpretation.
//! - [`strategy`]: behaviors, backward-induction solving, copy-cat, the referee.
//! - [`semantics`]: validity and entailment over pools of atom games.
//! - [`proofs`]: one-sided MALL proof checking and cut-free proof search.
//! - [`demo`]: the reproduction checks run by `lingame demo paper`.

pub mod demo;
pub mod formula;
pub mod game;
pub mod proofs;
pub mod semantics;
pub mod strategy;

pub use formula::{parse, Formula, ParseError, Sequent};
pub use game::{
    AtomEnv, BangMode, ExplicitTree, GameError, GameState, Move, Protocol, Role, Side, Turn,
};
pub use proofs::{check_proof, search, ProofError, ProofTree, Rule, RuleKind, RuleSet, SearchOutcome};
pub use semantics::{entails, equiv, valid_naive, AtomPool, ValidityConfig, Verdict};
pub use strategy::{server_wins, solve, Referee, Solution, Strategy};
