//! Shared pieces of the `lingame` binary: the playing engine, atom sources,
//! and the local HTTP session service.

pub mod service;

use std::path::Path;

use anyhow::{bail, Context, Result};
use lingame_core::game::interpret;
use lingame_core::strategy::Strategy;
use lingame_core::{solve, AtomEnv, AtomPool, BangMode, Formula, Protocol, Referee, Role};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// How the engine picks its moves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    /// The solved winning strategy when the engine's side wins, else random.
    #[default]
    Solver,
    /// A seeded uniform choice among legal moves.
    Random,
}

/// An automatic player for one side of a play.
#[derive(Clone, Debug)]
pub struct Engine {
    role: Role,
    strategy: Option<Strategy>,
    rng: ChaCha8Rng,
}

impl Engine {
    pub fn new(p: &Protocol, role: Role, kind: EngineKind, seed: u64) -> Self {
        let strategy = match kind {
            EngineKind::Solver => {
                // a client win is phrased as a server strategy on the dual,
                // whose states coincide with those of `p`
                let solution = solve(p);
                (solution.winner == role).then_some(solution.strategy)
            }
            EngineKind::Random => None,
        };
        Engine {
            role,
            strategy,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    /// Whether the engine holds a winning strategy.
    pub fn is_winning(&self) -> bool {
        self.strategy.is_some()
    }

    /// The engine's move at the referee's current state, if it has any.
    pub fn choose(&mut self, referee: &Referee) -> Option<lingame_core::Move> {
        let legal = referee.legal_moves();
        if legal.is_empty() {
            return None;
        }
        if let Some(m) = self.strategy.as_ref().and_then(|s| s.move_at(referee.state())) {
            if legal.contains(m) {
                return Some(m.clone());
            }
        }
        let i = self.rng.random_range(0..legal.len());
        Some(legal[i].clone())
    }
}

/// Where atom interpretations come from.
#[derive(Clone, Debug, PartialEq)]
pub enum AtomSource {
    /// Every atom is the terminated leaf.
    Unit,
    /// Every assignment from a pool.
    Pool(AtomPool),
    /// A fixed environment.
    Env(AtomEnv),
}

impl AtomSource {
    /// `unit`, `pool/std`, or a path to an environment or pool JSON file.
    pub fn parse(spec: &str) -> Result<Self> {
        match spec {
            "unit" => Ok(AtomSource::Unit),
            "pool/std" => Ok(AtomSource::Pool(AtomPool::standard())),
            path => {
                let text = std::fs::read_to_string(Path::new(path)).with_context(|| format!("reading {path}"))?;
                let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {path}"))?;
                if value.get("games").is_some() {
                    Ok(AtomSource::Pool(AtomPool::from_json(&text)?))
                } else {
                    Ok(AtomSource::Env(AtomEnv::from_json(&text)?))
                }
            }
        }
    }

    /// The environments to evaluate `f` under, labelled for display; at most
    /// `limit` of them for pools.
    pub fn envs(&self, f: &Formula, limit: usize) -> Vec<(String, AtomEnv)> {
        match self {
            AtomSource::Unit => vec![("unit".into(), AtomEnv::unit_for(f))],
            AtomSource::Env(env) => vec![("env".into(), env.clone())],
            AtomSource::Pool(pool) => {
                let atoms = f.atoms();
                let mut out = Vec::new();
                let mut digits = vec![0usize; atoms.len()];
                loop {
                    let mut env = AtomEnv::new();
                    let mut label = Vec::new();
                    for (a, &d) in atoms.iter().zip(&digits) {
                        env.insert(a.clone(), pool.games[d].tree.clone());
                        label.push(format!("{a}={}", pool.games[d].name));
                    }
                    out.push((if label.is_empty() { "closed".into() } else { label.join(" ") }, env));
                    if out.len() >= limit || !advance(&mut digits, pool.len()) {
                        return out;
                    }
                }
            }
        }
    }
}

fn advance(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

/// Parses `text` and interprets it under `env`.
pub fn build(text: &str, env: &AtomEnv, cap: u32, mode: BangMode) -> Result<(Formula, Protocol)> {
    let f = lingame_core::parse(text)?;
    let p = interpret(&f, env, cap, mode)?;
    Ok((f, p))
}

/// A single environment for interactive use; pools are rejected.
pub fn single_env(source: &AtomSource, f: &Formula) -> Result<AtomEnv> {
    match source {
        AtomSource::Pool(_) => bail!("a pool gives many interpretations; pass an environment file or `unit`"),
        other => Ok(other.envs(f, 1).remove(0).1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lingame_core::Turn;

    #[test]
    fn pool_enumeration_is_lexicographic() {
        let src = AtomSource::Pool(AtomPool::constants());
        let f = lingame_core::parse("a * b").unwrap();
        let envs = src.envs(&f, 100);
        assert_eq!(envs.len(), 16);
        assert_eq!(envs[0].0, "a=top b=top");
        assert_eq!(envs[1].0, "a=top b=zero");
        assert_eq!(src.envs(&f, 3).len(), 3);
    }

    #[test]
    fn engine_plays_winning_moves() {
        let env = AtomEnv::unit_for(&lingame_core::parse("a").unwrap());
        let (_, p) = build("0 + 1", &env, 2, BangMode::Consistent).unwrap();
        let mut engine = Engine::new(&p, Role::Server, EngineKind::Solver, 1);
        assert!(engine.is_winning());
        let mut referee = Referee::new(p);
        let m = engine.choose(&referee).unwrap();
        referee.apply_move(&m).unwrap();
        assert_eq!(referee.turn(), Turn::Terminated);
    }
}
