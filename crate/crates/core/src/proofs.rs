//! One-sided MALL sequent calculus: proof checking and cut-free proof search,
//! with optional thinning and exactly-matched hypothesis leaves.
//!
//! Exponentials have no rules here; a `!A` or `?A` can only be closed by the
//! axiom or removed by thinning.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{parse, Formula, ParseError, Sequent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Axiom,
    Cut,
    TensorR,
    ParR,
    WithR,
    PlusR1,
    PlusR2,
    OneR,
    BotR,
    TopR,
    Thinning,
    Hypothesis(usize),
}

/// A rule without its hypothesis index, for enabling and disabling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    Axiom,
    Cut,
    TensorR,
    ParR,
    WithR,
    PlusR1,
    PlusR2,
    OneR,
    BotR,
    TopR,
    Thinning,
    Hypothesis,
}

impl Rule {
    pub fn kind(self) -> RuleKind {
        match self {
            Rule::Axiom => RuleKind::Axiom,
            Rule::Cut => RuleKind::Cut,
            Rule::TensorR => RuleKind::TensorR,
            Rule::ParR => RuleKind::ParR,
            Rule::WithR => RuleKind::WithR,
            Rule::PlusR1 => RuleKind::PlusR1,
            Rule::PlusR2 => RuleKind::PlusR2,
            Rule::OneR => RuleKind::OneR,
            Rule::BotR => RuleKind::BotR,
            Rule::TopR => RuleKind::TopR,
            Rule::Thinning => RuleKind::Thinning,
            Rule::Hypothesis(_) => RuleKind::Hypothesis,
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Rule::Axiom | Rule::OneR | Rule::TopR | Rule::Hypothesis(_) => 0,
            Rule::ParR | Rule::PlusR1 | Rule::PlusR2 | Rule::BotR | Rule::Thinning => 1,
            Rule::TensorR | Rule::WithR | Rule::Cut => 2,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Hypothesis(i) => write!(f, "Hypothesis({i})"),
            other => write!(f, "{other:?}"),
        }
    }
}

impl std::str::FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "Axiom" => Rule::Axiom,
            "Cut" => Rule::Cut,
            "TensorR" => Rule::TensorR,
            "ParR" => Rule::ParR,
            "WithR" => Rule::WithR,
            "PlusR1" => Rule::PlusR1,
            "PlusR2" => Rule::PlusR2,
            "OneR" => Rule::OneR,
            "BotR" => Rule::BotR,
            "TopR" => Rule::TopR,
            "Thinning" => Rule::Thinning,
            other => {
                let idx = other
                    .strip_prefix("Hypothesis(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|n| n.parse().ok())
                    .ok_or_else(|| format!("unknown rule `{other}`"))?;
                Rule::Hypothesis(idx)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSet(BTreeSet<RuleKind>);

impl RuleSet {
    /// Cut-free MALL: everything except cut, thinning and hypotheses.
    pub fn mall() -> Self {
        use RuleKind::*;
        RuleSet([Axiom, TensorR, ParR, WithR, PlusR1, PlusR2, OneR, BotR, TopR].into_iter().collect())
    }

    pub fn with(mut self, kind: RuleKind) -> Self {
        self.0.insert(kind);
        self
    }

    pub fn without(mut self, kind: RuleKind) -> Self {
        self.0.remove(&kind);
        self
    }

    pub fn contains(&self, kind: RuleKind) -> bool {
        self.0.contains(&kind)
    }
}

impl Default for RuleSet {
    fn default() -> Self {
        Self::mall()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofTree {
    pub conclusion: Sequent,
    pub rule: Rule,
    pub premises: Vec<ProofTree>,
}

impl ProofTree {
    pub fn leaf(conclusion: Sequent, rule: Rule) -> Self {
        ProofTree {
            conclusion,
            rule,
            premises: Vec::new(),
        }
    }

    pub fn node(conclusion: Sequent, rule: Rule, premises: Vec<ProofTree>) -> Self {
        ProofTree {
            conclusion,
            rule,
            premises,
        }
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(ProofTree::size).sum::<usize>()
    }

    pub fn uses(&self, kind: RuleKind) -> bool {
        self.rule.kind() == kind || self.premises.iter().any(|p| p.uses(kind))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ProofJson::from(self)).expect("proof serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self, ProofError> {
        let doc: ProofJson = serde_json::from_str(text).map_err(|e| ProofError::format(e.to_string()))?;
        doc.into_tree()
    }
}

impl fmt::Display for ProofTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &ProofTree, depth: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            writeln!(f, "{:indent$}{}   [{}]", "", t.conclusion, t.rule, indent = depth * 2)?;
            t.premises.iter().try_for_each(|p| go(p, depth + 1, f))
        }
        go(self, 0, f)
    }
}

#[derive(Serialize, Deserialize)]
struct ProofJson {
    seq: Vec<String>,
    rule: String,
    #[serde(default)]
    premises: Vec<ProofJson>,
}

impl From<&ProofTree> for ProofJson {
    fn from(t: &ProofTree) -> Self {
        ProofJson {
            seq: t.conclusion.formulas().iter().map(Formula::to_string).collect(),
            rule: t.rule.to_string(),
            premises: t.premises.iter().map(ProofJson::from).collect(),
        }
    }
}

impl ProofJson {
    fn into_tree(self) -> Result<ProofTree, ProofError> {
        let formulas = self
            .seq
            .iter()
            .map(|s| parse(s))
            .collect::<Result<Vec<_>, ParseError>>()
            .map_err(|e| ProofError::format(e.to_string()))?;
        let rule = self.rule.parse().map_err(ProofError::format)?;
        let premises = self.premises.into_iter().map(ProofJson::into_tree).collect::<Result<_, _>>()?;
        Ok(ProofTree {
            conclusion: Sequent::new(formulas),
            rule,
            premises,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofErrorKind {
    #[error("rule {rule} expects {expected} premises, found {found}")]
    Arity { rule: Rule, expected: usize, found: usize },
    #[error("rule {0} does not apply to this conclusion")]
    RuleMismatch(Rule),
    #[error("premise contexts do not match the conclusion of {0}")]
    ContextMismatch(Rule),
    #[error("rule {0} is not enabled")]
    Disabled(Rule),
    #[error("hypothesis {index} out of range ({count} given)")]
    HypothesisOutOfRange { index: usize, count: usize },
    #[error("conclusion differs from hypothesis {0}")]
    HypothesisMismatch(usize),
    #[error("the derivation needs thinning, which is disabled")]
    ThinningDisabled,
    #[error("invalid proof document: {0}")]
    Format(String),
}

/// A check failure at the node reached by following `path` (premise
/// indices) from the root.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at node {path:?}: {kind}")]
pub struct ProofError {
    pub path: Vec<usize>,
    pub kind: ProofErrorKind,
}

impl ProofError {
    fn at(path: &[usize], kind: ProofErrorKind) -> Self {
        ProofError {
            path: path.to_vec(),
            kind,
        }
    }

    fn format(msg: String) -> Self {
        ProofError {
            path: Vec::new(),
            kind: ProofErrorKind::Format(msg),
        }
    }
}

/// Validates every node of `t`. Formulas are compared in negation normal
/// form.
pub fn check_proof(t: &ProofTree, enabled: &RuleSet, hypotheses: &[Sequent]) -> Result<(), ProofError> {
    let hyps: Vec<Sequent> = hypotheses.iter().map(Sequent::normalize).collect();
    check_node(t, enabled, &hyps, &mut Vec::new())
}

fn check_node(t: &ProofTree, enabled: &RuleSet, hyps: &[Sequent], path: &mut Vec<usize>) -> Result<(), ProofError> {
    let rule = t.rule;
    if t.premises.len() != rule.arity() {
        return Err(ProofError::at(
            path,
            ProofErrorKind::Arity {
                rule,
                expected: rule.arity(),
                found: t.premises.len(),
            },
        ));
    }
    if !enabled.contains(rule.kind()) {
        return Err(ProofError::at(path, ProofErrorKind::Disabled(rule)));
    }
    let concl = t.conclusion.normalize();
    let prem: Vec<Sequent> = t.premises.iter().map(|p| p.conclusion.normalize()).collect();
    check_step(rule, &concl, &prem, hyps).map_err(|kind| ProofError::at(path, kind))?;
    for (i, p) in t.premises.iter().enumerate() {
        path.push(i);
        check_node(p, enabled, hyps, path)?;
        path.pop();
    }
    Ok(())
}

/// Candidates `(principal, rest)` for principal formulas matching `shape`.
fn principals<'a>(
    concl: &'a Sequent,
    shape: impl Fn(&Formula) -> bool + 'a,
) -> impl Iterator<Item = (&'a Formula, Sequent)> + 'a {
    concl
        .formulas()
        .iter()
        .filter(move |f| shape(f))
        .map(move |f| (f, concl.without(f).expect("member")))
}

fn check_step(rule: Rule, concl: &Sequent, prem: &[Sequent], hyps: &[Sequent]) -> Result<(), ProofErrorKind> {
    let mismatch = ProofErrorKind::RuleMismatch(rule);
    let context = ProofErrorKind::ContextMismatch(rule);
    let decide = |found_shape: bool, ok: bool| match (found_shape, ok) {
        (_, true) => Ok(()),
        (true, false) => Err(context.clone()),
        (false, false) => Err(mismatch.clone()),
    };
    match rule {
        Rule::Axiom => {
            let fs = concl.formulas();
            decide(false, fs.len() == 2 && fs[0].dualize() == fs[1])
        }
        Rule::OneR => decide(false, concl.formulas() == [Formula::One]),
        Rule::TopR => decide(false, concl.contains(&Formula::Top)),
        Rule::Hypothesis(i) => match hyps.get(i) {
            None => Err(ProofErrorKind::HypothesisOutOfRange {
                index: i,
                count: hyps.len(),
            }),
            Some(h) if h == concl => Ok(()),
            Some(_) => Err(ProofErrorKind::HypothesisMismatch(i)),
        },
        Rule::Cut => {
            let ok = prem[0].formulas().iter().any(|a| {
                let a_dual = a.dualize();
                match (prem[0].without(a), prem[1].without(&a_dual)) {
                    (Some(g), Some(d)) => g.union(&d) == *concl,
                    _ => false,
                }
            });
            decide(true, ok)
        }
        Rule::Thinning => {
            let ok = concl.formulas().iter().any(|f| concl.without(f).as_ref() == Some(&prem[0]));
            decide(!concl.is_empty(), ok)
        }
        Rule::BotR => {
            let mut shape = false;
            let ok = principals(concl, |f| matches!(f, Formula::Bot)).any(|(_, rest)| {
                shape = true;
                rest == prem[0]
            });
            decide(shape, ok)
        }
        Rule::ParR => {
            let mut shape = false;
            let ok = principals(concl, |f| matches!(f, Formula::Par(..))).any(|(f, rest)| {
                shape = true;
                let Formula::Par(a, b) = f else { unreachable!() };
                rest.with_formula((**a).clone()).with_formula((**b).clone()) == prem[0]
            });
            decide(shape, ok)
        }
        Rule::PlusR1 | Rule::PlusR2 => {
            let mut shape = false;
            let ok = principals(concl, |f| matches!(f, Formula::Plus(..))).any(|(f, rest)| {
                shape = true;
                let Formula::Plus(a, b) = f else { unreachable!() };
                let chosen = if rule == Rule::PlusR1 { a } else { b };
                rest.with_formula((**chosen).clone()) == prem[0]
            });
            decide(shape, ok)
        }
        Rule::WithR => {
            let mut shape = false;
            let ok = principals(concl, |f| matches!(f, Formula::With(..))).any(|(f, rest)| {
                shape = true;
                let Formula::With(a, b) = f else { unreachable!() };
                rest.with_formula((**a).clone()) == prem[0] && rest.with_formula((**b).clone()) == prem[1]
            });
            decide(shape, ok)
        }
        Rule::TensorR => {
            let mut shape = false;
            let ok = principals(concl, |f| matches!(f, Formula::Tensor(..))).any(|(f, rest)| {
                shape = true;
                let Formula::Tensor(a, b) = f else { unreachable!() };
                match (prem[0].without(a), prem[1].without(b)) {
                    (Some(g), Some(d)) => g.union(&d) == rest,
                    _ => false,
                }
            });
            decide(shape, ok)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Proved(ProofTree),
    /// The cut-free search space was exhausted.
    Unprovable,
    BoundExceeded { bound: usize },
}

impl SearchOutcome {
    pub fn proof(&self) -> Option<&ProofTree> {
        match self {
            SearchOutcome::Proved(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_proved(&self) -> bool {
        matches!(self, SearchOutcome::Proved(_))
    }
}

pub const DEFAULT_SEARCH_BOUND: usize = 2_000_000;

/// Cut-free proof search with the default step bound.
pub fn search(s: &Sequent, enabled: &RuleSet, hypotheses: &[Sequent]) -> SearchOutcome {
    search_bounded(s, enabled, hypotheses, DEFAULT_SEARCH_BOUND)
}

/// Cut-free proof search. Invertible rules (par, with, bot, top) are applied
/// eagerly; tensor tries every context split, plus both disjuncts.
/// Without hypotheses the search is complete for cut-free MALL (plus
/// thinning when enabled); with hypotheses it is sound only.
pub fn search_bounded(s: &Sequent, enabled: &RuleSet, hypotheses: &[Sequent], bound: usize) -> SearchOutcome {
    let mut searcher = Searcher {
        enabled,
        hyps: hypotheses.iter().map(Sequent::normalize).collect(),
        memo: HashMap::new(),
        steps: 0,
        bound,
    };
    match searcher.prove(&s.normalize()) {
        Ok(Some(t)) => SearchOutcome::Proved(t),
        Ok(None) => SearchOutcome::Unprovable,
        Err(Exhausted) => SearchOutcome::BoundExceeded { bound },
    }
}

struct Exhausted;

struct Searcher<'a> {
    enabled: &'a RuleSet,
    hyps: Vec<Sequent>,
    memo: HashMap<Sequent, Option<ProofTree>>,
    steps: usize,
    bound: usize,
}

impl Searcher<'_> {
    fn on(&self, kind: RuleKind) -> bool {
        self.enabled.contains(kind)
    }

    fn prove(&mut self, s: &Sequent) -> Result<Option<ProofTree>, Exhausted> {
        if let Some(hit) = self.memo.get(s) {
            return Ok(hit.clone());
        }
        self.steps += 1;
        if self.steps > self.bound {
            return Err(Exhausted);
        }
        let result = self.attempt(s)?;
        self.memo.insert(s.clone(), result.clone());
        Ok(result)
    }

    fn attempt(&mut self, s: &Sequent) -> Result<Option<ProofTree>, Exhausted> {
        let leaf = |rule| Ok(Some(ProofTree::leaf(s.clone(), rule)));
        if self.on(RuleKind::Hypothesis) {
            if let Some(i) = self.hyps.iter().position(|h| h == s) {
                return leaf(Rule::Hypothesis(i));
            }
        }
        if self.on(RuleKind::TopR) && s.contains(&Formula::Top) {
            return leaf(Rule::TopR);
        }
        if self.on(RuleKind::OneR) && s.formulas() == [Formula::One] {
            return leaf(Rule::OneR);
        }
        let fs = s.formulas();
        if self.on(RuleKind::Axiom) && fs.len() == 2 && fs[0].dualize() == fs[1] {
            return leaf(Rule::Axiom);
        }

        // invertible rules: commit to the first applicable one
        for f in fs {
            let rest = || s.without(f).expect("member");
            match f {
                Formula::Par(a, b) if self.on(RuleKind::ParR) => {
                    let premise = rest().with_formula((**a).clone()).with_formula((**b).clone());
                    return Ok(self.prove(&premise)?.map(|p| ProofTree::node(s.clone(), Rule::ParR, vec![p])));
                }
                Formula::Bot if self.on(RuleKind::BotR) => {
                    return Ok(self.prove(&rest())?.map(|p| ProofTree::node(s.clone(), Rule::BotR, vec![p])));
                }
                Formula::With(a, b) if self.on(RuleKind::WithR) => {
                    let Some(left) = self.prove(&rest().with_formula((**a).clone()))? else {
                        return Ok(None);
                    };
                    let Some(right) = self.prove(&rest().with_formula((**b).clone()))? else {
                        return Ok(None);
                    };
                    return Ok(Some(ProofTree::node(s.clone(), Rule::WithR, vec![left, right])));
                }
                _ => {}
            }
        }

        let mut tried: Vec<&Formula> = Vec::new();
        for f in fs {
            if tried.contains(&f) {
                continue;
            }
            tried.push(f);
            let rest = s.without(f).expect("member");
            match f {
                Formula::Plus(a, b) => {
                    for (rule, kind, chosen) in [(Rule::PlusR1, RuleKind::PlusR1, a), (Rule::PlusR2, RuleKind::PlusR2, b)] {
                        if !self.on(kind) {
                            continue;
                        }
                        if let Some(p) = self.prove(&rest.with_formula((**chosen).clone()))? {
                            return Ok(Some(ProofTree::node(s.clone(), rule, vec![p])));
                        }
                    }
                }
                Formula::Tensor(a, b) if self.on(RuleKind::TensorR) => {
                    if let Some(t) = self.tensor_splits(s, &rest, a, b)? {
                        return Ok(Some(t));
                    }
                }
                _ => {}
            }
        }

        if self.on(RuleKind::Thinning) {
            let mut tried: Vec<&Formula> = Vec::new();
            for f in fs {
                if tried.contains(&f) {
                    continue;
                }
                tried.push(f);
                if let Some(p) = self.prove(&s.without(f).expect("member"))? {
                    return Ok(Some(ProofTree::node(s.clone(), Rule::Thinning, vec![p])));
                }
            }
        }
        Ok(None)
    }

    fn tensor_splits(
        &mut self,
        s: &Sequent,
        rest: &Sequent,
        a: &Formula,
        b: &Formula,
    ) -> Result<Option<ProofTree>, Exhausted> {
        let ctx = rest.formulas();
        let mut seen = BTreeSet::new();
        for mask in 0u64..(1u64 << ctx.len()) {
            let (mut left, mut right) = (Vec::new(), Vec::new());
            for (i, g) in ctx.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    left.push(g.clone());
                } else {
                    right.push(g.clone());
                }
            }
            let left = Sequent::new(left.into_iter().chain([a.clone()]));
            let right = Sequent::new(right.into_iter().chain([b.clone()]));
            if !seen.insert((left.clone(), right.clone())) {
                continue;
            }
            let Some(lp) = self.prove(&left)? else { continue };
            let Some(rp) = self.prove(&right)? else { continue };
            return Ok(Some(ProofTree::node(s.clone(), Rule::TensorR, vec![lp, rp])));
        }
        Ok(None)
    }
}

/// Hypotheses for deriving `|- A, Gamma` by contraction: `|- A, A, Gamma`
/// and `|- A^ + A`.
pub fn note6_hypotheses(a: &Formula, gamma: &[Formula]) -> Vec<Sequent> {
    let a = a.normalize();
    let doubled = Sequent::new([a.clone(), a.clone()].into_iter().chain(gamma.iter().map(Formula::normalize)));
    vec![doubled, Sequent::new([Formula::plus(a.dualize(), a)])]
}

/// Contraction from thinning plus excluded middle: thin the axiom
/// `|- A^, A` up to `|- A^, A, Gamma`, combine it with `|- A, A, Gamma` by
/// the with rule into `|- A & A^, A, Gamma`, then cut against
/// `|- A^ + A` (the dual of `A & A^`). Hypothesis indices follow
/// [`note6_hypotheses`].
pub fn note6_proof(a: &Formula, gamma: &[Formula], enabled: &RuleSet) -> Result<ProofTree, ProofError> {
    if !enabled.contains(RuleKind::Thinning) {
        return Err(ProofError::at(&[], ProofErrorKind::ThinningDisabled));
    }
    let a = a.normalize();
    let a_dual = a.dualize();
    let gamma: Vec<Formula> = gamma.iter().map(Formula::normalize).collect();
    let hyps = note6_hypotheses(&a, &gamma);

    let mut thinned = ProofTree::leaf(Sequent::new([a_dual.clone(), a.clone()]), Rule::Axiom);
    for g in &gamma {
        let concl = thinned.conclusion.with_formula(g.clone());
        thinned = ProofTree::node(concl, Rule::Thinning, vec![thinned]);
    }
    let doubled = ProofTree::leaf(hyps[0].clone(), Rule::Hypothesis(0));
    let with = Formula::with(a.clone(), a_dual);
    let context = Sequent::new(std::iter::once(a.clone()).chain(gamma.iter().cloned()));
    let combined = ProofTree::node(context.with_formula(with), Rule::WithR, vec![doubled, thinned]);
    let excluded_middle = ProofTree::leaf(hyps[1].clone(), Rule::Hypothesis(1));
    Ok(ProofTree::node(context, Rule::Cut, vec![combined, excluded_middle]))
}
