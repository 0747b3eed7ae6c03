//! Linear-logic formulas: syntax tree, parser, printer, negation normal form
//! and one-sided sequents.
//!
//! Surface grammar, loosest binding first:
//!
//! | syntax   | connective | assoc |
//! |----------|------------|-------|
//! | `a -o b` | ⊸          | right |
//! | `a @ b`  | ⅋          | left  |
//! | `a + b`  | ⊕          | left  |
//! | `a & b`  | &          | left  |
//! | `a * b`  | ⊗          | left  |
//! | `!a` `?a`| ! ?        | prefix |
//! | `a^`     | ⊥ (dual)   | postfix |
//!
//! Constants are `1`, `0`, `top`, `bot`; the Unicode symbols ⊗ ⅋ ⊕ ⊸ ⊤ ⊥ are
//! accepted as aliases. A `⊥` in operand position is the constant, after an
//! operand it is the postfix dual.

use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    Dual(Box<Formula>),
    Tensor(Box<Formula>, Box<Formula>),
    Par(Box<Formula>, Box<Formula>),
    With(Box<Formula>, Box<Formula>),
    Plus(Box<Formula>, Box<Formula>),
    Lolli(Box<Formula>, Box<Formula>),
    Bang(Box<Formula>),
    Quest(Box<Formula>),
    Top,
    Zero,
    One,
    Bot,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unknown token {found:?} at position {pos}")]
    UnknownToken { pos: usize, found: String },
    #[error("syntax error at position {pos}: expected {expected}, found {found}")]
    Syntax {
        pos: usize,
        expected: &'static str,
        found: String,
    },
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn dual(f: Formula) -> Self {
        Formula::Dual(Box::new(f))
    }

    pub fn tensor(a: Formula, b: Formula) -> Self {
        Formula::Tensor(Box::new(a), Box::new(b))
    }

    pub fn par(a: Formula, b: Formula) -> Self {
        Formula::Par(Box::new(a), Box::new(b))
    }

    pub fn with(a: Formula, b: Formula) -> Self {
        Formula::With(Box::new(a), Box::new(b))
    }

    pub fn plus(a: Formula, b: Formula) -> Self {
        Formula::Plus(Box::new(a), Box::new(b))
    }

    pub fn lolli(a: Formula, b: Formula) -> Self {
        Formula::Lolli(Box::new(a), Box::new(b))
    }

    pub fn bang(f: Formula) -> Self {
        Formula::Bang(Box::new(f))
    }

    pub fn quest(f: Formula) -> Self {
        Formula::Quest(Box::new(f))
    }

    /// Negation normal form: duals only on atoms, no `-o`.
    pub fn normalize(&self) -> Formula {
        nnf(self, false)
    }

    /// The linear negation of `self`, in negation normal form.
    pub fn dualize(&self) -> Formula {
        nnf(self, true)
    }

    pub fn is_nnf(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::Top | Formula::Zero | Formula::One | Formula::Bot => true,
            Formula::Dual(inner) => matches!(**inner, Formula::Atom(_)),
            Formula::Lolli(..) => false,
            Formula::Tensor(a, b) | Formula::Par(a, b) | Formula::With(a, b) | Formula::Plus(a, b) => {
                a.is_nnf() && b.is_nnf()
            }
            Formula::Bang(a) | Formula::Quest(a) => a.is_nnf(),
        }
    }

    /// Atom names in left-to-right order of occurrence (with repetitions).
    pub fn atom_occurrences(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    /// Distinct atom names, sorted.
    pub fn atoms(&self) -> Vec<String> {
        let mut names: Vec<String> = self.atom_occurrences().into_iter().map(str::to_owned).collect();
        names.sort();
        names.dedup();
        names
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Formula::Atom(name) => out.push(name),
            Formula::Dual(a) | Formula::Bang(a) | Formula::Quest(a) => a.collect_atoms(out),
            Formula::Tensor(a, b)
            | Formula::Par(a, b)
            | Formula::With(a, b)
            | Formula::Plus(a, b)
            | Formula::Lolli(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Formula::Top | Formula::Zero | Formula::One | Formula::Bot => {}
        }
    }

    /// Number of connectives (everything but atoms and constants).
    pub fn connective_count(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Top | Formula::Zero | Formula::One | Formula::Bot => 0,
            Formula::Dual(a) | Formula::Bang(a) | Formula::Quest(a) => 1 + a.connective_count(),
            Formula::Tensor(a, b)
            | Formula::Par(a, b)
            | Formula::With(a, b)
            | Formula::Plus(a, b)
            | Formula::Lolli(a, b) => 1 + a.connective_count() + b.connective_count(),
        }
    }

    /// Symbol count, used as the termination measure in proof search.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Top | Formula::Zero | Formula::One | Formula::Bot => 1,
            Formula::Dual(a) | Formula::Bang(a) | Formula::Quest(a) => 1 + a.size(),
            Formula::Tensor(a, b)
            | Formula::Par(a, b)
            | Formula::With(a, b)
            | Formula::Plus(a, b)
            | Formula::Lolli(a, b) => 1 + a.size() + b.size(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Lolli(..) => 1,
            Formula::Par(..) => 2,
            Formula::Plus(..) => 3,
            Formula::With(..) => 4,
            Formula::Tensor(..) => 5,
            Formula::Bang(_) | Formula::Quest(_) => 6,
            Formula::Dual(_) => 7,
            _ => 8,
        }
    }
}

fn nnf(f: &Formula, negate: bool) -> Formula {
    use Formula::*;
    match (f, negate) {
        (Atom(_), false) => f.clone(),
        (Atom(_), true) => Formula::dual(f.clone()),
        (Dual(a), neg) => nnf(a, !neg),
        (Tensor(a, b), false) => Formula::tensor(nnf(a, false), nnf(b, false)),
        (Tensor(a, b), true) => Formula::par(nnf(a, true), nnf(b, true)),
        (Par(a, b), false) => Formula::par(nnf(a, false), nnf(b, false)),
        (Par(a, b), true) => Formula::tensor(nnf(a, true), nnf(b, true)),
        (With(a, b), false) => Formula::with(nnf(a, false), nnf(b, false)),
        (With(a, b), true) => Formula::plus(nnf(a, true), nnf(b, true)),
        (Plus(a, b), false) => Formula::plus(nnf(a, false), nnf(b, false)),
        (Plus(a, b), true) => Formula::with(nnf(a, true), nnf(b, true)),
        // a -o b = a^ @ b, and (a^ @ b)^ = a * b^
        (Lolli(a, b), false) => Formula::par(nnf(a, true), nnf(b, false)),
        (Lolli(a, b), true) => Formula::tensor(nnf(a, false), nnf(b, true)),
        (Bang(a), false) => Formula::bang(nnf(a, false)),
        (Bang(a), true) => Formula::quest(nnf(a, true)),
        (Quest(a), false) => Formula::quest(nnf(a, false)),
        (Quest(a), true) => Formula::bang(nnf(a, true)),
        (Top, false) | (Zero, true) => Top,
        (Zero, false) | (Top, true) => Zero,
        (One, false) | (Bot, true) => One,
        (Bot, false) | (One, true) => Bot,
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(f: &mut fmt::Formatter<'_>, inner: &Formula, parens: bool) -> fmt::Result {
            if parens {
                write!(f, "({inner})")
            } else {
                write!(f, "{inner}")
            }
        }
        let prec = self.precedence();
        match self {
            Formula::Atom(name) => f.write_str(name),
            Formula::Top => f.write_str("top"),
            Formula::Zero => f.write_str("0"),
            Formula::One => f.write_str("1"),
            Formula::Bot => f.write_str("bot"),
            Formula::Dual(a) => {
                wrap(f, a, a.precedence() < prec)?;
                f.write_str("^")
            }
            Formula::Bang(a) | Formula::Quest(a) => {
                f.write_str(if matches!(self, Formula::Bang(_)) { "!" } else { "?" })?;
                wrap(f, a, a.precedence() < prec)
            }
            Formula::Lolli(a, b) => {
                wrap(f, a, a.precedence() <= prec)?;
                f.write_str(" -o ")?;
                wrap(f, b, b.precedence() < prec)
            }
            Formula::Tensor(a, b) | Formula::Par(a, b) | Formula::With(a, b) | Formula::Plus(a, b) => {
                let op = match self {
                    Formula::Tensor(..) => " * ",
                    Formula::Par(..) => " @ ",
                    Formula::With(..) => " & ",
                    _ => " + ",
                };
                wrap(f, a, a.precedence() < prec)?;
                f.write_str(op)?;
                wrap(f, b, b.precedence() <= prec)
            }
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Atom(String),
    One,
    Zero,
    Top,
    Bot,
    // `⊥`: constant in operand position, dual in postfix position
    BotSym,
    Caret,
    Bang,
    Quest,
    Star,
    Amp,
    Plus,
    At,
    Lolli,
    LParen,
    RParen,
}

fn describe(tok: Option<&(usize, Tok)>) -> String {
    match tok {
        None => "end of input".to_owned(),
        Some((_, t)) => match t {
            Tok::Atom(name) => format!("atom `{name}`"),
            other => format!("{other:?}"),
        },
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        let simple = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '1' => Some(Tok::One),
            '0' => Some(Tok::Zero),
            '^' => Some(Tok::Caret),
            '!' => Some(Tok::Bang),
            '?' => Some(Tok::Quest),
            '*' | '⊗' => Some(Tok::Star),
            '&' => Some(Tok::Amp),
            '+' | '⊕' => Some(Tok::Plus),
            '@' | '⅋' => Some(Tok::At),
            '⊸' => Some(Tok::Lolli),
            '⊤' => Some(Tok::Top),
            '⊥' => Some(Tok::BotSym),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push((pos, tok));
            i += 1;
            continue;
        }
        if c == '-' {
            if matches!(chars.get(i + 1), Some((_, 'o'))) {
                out.push((pos, Tok::Lolli));
                i += 2;
                continue;
            }
            return Err(ParseError::UnknownToken { pos, found: "-".into() });
        }
        if c.is_ascii_lowercase() {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_lowercase() || chars[i].1.is_ascii_digit() || chars[i].1 == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().map(|(_, c)| c).collect();
            let tok = match word.as_str() {
                "top" => Tok::Top,
                "bot" => Tok::Bot,
                _ => Tok::Atom(word),
            };
            out.push((pos, tok));
            continue;
        }
        return Err(ParseError::UnknownToken { pos, found: c.to_string() });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.len, |(p, _)| *p)
    }

    fn error(&self, expected: &'static str) -> ParseError {
        ParseError::Syntax {
            pos: self.pos(),
            expected,
            found: describe(self.toks.get(self.at)),
        }
    }

    fn lolli(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.binary(0)?;
        if self.peek() == Some(&Tok::Lolli) {
            self.at += 1;
            let rhs = self.lolli()?;
            return Ok(Formula::lolli(lhs, rhs));
        }
        Ok(lhs)
    }

    // levels 0..4: par, plus, with, tensor
    fn binary(&mut self, level: usize) -> Result<Formula, ParseError> {
        const OPS: [Tok; 4] = [Tok::At, Tok::Plus, Tok::Amp, Tok::Star];
        if level == OPS.len() {
            return self.prefix();
        }
        let mut lhs = self.binary(level + 1)?;
        while self.peek() == Some(&OPS[level]) {
            self.at += 1;
            let rhs = self.binary(level + 1)?;
            lhs = match level {
                0 => Formula::par(lhs, rhs),
                1 => Formula::plus(lhs, rhs),
                2 => Formula::with(lhs, rhs),
                _ => Formula::tensor(lhs, rhs),
            };
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.at += 1;
                Ok(Formula::bang(self.prefix()?))
            }
            Some(Tok::Quest) => {
                self.at += 1;
                Ok(Formula::quest(self.prefix()?))
            }
            _ => self.postfix(),
        }
    }

    fn postfix(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.primary()?;
        while matches!(self.peek(), Some(Tok::Caret) | Some(Tok::BotSym)) {
            self.at += 1;
            f = Formula::dual(f);
        }
        Ok(f)
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let f = match self.peek() {
            Some(Tok::Atom(name)) => Formula::Atom(name.clone()),
            Some(Tok::One) => Formula::One,
            Some(Tok::Zero) => Formula::Zero,
            Some(Tok::Top) => Formula::Top,
            Some(Tok::Bot) | Some(Tok::BotSym) => Formula::Bot,
            Some(Tok::LParen) => {
                self.at += 1;
                let inner = self.lolli()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.error("`)`"));
                }
                inner
            }
            _ => return Err(self.error("a formula")),
        };
        self.at += 1;
        Ok(f)
    }
}

pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = tokenize(text)?;
    let mut parser = Parser { toks, at: 0, len: text.len() };
    let f = parser.lolli()?;
    if parser.at != parser.toks.len() {
        return Err(parser.error("end of input"));
    }
    Ok(f)
}

/// A one-sided sequent `|- A1, ..., An`, identified up to permutation.
///
/// Members are kept sorted by rendered text, so derived equality is
/// multiset equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequent {
    formulas: Vec<Formula>,
}

impl Sequent {
    pub fn new(formulas: impl IntoIterator<Item = Formula>) -> Self {
        let mut keyed: Vec<(String, Formula)> = formulas.into_iter().map(|f| (f.to_string(), f)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        Sequent {
            formulas: keyed.into_iter().map(|(_, f)| f).collect(),
        }
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.formulas.contains(f)
    }

    /// The sequent with one occurrence of `f` removed, if present.
    pub fn without(&self, f: &Formula) -> Option<Sequent> {
        let idx = self.formulas.iter().position(|g| g == f)?;
        let mut formulas = self.formulas.clone();
        formulas.remove(idx);
        Some(Sequent { formulas })
    }

    pub fn with_formula(&self, f: Formula) -> Sequent {
        Sequent::new(self.formulas.iter().cloned().chain(std::iter::once(f)))
    }

    pub fn union(&self, other: &Sequent) -> Sequent {
        Sequent::new(self.formulas.iter().chain(other.formulas.iter()).cloned())
    }

    pub fn normalize(&self) -> Sequent {
        Sequent::new(self.formulas.iter().map(Formula::normalize))
    }

    /// Right-nested par of the members in canonical order; the empty sequent is `bot`.
    pub fn to_formula(&self) -> Formula {
        let mut iter = self.formulas.iter().rev();
        let Some(last) = iter.next() else {
            return Formula::Bot;
        };
        iter.fold(last.clone(), |acc, f| Formula::par(f.clone(), acc))
    }

    /// `hyps |- concs` as the one-sided `|- hyps^, concs`.
    pub fn from_two_sided(hyps: &[Formula], concs: &[Formula]) -> Sequent {
        Sequent::new(hyps.iter().map(Formula::dualize).chain(concs.iter().cloned()))
    }

    /// Parses `A, B |- C, D` (two-sided) or `A, B` / `|- A, B` (one-sided).
    pub fn parse(text: &str) -> Result<Sequent, ParseError> {
        fn list(text: &str, offset: usize) -> Result<Vec<Formula>, ParseError> {
            if text.trim().is_empty() {
                return Ok(Vec::new());
            }
            let mut out = Vec::new();
            let mut start = 0;
            for piece in text.split(',') {
                out.push(parse(piece).map_err(|e| shift(e, offset + start))?);
                start += piece.len() + 1;
            }
            Ok(out)
        }
        match text.find("|-").or_else(|| text.find('⊢')) {
            Some(idx) => {
                let turnstile = if text[idx..].starts_with("|-") { 2 } else { '⊢'.len_utf8() };
                let hyps = list(&text[..idx], 0)?;
                let concs = list(&text[idx + turnstile..], idx + turnstile)?;
                Ok(Sequent::from_two_sided(&hyps, &concs))
            }
            None => Ok(Sequent::new(list(text, 0)?)),
        }
    }
}

fn shift(e: ParseError, by: usize) -> ParseError {
    match e {
        ParseError::UnknownToken { pos, found } => ParseError::UnknownToken { pos: pos + by, found },
        ParseError::Syntax { pos, expected, found } => ParseError::Syntax {
            pos: pos + by,
            expected,
            found,
        },
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("|-")?;
        for (i, g) in self.formulas.iter().enumerate() {
            f.write_str(if i == 0 { " " } else { ", " })?;
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> Formula {
        Formula::atom("a")
    }
    fn b() -> Formula {
        Formula::atom("b")
    }

    #[test]
    fn parses_grammar_productions() {
        assert_eq!(parse("a -o b").unwrap(), Formula::lolli(a(), b()));
        assert_eq!(parse("a^ @ b").unwrap(), Formula::par(Formula::dual(a()), b()));
        assert_eq!(parse("a ⊸ b").unwrap(), parse("a -o b").unwrap());
        assert_eq!(parse("a⊥ ⅋ b").unwrap(), parse("a^ @ b").unwrap());
        assert_eq!(parse("⊥").unwrap(), Formula::Bot);
        assert_eq!(parse("⊥⊥").unwrap(), Formula::dual(Formula::Bot));
    }

    #[test]
    fn three_bit_example() {
        let f = parse("((a&b)+(c&d)) & ((e&f)+(g&h))").unwrap();
        let w = |x: &str, y: &str| Formula::with(Formula::atom(x), Formula::atom(y));
        let expected = Formula::with(
            Formula::plus(w("a", "b"), w("c", "d")),
            Formula::plus(w("e", "f"), w("g", "h")),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(
            parse("a * b & c + d @ e").unwrap(),
            Formula::par(
                Formula::plus(Formula::with(Formula::tensor(a(), b()), Formula::atom("c")), Formula::atom("d")),
                Formula::atom("e")
            )
        );
        assert_eq!(
            parse("a -o b -o a").unwrap(),
            Formula::lolli(a(), Formula::lolli(b(), a()))
        );
        assert_eq!(parse("a * b * a").unwrap(), Formula::tensor(Formula::tensor(a(), b()), a()));
        assert_eq!(parse("!a^").unwrap(), Formula::bang(Formula::dual(a())));
    }

    #[test]
    fn parse_errors_carry_positions() {
        assert_eq!(
            parse("a $ b"),
            Err(ParseError::UnknownToken { pos: 2, found: "$".into() })
        );
        match parse("a * ") {
            Err(ParseError::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("(a"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("a b"), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(parse("A"), Err(ParseError::UnknownToken { .. })));
    }

    #[test]
    fn renders_minimal_parentheses() {
        assert_eq!(Formula::Top.to_string(), "top");
        assert_eq!(Formula::lolli(a(), b()).to_string(), "a -o b");
        assert_eq!(Formula::dual(Formula::tensor(a(), b())).to_string(), "(a * b)^");
        assert_eq!(Formula::dual(Formula::bang(a())).to_string(), "(!a)^");
        assert_eq!(Formula::tensor(a(), Formula::tensor(b(), a())).to_string(), "a * (b * a)");
        assert_eq!(Formula::lolli(Formula::lolli(a(), b()), a()).to_string(), "(a -o b) -o a");
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(Formula::dual(Formula::dual(a())).normalize(), a());
        assert_eq!(
            Formula::dual(Formula::plus(a(), b())).normalize(),
            Formula::with(Formula::dual(a()), Formula::dual(b()))
        );
        assert_eq!(
            Formula::lolli(a(), b()).normalize(),
            Formula::par(Formula::dual(a()), b())
        );
        assert_eq!(Formula::dual(Formula::bang(a())).normalize(), Formula::quest(Formula::dual(a())));
    }

    #[test]
    fn dualize_examples() {
        assert_eq!(Formula::One.dualize(), Formula::Bot);
        assert_eq!(Formula::Top.dualize(), Formula::Zero);
        assert_eq!(a().dualize(), Formula::dual(a()));
        assert_eq!(
            Formula::with(a(), b()).dualize(),
            Formula::plus(Formula::dual(a()), Formula::dual(b()))
        );
    }

    #[test]
    fn sequent_to_formula() {
        assert_eq!(Sequent::new([a()]).to_formula(), a());
        assert_eq!(Sequent::new([b(), a()]).to_formula(), Formula::par(a(), b()));
        assert_eq!(Sequent::default().to_formula(), Formula::Bot);
    }

    #[test]
    fn two_sided_to_one_sided() {
        assert_eq!(
            Sequent::from_two_sided(&[a(), b()], &[a()]),
            Sequent::new([Formula::dual(a()), Formula::dual(b()), a()])
        );
        assert_eq!(Sequent::from_two_sided(&[], &[a()]), Sequent::new([a()]));
        assert_eq!(Sequent::from_two_sided(&[a()], &[]), Sequent::new([Formula::dual(a())]));
        assert_eq!(Sequent::parse("a, b |- a").unwrap(), Sequent::from_two_sided(&[a(), b()], &[a()]));
        assert_eq!(Sequent::parse("a^, a").unwrap(), Sequent::new([a(), Formula::dual(a())]));
        assert_eq!(Sequent::parse("|-").unwrap(), Sequent::default());
    }

    #[test]
    fn sequent_display() {
        assert_eq!(Sequent::new([a(), Formula::dual(a())]).to_string(), "|- a, a^");
    }
}
