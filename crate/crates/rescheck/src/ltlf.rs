//! LTLf formulas over a partitioned atom set.
//!
//! Surface syntax: `true false ! & | -> X WX U F G`, parentheses and C-style
//! identifiers (a trailing run of `'` is allowed for primed atoms).
//! Precedence from tightest: `!`, then `X WX F G`, then `U` (right
//! associative), `&`, `|`, `->` (right associative).
//!
//! [`parse`] expands every abbreviation into the core grammar
//! (`true false atom ! & X U`); [`render`] folds the usual patterns back
//! into `| -> WX F G`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::strategies::History;

/// A letter over a single track: bit `i` is agent atom `i`, bit
/// `agent_count + j` is environment atom `j`.
pub type Letter = u32;

/// Upper bound on the number of atoms of a partition.
pub const MAX_ATOMS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("the atom partition is empty")]
    Empty,
    #[error("atom `{0}` is declared more than once")]
    Duplicate(String),
    #[error("`{0}` is not a valid atom name")]
    BadName(String),
    #[error("{0} atoms declared, at most {MAX_ATOMS} are supported")]
    TooMany(usize),
}

/// Agent atoms 𝒴 and environment atoms 𝒳, disjoint and in a fixed order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AtomPartition {
    agent: Vec<String>,
    env: Vec<String>,
}

impl AtomPartition {
    pub fn new<S: AsRef<str>>(agent: &[S], env: &[S]) -> Result<Self, PartitionError> {
        let agent: Vec<String> = agent.iter().map(|s| s.as_ref().to_string()).collect();
        let env: Vec<String> = env.iter().map(|s| s.as_ref().to_string()).collect();
        if agent.is_empty() && env.is_empty() {
            return Err(PartitionError::Empty);
        }
        if agent.len() + env.len() > MAX_ATOMS {
            return Err(PartitionError::TooMany(agent.len() + env.len()));
        }
        let mut seen = HashSet::new();
        for name in agent.iter().chain(env.iter()) {
            if !is_atom_name(name) {
                return Err(PartitionError::BadName(name.clone()));
            }
            if !seen.insert(name.as_str()) {
                return Err(PartitionError::Duplicate(name.clone()));
            }
        }
        Ok(AtomPartition { agent, env })
    }

    pub fn agent_atoms(&self) -> &[String] {
        &self.agent
    }

    pub fn env_atoms(&self) -> &[String] {
        &self.env
    }

    pub fn agent_count(&self) -> usize {
        self.agent.len()
    }

    pub fn env_count(&self) -> usize {
        self.env.len()
    }

    /// Number of bits of a single-track letter.
    pub fn width(&self) -> usize {
        self.agent.len() + self.env.len()
    }

    pub fn num_letters(&self) -> usize {
        1 << self.width()
    }

    pub fn num_agent_letters(&self) -> usize {
        1 << self.agent.len()
    }

    pub fn num_env_letters(&self) -> usize {
        1 << self.env.len()
    }

    pub fn agent_mask(&self) -> Letter {
        (1 << self.agent.len()) - 1
    }

    pub fn env_mask(&self) -> Letter {
        ((1 << self.width()) - 1) & !self.agent_mask()
    }

    /// Bit index of an atom in the letter encoding.
    pub fn bit_of(&self, name: &str) -> Option<usize> {
        if let Some(i) = self.agent.iter().position(|a| a == name) {
            return Some(i);
        }
        self.env
            .iter()
            .position(|a| a == name)
            .map(|j| self.agent.len() + j)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.bit_of(name).is_some()
    }

    pub fn is_agent(&self, name: &str) -> bool {
        self.agent.iter().any(|a| a == name)
    }

    /// Joins an agent part and an environment part into one letter.
    pub fn letter(&self, agent: Letter, env: Letter) -> Letter {
        agent | (env << self.agent.len())
    }

    /// Splits a letter into its agent and environment parts.
    pub fn split(&self, letter: Letter) -> (Letter, Letter) {
        (letter & self.agent_mask(), letter >> self.agent.len())
    }

    /// The same partition with every atom renamed `a` to `a'`.
    pub fn primed(&self) -> AtomPartition {
        AtomPartition {
            agent: self.agent.iter().map(|a| format!("{a}'")).collect(),
            env: self.env.iter().map(|a| format!("{a}'")).collect(),
        }
    }

    /// Renders a letter as `{w, !r}`.
    pub fn render_letter(&self, letter: Letter) -> String {
        let parts: Vec<String> = self
            .agent
            .iter()
            .chain(self.env.iter())
            .enumerate()
            .map(|(i, name)| {
                if letter & (1 << i) != 0 {
                    name.clone()
                } else {
                    format!("!{name}")
                }
            })
            .collect();
        format!("{{{}}}", parts.join(", "))
    }

    pub fn render_trace(&self, trace: &[Letter]) -> String {
        trace
            .iter()
            .map(|&l| self.render_letter(l))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn is_atom_name(s: &str) -> bool {
    let core = s.trim_end_matches('\'');
    let mut chars = core.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !is_keyword(core)
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "true" | "false" | "X" | "WX" | "U" | "F" | "G")
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    WeakNext(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }

    pub fn weak_next(f: Formula) -> Formula {
        Formula::WeakNext(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn eventually(f: Formula) -> Formula {
        Formula::Eventually(Box::new(f))
    }

    pub fn always(f: Formula) -> Formula {
        Formula::Always(Box::new(f))
    }

    /// Conjunction of a list; `true` when empty.
    pub fn conj(items: Vec<Formula>) -> Formula {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    /// Rewrites every abbreviation into `true false atom ! & X U`.
    pub fn expand(&self) -> Formula {
        use Formula::*;
        match self {
            True => True,
            False => False,
            Atom(a) => Atom(a.clone()),
            Not(f) => Formula::not(f.expand()),
            And(a, b) => Formula::and(a.expand(), b.expand()),
            Or(a, b) => Formula::not(Formula::and(
                Formula::not(a.expand()),
                Formula::not(b.expand()),
            )),
            Implies(a, b) => Formula::not(Formula::and(a.expand(), Formula::not(b.expand()))),
            Next(f) => Formula::next(f.expand()),
            WeakNext(f) => Formula::not(Formula::next(Formula::not(f.expand()))),
            Until(a, b) => Formula::until(a.expand(), b.expand()),
            Eventually(f) => Formula::until(True, f.expand()),
            Always(f) => Formula::not(Formula::until(True, Formula::not(f.expand()))),
        }
    }

    pub fn is_core(&self) -> bool {
        use Formula::*;
        match self {
            True | False | Atom(_) => true,
            Not(f) | Next(f) => f.is_core(),
            And(a, b) | Until(a, b) => a.is_core() && b.is_core(),
            _ => false,
        }
    }

    /// Number of distinct subformulas.
    pub fn size(&self) -> usize {
        let mut seen = HashSet::new();
        self.collect_subformulas(&mut seen);
        seen.len()
    }

    fn collect_subformulas<'a>(&'a self, seen: &mut HashSet<&'a Formula>) {
        if !seen.insert(self) {
            return;
        }
        for child in self.children() {
            child.collect_subformulas(seen);
        }
    }

    pub fn children(&self) -> Vec<&Formula> {
        use Formula::*;
        match self {
            True | False | Atom(_) => vec![],
            Not(f) | Next(f) | WeakNext(f) | Eventually(f) | Always(f) => vec![f],
            And(a, b) | Or(a, b) | Implies(a, b) | Until(a, b) => vec![a, b],
        }
    }

    /// Atom names in order of first occurrence.
    pub fn atoms(&self) -> Vec<String> {
        fn walk(f: &Formula, out: &mut Vec<String>) {
            if let Formula::Atom(a) = f {
                if !out.contains(a) {
                    out.push(a.clone());
                }
            }
            for c in f.children() {
                walk(c, out);
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    pub fn check_atoms(&self, p: &AtomPartition) -> Result<(), FormulaError> {
        match self.atoms().into_iter().find(|a| !p.contains(a)) {
            Some(a) => Err(FormulaError::UndeclaredAtom(a)),
            None => Ok(()),
        }
    }

    fn map_atoms(&self, f: &dyn Fn(&str) -> String) -> Formula {
        use Formula::*;
        let m = |g: &Formula| Box::new(g.map_atoms(f));
        match self {
            True => True,
            False => False,
            Atom(a) => Atom(f(a)),
            Not(g) => Not(m(g)),
            And(a, b) => And(m(a), m(b)),
            Or(a, b) => Or(m(a), m(b)),
            Implies(a, b) => Implies(m(a), m(b)),
            Next(g) => Next(m(g)),
            WeakNext(g) => WeakNext(m(g)),
            Until(a, b) => Until(m(a), m(b)),
            Eventually(g) => Eventually(m(g)),
            Always(g) => Always(m(g)),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("atom `{0}` is not declared in the partition")]
    UndeclaredAtom(String),
    #[error("history is empty")]
    EmptyHistory,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    True,
    False,
    Ident(String),
    Not,
    And,
    Or,
    Implies,
    Next,
    WeakNext,
    Until,
    Eventually,
    Always,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize, usize)>, FormulaError> {
        let mut out = Vec::new();
        loop {
            while matches!(self.peek(), Some(c) if c.is_whitespace()) {
                self.bump();
            }
            let (line, column) = (self.line, self.column);
            let Some(c) = self.bump() else {
                out.push((Tok::End, line, column));
                return Ok(out);
            };
            let tok = match c {
                '!' => Tok::Not,
                '&' => Tok::And,
                '|' => Tok::Or,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '-' if self.peek() == Some('>') => {
                    self.bump();
                    Tok::Implies
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut word = c.to_string();
                    while matches!(self.peek(), Some(d) if d.is_ascii_alphanumeric() || d == '_')
                    {
                        word.push(self.bump().unwrap());
                    }
                    while self.peek() == Some('\'') {
                        word.push(self.bump().unwrap());
                    }
                    match word.as_str() {
                        "true" => Tok::True,
                        "false" => Tok::False,
                        "X" => Tok::Next,
                        "WX" => Tok::WeakNext,
                        "U" => Tok::Until,
                        "F" => Tok::Eventually,
                        "G" => Tok::Always,
                        _ => Tok::Ident(word),
                    }
                }
                other => {
                    return Err(FormulaError::Syntax {
                        line,
                        column,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            };
            out.push((tok, line, column));
        }
    }
}

struct Parser<'p> {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    partition: &'p AtomPartition,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn error(&self, message: impl Into<String>) -> FormulaError {
        let (_, line, column) = self.toks[self.pos];
        FormulaError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn implication(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Implies {
            self.pos += 1;
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.pos += 1;
            lhs = Formula::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.until()?;
        while *self.peek() == Tok::And {
            self.pos += 1;
            lhs = Formula::and(lhs, self.until()?);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.unary()?;
        if *self.peek() == Tok::Until {
            self.pos += 1;
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        let wrap: fn(Formula) -> Formula = match self.peek() {
            Tok::Not => Formula::not,
            Tok::Next => Formula::next,
            Tok::WeakNext => Formula::weak_next,
            Tok::Eventually => Formula::eventually,
            Tok::Always => Formula::always,
            _ => return self.primary(),
        };
        self.pos += 1;
        Ok(wrap(self.unary()?))
    }

    fn primary(&mut self) -> Result<Formula, FormulaError> {
        match self.peek().clone() {
            Tok::True => {
                self.pos += 1;
                Ok(Formula::True)
            }
            Tok::False => {
                self.pos += 1;
                Ok(Formula::False)
            }
            Tok::Ident(name) => {
                if !self.partition.contains(&name) {
                    return Err(FormulaError::UndeclaredAtom(name));
                }
                self.pos += 1;
                Ok(Formula::Atom(name))
            }
            Tok::LParen => {
                self.pos += 1;
                let inner = self.implication()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Tok::End => Err(self.error("unexpected end of input")),
            other => Err(self.error(format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses `text` and expands abbreviations into the core grammar.
pub fn parse(text: &str, partition: &AtomPartition) -> Result<Formula, FormulaError> {
    let lexer = Lexer {
        chars: text.char_indices().peekable(),
        line: 1,
        column: 1,
    };
    let mut parser = Parser {
        toks: lexer.tokens()?,
        pos: 0,
        partition,
    };
    let f = parser.implication()?;
    if *parser.peek() != Tok::End {
        return Err(parser.error("trailing input"));
    }
    Ok(f.expand())
}

const PREC_IMPLIES: u8 = 1;
const PREC_OR: u8 = 2;
const PREC_AND: u8 = 3;
const PREC_UNTIL: u8 = 4;
const PREC_UNARY: u8 = 5;

enum View<'a> {
    Leaf(String),
    Unary(&'static str, &'a Formula),
    Binary(&'static str, u8, bool, &'a Formula, &'a Formula),
}

// Folds core patterns back into sugar; sugar nodes render as themselves.
fn view(f: &Formula) -> View<'_> {
    use Formula::*;
    match f {
        True => View::Leaf("true".into()),
        False => View::Leaf("false".into()),
        Atom(a) => View::Leaf(a.clone()),
        Not(inner) => match inner.as_ref() {
            Until(t, g) if **t == True => match g.as_ref() {
                Not(h) => View::Unary("G ", h),
                _ => View::Unary("!", inner),
            },
            And(a, b) => match (a.as_ref(), b.as_ref()) {
                (Not(x), Not(y)) => View::Binary(" | ", PREC_OR, false, x, y),
                (x, Not(y)) => View::Binary(" -> ", PREC_IMPLIES, true, x, y),
                _ => View::Unary("!", inner),
            },
            Next(g) => match g.as_ref() {
                Not(h) => View::Unary("WX ", h),
                _ => View::Unary("!", inner),
            },
            _ => View::Unary("!", inner),
        },
        And(a, b) => View::Binary(" & ", PREC_AND, false, a, b),
        Or(a, b) => View::Binary(" | ", PREC_OR, false, a, b),
        Implies(a, b) => View::Binary(" -> ", PREC_IMPLIES, true, a, b),
        Next(g) => View::Unary("X ", g),
        WeakNext(g) => View::Unary("WX ", g),
        Until(a, b) if **a == True => View::Unary("F ", b),
        Until(a, b) => View::Binary(" U ", PREC_UNTIL, true, a, b),
        Eventually(g) => View::Unary("F ", g),
        Always(g) => View::Unary("G ", g),
    }
}

fn precedence(f: &Formula) -> u8 {
    match view(f) {
        View::Leaf(_) => u8::MAX,
        View::Unary(..) => PREC_UNARY,
        View::Binary(_, p, ..) => p,
    }
}

fn render_into(f: &Formula, min_prec: u8, out: &mut String) {
    let paren = precedence(f) < min_prec;
    if paren {
        out.push('(');
    }
    match view(f) {
        View::Leaf(s) => out.push_str(&s),
        View::Unary(op, g) => {
            out.push_str(op);
            render_into(g, PREC_UNARY, out);
        }
        View::Binary(op, p, right_assoc, a, b) => {
            let (lp, rp) = if right_assoc { (p + 1, p) } else { (p, p + 1) };
            render_into(a, lp, out);
            out.push_str(op);
            render_into(b, rp, out);
        }
    }
    if paren {
        out.push(')');
    }
}

/// Renders a formula in the surface syntax; the output re-parses to the
/// expanded form of the input.
pub fn render(f: &Formula) -> String {
    let mut out = String::new();
    render_into(f, 0, &mut out);
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("formulas are not evaluated on the empty trace")]
    EmptyTrace,
    #[error("position {index} is outside a trace of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("atom `{0}` is not declared in the partition")]
    UndeclaredAtom(String),
}

#[derive(Clone, Copy, Debug)]
enum Op {
    True,
    False,
    Atom(u32),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    Next(usize),
    WeakNext(usize),
    Until(usize, usize),
    Eventually(usize),
    Always(usize),
}

/// A formula compiled for repeated evaluation over traces of one partition.
#[derive(Clone, Debug)]
pub struct Evaluator {
    ops: Vec<Op>,
}

impl Evaluator {
    pub fn new(f: &Formula, p: &AtomPartition) -> Result<Self, EvalError> {
        let mut ops = Vec::new();
        let mut ids = HashMap::new();
        Self::compile(f, p, &mut ops, &mut ids)?;
        Ok(Evaluator { ops })
    }

    fn compile(
        f: &Formula,
        p: &AtomPartition,
        ops: &mut Vec<Op>,
        ids: &mut HashMap<Formula, usize>,
    ) -> Result<usize, EvalError> {
        if let Some(&id) = ids.get(f) {
            return Ok(id);
        }
        let mut c = |g: &Formula| Self::compile(g, p, ops, ids);
        let op = match f {
            Formula::True => Op::True,
            Formula::False => Op::False,
            Formula::Atom(a) => Op::Atom(
                p.bit_of(a)
                    .ok_or_else(|| EvalError::UndeclaredAtom(a.clone()))? as u32,
            ),
            Formula::Not(g) => Op::Not(c(g)?),
            Formula::And(a, b) => Op::And(c(a)?, c(b)?),
            Formula::Or(a, b) => Op::Or(c(a)?, c(b)?),
            Formula::Implies(a, b) => Op::Implies(c(a)?, c(b)?),
            Formula::Next(g) => Op::Next(c(g)?),
            Formula::WeakNext(g) => Op::WeakNext(c(g)?),
            Formula::Until(a, b) => Op::Until(c(a)?, c(b)?),
            Formula::Eventually(g) => Op::Eventually(c(g)?),
            Formula::Always(g) => Op::Always(c(g)?),
        };
        ops.push(op);
        ids.insert(f.clone(), ops.len() - 1);
        Ok(ops.len() - 1)
    }

    /// Truth of the formula at every position of a nonempty trace.
    pub fn eval_all(&self, trace: &[Letter]) -> Vec<bool> {
        let n = trace.len();
        let mut val = vec![false; self.ops.len() * n];
        for (k, op) in self.ops.iter().enumerate() {
            for i in (0..n).rev() {
                let at = |j: usize, pos: usize| val[j * n + pos];
                let last = i + 1 == n;
                let v = match *op {
                    Op::True => true,
                    Op::False => false,
                    Op::Atom(bit) => trace[i] & (1 << bit) != 0,
                    Op::Not(a) => !at(a, i),
                    Op::And(a, b) => at(a, i) && at(b, i),
                    Op::Or(a, b) => at(a, i) || at(b, i),
                    Op::Implies(a, b) => !at(a, i) || at(b, i),
                    Op::Next(a) => !last && at(a, i + 1),
                    Op::WeakNext(a) => last || at(a, i + 1),
                    Op::Until(a, b) => at(b, i) || (at(a, i) && !last && val[k * n + i + 1]),
                    Op::Eventually(a) => at(a, i) || (!last && val[k * n + i + 1]),
                    Op::Always(a) => at(a, i) && (last || val[k * n + i + 1]),
                };
                val[k * n + i] = v;
            }
        }
        let root = self.ops.len() - 1;
        val[root * n..(root + 1) * n].to_vec()
    }

    pub fn eval(&self, trace: &[Letter], i: usize) -> Result<bool, EvalError> {
        if trace.is_empty() {
            return Err(EvalError::EmptyTrace);
        }
        if i >= trace.len() {
            return Err(EvalError::IndexOutOfRange {
                index: i,
                len: trace.len(),
            });
        }
        Ok(self.eval_all(trace)[i])
    }

    /// Satisfaction at position 0; false on the empty trace.
    pub fn satisfies(&self, trace: &[Letter]) -> bool {
        !trace.is_empty() && self.eval_all(trace)[0]
    }
}

/// `π, i ⊨ f` on a nonempty trace.
pub fn evaluate(
    f: &Formula,
    p: &AtomPartition,
    trace: &[Letter],
    i: usize,
) -> Result<bool, EvalError> {
    Evaluator::new(f, p)?.eval(trace, i)
}

pub fn satisfies(f: &Formula, p: &AtomPartition, trace: &[Letter]) -> Result<bool, EvalError> {
    evaluate(f, p, trace, 0)
}

/// Renames every atom `a` of `f` to its primed twin `a'`.
pub fn prime_copy(f: &Formula, p: &AtomPartition) -> Formula {
    f.map_atoms(&|a| {
        debug_assert!(p.contains(a), "atom {a} outside the partition");
        format!("{a}'")
    })
}

fn literal_conj(bits: Letter, names: &[String]) -> Formula {
    Formula::conj(
        names
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let a = Formula::atom(name.clone());
                if bits & (1 << i) != 0 {
                    a
                } else {
                    Formula::not(a)
                }
            })
            .collect(),
    )
}

fn weak_next_n(f: Formula, n: usize) -> Formula {
    (0..n).fold(f, |g, _| Formula::weak_next(g))
}

/// The environment specification `E_h` pinning the environment to the
/// responses recorded in `h` whenever the agent repeats `h`'s moves.
pub fn history_to_env_spec(h: &History, p: &AtomPartition) -> Result<Formula, FormulaError> {
    if h.is_empty() {
        return Err(FormulaError::EmptyHistory);
    }
    let steps = h.steps();
    let conjuncts = (0..steps.len())
        .map(|k| {
            let guard = Formula::conj(
                (0..=k)
                    .map(|i| weak_next_n(literal_conj(steps[i].0, p.agent_atoms()), i))
                    .collect(),
            );
            let response = weak_next_n(literal_conj(steps[k].1, p.env_atoms()), k);
            Formula::implies(guard, response)
        })
        .collect();
    Ok(Formula::conj(conjuncts))
}

/// Reference formulas over the atoms `w` and `r`, used for semantic
/// cross-checks.
pub const CORPUS: [&str; 30] = [
    "true",
    "false",
    "w",
    "!r",
    "w & r",
    "w | !r",
    "w -> r",
    "X r",
    "WX r",
    "X X w",
    "WX false",
    "X WX false",
    "w U r",
    "!w U r",
    "F r",
    "G w",
    "F G r",
    "G F r",
    "G (w -> X r)",
    "G (w -> WX !w)",
    "F (w & WX false)",
    "(w U r) U X !w",
    "!(w U !r) | X X w",
    "G (r -> F w)",
    "F w & F r",
    "X WX false & F (w | r)",
    "X WX false & ((w & !r | !w & r) & X (!w & !r) | !w & !r & X (w & !r | !w & r))",
    "X WX false & G !(w | r)",
    "r U (w & X G !r)",
    "G (w | r) & F (w & r)",
];

#[cfg(test)]
mod tests {
    use super::*;

    fn wr() -> AtomPartition {
        AtomPartition::new(&["w"], &["r"]).unwrap()
    }

    fn all_traces(p: &AtomPartition, max_len: usize) -> Vec<Vec<Letter>> {
        let mut out = Vec::new();
        let mut layer: Vec<Vec<Letter>> = vec![vec![]];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for t in &layer {
                for l in 0..p.num_letters() as Letter {
                    let mut u = t.clone();
                    u.push(l);
                    next.push(u);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    #[test]
    fn partition_rejects_bad_input() {
        assert_eq!(
            AtomPartition::new::<&str>(&[], &[]),
            Err(PartitionError::Empty)
        );
        assert_eq!(
            AtomPartition::new(&["a"], &["a"]),
            Err(PartitionError::Duplicate("a".into()))
        );
        assert!(matches!(
            AtomPartition::new(&["U"], &["r"]),
            Err(PartitionError::BadName(_))
        ));
        assert!(AtomPartition::new(&["w"], &[]).is_ok());
    }

    #[test]
    fn letters_split_and_join() {
        let p = AtomPartition::new(&["a", "b"], &["c"]).unwrap();
        let l = p.letter(0b10, 0b1);
        assert_eq!(l, 0b110);
        assert_eq!(p.split(l), (0b10, 0b1));
        assert_eq!(p.render_letter(l), "{!a, b, c}");
    }

    #[test]
    fn parse_constants_and_until() {
        let p = wr();
        assert_eq!(parse("true", &p).unwrap(), Formula::True);
        assert_eq!(
            parse("w U r", &p).unwrap(),
            Formula::until(Formula::atom("w"), Formula::atom("r"))
        );
    }

    #[test]
    fn parse_expands_eventually() {
        let p = wr();
        let expected = Formula::until(
            Formula::True,
            Formula::or(Formula::atom("w"), Formula::atom("r")).expand(),
        );
        assert_eq!(parse("F(w | r)", &p).unwrap(), expected);
    }

    #[test]
    fn precedence_and_associativity() {
        let p = wr();
        let w = || Formula::atom("w");
        let r = || Formula::atom("r");
        assert_eq!(
            parse("w U r U w", &p).unwrap(),
            Formula::until(w(), Formula::until(r(), w()))
        );
        assert_eq!(
            parse("X w U r", &p).unwrap(),
            Formula::until(Formula::next(w()), r())
        );
        assert_eq!(
            parse("w & r | w", &p).unwrap(),
            Formula::or(Formula::and(w(), r()), w()).expand()
        );
        assert_eq!(
            parse("!w U r & w", &p).unwrap(),
            Formula::and(Formula::until(Formula::not(w()), r()), w())
        );
    }

    #[test]
    fn parse_errors_carry_position() {
        let p = wr();
        match parse("w &\n  )", &p) {
            Err(FormulaError::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            parse("w & z", &p),
            Err(FormulaError::UndeclaredAtom("z".into()))
        );
        assert!(parse("w r", &p).is_err());
        assert!(parse("", &p).is_err());
    }

    #[test]
    fn render_examples() {
        assert_eq!(render(&Formula::True), "true");
        assert_eq!(render(&Formula::not(Formula::atom("w"))), "!w");
        let p = wr();
        for src in ["F (w | r)", "G !w", "WX r", "w -> r -> w", "(w U r) U w", "X (w & r)"] {
            let f = parse(src, &p).unwrap();
            assert_eq!(parse(&render(&f), &p).unwrap(), f, "{src}");
        }
        assert_eq!(render(&parse("F(w | r)", &p).unwrap()), "F (w | r)");
        assert_eq!(render(&parse("G !w", &p).unwrap()), "G !w");
    }

    #[test]
    fn next_needs_a_successor() {
        let p = wr();
        let t = [p.letter(1, 0)];
        let r = Formula::atom("r");
        assert!(!evaluate(&Formula::next(r.clone()), &p, &t, 0).unwrap());
        assert!(evaluate(&Formula::weak_next(r), &p, &t, 0).unwrap());
    }

    #[test]
    fn until_example() {
        let p = wr();
        let t = [p.letter(1, 0), p.letter(0, 1)];
        let f = Formula::until(Formula::atom("w"), Formula::atom("r"));
        assert!(evaluate(&f, &p, &t, 0).unwrap());
    }

    #[test]
    fn evaluate_rejects_bad_positions() {
        let p = wr();
        assert_eq!(
            evaluate(&Formula::True, &p, &[], 0),
            Err(EvalError::EmptyTrace)
        );
        assert_eq!(
            evaluate(&Formula::True, &p, &[0], 1),
            Err(EvalError::IndexOutOfRange { index: 1, len: 1 })
        );
    }

    #[test]
    fn abbreviation_identities_hold_exhaustively() {
        let p = wr();
        let w = Formula::atom("w");
        let r = Formula::atom("r");
        let phis = [
            w.clone(),
            Formula::until(w.clone(), r.clone()),
            Formula::next(r.clone()),
        ];
        for t in all_traces(&p, 4) {
            for i in 0..t.len() {
                for phi in &phis {
                    let ev = |f: &Formula| evaluate(f, &p, &t, i).unwrap();
                    assert_eq!(
                        ev(&Formula::eventually(phi.clone())),
                        ev(&Formula::until(Formula::True, phi.clone()))
                    );
                    assert_eq!(
                        ev(&Formula::always(phi.clone())),
                        ev(&Formula::not(Formula::eventually(Formula::not(phi.clone()))))
                    );
                    assert_eq!(
                        ev(&Formula::weak_next(phi.clone())),
                        ev(&Formula::not(Formula::next(Formula::not(phi.clone()))))
                    );
                    let sugar = Formula::implies(phi.clone(), r.clone());
                    assert_eq!(ev(&sugar), ev(&sugar.expand()));
                }
            }
        }
    }

    #[test]
    fn size_counts_distinct_subformulas() {
        let p = wr();
        let f = parse("w & w", &p).unwrap();
        assert_eq!(f.size(), 2);
        assert_eq!(parse("w U r", &p).unwrap().size(), 3);
    }

    #[test]
    fn prime_copy_renames() {
        let p = wr();
        let f = parse("w & !r", &p).unwrap();
        let g = prime_copy(&f, &p);
        assert_eq!(g, parse("w' & !r'", &p.primed()).unwrap());
        assert_eq!(g.size(), f.size());
    }

    #[test]
    fn env_spec_for_single_step() {
        let p = wr();
        let h = History::new(vec![(1, 1)]).unwrap();
        assert_eq!(
            history_to_env_spec(&h, &p).unwrap(),
            Formula::implies(Formula::atom("w"), Formula::atom("r"))
        );
        let h2 = History::new(vec![(1, 1), (0, 0)]).unwrap();
        let spec = history_to_env_spec(&h2, &p).unwrap();
        let Formula::And(_, second) = &spec else {
            panic!("expected two conjuncts")
        };
        let Formula::Implies(_, rhs) = second.as_ref() else {
            panic!("expected an implication")
        };
        assert_eq!(**rhs, Formula::weak_next(Formula::not(Formula::atom("r"))));
    }
}
