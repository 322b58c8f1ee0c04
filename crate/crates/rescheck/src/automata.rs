//! Finite automata over explicit letter alphabets.
//!
//! Letters are bitmasks. A single-track alphabet uses the partition's bit
//! layout. A joint alphabet describes pairs of traces: track 0 occupies the
//! low `w` bits, track 1 the next `w` bits, and two end flags follow.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::ltlf::{AtomPartition, Formula, Letter};
use crate::strategies::History;

pub type StateId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomataError {
    #[error("alphabet mismatch: [{left}] vs [{right}]")]
    AlphabetMismatch { left: String, right: String },
}

/// Which trace of a pair a joint-alphabet component talks about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Track {
    Unprimed,
    Primed,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    bits: Vec<String>,
    agent_mask: Letter,
    // per-track width when the alphabet is joint
    track_width: Option<usize>,
}

impl Alphabet {
    pub fn single(p: &AtomPartition) -> Self {
        let bits = p.agent_atoms().iter().chain(p.env_atoms()).cloned().collect();
        Alphabet {
            bits,
            agent_mask: p.agent_mask(),
            track_width: None,
        }
    }

    pub fn joint(p: &AtomPartition) -> Self {
        let w = p.width();
        let single = Alphabet::single(p);
        let mut bits = single.bits.clone();
        bits.extend(single.bits.iter().map(|b| format!("{b}'")));
        bits.push("end".into());
        bits.push("end'".into());
        let agent_mask = p.agent_mask() | (p.agent_mask() << w) | (0b11 << (2 * w));
        Alphabet {
            bits,
            agent_mask,
            track_width: Some(w),
        }
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn num_letters(&self) -> usize {
        1 << self.bits.len()
    }

    pub fn bit_names(&self) -> &[String] {
        &self.bits
    }

    pub fn agent_mask(&self) -> Letter {
        self.agent_mask
    }

    pub fn env_mask(&self) -> Letter {
        (self.num_letters() as Letter - 1) & !self.agent_mask
    }

    pub fn is_joint(&self) -> bool {
        self.track_width.is_some()
    }

    /// All letters that carry meaning; on joint alphabets this excludes
    /// letters with both tracks ended or with bits on an ended track.
    pub fn is_valid(&self, l: Letter) -> bool {
        match self.track_width {
            None => (l as usize) < self.num_letters(),
            Some(w) => {
                let seg = (1 << w) - 1;
                let end0 = l & (1 << (2 * w)) != 0;
                let end1 = l & (1 << (2 * w + 1)) != 0;
                !(end0 && end1)
                    && !(end0 && l & seg != 0)
                    && !(end1 && (l >> w) & seg != 0)
                    && (l as usize) < self.num_letters()
            }
        }
    }

    /// Every submask of `mask`, in increasing order.
    pub fn submasks(mask: Letter) -> Vec<Letter> {
        let mut out = Vec::with_capacity(1 << mask.count_ones());
        let mut s: Letter = 0;
        loop {
            out.push(s);
            if s == mask {
                break;
            }
            s = (s.wrapping_sub(mask)) & mask;
        }
        out
    }

    pub fn agent_choices(&self) -> Vec<Letter> {
        Alphabet::submasks(self.agent_mask)
    }

    pub fn env_choices(&self) -> Vec<Letter> {
        Alphabet::submasks(self.env_mask())
    }

    pub fn render_letter(&self, l: Letter) -> String {
        let parts: Vec<String> = self
            .bits
            .iter()
            .enumerate()
            .map(|(i, b)| {
                if l & (1 << i) != 0 {
                    b.clone()
                } else {
                    format!("!{b}")
                }
            })
            .collect();
        format!("{{{}}}", parts.join(", "))
    }

    fn describe(&self) -> String {
        self.bits.join(",")
    }

    fn check_same(&self, other: &Alphabet) -> Result<(), AutomataError> {
        if self == other {
            Ok(())
        } else {
            Err(AutomataError::AlphabetMismatch {
                left: self.describe(),
                right: other.describe(),
            })
        }
    }
}

/// Read access shared by [`Nfa`] and [`Dfa`].
pub trait Automaton {
    fn alphabet(&self) -> &Alphabet;
    fn num_states(&self) -> usize;
    fn initial(&self) -> StateId;
    fn is_final(&self, s: StateId) -> bool;
    fn succ(&self, s: StateId, l: Letter) -> &[StateId];

    fn accepts(&self, word: &[Letter]) -> bool {
        let mut cur = vec![self.initial()];
        let mut mark = vec![false; self.num_states()];
        for &l in word {
            let mut next = Vec::new();
            for &s in &cur {
                for &t in self.succ(s, l) {
                    if !mark[t] {
                        mark[t] = true;
                        next.push(t);
                    }
                }
            }
            for &t in &next {
                mark[t] = false;
            }
            if next.is_empty() {
                return false;
            }
            cur = next;
        }
        cur.iter().any(|&s| self.is_final(s))
    }

    fn num_transitions(&self) -> usize {
        let letters = self.alphabet().num_letters() as Letter;
        (0..self.num_states())
            .map(|s| (0..letters).map(|l| self.succ(s, l).len()).sum::<usize>())
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nfa {
    alphabet: Alphabet,
    initial: StateId,
    finals: Vec<bool>,
    // trans[s * letters + l]
    trans: Vec<Vec<StateId>>,
}

impl Nfa {
    pub fn new(alphabet: Alphabet, states: usize, initial: StateId) -> Self {
        let letters = alphabet.num_letters();
        Nfa {
            alphabet,
            initial,
            finals: vec![false; states],
            trans: vec![Vec::new(); states * letters],
        }
    }

    pub fn add_state(&mut self, is_final: bool) -> StateId {
        self.finals.push(is_final);
        let letters = self.alphabet.num_letters();
        self.trans.extend(std::iter::repeat_with(Vec::new).take(letters));
        self.finals.len() - 1
    }

    pub fn set_final(&mut self, s: StateId, f: bool) {
        self.finals[s] = f;
    }

    pub fn add_transition(&mut self, s: StateId, l: Letter, t: StateId) {
        let k = s * self.alphabet.num_letters() + l as usize;
        if !self.trans[k].contains(&t) {
            self.trans[k].push(t);
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.trans.iter().all(|v| v.len() <= 1)
    }

    /// Copy of any automaton as an NFA.
    pub fn from_automaton(a: &impl Automaton) -> Nfa {
        let mut n = Nfa::new(a.alphabet().clone(), a.num_states(), a.initial());
        for s in 0..a.num_states() {
            n.finals[s] = a.is_final(s);
            for l in 0..a.alphabet().num_letters() as Letter {
                for &t in a.succ(s, l) {
                    n.add_transition(s, l, t);
                }
            }
        }
        n
    }
}

impl Automaton for Nfa {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }
    fn num_states(&self) -> usize {
        self.finals.len()
    }
    fn initial(&self) -> StateId {
        self.initial
    }
    fn is_final(&self, s: StateId) -> bool {
        self.finals[s]
    }
    fn succ(&self, s: StateId, l: Letter) -> &[StateId] {
        &self.trans[s * self.alphabet.num_letters() + l as usize]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Alphabet,
    initial: StateId,
    finals: Vec<bool>,
    trans: Vec<Option<StateId>>,
}

impl Dfa {
    pub fn new(alphabet: Alphabet, states: usize, initial: StateId) -> Self {
        let letters = alphabet.num_letters();
        Dfa {
            alphabet,
            initial,
            finals: vec![false; states],
            trans: vec![None; states * letters],
        }
    }

    pub fn set_final(&mut self, s: StateId, f: bool) {
        self.finals[s] = f;
    }

    pub fn set_initial(&mut self, s: StateId) {
        self.initial = s;
    }

    pub fn set(&mut self, s: StateId, l: Letter, t: Option<StateId>) {
        let k = s * self.alphabet.num_letters() + l as usize;
        self.trans[k] = t;
    }

    pub fn step(&self, s: StateId, l: Letter) -> Option<StateId> {
        self.trans[s * self.alphabet.num_letters() + l as usize]
    }

    /// State reached on `word`, if the run is defined.
    pub fn run(&self, word: &[Letter]) -> Option<StateId> {
        word.iter()
            .try_fold(self.initial, |s, &l| self.step(s, l))
    }

    pub fn finals(&self) -> &[bool] {
        &self.finals
    }

    /// Whether every valid letter has a successor in every state.
    pub fn is_complete(&self) -> bool {
        (0..self.num_states()).all(|s| {
            (0..self.alphabet.num_letters() as Letter)
                .filter(|&l| self.alphabet.is_valid(l))
                .all(|l| self.step(s, l).is_some())
        })
    }

    /// Whether any transition enters `s`.
    pub fn has_incoming(&self, s: StateId) -> bool {
        self.trans.contains(&Some(s))
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        let letters = self.alphabet.num_letters() as Letter;
        while let Some(s) = queue.pop_front() {
            for l in 0..letters {
                if let Some(t) = self.step(s, l) {
                    if !seen[t] {
                        seen[t] = true;
                        queue.push_back(t);
                    }
                }
            }
        }
        seen
    }

    /// States from which some final state can be reached.
    pub fn coreachable(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); n];
        let letters = self.alphabet.num_letters() as Letter;
        for s in 0..n {
            for l in 0..letters {
                if let Some(t) = self.step(s, l) {
                    rev[t].push(s);
                }
            }
        }
        let mut seen = self.finals.clone();
        let mut queue: VecDeque<StateId> = (0..n).filter(|&s| seen[s]).collect();
        while let Some(t) = queue.pop_front() {
            for &s in &rev[t] {
                if !seen[s] {
                    seen[s] = true;
                    queue.push_back(s);
                }
            }
        }
        seen
    }

    /// Removes transitions into states that cannot reach a final state.
    pub fn trim(&self) -> Dfa {
        let co = self.coreachable();
        let mut d = self.clone();
        for k in 0..d.trans.len() {
            if let Some(t) = d.trans[k] {
                if !co[t] || !co[k / self.alphabet.num_letters()] {
                    d.trans[k] = None;
                }
            }
        }
        d
    }

    /// Moore partition refinement over reachable states; partial
    /// transitions are treated as going to an implicit dead class.
    pub fn minimize(&self) -> Dfa {
        let reach = self.reachable();
        let states: Vec<StateId> = (0..self.num_states()).filter(|&s| reach[s]).collect();
        let letters = self.alphabet.num_letters() as Letter;
        let mut class = vec![usize::MAX; self.num_states()];
        for &s in &states {
            class[s] = self.finals[s] as usize;
        }
        let mut count = 0;
        loop {
            let mut sigs: HashMap<Vec<usize>, usize> = HashMap::new();
            let mut next = vec![usize::MAX; self.num_states()];
            for &s in &states {
                let mut sig = Vec::with_capacity(letters as usize + 1);
                sig.push(class[s]);
                for l in 0..letters {
                    sig.push(self.step(s, l).map_or(usize::MAX, |t| class[t]));
                }
                let fresh = sigs.len();
                next[s] = *sigs.entry(sig).or_insert(fresh);
            }
            let new_count = sigs.len();
            class = next;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        let mut out = Dfa::new(self.alphabet.clone(), count, class[self.initial]);
        for &s in &states {
            out.finals[class[s]] = self.finals[s];
            for l in 0..letters {
                out.set(class[s], l, self.step(s, l).map(|t| class[t]));
            }
        }
        out
    }

    /// Ensures no transition enters the initial state by cloning it.
    pub fn with_fresh_initial(&self) -> Dfa {
        if !self.has_incoming(self.initial) {
            return self.clone();
        }
        let n = self.num_states();
        let letters = self.alphabet.num_letters();
        let mut d = self.clone();
        d.finals.push(self.finals[self.initial]);
        let row: Vec<Option<StateId>> =
            self.trans[self.initial * letters..(self.initial + 1) * letters].to_vec();
        d.trans.extend(row);
        d.initial = n;
        d
    }
}

impl Automaton for Dfa {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }
    fn num_states(&self) -> usize {
        self.finals.len()
    }
    fn initial(&self) -> StateId {
        self.initial
    }
    fn is_final(&self, s: StateId) -> bool {
        self.finals[s]
    }
    fn succ(&self, s: StateId, l: Letter) -> &[StateId] {
        self.trans[s * self.alphabet.num_letters() + l as usize].as_slice()
    }
}

// ---------------------------------------------------------------------------
// Formula compilation by progression over negation normal form.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Nnf {
    True,
    False,
    Lit(u32, bool),
    And(usize, usize),
    Or(usize, usize),
    Next(usize),
    WeakNext(usize),
    Until(usize, usize),
    Release(usize, usize),
}

/// Positive DNF over node ids: a list of clauses, each a sorted set.
type Dnf = Vec<Vec<usize>>;

fn dnf_true() -> Dnf {
    vec![Vec::new()]
}

fn absorb(mut d: Dnf) -> Dnf {
    d.sort_by_key(|c| c.len());
    d.dedup();
    let mut out: Dnf = Vec::new();
    for c in d {
        if !out.iter().any(|o| o.iter().all(|x| c.binary_search(x).is_ok())) {
            out.push(c);
        }
    }
    out
}

fn dnf_or(a: &Dnf, b: &Dnf) -> Dnf {
    absorb(a.iter().chain(b.iter()).cloned().collect())
}

fn dnf_and(a: &Dnf, b: &Dnf) -> Dnf {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            let mut c: Vec<usize> = x.iter().chain(y.iter()).copied().collect();
            c.sort_unstable();
            c.dedup();
            out.push(c);
        }
    }
    absorb(out)
}

struct Progression<'p> {
    p: &'p AtomPartition,
    nodes: Vec<Nnf>,
    ids: HashMap<Nnf, usize>,
    memo: HashMap<(usize, Letter), (bool, Dnf)>,
}

impl<'p> Progression<'p> {
    fn new(p: &'p AtomPartition) -> Self {
        Progression {
            p,
            nodes: Vec::new(),
            ids: HashMap::new(),
            memo: HashMap::new(),
        }
    }

    fn intern(&mut self, n: Nnf) -> usize {
        if let Some(&id) = self.ids.get(&n) {
            return id;
        }
        self.nodes.push(n);
        self.ids.insert(n, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    fn build(&mut self, f: &Formula, neg: bool) -> usize {
        use Formula as F;
        let n = match (f, neg) {
            (F::True, false) | (F::False, true) => Nnf::True,
            (F::True, true) | (F::False, false) => Nnf::False,
            (F::Atom(a), _) => {
                let bit = self.p.bit_of(a).expect("atom checked against partition");
                Nnf::Lit(bit as u32, !neg)
            }
            (F::Not(g), _) => return self.build(g, !neg),
            (F::And(a, b), false) | (F::Or(a, b), true) => {
                Nnf::And(self.build(a, neg), self.build(b, neg))
            }
            (F::Or(a, b), false) | (F::And(a, b), true) => {
                Nnf::Or(self.build(a, neg), self.build(b, neg))
            }
            (F::Implies(a, b), false) => Nnf::Or(self.build(a, true), self.build(b, false)),
            (F::Implies(a, b), true) => Nnf::And(self.build(a, false), self.build(b, true)),
            (F::Next(g), false) | (F::WeakNext(g), true) => Nnf::Next(self.build(g, neg)),
            (F::WeakNext(g), false) | (F::Next(g), true) => Nnf::WeakNext(self.build(g, neg)),
            (F::Until(a, b), false) => Nnf::Until(self.build(a, false), self.build(b, false)),
            (F::Until(a, b), true) => Nnf::Release(self.build(a, true), self.build(b, true)),
            (F::Eventually(g), false) | (F::Always(g), true) => {
                let t = self.intern(Nnf::True);
                Nnf::Until(t, self.build(g, neg))
            }
            (F::Always(g), false) | (F::Eventually(g), true) => {
                let ff = self.intern(Nnf::False);
                Nnf::Release(ff, self.build(g, neg))
            }
        };
        self.intern(n)
    }

    /// (holds if the trace ends at this letter, obligations otherwise)
    fn step(&mut self, id: usize, l: Letter) -> (bool, Dnf) {
        if let Some(r) = self.memo.get(&(id, l)) {
            return r.clone();
        }
        let r = match self.nodes[id] {
            Nnf::True => (true, dnf_true()),
            Nnf::False => (false, Vec::new()),
            Nnf::Lit(bit, pos) => {
                let v = (l & (1 << bit) != 0) == pos;
                (v, if v { dnf_true() } else { Vec::new() })
            }
            Nnf::And(a, b) => {
                let (xa, da) = self.step(a, l);
                let (xb, db) = self.step(b, l);
                (xa && xb, dnf_and(&da, &db))
            }
            Nnf::Or(a, b) => {
                let (xa, da) = self.step(a, l);
                let (xb, db) = self.step(b, l);
                (xa || xb, dnf_or(&da, &db))
            }
            Nnf::Next(a) => (false, vec![vec![a]]),
            Nnf::WeakNext(a) => (true, vec![vec![a]]),
            Nnf::Until(a, b) => {
                let (_, da) = self.step(a, l);
                let (xb, db) = self.step(b, l);
                (xb, dnf_or(&db, &dnf_and(&da, &vec![vec![id]])))
            }
            Nnf::Release(a, b) => {
                let (_, da) = self.step(a, l);
                let (xb, db) = self.step(b, l);
                (xb, dnf_and(&db, &dnf_or(&da, &vec![vec![id]])))
            }
        };
        self.memo.insert((id, l), r.clone());
        r
    }
}

/// NFA for the nonempty traces satisfying `f`. Each non-final state is a
/// conjunction of pending obligations; a single final state with no
/// outgoing transitions marks the end of the trace.
pub fn to_nfa(f: &Formula, p: &AtomPartition) -> Nfa {
    let mut prog = Progression::new(p);
    let root = prog.build(f, false);
    let alphabet = Alphabet::single(p);
    let letters = alphabet.num_letters() as Letter;
    let mut nfa = Nfa::new(alphabet, 2, 0);
    let done = 1;
    nfa.set_final(done, true);
    let mut index: HashMap<Vec<usize>, StateId> = HashMap::from([(vec![root], 0)]);
    let mut queue = VecDeque::from([(vec![root], 0)]);
    while let Some((clause, s)) = queue.pop_front() {
        for l in 0..letters {
            let mut acc = true;
            let mut dnf = dnf_true();
            for &id in &clause {
                let (x, d) = prog.step(id, l);
                acc &= x;
                dnf = dnf_and(&dnf, &d);
            }
            if acc {
                nfa.add_transition(s, l, done);
            }
            for c in dnf {
                let t = match index.get(&c) {
                    Some(&t) => t,
                    None => {
                        let t = nfa.add_state(false);
                        index.insert(c.clone(), t);
                        queue.push_back((c, t));
                        t
                    }
                };
                nfa.add_transition(s, l, t);
            }
        }
    }
    nfa
}

/// Subset construction; the result is complete (the empty subset is kept
/// as a rejecting sink).
pub fn determinize(n: &impl Automaton) -> Dfa {
    let letters = n.alphabet().num_letters() as Letter;
    let start = vec![n.initial()];
    let mut index: HashMap<Vec<StateId>, StateId> = HashMap::from([(start.clone(), 0)]);
    let mut subsets = vec![start];
    let mut rows: Vec<Vec<Option<StateId>>> = Vec::new();
    let mut i = 0;
    while i < subsets.len() {
        let mut row = Vec::with_capacity(letters as usize);
        for l in 0..letters {
            let mut t: Vec<StateId> = subsets[i]
                .iter()
                .flat_map(|&s| n.succ(s, l).iter().copied())
                .collect();
            t.sort_unstable();
            t.dedup();
            let id = match index.get(&t) {
                Some(&id) => id,
                None => {
                    index.insert(t.clone(), subsets.len());
                    subsets.push(t);
                    subsets.len() - 1
                }
            };
            row.push(Some(id));
        }
        rows.push(row);
        i += 1;
    }
    let mut d = Dfa::new(n.alphabet().clone(), subsets.len(), 0);
    for (s, subset) in subsets.iter().enumerate() {
        d.set_final(s, subset.iter().any(|&q| n.is_final(q)));
        for l in 0..letters {
            d.set(s, l, rows[s][l as usize]);
        }
    }
    d
}

/// Minimal complete DFA for `f` whose initial state has no incoming
/// transitions.
pub fn to_dfa(f: &Formula, p: &AtomPartition) -> Dfa {
    determinize(&to_nfa(f, p)).minimize().with_fresh_initial()
}

// ---------------------------------------------------------------------------
// Products, restriction, emptiness.

/// A product automaton together with the component state of every product
/// state.
#[derive(Clone, Debug)]
pub struct Product<T> {
    pub automaton: T,
    pub pairs: Vec<(StateId, StateId)>,
}

fn product_core(
    a: &impl Automaton,
    b: &impl Automaton,
) -> Result<(Vec<(StateId, StateId)>, Vec<Vec<(Letter, StateId)>>), AutomataError> {
    a.alphabet().check_same(b.alphabet())?;
    let letters = a.alphabet().num_letters() as Letter;
    let start = (a.initial(), b.initial());
    let mut index = HashMap::from([(start, 0)]);
    let mut pairs = vec![start];
    let mut edges = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let (s, t) = pairs[i];
        let mut out = Vec::new();
        for l in 0..letters {
            for &s2 in a.succ(s, l) {
                for &t2 in b.succ(t, l) {
                    let id = *index.entry((s2, t2)).or_insert_with(|| {
                        pairs.push((s2, t2));
                        pairs.len() - 1
                    });
                    out.push((l, id));
                }
            }
        }
        edges.push(out);
        i += 1;
    }
    Ok((pairs, edges))
}

/// Product over reachable pairs; the language is the intersection.
pub fn product(a: &impl Automaton, b: &impl Automaton) -> Result<Product<Nfa>, AutomataError> {
    let (pairs, edges) = product_core(a, b)?;
    let mut n = Nfa::new(a.alphabet().clone(), pairs.len(), 0);
    for (s, &(x, y)) in pairs.iter().enumerate() {
        n.set_final(s, a.is_final(x) && b.is_final(y));
        for &(l, t) in &edges[s] {
            n.add_transition(s, l, t);
        }
    }
    Ok(Product {
        automaton: n,
        pairs,
    })
}

pub fn product_dfa(a: &Dfa, b: &Dfa) -> Result<Product<Dfa>, AutomataError> {
    let (pairs, edges) = product_core(a, b)?;
    let mut d = Dfa::new(a.alphabet().clone(), pairs.len(), 0);
    for (s, &(x, y)) in pairs.iter().enumerate() {
        d.set_final(s, a.is_final(x) && b.is_final(y));
        for &(l, t) in &edges[s] {
            d.set(s, l, Some(t));
        }
    }
    Ok(Product {
        automaton: d,
        pairs,
    })
}

#[derive(Clone, Debug)]
pub struct Restriction {
    pub dfa: Dfa,
    /// False when the initial state was outside the kept set; the automaton
    /// then has no transitions at all.
    pub initial_kept: bool,
}

/// Deletes every transition that leaves or lies outside `keep`.
pub fn restrict(d: &Dfa, keep: &[bool]) -> Restriction {
    let mut r = d.clone();
    let letters = d.alphabet.num_letters();
    for k in 0..r.trans.len() {
        let s = k / letters;
        if let Some(t) = r.trans[k] {
            if !keep[s] || !keep[t] {
                r.trans[k] = None;
            }
        }
    }
    Restriction {
        dfa: r,
        initial_kept: keep[d.initial],
    }
}

/// A shortest accepted word, if the language is nonempty.
pub fn non_empty(a: &impl Automaton) -> Option<Vec<Letter>> {
    let n = a.num_states();
    let letters = a.alphabet().num_letters() as Letter;
    let mut parent: Vec<Option<(StateId, Letter)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([a.initial()]);
    seen[a.initial()] = true;
    while let Some(s) = queue.pop_front() {
        if a.is_final(s) {
            let mut word = Vec::new();
            let mut cur = s;
            while let Some((prev, l)) = parent[cur] {
                word.push(l);
                cur = prev;
            }
            word.reverse();
            debug_assert!(a.accepts(&word));
            return Some(word);
        }
        for l in 0..letters {
            for &t in a.succ(s, l) {
                if !seen[t] {
                    seen[t] = true;
                    parent[t] = Some((s, l));
                    queue.push_back(t);
                }
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// History and trace-pair automata.

/// DFA for the traces every prefix of which satisfies `E_h`.
///
/// States `0..=n` follow `h`; `n + 1` is the free sink entered once the
/// agent leaves `h`; `n + 2` is the violation sink entered when the
/// environment answers differently from `h` after matching agent moves.
pub fn history_dfa(h: &History, p: &AtomPartition) -> Dfa {
    let n = h.len();
    let (free, violated) = (n + 1, n + 2);
    let mut d = Dfa::new(Alphabet::single(p), n + 3, 0);
    for s in 1..=free {
        d.set_final(s, true);
    }
    for l in 0..p.num_letters() as Letter {
        let (y, x) = p.split(l);
        for (i, &(yi, xi)) in h.steps().iter().enumerate() {
            let t = if y != yi {
                free
            } else if x == xi {
                i + 1
            } else {
                violated
            };
            d.set(i, l, Some(t));
        }
        d.set(n, l, Some(free));
        d.set(free, l, Some(free));
        d.set(violated, l, Some(violated));
    }
    d
}

/// Splits a joint letter into its two track letters and end flags.
pub fn split_joint(p: &AtomPartition, l: Letter) -> ((Letter, bool), (Letter, bool)) {
    let w = p.width();
    let seg = (1 << w) - 1;
    (
        (l & seg, l & (1 << (2 * w)) != 0),
        ((l >> w) & seg, l & (1 << (2 * w + 1)) != 0),
    )
}

pub fn joint_letter(p: &AtomPartition, t0: Option<Letter>, t1: Option<Letter>) -> Letter {
    let w = p.width();
    let a = t0.unwrap_or(0) | if t0.is_none() { 1 << (2 * w) } else { 0 };
    let b = (t1.unwrap_or(0) << w) | if t1.is_none() { 1 << (2 * w + 1) } else { 0 };
    a | b
}

/// Packs two traces into one padded joint word.
pub fn pad_pair(p: &AtomPartition, a: &[Letter], b: &[Letter]) -> Vec<Letter> {
    (0..a.len().max(b.len()))
        .map(|i| joint_letter(p, a.get(i).copied(), b.get(i).copied()))
        .collect()
}

/// Inverse of [`pad_pair`].
pub fn unpad_pair(p: &AtomPartition, word: &[Letter]) -> (Vec<Letter>, Vec<Letter>) {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for &l in word {
        let ((x, e0), (y, e1)) = split_joint(p, l);
        if !e0 {
            a.push(x);
        }
        if !e1 {
            b.push(y);
        }
    }
    (a, b)
}

/// Two-state automaton forcing equal environment moves until the agent
/// moves of the two tracks first differ. Ending a track is an agent move.
pub fn glue_dfa(p: &AtomPartition) -> Dfa {
    let alphabet = Alphabet::joint(p);
    let letters = alphabet.num_letters() as Letter;
    let (pre, post) = (0, 1);
    let mut d = Dfa::new(alphabet.clone(), 2, pre);
    d.set_final(pre, true);
    d.set_final(post, true);
    for l in (0..letters).filter(|&l| alphabet.is_valid(l)) {
        d.set(post, l, Some(post));
        let ((a, e0), (b, e1)) = split_joint(p, l);
        let (ya, xa) = p.split(a);
        let (yb, xb) = p.split(b);
        let t = if e0 || e1 || ya != yb {
            Some(post)
        } else if xa == xb {
            Some(pre)
        } else {
            None
        };
        d.set(pre, l, t);
    }
    d
}

/// Runs `n` on one track of the joint alphabet; the other track is free.
/// State 0 is a fresh start, state `s + 1` mirrors `s`, and the last state
/// is entered by the end flag from a final state of `n`.
pub fn lift_to_joint(n: &impl Automaton, p: &AtomPartition, track: Track) -> Nfa {
    let alphabet = Alphabet::joint(p);
    let letters = alphabet.num_letters() as Letter;
    let k = n.num_states();
    let ended = k + 1;
    let mut out = Nfa::new(alphabet.clone(), k + 2, 0);
    for s in 0..k {
        out.set_final(s + 1, n.is_final(s));
    }
    out.set_final(ended, true);
    for l in (0..letters).filter(|&l| alphabet.is_valid(l)) {
        let ((a, e0), (b, e1)) = split_joint(p, l);
        let (own, own_end) = match track {
            Track::Unprimed => (a, e0),
            Track::Primed => (b, e1),
        };
        if own_end {
            out.add_transition(ended, l, ended);
            for s in (0..k).filter(|&s| n.is_final(s)) {
                out.add_transition(s + 1, l, ended);
            }
        } else {
            for &t in n.succ(n.initial(), own) {
                out.add_transition(0, l, t + 1);
            }
            for s in 0..k {
                for &t in n.succ(s, own) {
                    out.add_transition(s + 1, l, t + 1);
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// DOT export.

/// Graphviz rendering; final states are double circles and `highlight`
/// states are filled.
pub fn to_dot(a: &impl Automaton, name: &str, highlight: Option<&[bool]>) -> String {
    let letters = a.alphabet().num_letters() as Letter;
    let valid: Vec<Letter> = (0..letters).filter(|&l| a.alphabet().is_valid(l)).collect();
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{}\" {{", name.replace('"', "\\\""));
    let _ = writeln!(out, "  rankdir=LR;");
    let _ = writeln!(out, "  __start [shape=point];");
    for s in 0..a.num_states() {
        let shape = if a.is_final(s) { "doublecircle" } else { "circle" };
        let fill = match highlight {
            Some(h) if h[s] => ", style=filled, fillcolor=lightgrey",
            _ => "",
        };
        let _ = writeln!(out, "  s{s} [shape={shape}{fill}];");
    }
    let _ = writeln!(out, "  __start -> s{};", a.initial());
    for s in 0..a.num_states() {
        let mut by_target: Vec<(StateId, Vec<Letter>)> = Vec::new();
        for &l in &valid {
            for &t in a.succ(s, l) {
                match by_target.iter_mut().find(|(u, _)| *u == t) {
                    Some((_, ls)) => ls.push(l),
                    None => by_target.push((t, vec![l])),
                }
            }
        }
        for (t, ls) in by_target {
            let label = if ls.len() == valid.len() {
                "*".to_string()
            } else {
                ls.iter()
                    .map(|&l| a.alphabet().render_letter(l))
                    .collect::<Vec<_>>()
                    .join("\\n")
            };
            let _ = writeln!(out, "  s{s} -> s{t} [label=\"{label}\"];");
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltlf::{parse, satisfies};

    fn wr() -> AtomPartition {
        AtomPartition::new(&["w"], &["r"]).unwrap()
    }

    fn words(letters: Letter, max_len: usize) -> Vec<Vec<Letter>> {
        let mut out = vec![Vec::new()];
        let mut layer = vec![Vec::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &layer {
                for l in 0..letters {
                    let mut v: Vec<Letter> = w.clone();
                    v.push(l);
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    #[test]
    fn atom_automaton() {
        let p = wr();
        let n = to_nfa(&Formula::atom("w"), &p);
        assert!(n.accepts(&[1]));
        assert!(n.accepts(&[1, 0, 2]));
        assert!(!n.accepts(&[0, 1]));
        assert!(!n.accepts(&[]));
        assert_eq!(non_empty(&n).map(|w| w.len()), Some(1));
    }

    #[test]
    fn false_is_empty() {
        let p = wr();
        assert_eq!(non_empty(&to_nfa(&Formula::False, &p)), None);
        assert_eq!(non_empty(&to_dfa(&Formula::False, &p)), None);
    }

    #[test]
    fn true_accepts_every_nonempty_word() {
        let p = wr();
        let d = to_dfa(&Formula::True, &p);
        for w in words(4, 3) {
            assert_eq!(d.accepts(&w), !w.is_empty());
        }
    }

    #[test]
    fn eventually_rain_has_two_live_subsets() {
        let p = wr();
        let d = determinize(&to_nfa(&parse("F r", &p).unwrap(), &p));
        assert!(d.num_states() <= 3);
        for w in words(4, 4) {
            assert_eq!(d.accepts(&w), w.iter().any(|&l| l & 2 != 0));
        }
    }

    #[test]
    fn never_water_or_rain_shape() {
        let p = wr();
        let d = to_dfa(&parse("G !(w | r)", &p).unwrap(), &p);
        let finals = d.finals().iter().filter(|&&f| f).count();
        assert_eq!(finals, 1);
        let live = d.step(d.initial(), 0).unwrap();
        assert!(d.is_final(live));
        assert_eq!(d.step(live, 0), Some(live));
        let sink = d.step(live, 1).unwrap();
        assert!(!d.is_final(sink) && sink != d.initial());
        assert_eq!(d.num_states(), 3);
    }

    #[test]
    fn compiled_languages_match_semantics() {
        let p = wr();
        for text in [
            "w U r",
            "X r",
            "WX r",
            "G (w -> X r)",
            "F (w & WX false)",
            "!(w U !r) | X X w",
            "G F r",
            "(w U r) U (X !w)",
        ] {
            let f = parse(text, &p).unwrap();
            let n = to_nfa(&f, &p);
            let d = to_dfa(&f, &p);
            assert!(!d.has_incoming(d.initial()), "{text}");
            assert!(d.is_complete(), "{text}");
            for w in words(4, 4).into_iter().filter(|w| !w.is_empty()) {
                let want = satisfies(&f, &p, &w).unwrap();
                assert_eq!(n.accepts(&w), want, "{text} nfa {w:?}");
                assert_eq!(d.accepts(&w), want, "{text} dfa {w:?}");
            }
        }
    }

    #[test]
    fn product_identity_and_annihilator() {
        let p = wr();
        let a = to_dfa(&parse("w U r", &p).unwrap(), &p);
        let top = to_dfa(&Formula::True, &p);
        let bottom = to_dfa(&Formula::False, &p);
        let pa = product_dfa(&a, &top).unwrap().automaton;
        for w in words(4, 3) {
            assert_eq!(pa.accepts(&w), a.accepts(&w));
        }
        assert_eq!(non_empty(&product(&a, &bottom).unwrap().automaton), None);
    }

    #[test]
    fn product_rejects_foreign_alphabet() {
        let p = wr();
        let q = AtomPartition::new(&["a"], &["b"]).unwrap();
        let e = product(&to_dfa(&Formula::True, &p), &to_dfa(&Formula::True, &q));
        assert!(matches!(e, Err(AutomataError::AlphabetMismatch { .. })));
    }

    #[test]
    fn restriction_to_nothing_is_empty() {
        let p = wr();
        let a = to_dfa(&Formula::True, &p);
        let all = restrict(&a, &vec![true; a.num_states()]);
        assert!(all.initial_kept);
        assert_eq!(all.dfa, a);
        let none = restrict(&a, &vec![false; a.num_states()]);
        assert!(!none.initial_kept);
        assert_eq!(none.dfa.num_transitions(), 0);
        assert_eq!(non_empty(&none.dfa), None);
    }

    #[test]
    fn history_dfa_of_one_step() {
        let p = wr();
        let h = History::new(vec![(1, 1)]).unwrap();
        let d = history_dfa(&h, &p);
        assert_eq!(d.num_states(), 4);
        assert_eq!(d.step(0, p.letter(1, 1)), Some(1));
        let violated = d.step(0, p.letter(1, 0)).unwrap();
        assert!(!d.is_final(violated));
        let free = d.step(0, p.letter(0, 0)).unwrap();
        assert!(d.is_final(free));
        assert_eq!(d.step(0, p.letter(0, 1)), Some(free));
    }

    #[test]
    fn glue_requires_equal_env_before_divergence() {
        let p = wr();
        let g = glue_dfa(&p);
        let same_agent = pad_pair(&p, &[p.letter(1, 0)], &[p.letter(1, 1)]);
        assert!(!g.accepts(&same_agent));
        let diverged = pad_pair(
            &p,
            &[p.letter(1, 0), p.letter(0, 1)],
            &[p.letter(0, 1), p.letter(1, 0)],
        );
        assert!(g.accepts(&diverged));
        let one_stops = pad_pair(&p, &[p.letter(1, 0)], &[p.letter(1, 0), p.letter(1, 1)]);
        assert!(g.accepts(&one_stops));
    }

    #[test]
    fn lift_reads_one_track() {
        let p = wr();
        let a = to_dfa(&parse("F r", &p).unwrap(), &p);
        let l0 = lift_to_joint(&a, &p, Track::Unprimed);
        let l1 = lift_to_joint(&a, &p, Track::Primed);
        let pair = pad_pair(&p, &[0, 2], &[0]);
        assert!(l0.accepts(&pair));
        assert!(!l1.accepts(&pair));
        assert!(!l0.accepts(&pad_pair(&p, &[], &[2])));
        let (x, y) = unpad_pair(&p, &pair);
        assert_eq!((x, y), (vec![0, 2], vec![0]));
    }

    #[test]
    fn dot_marks_finals() {
        let p = wr();
        let dot = to_dot(&to_dfa(&parse("w", &p).unwrap(), &p), "w", None);
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("doublecircle"));
    }
}
