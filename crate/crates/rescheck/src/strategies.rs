//! Agent and environment strategies as finite transducers, histories and
//! plays.
//!
//! Agent machines read environment letters and emit agent letters; a
//! machine in a terminating state has stopped. Environment machines read
//! the current agent letter and answer with an environment letter, so
//! `X_j` depends on `Y_0 .. Y_j`.

use std::collections::VecDeque;

use thiserror::Error;

use crate::automata::{Alphabet, Automaton, Dfa};
use crate::ltlf::{AtomPartition, Formula, Letter};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("machine has no states")]
    NoStates,
    #[error("state index {0} is out of range")]
    BadState(usize),
    #[error("the initial state may not be terminating")]
    TerminatingInitial,
    #[error("state {state} has {found} transitions, expected {expected}")]
    BadArity {
        state: usize,
        found: usize,
        expected: usize,
    },
    #[error("output {letter:#b} of state {state} uses undeclared atoms")]
    BadOutput { state: usize, letter: Letter },
    #[error("strategy is not stopping: {0}")]
    NotStopping(StoppingViolation),
    #[error("history is empty")]
    EmptyHistory,
}

/// A reachable cycle among non-terminating states, reported as the path
/// from the initial state into the cycle followed by the cycle itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoppingViolation {
    pub stem: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl std::fmt::Display for StoppingViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let show = |v: &[usize]| {
            v.iter()
                .map(|s| format!("s{s}"))
                .collect::<Vec<_>>()
                .join(" -> ")
        };
        write!(
            f,
            "lasso {} then cycle {} -> s{}",
            show(&self.stem),
            show(&self.cycle),
            self.cycle[0]
        )
    }
}

/// A terminating agent transducer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentTransducer {
    names: Vec<String>,
    initial: usize,
    output: Vec<Letter>,
    terminating: Vec<bool>,
    // next[state][env letter]
    next: Vec<Vec<usize>>,
    agent_bits: usize,
    env_bits: usize,
}

impl AgentTransducer {
    /// Builds a machine; outputs of terminating states are ignored.
    pub fn new(
        p: &AtomPartition,
        names: Vec<String>,
        initial: usize,
        output: Vec<Letter>,
        terminating: Vec<bool>,
        next: Vec<Vec<usize>>,
    ) -> Result<Self, StrategyError> {
        let n = next.len();
        if n == 0 {
            return Err(StrategyError::NoStates);
        }
        if initial >= n {
            return Err(StrategyError::BadState(initial));
        }
        if names.len() != n || output.len() != n || terminating.len() != n {
            return Err(StrategyError::BadArity {
                state: 0,
                found: names.len().min(output.len()).min(terminating.len()),
                expected: n,
            });
        }
        if terminating[initial] {
            return Err(StrategyError::TerminatingInitial);
        }
        for (s, row) in next.iter().enumerate() {
            if row.len() != p.num_env_letters() {
                return Err(StrategyError::BadArity {
                    state: s,
                    found: row.len(),
                    expected: p.num_env_letters(),
                });
            }
            if let Some(&t) = row.iter().find(|&&t| t >= n) {
                return Err(StrategyError::BadState(t));
            }
            if !terminating[s] && output[s] & !p.agent_mask() != 0 {
                return Err(StrategyError::BadOutput {
                    state: s,
                    letter: output[s],
                });
            }
        }
        Ok(AgentTransducer {
            names,
            initial,
            output,
            terminating,
            next,
            agent_bits: p.agent_count(),
            env_bits: p.env_count(),
        })
    }

    pub fn num_states(&self) -> usize {
        self.next.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn is_terminating(&self, s: usize) -> bool {
        self.terminating[s]
    }

    /// The agent letter emitted in `s`, or `None` when `s` stops.
    pub fn action(&self, s: usize) -> Option<Letter> {
        (!self.terminating[s]).then_some(self.output[s])
    }

    pub fn step(&self, s: usize, env: Letter) -> usize {
        self.next[s][env as usize]
    }

    /// State reached after reading a sequence of environment letters.
    pub fn run(&self, envs: &[Letter]) -> usize {
        envs.iter().fold(self.initial, |s, &x| self.step(s, x))
    }

    /// Checks that no cycle among non-terminating states is reachable.
    pub fn validate_stopping(&self) -> Result<(), StoppingViolation> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut mark = vec![0u8; self.num_states()];
        let mut stack = vec![(self.initial, 0usize)];
        let mut path = vec![self.initial];
        mark[self.initial] = 1;
        while let Some(&mut (s, ref mut edge)) = stack.last_mut() {
            if *edge == self.next[s].len() {
                mark[s] = 2;
                stack.pop();
                path.pop();
                continue;
            }
            let t = self.next[s][*edge];
            *edge += 1;
            if self.terminating[t] {
                continue;
            }
            match mark[t] {
                0 => {
                    mark[t] = 1;
                    stack.push((t, 0));
                    path.push(t);
                }
                1 => {
                    let at = path.iter().position(|&u| u == t).unwrap();
                    return Err(StoppingViolation {
                        stem: path[..at].to_vec(),
                        cycle: path[at..].to_vec(),
                    });
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Length of the longest play; requires a stopping machine.
    pub fn max_play_length(&self) -> usize {
        fn depth(a: &AgentTransducer, s: usize, memo: &mut Vec<Option<usize>>) -> usize {
            if a.terminating[s] {
                return 0;
            }
            if let Some(d) = memo[s] {
                return d;
            }
            let d = 1 + a.next[s]
                .iter()
                .map(|&t| depth(a, t, memo))
                .max()
                .unwrap_or(0);
            memo[s] = Some(d);
            d
        }
        let mut memo = vec![None; self.num_states()];
        depth(self, self.initial, &mut memo)
    }

    fn letter(&self, agent: Letter, env: Letter) -> Letter {
        agent | (env << self.agent_bits)
    }

    fn split(&self, letter: Letter) -> (Letter, Letter) {
        (
            letter & ((1 << self.agent_bits) - 1),
            letter >> self.agent_bits,
        )
    }
}

/// A total environment transducer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvTransducer {
    names: Vec<String>,
    initial: usize,
    // next[state][agent letter], output[state][agent letter]
    next: Vec<Vec<usize>>,
    output: Vec<Vec<Letter>>,
}

impl EnvTransducer {
    pub fn new(
        p: &AtomPartition,
        names: Vec<String>,
        initial: usize,
        next: Vec<Vec<usize>>,
        output: Vec<Vec<Letter>>,
    ) -> Result<Self, StrategyError> {
        let n = next.len();
        if n == 0 {
            return Err(StrategyError::NoStates);
        }
        if initial >= n {
            return Err(StrategyError::BadState(initial));
        }
        if names.len() != n || output.len() != n {
            return Err(StrategyError::BadArity {
                state: 0,
                found: names.len().min(output.len()),
                expected: n,
            });
        }
        let env_limit = (1 as Letter) << p.env_count();
        for s in 0..n {
            for row_len in [next[s].len(), output[s].len()] {
                if row_len != p.num_agent_letters() {
                    return Err(StrategyError::BadArity {
                        state: s,
                        found: row_len,
                        expected: p.num_agent_letters(),
                    });
                }
            }
            if let Some(&t) = next[s].iter().find(|&&t| t >= n) {
                return Err(StrategyError::BadState(t));
            }
            if let Some(&x) = output[s].iter().find(|&&x| x >= env_limit) {
                return Err(StrategyError::BadOutput { state: s, letter: x });
            }
        }
        Ok(EnvTransducer {
            names,
            initial,
            next,
            output,
        })
    }

    /// The environment that answers every agent letter with `x`.
    pub fn constant(p: &AtomPartition, x: Letter) -> Result<Self, StrategyError> {
        let k = p.num_agent_letters();
        EnvTransducer::new(p, vec!["q0".into()], 0, vec![vec![0; k]], vec![vec![x; k]])
    }

    pub fn num_states(&self) -> usize {
        self.next.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Response to agent letter `y` in state `s`, with the successor state.
    pub fn respond(&self, s: usize, y: Letter) -> (Letter, usize) {
        (self.output[s][y as usize], self.next[s][y as usize])
    }
}

/// A nonempty sequence of (agent letter, environment letter) pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct History {
    steps: Vec<(Letter, Letter)>,
}

impl History {
    pub fn new(steps: Vec<(Letter, Letter)>) -> Result<Self, StrategyError> {
        if steps.is_empty() {
            return Err(StrategyError::EmptyHistory);
        }
        Ok(History { steps })
    }

    pub fn from_trace(p: &AtomPartition, trace: &[Letter]) -> Result<Self, StrategyError> {
        History::new(trace.iter().map(|&l| p.split(l)).collect())
    }

    pub fn steps(&self) -> &[(Letter, Letter)] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn trace(&self, p: &AtomPartition) -> Vec<Letter> {
        self.steps.iter().map(|&(y, x)| p.letter(y, x)).collect()
    }
}

/// The play of `a` against `e`: alternate moves until `a` stops.
pub fn play(a: &AgentTransducer, e: &EnvTransducer) -> Result<Vec<Letter>, StrategyError> {
    a.validate_stopping().map_err(StrategyError::NotStopping)?;
    let (mut q, mut s) = (a.initial, e.initial);
    let mut trace = Vec::new();
    while let Some(y) = a.action(q) {
        let (x, s2) = e.respond(s, y);
        trace.push(a.letter(y, x));
        q = a.step(q, x);
        s = s2;
    }
    Ok(trace)
}

/// Whether every agent letter of `h` is what `a` plays after the preceding
/// environment letters. With `full_play`, `a` must also stop right after `h`.
pub fn is_consistent(h: &History, a: &AgentTransducer, full_play: bool) -> bool {
    let mut q = a.initial;
    for &(y, x) in h.steps() {
        if a.action(q) != Some(y) {
            return false;
        }
        q = a.step(q, x);
    }
    !full_play || a.is_terminating(q)
}

/// Whether a trace is a complete play of `a` against some environment.
pub fn is_play_of(trace: &[Letter], a: &AgentTransducer) -> bool {
    let mut q = a.initial;
    for &l in trace {
        let (y, x) = a.split(l);
        if a.action(q) != Some(y) {
            return false;
        }
        q = a.step(q, x);
    }
    !trace.is_empty() && a.is_terminating(q)
}

/// DFA whose language is the set of complete plays of `a`. State `n` (one
/// past the machine's states) is a rejecting sink.
pub fn strategy_dfa(a: &AgentTransducer, p: &AtomPartition) -> Dfa {
    let n = a.num_states();
    let alphabet = Alphabet::single(p);
    let mut dfa = Dfa::new(alphabet, n + 1, a.initial);
    for q in 0..n {
        dfa.set_final(q, a.is_terminating(q));
        for l in 0..p.num_letters() as Letter {
            let (y, x) = p.split(l);
            let target = match a.action(q) {
                Some(out) if out == y => a.step(q, x),
                _ => n,
            };
            dfa.set(q, l, Some(target));
        }
    }
    for l in 0..p.num_letters() as Letter {
        dfa.set(n, l, Some(n));
    }
    dfa
}

/// DFA accepting exactly the nonempty traces consistent with `e`.
/// State 0 is a fresh initial state, state `i + 1` mirrors machine state `i`
/// and the last state is a rejecting sink.
pub fn env_transducer_dfa(e: &EnvTransducer, p: &AtomPartition) -> Dfa {
    let m = e.num_states();
    let sink = m + 1;
    let mut dfa = Dfa::new(Alphabet::single(p), m + 2, 0);
    for src in 0..=m {
        let s = if src == 0 { e.initial } else { src - 1 };
        dfa.set_final(src, src != 0);
        for l in 0..p.num_letters() as Letter {
            let (y, x) = p.split(l);
            let (out, next) = e.respond(s, y);
            dfa.set(src, l, Some(if out == x { next + 1 } else { sink }));
        }
    }
    for l in 0..p.num_letters() as Letter {
        dfa.set(sink, l, Some(sink));
    }
    dfa
}

/// Whether every prefix of every play of `e` satisfies the specification
/// recognised by `spec`, whatever the agent does.
pub fn env_enforces_dfa(e: &EnvTransducer, spec: &Dfa, p: &AtomPartition) -> bool {
    let mut seen = vec![false; e.num_states() * spec.num_states()];
    let mut queue = VecDeque::new();
    let start = (e.initial, spec.initial());
    seen[start.0 * spec.num_states() + start.1] = true;
    queue.push_back(start);
    while let Some((s, q)) = queue.pop_front() {
        for y in 0..p.num_agent_letters() as Letter {
            let (x, s2) = e.respond(s, y);
            let Some(q2) = spec.step(q, p.letter(y, x)) else {
                return false;
            };
            if !spec.is_final(q2) {
                return false;
            }
            let key = s2 * spec.num_states() + q2;
            if !seen[key] {
                seen[key] = true;
                queue.push_back((s2, q2));
            }
        }
    }
    true
}

pub fn env_enforces(e: &EnvTransducer, spec: &Formula, p: &AtomPartition) -> bool {
    env_enforces_dfa(e, &crate::automata::to_dfa(spec, p), p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wr() -> AtomPartition {
        AtomPartition::new(&["w"], &["r"]).unwrap()
    }

    /// Waters once, then stops.
    fn water_once(p: &AtomPartition) -> AgentTransducer {
        AgentTransducer::new(
            p,
            vec!["s0".into(), "done".into()],
            0,
            vec![1, 0],
            vec![false, true],
            vec![vec![1, 1], vec![1, 1]],
        )
        .unwrap()
    }

    #[test]
    fn stopping_chain_is_ok() {
        assert!(water_once(&wr()).validate_stopping().is_ok());
    }

    #[test]
    fn self_loop_is_reported() {
        let p = wr();
        let a = AgentTransducer::new(
            &p,
            vec!["s0".into(), "done".into()],
            0,
            vec![1, 0],
            vec![false, true],
            vec![vec![0, 1], vec![1, 1]],
        )
        .unwrap();
        let v = a.validate_stopping().unwrap_err();
        assert!(v.stem.is_empty());
        assert_eq!(v.cycle, vec![0]);
    }

    #[test]
    fn initial_state_cannot_stop() {
        let p = wr();
        let err = AgentTransducer::new(&p, vec!["s".into()], 0, vec![0], vec![true], vec![vec![0, 0]]);
        assert_eq!(err, Err(StrategyError::TerminatingInitial));
    }

    #[test]
    fn play_against_constant_environments() {
        let p = wr();
        let a = water_once(&p);
        let dry = EnvTransducer::constant(&p, 0).unwrap();
        let rain = EnvTransducer::constant(&p, 1).unwrap();
        assert_eq!(play(&a, &dry).unwrap(), vec![p.letter(1, 0)]);
        assert_eq!(play(&a, &rain).unwrap(), vec![p.letter(1, 1)]);
    }

    #[test]
    fn consistency_checks() {
        let p = wr();
        let a = water_once(&p);
        let h = History::new(vec![(1, 1)]).unwrap();
        assert!(is_consistent(&h, &a, false));
        assert!(is_consistent(&h, &a, true));
        assert!(!is_consistent(&History::new(vec![(0, 1)]).unwrap(), &a, false));
    }

    #[test]
    fn strategy_dfa_of_single_step() {
        let p = wr();
        let d = strategy_dfa(&water_once(&p), &p);
        assert_eq!(d.num_states(), 3);
        assert!(d.accepts(&[p.letter(1, 0)]));
        assert!(d.accepts(&[p.letter(1, 1)]));
        assert!(!d.accepts(&[p.letter(0, 1)]));
        assert!(!d.accepts(&[p.letter(1, 1), p.letter(1, 1)]));
    }

    #[test]
    fn env_enforcement() {
        let p = wr();
        let dry = EnvTransducer::constant(&p, 0).unwrap();
        let always_rain = crate::ltlf::parse("G r", &p).unwrap();
        assert!(env_enforces(&dry, &Formula::True, &p));
        assert!(!env_enforces(&dry, &always_rain, &p));
        let rain = EnvTransducer::constant(&p, 1).unwrap();
        assert!(env_enforces(&rain, &always_rain, &p));
    }

    #[test]
    fn env_dfa_accepts_consistent_traces() {
        let p = wr();
        let rain = EnvTransducer::constant(&p, 1).unwrap();
        let d = env_transducer_dfa(&rain, &p);
        assert!(d.accepts(&[p.letter(0, 1), p.letter(1, 1)]));
        assert!(!d.accepts(&[p.letter(0, 1), p.letter(1, 0)]));
        assert!(!d.accepts(&[]));
    }
}
