//! Responsibility checking for LTLf goals over agent and environment
//! strategies.
//!
//! Goals, environment specifications and histories are LTLf formulas over a
//! partition of atoms into agent-controlled and environment-controlled
//! sets. Agent strategies are stopping transducers, so every play is a
//! finite nonempty trace. The [`checkers`] decide whether a strategy is
//! winning, dominant, best-effort or weak, and [`responsibility`] derives
//! the responsibility verdicts from them. [`oracle`] evaluates the same
//! definitions by brute force at a bounded horizon.

pub mod automata;
pub mod checkers;
pub mod games;
pub mod ltlf;
pub mod oracle;
pub mod plant;
pub mod responsibility;
pub mod strategies;

pub use automata::{Alphabet, Automaton, Dfa, Nfa, StateId};
pub use ltlf::{parse, render, AtomPartition, Formula, Letter};
pub use strategies::{AgentTransducer, EnvTransducer, History};
