//! Seeded random instances for cross-validation.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::automata::{Alphabet, Dfa};
use crate::checkers::check_env_enforceable;
use crate::ltlf::{AtomPartition, Formula, Letter};
use crate::strategies::{AgentTransducer, EnvTransducer, History};

/// A random formula with at most `size` syntax nodes.
pub fn formula(rng: &mut impl Rng, p: &AtomPartition, size: usize) -> Formula {
    let atoms: Vec<&String> = p.agent_atoms().iter().chain(p.env_atoms()).collect();
    build(rng, &atoms, size.max(1))
}

fn build(rng: &mut impl Rng, atoms: &[&String], budget: usize) -> Formula {
    if budget == 1 || rng.gen_bool(0.15) {
        return match rng.gen_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::atom(atoms.choose(rng).unwrap().as_str()),
        };
    }
    if budget == 2 || rng.gen_bool(0.4) {
        let f = build(rng, atoms, budget - 1);
        return match rng.gen_range(0..5) {
            0 => Formula::not(f),
            1 => Formula::next(f),
            2 => Formula::weak_next(f),
            3 => Formula::eventually(f),
            _ => Formula::always(f),
        };
    }
    let left = rng.gen_range(1..budget - 1);
    let a = build(rng, atoms, left);
    let b = build(rng, atoms, budget - 1 - left);
    match rng.gen_range(0..4) {
        0 => Formula::and(a, b),
        1 => Formula::or(a, b),
        2 => Formula::until(a, b),
        _ => Formula::implies(a, b),
    }
}

/// A random enforceable environment specification; `true` a third of the
/// time.
pub fn spec(rng: &mut impl Rng, p: &AtomPartition, size: usize) -> Formula {
    if rng.gen_bool(1.0 / 3.0) {
        return Formula::True;
    }
    loop {
        let f = formula(rng, p, size);
        if check_env_enforceable(&f, p) {
            return f;
        }
    }
}

/// A random stopping agent transducer with at most `max_states` states.
/// Working states are ordered and only move forward, so every play stops.
pub fn strategy(rng: &mut impl Rng, p: &AtomPartition, max_states: usize) -> AgentTransducer {
    let n = rng.gen_range(2..=max_states.max(2));
    let stop = n - 1;
    let next: Vec<Vec<usize>> = (0..n)
        .map(|s| {
            (0..p.num_env_letters())
                .map(|_| if s + 1 >= n { stop } else { rng.gen_range(s + 1..n) })
                .collect()
        })
        .collect();
    let output = (0..n)
        .map(|_| rng.gen_range(0..p.num_agent_letters() as Letter))
        .collect();
    let mut terminating = vec![false; n];
    terminating[stop] = true;
    let names = (0..n).map(|s| format!("q{s}")).collect();
    AgentTransducer::new(p, names, 0, output, terminating, next).expect("generated machine is valid")
}

/// A random environment machine with at most `max_states` states.
pub fn env_machine(rng: &mut impl Rng, p: &AtomPartition, max_states: usize) -> EnvTransducer {
    let n = rng.gen_range(1..=max_states.max(1));
    let ny = p.num_agent_letters();
    let next = (0..n)
        .map(|_| (0..ny).map(|_| rng.gen_range(0..n)).collect())
        .collect();
    let output = (0..n)
        .map(|_| {
            (0..ny)
                .map(|_| rng.gen_range(0..p.num_env_letters() as Letter))
                .collect()
        })
        .collect();
    let names = (0..n).map(|s| format!("e{s}")).collect();
    EnvTransducer::new(p, names, 0, next, output).expect("generated machine is valid")
}

/// A random history consistent with `a`, of length between one and the
/// length of the play it follows.
pub fn history(rng: &mut impl Rng, p: &AtomPartition, a: &AgentTransducer) -> History {
    let mut steps = Vec::new();
    let mut q = a.initial();
    while let Some(y) = a.action(q) {
        let x = rng.gen_range(0..p.num_env_letters() as Letter);
        steps.push((y, x));
        q = a.step(q, x);
        if rng.gen_bool(0.3) {
            break;
        }
    }
    History::new(steps).expect("initial state never stops")
}

/// A random partial DFA game over the single-trace alphabet with at most
/// `max_states` states.
pub fn arena(rng: &mut impl Rng, p: &AtomPartition, max_states: usize) -> Dfa {
    let n = rng.gen_range(1..=max_states.max(1));
    let mut d = Dfa::new(Alphabet::single(p), n, 0);
    for s in 0..n {
        d.set_final(s, rng.gen_bool(0.3));
        for l in 0..p.num_letters() as Letter {
            let t = rng.gen_bool(0.85).then(|| rng.gen_range(0..n));
            d.set(s, l, t);
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;
    use crate::automata::Automaton;

    #[test]
    fn sizes_are_bounded() {
        let p = crate::plant::partition();
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let f = formula(&mut rng, &p, 8);
            assert!(f.size() <= 8);
            let a = strategy(&mut rng, &p, 4);
            assert!(a.num_states() <= 4);
            assert!(a.validate_stopping().is_ok());
            let h = history(&mut rng, &p, &a);
            assert!(crate::strategies::is_consistent(&h, &a, false));
            assert!(arena(&mut rng, &p, 12).num_states() <= 12);
        }
    }
}
