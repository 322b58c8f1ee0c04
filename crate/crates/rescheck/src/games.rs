//! Region fixpoints over DFA games.
//!
//! In every round the agent picks the agent part `Y` of the letter and the
//! environment answers with the environment part `X`. Undefined transitions
//! are moves the environment may not make. All solvers are worklist
//! algorithms linear in the number of transitions.

use std::collections::VecDeque;

use crate::automata::{Automaton, Dfa, StateId};
use crate::ltlf::Letter;

/// A DFA with a designated goal set (by default its final states).
#[derive(Clone, Debug)]
pub struct GameArena {
    pub dfa: Dfa,
    pub goals: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StateValue {
    Winning,
    Pending,
    Losing,
}

impl StateValue {
    pub fn as_i8(self) -> i8 {
        match self {
            StateValue::Winning => 1,
            StateValue::Pending => 0,
            StateValue::Losing => -1,
        }
    }
}

struct Moves {
    // agent choice index of every letter, or None for letters not in play
    choice: Vec<Option<usize>>,
    num_choices: usize,
    // preds[t] = (source, letter)
    preds: Vec<Vec<(StateId, Letter)>>,
}

impl Moves {
    fn of(d: &Dfa) -> Moves {
        let alpha = d.alphabet();
        let choices = alpha.agent_choices();
        let mut choice = vec![None; alpha.num_letters()];
        for (i, &y) in choices.iter().enumerate() {
            for &x in &alpha.env_choices() {
                if alpha.is_valid(y | x) {
                    choice[(y | x) as usize] = Some(i);
                }
            }
        }
        let mut preds = vec![Vec::new(); d.num_states()];
        for s in 0..d.num_states() {
            for l in 0..alpha.num_letters() as Letter {
                if choice[l as usize].is_some() {
                    if let Some(t) = d.step(s, l) {
                        preds[t].push((s, l));
                    }
                }
            }
        }
        Moves {
            choice,
            num_choices: choices.len(),
            preds,
        }
    }

    fn idx(&self, s: StateId, l: Letter) -> usize {
        s * self.num_choices + self.choice[l as usize].unwrap()
    }

    /// Per (state, choice): number of letters whose successor satisfies `f`.
    fn count(&self, d: &Dfa, f: impl Fn(StateId) -> bool) -> Vec<usize> {
        let mut c = vec![0; d.num_states() * self.num_choices];
        for (t, ps) in self.preds.iter().enumerate() {
            if f(t) {
                for &(s, l) in ps {
                    c[self.idx(s, l)] += 1;
                }
            }
        }
        c
    }
}

impl GameArena {
    pub fn new(dfa: Dfa) -> Self {
        let goals = dfa.finals().to_vec();
        GameArena { dfa, goals }
    }

    pub fn with_goals(dfa: Dfa, goals: Vec<bool>) -> Self {
        GameArena { dfa, goals }
    }

    pub fn num_states(&self) -> usize {
        self.dfa.num_states()
    }
}

/// Greatest set of states that are accepting and where every agent choice
/// has an environment answer staying inside. The initial state is exempt
/// from the acceptance requirement when no transition enters it, since it
/// only stands for the empty prefix.
pub fn env_win_region(d: &Dfa) -> Vec<bool> {
    let n = d.num_states();
    let m = Moves::of(d);
    let exempt = !d.has_incoming(d.initial());
    let mut inside = vec![true; n];
    let mut cnt = m.count(d, |_| true);
    let mut queue = VecDeque::new();
    let violates = |s: StateId, cnt: &[usize]| {
        (!d.is_final(s) && !(exempt && s == d.initial()))
            || cnt[s * m.num_choices..(s + 1) * m.num_choices].contains(&0)
    };
    for s in 0..n {
        if violates(s, &cnt) {
            inside[s] = false;
            queue.push_back(s);
        }
    }
    while let Some(t) = queue.pop_front() {
        for &(s, l) in &m.preds[t] {
            let k = m.idx(s, l);
            cnt[k] -= 1;
            if cnt[k] == 0 && inside[s] {
                inside[s] = false;
                queue.push_back(s);
            }
        }
    }
    inside
}

/// Least set containing the goals and every state with an agent choice
/// that is answerable and all of whose answers lead inside.
pub fn agent_win_region(g: &GameArena) -> Vec<bool> {
    let d = &g.dfa;
    let m = Moves::of(d);
    let defined = m.count(d, |_| true);
    let mut missing = defined.clone();
    let mut inside = g.goals.clone();
    let mut queue: VecDeque<StateId> = (0..d.num_states()).filter(|&s| inside[s]).collect();
    while let Some(t) = queue.pop_front() {
        for &(s, l) in &m.preds[t] {
            let k = m.idx(s, l);
            missing[k] -= 1;
            if missing[k] == 0 && defined[k] > 0 && !inside[s] {
                inside[s] = true;
                queue.push_back(s);
            }
        }
    }
    inside
}

/// States from which some path reaches a goal.
pub fn weak_region(g: &GameArena) -> Vec<bool> {
    let m = Moves::of(&g.dfa);
    let mut inside = g.goals.clone();
    let mut queue: VecDeque<StateId> = (0..g.num_states()).filter(|&s| inside[s]).collect();
    while let Some(t) = queue.pop_front() {
        for &(s, _) in &m.preds[t] {
            if !inside[s] {
                inside[s] = true;
                queue.push_back(s);
            }
        }
    }
    inside
}

/// Greatest set of non-goal states where every answerable agent choice has
/// an answer staying inside: the environment keeps the agent away from the
/// goals forever. Complements [`agent_win_region`].
pub fn env_forcing_region(g: &GameArena) -> Vec<bool> {
    let d = &g.dfa;
    let n = d.num_states();
    let m = Moves::of(d);
    let defined = m.count(d, |_| true);
    let mut inside: Vec<bool> = g.goals.iter().map(|&x| !x).collect();
    let mut cnt = m.count(d, |t| inside[t]);
    let broken = |s: StateId, cnt: &[usize]| {
        (s * m.num_choices..(s + 1) * m.num_choices).any(|k| defined[k] > 0 && cnt[k] == 0)
    };
    let mut queue = VecDeque::new();
    for s in 0..n {
        if inside[s] && broken(s, &cnt) {
            inside[s] = false;
            queue.push_back(s);
        }
    }
    while let Some(t) = queue.pop_front() {
        for &(s, l) in &m.preds[t] {
            let k = m.idx(s, l);
            cnt[k] -= 1;
            if cnt[k] == 0 && inside[s] {
                inside[s] = false;
                queue.push_back(s);
            }
        }
    }
    inside
}

pub fn state_values(g: &GameArena) -> Vec<StateValue> {
    let win = agent_win_region(g);
    let weak = weak_region(g);
    (0..g.num_states())
        .map(|s| {
            if win[s] {
                StateValue::Winning
            } else if weak[s] {
                StateValue::Pending
            } else {
                StateValue::Losing
            }
        })
        .collect()
}

pub fn count(region: &[bool]) -> usize {
    region.iter().filter(|&&b| b).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{restrict, to_dfa};
    use crate::ltlf::{parse, AtomPartition, Formula};

    fn wr() -> AtomPartition {
        AtomPartition::new(&["w"], &["r"]).unwrap()
    }

    fn region_of(text: &str, p: &AtomPartition) -> (Dfa, Vec<bool>) {
        let d = to_dfa(&parse(text, p).unwrap(), p);
        let r = env_win_region(&d);
        (d, r)
    }

    #[test]
    fn vacuous_spec_keeps_everything_reachable() {
        let p = wr();
        let (d, r) = region_of("true", &p);
        let reach = d.reachable();
        for s in 0..d.num_states() {
            if reach[s] {
                assert!(r[s]);
            }
        }
    }

    #[test]
    fn env_can_keep_its_atom_false() {
        let p = AtomPartition::new(&["y"], &["x"]).unwrap();
        let (d, r) = region_of("G !x", &p);
        assert!(r[d.initial()]);
        let live = d.step(d.initial(), 0).unwrap();
        assert!(r[live]);
    }

    #[test]
    fn env_can_make_its_atom_true_now() {
        let p = AtomPartition::new(&["y"], &["x"]).unwrap();
        let (d, r) = region_of("x", &p);
        assert!(r[d.initial()]);
    }

    #[test]
    fn false_spec_is_not_enforceable() {
        let p = wr();
        let (d, r) = region_of("false", &p);
        assert!(!r[d.initial()]);
    }

    #[test]
    fn env_cannot_control_agent_atoms() {
        let p = wr();
        let (d, r) = region_of("w", &p);
        assert!(!r[d.initial()]);
    }

    #[test]
    fn all_goal_arena() {
        let p = wr();
        let d = to_dfa(&Formula::True, &p);
        let g = GameArena::with_goals(d.clone(), vec![true; d.num_states()]);
        assert!(state_values(&g).iter().all(|&v| v == StateValue::Winning));
    }

    #[test]
    fn empty_goal_gives_empty_regions() {
        let p = wr();
        let d = to_dfa(&Formula::True, &p);
        let g = GameArena::with_goals(d.clone(), vec![false; d.num_states()]);
        assert_eq!(count(&agent_win_region(&g)), 0);
        assert_eq!(count(&weak_region(&g)), 0);
    }

    #[test]
    fn agent_can_water_but_only_hope_for_rain() {
        let p = wr();
        let water = to_dfa(&parse("F w", &p).unwrap(), &p);
        let g = GameArena::new(water);
        assert!(agent_win_region(&g)[g.dfa.initial()]);
        let rain = to_dfa(&parse("F r", &p).unwrap(), &p);
        let g = GameArena::new(rain);
        let values = state_values(&g);
        assert_eq!(values[g.dfa.initial()], StateValue::Pending);
    }

    #[test]
    fn regions_partition() {
        let p = wr();
        for text in ["F r", "F w", "G r", "w U r", "X (w & r)", "true", "false"] {
            let d = to_dfa(&parse(text, &p).unwrap(), &p);
            let g = GameArena::new(restrict(&d, &vec![true; d.num_states()]).dfa);
            let w = agent_win_region(&g);
            let f = env_forcing_region(&g);
            for s in 0..g.num_states() {
                assert_ne!(w[s], f[s], "{text} state {s}");
            }
        }
    }
}
