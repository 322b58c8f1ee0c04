//! Exhaustive enumeration of bounded agent and environment strategy trees.
//!
//! An agent tree assigns to every sequence of environment letters of length
//! below `H` either a stop or an agent letter; the root never stops and
//! depth `H` always stops. An environment tree assigns an environment letter
//! to every nonempty sequence of agent letters of length at most `H`.
//! Strategy classes and responsibility verdicts are then evaluated by
//! comparing plays pairwise, which is only feasible for horizons up to
//! three with one agent and one environment atom.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use crate::automata::{to_dfa, Dfa};
use crate::games::env_win_region;
use crate::ltlf::{AtomPartition, Evaluator, Formula, Letter};
use crate::responsibility::Kind;
use crate::strategies::{is_consistent, AgentTransducer, EnvTransducer, History};

use super::OracleError;

const STOP: Letter = Letter::MAX;
const MAX_AGENTS: u128 = 1 << 16;
const MAX_ENVS: u128 = 1 << 20;

/// Agent tree in pre-order: a node code followed by the subtrees for each
/// environment letter. Children of a stop node are filled with stops.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AgentTree(Vec<Letter>);

/// Environment answers in pre-order over agent letters: for each agent
/// letter, the answer followed by the subtree below it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EnvTree(Vec<Letter>);

#[derive(Clone, Debug)]
pub struct BoundedStrategySpace {
    p: AtomPartition,
    horizon: usize,
    // agent subtree size by depth, env subtree size by depth
    agent_size: Vec<usize>,
    env_size: Vec<usize>,
    agents: Vec<AgentTree>,
    envs: Vec<EnvTree>,
}

/// Closed-form number of agent trees.
pub fn agent_tree_count(p: &AtomPartition, horizon: usize) -> u128 {
    let (ny, nx) = (p.num_agent_letters() as u128, p.num_env_letters() as u32);
    let mut t = 1u128;
    for d in (0..horizon).rev() {
        let stop = u128::from(d >= 1);
        t = t
            .checked_pow(nx)
            .and_then(|c| c.checked_mul(ny))
            .and_then(|c| c.checked_add(stop))
            .unwrap_or(u128::MAX);
    }
    t
}

/// Closed-form number of environment trees.
pub fn env_tree_count(p: &AtomPartition, horizon: usize) -> u128 {
    let ny = p.num_agent_letters() as u128;
    let positions: u128 = (1..=horizon as u32).map(|k| ny.pow(k)).sum();
    (p.num_env_letters() as u128)
        .checked_pow(positions as u32)
        .unwrap_or(u128::MAX)
}

impl BoundedStrategySpace {
    pub fn new(p: &AtomPartition, horizon: usize) -> Result<Self, OracleError> {
        if horizon == 0
            || agent_tree_count(p, horizon) > MAX_AGENTS
            || env_tree_count(p, horizon) > MAX_ENVS
        {
            return Err(OracleError::BadHorizon(horizon));
        }
        let (ny, nx) = (p.num_agent_letters(), p.num_env_letters());
        let mut agent_size = vec![1; horizon + 1];
        let mut env_size = vec![0; horizon + 1];
        for d in (0..horizon).rev() {
            agent_size[d] = 1 + nx * agent_size[d + 1];
            env_size[d] = ny * (1 + env_size[d + 1]);
        }
        let mut space = BoundedStrategySpace {
            p: p.clone(),
            horizon,
            agent_size,
            env_size,
            agents: Vec::new(),
            envs: Vec::new(),
        };
        space.agents = space
            .agent_subtrees(0)
            .into_iter()
            .map(AgentTree)
            .collect();
        let positions = space.env_size[0];
        let total = env_tree_count(p, horizon) as usize;
        space.envs = (0..total)
            .map(|mut n| {
                let mut digits = vec![0; positions];
                for d in digits.iter_mut().rev() {
                    *d = (n % nx) as Letter;
                    n /= nx;
                }
                EnvTree(digits)
            })
            .collect();
        Ok(space)
    }

    fn agent_subtrees(&self, d: usize) -> Vec<Vec<Letter>> {
        let size = self.agent_size[d];
        let mut out = Vec::new();
        if d >= 1 {
            out.push(vec![STOP; size]);
        }
        if d == self.horizon {
            return out;
        }
        let children = self.agent_subtrees(d + 1);
        let nx = self.p.num_env_letters();
        for y in 0..self.p.num_agent_letters() as Letter {
            // odometer over one child choice per environment letter
            let mut pick = vec![0usize; nx];
            loop {
                let mut t = Vec::with_capacity(size);
                t.push(y);
                for &c in &pick {
                    t.extend_from_slice(&children[c]);
                }
                out.push(t);
                let mut i = nx;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    pick[i] += 1;
                    if pick[i] < children.len() {
                        break;
                    }
                    pick[i] = 0;
                }
                if pick.iter().all(|&c| c == 0) {
                    break;
                }
            }
        }
        out
    }

    pub fn partition(&self) -> &AtomPartition {
        &self.p
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn agents(&self) -> &[AgentTree] {
        &self.agents
    }

    pub fn envs(&self) -> &[EnvTree] {
        &self.envs
    }

    /// Plays `a`; `answer(d, y)` gives the environment letter at depth `d`.
    fn play_with(&self, a: &AgentTree, mut answer: impl FnMut(usize, Letter) -> Letter) -> Vec<Letter> {
        let mut trace = Vec::new();
        let mut pos = 0;
        for d in 0..=self.horizon {
            let y = a.0[pos];
            if y == STOP {
                break;
            }
            let x = answer(d, y);
            trace.push(self.p.letter(y, x));
            pos += 1 + x as usize * self.agent_size[d + 1];
        }
        trace
    }

    pub fn play(&self, a: &AgentTree, e: &EnvTree) -> Vec<Letter> {
        let mut at = 0;
        self.play_with(a, |d, y| {
            let idx = at + y as usize * (1 + self.env_size[d + 1]);
            at = idx + 1;
            e.0[idx]
        })
    }

    pub fn play_against(&self, a: &AgentTree, e: &EnvTransducer) -> Vec<Letter> {
        let mut s = e.initial();
        self.play_with(a, |_, y| {
            let (x, s2) = e.respond(s, y);
            s = s2;
            x
        })
    }

    /// The tree of a transducer whose plays fit in the horizon.
    pub fn tree_of(&self, a: &AgentTransducer) -> Result<AgentTree, OracleError> {
        let depth = a.max_play_length();
        if depth > self.horizon {
            return Err(OracleError::HorizonExceeded {
                depth,
                horizon: self.horizon,
            });
        }
        let mut codes = Vec::with_capacity(self.agent_size[0]);
        self.fill(a, Some(a.initial()), 0, &mut codes);
        Ok(AgentTree(codes))
    }

    fn fill(&self, a: &AgentTransducer, q: Option<usize>, d: usize, out: &mut Vec<Letter>) {
        let action = q.and_then(|q| a.action(q));
        out.push(action.unwrap_or(STOP));
        if d == self.horizon {
            return;
        }
        for x in 0..self.p.num_env_letters() as Letter {
            let next = action.and(q).map(|q| a.step(q, x));
            self.fill(a, next, d + 1, out);
        }
    }

    /// A transducer with one state per reachable tree node plus a shared
    /// stop state.
    pub fn to_transducer(&self, a: &AgentTree) -> AgentTransducer {
        let nx = self.p.num_env_letters();
        let mut names = Vec::new();
        let mut output = Vec::new();
        let mut next: Vec<Vec<usize>> = Vec::new();
        // (tree position, depth) per state
        let mut nodes = vec![(0usize, 0usize)];
        let mut i = 0;
        while i < nodes.len() {
            let (pos, d) = nodes[i];
            names.push(format!("n{pos}"));
            output.push(a.0[pos]);
            let mut row = Vec::with_capacity(nx);
            for x in 0..nx {
                let child = pos + 1 + x * self.agent_size[d + 1];
                if a.0[child] == STOP {
                    row.push(usize::MAX);
                } else {
                    row.push(nodes.len());
                    nodes.push((child, d + 1));
                }
            }
            next.push(row);
            i += 1;
        }
        let stop = nodes.len();
        names.push("stop".into());
        output.push(0);
        next.push(vec![stop; nx]);
        for row in &mut next {
            for t in row.iter_mut() {
                if *t == usize::MAX {
                    *t = stop;
                }
            }
        }
        let mut terminating = vec![false; stop + 1];
        terminating[stop] = true;
        AgentTransducer::new(&self.p, names, 0, output, terminating, next)
            .expect("tree nodes form a valid transducer")
    }

    /// Whether `e` answers every agent sequence of `h` with the recorded
    /// environment letters.
    pub fn consistent_env(&self, e: &EnvTree, h: &History) -> bool {
        let mut at = 0;
        for (d, &(y, x)) in h.steps().iter().enumerate() {
            if d >= self.horizon {
                return false;
            }
            let idx = at + y as usize * (1 + self.env_size[d + 1]);
            if e.0[idx] != x {
                return false;
            }
            at = idx + 1;
        }
        true
    }
}

/// Strategy classes of one agent tree for one goal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Classes {
    pub win: bool,
    pub weak: bool,
    pub dom: bool,
    pub be: bool,
}

type Bits = Vec<u64>;

fn subset(a: &Bits, b: &Bits) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn bit(b: &Bits, i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

/// The bounded space filtered by an environment specification.
pub struct ExplicitOracle<'s> {
    space: &'s BoundedStrategySpace,
    env: Evaluator,
    raw: Dfa,
    region: Vec<bool>,
    legal: Vec<usize>,
    cache: RefCell<HashMap<Formula, Rc<Vec<Bits>>>>,
}

impl<'s> ExplicitOracle<'s> {
    pub fn new(space: &'s BoundedStrategySpace, spec: &Formula) -> Result<Self, OracleError> {
        spec.check_atoms(&space.p)?;
        let raw = to_dfa(spec, &space.p);
        let region = env_win_region(&raw);
        let mut o = ExplicitOracle {
            space,
            env: Evaluator::new(spec, &space.p)?,
            raw,
            region,
            legal: Vec::new(),
            cache: RefCell::new(HashMap::new()),
        };
        o.legal = (0..space.envs.len()).filter(|&i| o.enforces(&space.envs[i])).collect();
        if o.legal.is_empty() {
            return Err(OracleError::NotEnforceable);
        }
        Ok(o)
    }

    /// Number of environment trees enforcing the specification.
    pub fn legal_count(&self) -> usize {
        self.legal.len()
    }

    fn enforces(&self, e: &EnvTree) -> bool {
        let p = &self.space.p;
        let mut h = Vec::new();
        self.enforces_from(e, 0, &mut h, p)
    }

    fn enforces_from(&self, e: &EnvTree, at: usize, h: &mut Vec<Letter>, p: &AtomPartition) -> bool {
        let d = h.len();
        if d == self.space.horizon {
            return self.raw.run(h).is_some_and(|s| self.region[s]);
        }
        (0..p.num_agent_letters() as Letter).all(|y| {
            let idx = at + y as usize * (1 + self.space.env_size[d + 1]);
            h.push(p.letter(y, e.0[idx]));
            let ok = self.env.satisfies(h) && self.enforces_from(e, idx + 1, h, p);
            h.pop();
            ok
        })
    }

    /// Per agent tree, the legal environments against which the goal holds.
    fn success(&self, goal: &Formula) -> Result<Rc<Vec<Bits>>, OracleError> {
        if let Some(b) = self.cache.borrow().get(goal) {
            return Ok(b.clone());
        }
        let eval = Evaluator::new(goal, &self.space.p)?;
        let words = self.legal.len().div_ceil(64);
        // satisfaction by dense trace index: 0 unknown, 1 false, 2 true
        let base = self.space.p.num_letters() + 1;
        let mut memo = vec![0u8; base.pow(self.space.horizon as u32 + 1)];
        let all: Vec<Bits> = self
            .space
            .agents
            .iter()
            .map(|a| {
                let mut b = vec![0u64; words];
                for (i, &e) in self.legal.iter().enumerate() {
                    let t = self.space.play(a, &self.space.envs[e]);
                    let k = t.iter().fold(0, |k, &l| k * base + l as usize + 1);
                    if memo[k] == 0 {
                        memo[k] = 1 + u8::from(eval.satisfies(&t));
                    }
                    if memo[k] == 2 {
                        b[i / 64] |= 1 << (i % 64);
                    }
                }
                b
            })
            .collect();
        let all = Rc::new(all);
        self.cache.borrow_mut().insert(goal.clone(), all.clone());
        Ok(all)
    }

    fn index_of(&self, a: &AgentTransducer) -> Result<usize, OracleError> {
        let tree = self.space.tree_of(a)?;
        Ok(self
            .space
            .agents
            .iter()
            .position(|t| *t == tree)
            .expect("enumeration is exhaustive"))
    }

    fn full(&self) -> Bits {
        let n = self.legal.len();
        let mut b = vec![u64::MAX; n.div_ceil(64)];
        if n % 64 != 0 {
            *b.last_mut().unwrap() = (1u64 << (n % 64)) - 1;
        }
        b
    }

    fn classes_of(mine: &Bits, all: &[Bits], full: &Bits) -> Classes {
        Classes {
            win: mine == full,
            weak: mine.iter().any(|&w| w != 0),
            dom: all.iter().all(|o| subset(o, mine)),
            be: !all.iter().any(|o| subset(mine, o) && o != mine),
        }
    }

    /// Classes of every enumerated agent tree, in enumeration order.
    pub fn classify(&self, goal: &Formula) -> Result<Vec<Classes>, OracleError> {
        let all = self.success(goal)?;
        let full = self.full();
        Ok(all.iter().map(|m| Self::classes_of(m, &all, &full)).collect())
    }

    pub fn classes(&self, goal: &Formula, a: &AgentTransducer) -> Result<Classes, OracleError> {
        let all = self.success(goal)?;
        let mine = &all[self.index_of(a)?];
        Ok(Self::classes_of(mine, &all, &self.full()))
    }

    pub fn exists_weak(&self, goal: &Formula) -> Result<bool, OracleError> {
        Ok(self.success(goal)?.iter().any(|b| b.iter().any(|&w| w != 0)))
    }

    /// Literal responsibility verdicts over the enumerated space.
    pub fn responsibility(
        &self,
        kind: Kind,
        goal: &Formula,
        a: &AgentTransducer,
        h: Option<&History>,
        e: Option<&EnvTransducer>,
    ) -> Result<bool, OracleError> {
        let me = self.index_of(a)?;
        let p = &self.space.p;
        let outcome = Evaluator::new(goal, p)?;
        let avoid = Evaluator::new(&Formula::not(goal.clone()), p)?;
        if kind == Kind::PrAttrVsEnv {
            let e = e.ok_or(OracleError::MissingInput(kind))?;
            if !self.machine_enforces(e) {
                return Err(OracleError::EnvNotEnforcing);
            }
            let play = crate::strategies::play(a, e).expect("stopping checked by depth bound");
            return Ok(outcome.satisfies(&play)
                && self
                    .space
                    .agents
                    .iter()
                    .any(|b| avoid.satisfies(&self.space.play_against(b, e))));
        }
        let negated = Formula::not(goal.clone());
        let all = self.success(&negated)?;
        let mine = &all[me];
        // environments the verdict may be witnessed by
        let scope: Vec<bool> = match kind {
            Kind::PrAttr | Kind::IprAttr => {
                let h = h.ok_or(OracleError::MissingInput(kind))?;
                if !is_consistent(h, a, false) {
                    return Err(OracleError::InconsistentHistory);
                }
                if h.len() > self.space.horizon {
                    return Err(OracleError::HistoryTooLong {
                        len: h.len(),
                        horizon: self.space.horizon,
                    });
                }
                let s: Vec<bool> = self
                    .legal
                    .iter()
                    .map(|&i| self.space.consistent_env(&self.space.envs[i], h))
                    .collect();
                if !s.contains(&true) {
                    return Err(OracleError::NotEnforceable);
                }
                s
            }
            _ => vec![true; self.legal.len()],
        };
        let fails_here = |i: usize| scope[i] && !bit(mine, i);
        Ok(match kind {
            Kind::PrAnt | Kind::PrAttr => {
                (0..self.legal.len()).any(|i| fails_here(i) && all.iter().any(|o| bit(o, i)))
            }
            Kind::IprAnt | Kind::IprAttr => all.iter().filter(|o| subset(mine, o)).any(|o| {
                (0..self.legal.len()).any(|i| fails_here(i) && bit(o, i))
            }),
            Kind::Ara => {
                self.success(goal)?[me] == self.full()
                    && all.iter().any(|o| o.iter().any(|&w| w != 0))
            }
            Kind::PrAttrVsEnv => unreachable!(),
        })
    }

    fn machine_enforces(&self, e: &EnvTransducer) -> bool {
        fn go(o: &ExplicitOracle, e: &EnvTransducer, h: &mut Vec<Letter>, s: usize) -> bool {
            let p = &o.space.p;
            if h.len() == o.space.horizon {
                return true;
            }
            (0..p.num_agent_letters() as Letter).all(|y| {
                let (x, s2) = e.respond(s, y);
                h.push(p.letter(y, x));
                let ok = o.env.satisfies(h) && go(o, e, h, s2);
                h.pop();
                ok
            })
        }
        go(self, e, &mut Vec::new(), e.initial())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant;

    #[test]
    fn counts_match_closed_form() {
        let p = plant::partition();
        assert_eq!(agent_tree_count(&p, 1), 2);
        assert_eq!(agent_tree_count(&p, 2), 18);
        assert_eq!(agent_tree_count(&p, 3), 722);
        assert_eq!(env_tree_count(&p, 2), 64);
        assert_eq!(env_tree_count(&p, 3), 16384);
        for h in 1..=3 {
            let s = BoundedStrategySpace::new(&p, h).unwrap();
            assert_eq!(s.agents().len() as u128, agent_tree_count(&p, h));
            assert_eq!(s.envs().len() as u128, env_tree_count(&p, h));
            let distinct: std::collections::HashSet<_> = s.agents().iter().collect();
            assert_eq!(distinct.len(), s.agents().len());
        }
    }

    #[test]
    fn trees_round_trip_through_transducers() {
        let p = plant::partition();
        let s = BoundedStrategySpace::new(&p, 2).unwrap();
        for t in s.agents() {
            let a = s.to_transducer(t);
            assert!(a.validate_stopping().is_ok());
            assert_eq!(&s.tree_of(&a).unwrap(), t);
        }
    }

    #[test]
    fn plant_classes() {
        let p = plant::partition();
        let s = BoundedStrategySpace::new(&p, 2).unwrap();
        let o = ExplicitOracle::new(&s, &plant::e1()).unwrap();
        assert_eq!(o.legal_count(), 64);
        let c = o.classes(&plant::phi1(), &plant::sigma1()).unwrap();
        assert!(c.win && c.dom && c.be);
        let c = o.classes(&plant::phi2(), &plant::sigma2()).unwrap();
        assert!(!c.dom && c.be);
        let c = o.classes(&plant::phi2(), &plant::sigma3()).unwrap();
        assert!(c.be);
        let c = o.classes(&plant::phi3(), &plant::sigma1()).unwrap();
        assert!(!c.be);
    }

    #[test]
    fn plays_follow_both_trees() {
        let p = plant::partition();
        let s = BoundedStrategySpace::new(&p, 2).unwrap();
        let a = s.tree_of(&plant::sigma2()).unwrap();
        let e = plant::rain_evening_only();
        assert_eq!(s.play_against(&a, &e), vec![p.letter(1, 0), p.letter(0, 1)]);
    }
}
