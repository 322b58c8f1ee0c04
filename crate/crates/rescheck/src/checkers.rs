//! Decision procedures for weak, winning, dominant and best-effort
//! strategies, plus existence of a weak strategy.
//!
//! Every procedure runs over the environment automaton restricted to its
//! winning region, so only behaviour of environment strategies enforcing
//! the specification is considered. Witnesses are re-checked against the
//! trace semantics before they are returned.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::automata::{
    glue_dfa, history_dfa, lift_to_joint, non_empty, product, product_dfa, restrict,
    to_dfa, to_nfa, unpad_pair, AutomataError, Automaton, Dfa, Nfa, Product, StateId, Track,
};
use crate::games::{self, agent_win_region, env_win_region, weak_region, GameArena};
use crate::ltlf::{AtomPartition, Evaluator, FormulaError, Formula, Letter};
use crate::strategies::{
    is_consistent, is_play_of, strategy_dfa, AgentTransducer, History, StoppingViolation,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error("environment specification is not enforceable: {0}")]
    NotEnforceable(String),
    #[error("agent strategy is not stopping: {0}")]
    NotStopping(StoppingViolation),
    #[error("history is not consistent with the agent strategy")]
    InconsistentHistory,
    #[error("environment strategy does not enforce the specification")]
    EnvNotEnforcing,
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Underachievement {
    /// The goal could be forced from the history but the strategy can fail.
    Winning,
    /// The goal was still reachable from the history but the strategy
    /// never reaches it.
    Pending,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Trace(Vec<Letter>),
    /// `play` is a play of the strategy violating the goal; `alternative`
    /// satisfies it against an environment that could also produce `play`.
    Pair {
        play: Vec<Letter>,
        alternative: Vec<Letter>,
    },
    /// A history after which the strategy does worse than possible, and a
    /// continuation completing it into a failing play.
    Underachievement {
        history: Vec<Letter>,
        kind: Underachievement,
        continuation: Vec<Letter>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Diagnostics {
    pub automaton_sizes: Vec<(String, usize)>,
    pub region_sizes: Vec<(String, usize)>,
    pub wall_time: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub decision: bool,
    pub witness: Option<Witness>,
    pub diagnostics: Diagnostics,
}

/// The automaton of an environment specification and its winning region.
#[derive(Clone, Debug)]
pub struct EnvModel {
    pub raw: Dfa,
    pub region: Vec<bool>,
    pub restricted: Dfa,
    pub enforceable: bool,
}

impl EnvModel {
    pub fn from_dfa(raw: Dfa) -> Self {
        let region = env_win_region(&raw);
        let r = restrict(&raw, &region);
        EnvModel {
            raw,
            region,
            restricted: r.dfa,
            enforceable: r.initial_kept,
        }
    }

    pub fn new(spec: &Formula, p: &AtomPartition) -> Self {
        EnvModel::from_dfa(to_dfa(spec, p))
    }

    /// The model of `E ∧ E_h`, built as a product with the history automaton.
    pub fn with_history(&self, h: &History, p: &AtomPartition) -> Result<Self, CheckError> {
        let prod = product_dfa(&self.raw, &history_dfa(h, p))?;
        Ok(EnvModel::from_dfa(prod.automaton))
    }

    /// Whether `trace` is producible by some environment strategy that
    /// enforces the specification.
    pub fn legal(&self, trace: &[Letter]) -> bool {
        if trace.is_empty() || self.restricted.run(trace).is_none() {
            return false;
        }
        (1..=trace.len()).all(|k| {
            self.raw
                .run(&trace[..k])
                .is_some_and(|s| self.raw.is_final(s))
        })
    }
}

/// Whether some environment strategy enforces `spec`.
pub fn check_env_enforceable(spec: &Formula, p: &AtomPartition) -> bool {
    EnvModel::new(spec, p).enforceable
}

struct GoalModel {
    nfa: Nfa,
    // nfa × restricted environment
    with_env: Product<Nfa>,
    game: Product<Dfa>,
    goals: Vec<bool>,
    win: Vec<bool>,
    weak: Vec<bool>,
    eval: Evaluator,
}

/// Decision procedures against one environment model. Goal automata are
/// compiled once per formula and cached.
pub struct Checker {
    p: AtomPartition,
    env: EnvModel,
    cache: Mutex<HashMap<Formula, Arc<GoalModel>>>,
}

impl Checker {
    pub fn new(p: &AtomPartition, spec: &Formula) -> Result<Self, CheckError> {
        spec.check_atoms(p)?;
        let env = EnvModel::new(spec, p);
        if !env.enforceable {
            return Err(CheckError::NotEnforceable(spec.to_string()));
        }
        Ok(Checker::from_model(p, env))
    }

    fn from_model(p: &AtomPartition, env: EnvModel) -> Self {
        Checker {
            p: p.clone(),
            env,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Checker for `E ∧ E_h`.
    pub fn with_history(&self, h: &History) -> Result<Checker, CheckError> {
        let env = self.env.with_history(h, &self.p)?;
        if !env.enforceable {
            return Err(CheckError::NotEnforceable(format!(
                "specification conjoined with history {}",
                self.p.render_trace(&h.trace(&self.p))
            )));
        }
        Ok(Checker::from_model(&self.p, env))
    }

    pub fn partition(&self) -> &AtomPartition {
        &self.p
    }

    pub fn env(&self) -> &EnvModel {
        &self.env
    }

    fn goal(&self, f: &Formula) -> Result<Arc<GoalModel>, CheckError> {
        if let Some(g) = self.cache.lock().unwrap().get(f) {
            return Ok(g.clone());
        }
        f.check_atoms(&self.p)?;
        let nfa = to_nfa(f, &self.p);
        let with_env = product(&nfa, &self.env.restricted)?;
        let dfa_goal = to_dfa(f, &self.p);
        let game = product_dfa(&dfa_goal, &self.env.restricted)?;
        let goals: Vec<bool> = game.pairs.iter().map(|&(g, _)| dfa_goal.is_final(g)).collect();
        let arena = GameArena::with_goals(game.automaton.clone(), goals.clone());
        let model = Arc::new(GoalModel {
            win: agent_win_region(&arena),
            weak: weak_region(&arena),
            eval: Evaluator::new(f, &self.p).map_err(|e| CheckError::Internal(e.to_string()))?,
            nfa,
            with_env,
            game,
            goals,
        });
        self.cache.lock().unwrap().insert(f.clone(), model.clone());
        Ok(model)
    }

    fn stopping(a: &AgentTransducer) -> Result<(), CheckError> {
        a.validate_stopping().map_err(CheckError::NotStopping)
    }

    fn internal(what: &str) -> CheckError {
        CheckError::Internal(format!("{what} witness failed re-verification"))
    }

    fn base_sizes(&self, g: &GoalModel) -> Vec<(String, usize)> {
        vec![
            ("goal nfa".into(), g.nfa.num_states()),
            ("env dfa".into(), self.env.raw.num_states()),
        ]
    }

    /// Whether some play satisfying `goal` is producible by an enforcing
    /// environment.
    pub fn exists_weak(&self, goal: &Formula) -> Result<Verdict, CheckError> {
        let start = Instant::now();
        let g = self.goal(goal)?;
        let witness = non_empty(&g.with_env.automaton);
        if let Some(w) = &witness {
            if !(self.env.legal(w) && g.eval.satisfies(w)) {
                return Err(Self::internal("exists-weak"));
            }
        }
        let mut sizes = self.base_sizes(&g);
        sizes.push(("product".into(), g.with_env.automaton.num_states()));
        Ok(Verdict {
            decision: witness.is_some(),
            witness: witness.map(Witness::Trace),
            diagnostics: Diagnostics {
                automaton_sizes: sizes,
                region_sizes: vec![("env region".into(), games::count(&self.env.region))],
                wall_time: start.elapsed(),
            },
        })
    }

    /// Shortest play of `a` satisfying `goal` against an enforcing environment.
    fn cooperative_play(
        &self,
        goal: &Formula,
        a: &AgentTransducer,
    ) -> Result<(Option<Vec<Letter>>, Diagnostics), CheckError> {
        let g = self.goal(goal)?;
        let sd = strategy_dfa(a, &self.p);
        let prod = product(&g.with_env.automaton, &sd)?;
        let witness = non_empty(&prod.automaton);
        if let Some(w) = &witness {
            if !(self.env.legal(w) && g.eval.satisfies(w) && is_play_of(w, a)) {
                return Err(Self::internal("play"));
            }
        }
        let mut sizes = self.base_sizes(&g);
        sizes.push(("strategy dfa".into(), sd.num_states()));
        sizes.push(("product".into(), prod.automaton.num_states()));
        let diagnostics = Diagnostics {
            automaton_sizes: sizes,
            region_sizes: vec![("env region".into(), games::count(&self.env.region))],
            wall_time: Duration::ZERO,
        };
        Ok((witness, diagnostics))
    }

    pub fn check_weak(&self, goal: &Formula, a: &AgentTransducer) -> Result<Verdict, CheckError> {
        let start = Instant::now();
        Self::stopping(a)?;
        let (witness, mut diagnostics) = self.cooperative_play(goal, a)?;
        diagnostics.wall_time = start.elapsed();
        Ok(Verdict {
            decision: witness.is_some(),
            witness: witness.map(Witness::Trace),
            diagnostics,
        })
    }

    pub fn check_win(&self, goal: &Formula, a: &AgentTransducer) -> Result<Verdict, CheckError> {
        let start = Instant::now();
        Self::stopping(a)?;
        let negated = Formula::not(goal.clone());
        let (witness, mut diagnostics) = self.cooperative_play(&negated, a)?;
        diagnostics.wall_time = start.elapsed();
        Ok(Verdict {
            decision: witness.is_none(),
            witness: witness.map(Witness::Trace),
            diagnostics,
        })
    }

    pub fn check_dom(&self, goal: &Formula, a: &AgentTransducer) -> Result<Verdict, CheckError> {
        let start = Instant::now();
        Self::stopping(a)?;
        let p = &self.p;
        let bad = self.goal(&Formula::not(goal.clone()))?;
        let good = self.goal(goal)?;
        let sd = strategy_dfa(a, p);
        let left = product(&bad.with_env.automaton, &sd)?.automaton;
        let left = lift_to_joint(&left, p, Track::Unprimed);
        let right = lift_to_joint(&good.with_env.automaton, p, Track::Primed);
        let glue = glue_dfa(p);
        let joint = product(&product(&glue, &left)?.automaton, &right)?.automaton;
        let witness = non_empty(&joint).map(|w| {
            let (play, alternative) = unpad_pair(p, &w);
            Witness::Pair { play, alternative }
        });
        if let Some(Witness::Pair { play, alternative }) = &witness {
            let ok = self.env.legal(play)
                && self.env.legal(alternative)
                && is_play_of(play, a)
                && bad.eval.satisfies(play)
                && good.eval.satisfies(alternative)
                && same_env_until_divergence(p, play, alternative);
            if !ok {
                return Err(Self::internal("dominance"));
            }
        }
        let mut sizes = self.base_sizes(&good);
        sizes.push(("strategy dfa".into(), sd.num_states()));
        sizes.push(("glue dfa".into(), glue.num_states()));
        sizes.push(("joint product".into(), joint.num_states()));
        Ok(Verdict {
            decision: witness.is_none(),
            witness,
            diagnostics: Diagnostics {
                automaton_sizes: sizes,
                region_sizes: vec![("env region".into(), games::count(&self.env.region))],
                wall_time: start.elapsed(),
            },
        })
    }

    pub fn check_be(&self, goal: &Formula, a: &AgentTransducer) -> Result<Verdict, CheckError> {
        let start = Instant::now();
        Self::stopping(a)?;
        let g = self.goal(goal)?;
        let sd = strategy_dfa(a, &self.p).trim();
        let prod = product_dfa(&g.game.automaton, &sd)?;
        let gp = &prod.automaton;
        let co = gp.coreachable();
        let bad_reach = reaches(gp, &co.iter().map(|&c| !c).collect::<Vec<_>>());
        let (order, parent) = bfs_tree(gp);
        let mut found = None;
        for &s in &order {
            let (gs, _) = prod.pairs[s];
            if g.win[gs] && bad_reach[s] {
                found = Some((s, Underachievement::Winning));
                break;
            }
            if g.weak[gs] && !g.win[gs] && !co[s] {
                found = Some((s, Underachievement::Pending));
                break;
            }
        }
        let witness = found.map(|(s, kind)| {
            let history = path_to(&parent, s);
            let continuation = failing_continuation(gp, &co, s);
            Witness::Underachievement {
                history,
                kind,
                continuation,
            }
        });
        if let Some(Witness::Underachievement {
            history,
            kind,
            continuation,
        }) = &witness
        {
            let full: Vec<Letter> = history.iter().chain(continuation).copied().collect();
            let at = g.game.automaton.run(history);
            let region_ok = match (at, kind) {
                (Some(s), Underachievement::Winning) => g.win[s],
                (Some(s), Underachievement::Pending) => g.weak[s] && !g.win[s],
                _ => false,
            };
            let ok = region_ok
                && self.env.legal(&full)
                && is_play_of(&full, a)
                && !g.eval.satisfies(&full);
            if !ok {
                return Err(Self::internal("best-effort"));
            }
        }
        let mut sizes = self.base_sizes(&g);
        sizes.push(("game".into(), g.game.automaton.num_states()));
        sizes.push(("strategy dfa".into(), sd.num_states()));
        sizes.push(("game x strategy".into(), gp.num_states()));
        Ok(Verdict {
            decision: witness.is_none(),
            witness,
            diagnostics: Diagnostics {
                automaton_sizes: sizes,
                region_sizes: vec![
                    ("env region".into(), games::count(&self.env.region)),
                    ("goal states".into(), games::count(&g.goals)),
                    ("winning region".into(), games::count(&g.win)),
                    ("weak region".into(), games::count(&g.weak)),
                ],
                wall_time: start.elapsed(),
            },
        })
    }

    /// Size of the product of the goal game with the environment, used to
    /// pick oracle horizons.
    pub fn game_size(&self, goal: &Formula) -> Result<usize, CheckError> {
        Ok(self.goal(goal)?.game.automaton.num_states())
    }

    /// Checks that `h` is a prefix of a play of `a`.
    pub fn require_consistent(h: &History, a: &AgentTransducer) -> Result<(), CheckError> {
        if is_consistent(h, a, false) {
            Ok(())
        } else {
            Err(CheckError::InconsistentHistory)
        }
    }
}

/// Environment letters agree at every step before the agent moves of the
/// two traces first differ; ending a trace counts as an agent move.
pub fn same_env_until_divergence(p: &AtomPartition, a: &[Letter], b: &[Letter]) -> bool {
    for i in 0.. {
        let (Some(&la), Some(&lb)) = (a.get(i), b.get(i)) else {
            return a.len() != b.len();
        };
        let (ya, xa) = p.split(la);
        let (yb, xb) = p.split(lb);
        if ya != yb {
            return true;
        }
        if xa != xb {
            return false;
        }
    }
    unreachable!()
}

/// States from which some state in `target` is reachable.
fn reaches(d: &Dfa, target: &[bool]) -> Vec<bool> {
    let letters = d.alphabet().num_letters() as Letter;
    let mut rev = vec![Vec::new(); d.num_states()];
    for s in 0..d.num_states() {
        for l in 0..letters {
            if let Some(t) = d.step(s, l) {
                rev[t].push(s);
            }
        }
    }
    let mut seen = target.to_vec();
    let mut queue: VecDeque<StateId> = (0..d.num_states()).filter(|&s| seen[s]).collect();
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

type Parents = Vec<Option<(StateId, Letter)>>;

fn bfs_tree(d: &Dfa) -> (Vec<StateId>, Parents) {
    let letters = d.alphabet().num_letters() as Letter;
    let mut parent = vec![None; d.num_states()];
    let mut seen = vec![false; d.num_states()];
    let mut order = vec![d.initial()];
    seen[d.initial()] = true;
    let mut i = 0;
    while i < order.len() {
        let s = order[i];
        for l in 0..letters {
            if let Some(t) = d.step(s, l) {
                if !seen[t] {
                    seen[t] = true;
                    parent[t] = Some((s, l));
                    order.push(t);
                }
            }
        }
        i += 1;
    }
    (order, parent)
}

fn path_to(parent: &Parents, mut s: StateId) -> Vec<Letter> {
    let mut word = Vec::new();
    while let Some((prev, l)) = parent[s] {
        word.push(l);
        s = prev;
    }
    word.reverse();
    word
}

/// From `s`, walk to a state outside `co` and then on until no move is
/// left. Requires that every cycle passes through a state without moves,
/// which holds for products with a stopping strategy.
fn failing_continuation(d: &Dfa, co: &[bool], s: StateId) -> Vec<Letter> {
    let bad: Vec<bool> = co.iter().map(|&c| !c).collect();
    let mut word = Vec::new();
    let mut cur = s;
    let letters = d.alphabet().num_letters() as Letter;
    if co[cur] {
        let (_, parent) = bfs_from(d, cur);
        let target = (0..d.num_states())
            .find(|&t| bad[t] && (t == cur || parent[t].is_some()))
            .expect("caller checked a failing state is reachable");
        word = path_to(&parent, target);
        cur = target;
    }
    loop {
        let next = (0..letters).find_map(|l| d.step(cur, l).map(|t| (l, t)));
        match next {
            Some((l, t)) => {
                word.push(l);
                cur = t;
            }
            None => return word,
        }
    }
}

fn bfs_from(d: &Dfa, root: StateId) -> (Vec<StateId>, Parents) {
    let mut rerooted = d.clone();
    rerooted.set_initial(root);
    bfs_tree(&rerooted)
}

// Convenience entry points compiling everything from formulas.

pub fn exists_weak(goal: &Formula, spec: &Formula, p: &AtomPartition) -> Result<Verdict, CheckError> {
    Checker::new(p, spec)?.exists_weak(goal)
}

pub fn check_weak(
    goal: &Formula,
    spec: &Formula,
    a: &AgentTransducer,
    p: &AtomPartition,
) -> Result<Verdict, CheckError> {
    Checker::new(p, spec)?.check_weak(goal, a)
}

pub fn check_win(
    goal: &Formula,
    spec: &Formula,
    a: &AgentTransducer,
    p: &AtomPartition,
) -> Result<Verdict, CheckError> {
    Checker::new(p, spec)?.check_win(goal, a)
}

pub fn check_dom(
    goal: &Formula,
    spec: &Formula,
    a: &AgentTransducer,
    p: &AtomPartition,
) -> Result<Verdict, CheckError> {
    Checker::new(p, spec)?.check_dom(goal, a)
}

pub fn check_be(
    goal: &Formula,
    spec: &Formula,
    a: &AgentTransducer,
    p: &AtomPartition,
) -> Result<Verdict, CheckError> {
    Checker::new(p, spec)?.check_be(goal, a)
}
