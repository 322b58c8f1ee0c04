//! Brute-force evaluation of the strategy and responsibility definitions at
//! a bounded horizon.
//!
//! Plays have at most `H` steps. An environment may produce a history when
//! every nonempty prefix satisfies the specification and, at depth `H`, the
//! specification automaton is in its environment winning region; this closes
//! the horizon soundly. Quantifiers over strategies are evaluated by search
//! over histories: two strategies differ from the first history where their
//! choices differ, and an environment may answer independently on the two
//! branches after that point.
//!
//! [`explicit`] enumerates whole strategy trees instead and is only usable
//! for horizons of two or three.

use std::cell::RefCell;
use std::collections::HashMap;

use thiserror::Error;

use crate::automata::{to_dfa, Dfa};
use crate::checkers::{CheckError, Checker};
use crate::games::env_win_region;
use crate::ltlf::{AtomPartition, EvalError, Evaluator, Formula, FormulaError, Letter};
use crate::responsibility::Kind;
use crate::strategies::{is_consistent, AgentTransducer, EnvTransducer, History};

pub mod explicit;
pub mod gen;
pub mod suite;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("strategy plays up to {depth} steps, beyond the horizon {horizon}")]
    HorizonExceeded { depth: usize, horizon: usize },
    #[error("horizon {horizon} is shorter than the history ({len} steps)")]
    HistoryTooLong { len: usize, horizon: usize },
    #[error("horizon {0} is out of the supported range")]
    BadHorizon(usize),
    #[error("environment specification is not enforceable within the horizon")]
    NotEnforceable,
    #[error("history is not consistent with the agent strategy")]
    InconsistentHistory,
    #[error("environment strategy does not enforce the specification")]
    EnvNotEnforcing,
    #[error("{0} needs an input that was not given")]
    MissingInput(Kind),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

// (length, packed letters)
type Key = (u8, u64);

/// Bounded reference semantics for one partition, specification and horizon.
pub struct BoundedOracle {
    p: AtomPartition,
    env: Evaluator,
    raw: Dfa,
    region: Vec<bool>,
    horizon: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Move {
    Stop,
    Play(Letter),
}

/// Legal histories, optionally pinned to the environment answers of a
/// recorded history.
struct Arena<'o> {
    o: &'o BoundedOracle,
    pin: Option<&'o [(Letter, Letter)]>,
    memo: RefCell<HashMap<Key, bool>>,
}

impl<'o> Arena<'o> {
    fn new(o: &'o BoundedOracle, pin: Option<&'o [(Letter, Letter)]>) -> Self {
        Arena {
            o,
            pin,
            memo: RefCell::new(HashMap::new()),
        }
    }

    fn pin_ok(&self, h: &[Letter]) -> bool {
        let Some(pin) = self.pin else { return true };
        let i = h.len() - 1;
        if i >= pin.len() {
            return true;
        }
        let p = &self.o.p;
        let matches = (0..=i).all(|j| p.split(h[j]).0 == pin[j].0);
        !matches || p.split(h[i]).1 == pin[i].1
    }

    /// Some environment strategy enforcing the specification produces `h`.
    fn ext(&self, h: &mut Vec<Letter>) -> bool {
        let key = self.o.key(h);
        if let Some(&v) = self.memo.borrow().get(&key) {
            return v;
        }
        let v = self.ext_uncached(h);
        self.memo.borrow_mut().insert(key, v);
        v
    }

    fn ext_uncached(&self, h: &mut Vec<Letter>) -> bool {
        if !h.is_empty() && !(self.o.env.satisfies(h) && self.pin_ok(h)) {
            return false;
        }
        if h.len() == self.o.horizon {
            return self.o.raw.run(h).is_some_and(|s| self.o.region[s]);
        }
        let p = &self.o.p;
        (0..p.num_agent_letters() as Letter).all(|y| {
            (0..p.num_env_letters() as Letter).any(|x| {
                h.push(p.letter(y, x));
                let ok = self.ext(h);
                h.pop();
                ok
            })
        })
    }
}

/// Searches for one goal over one arena.
struct Search<'a> {
    arena: &'a Arena<'a>,
    goal: &'a Evaluator,
    coop: RefCell<HashMap<Key, bool>>,
    force: RefCell<HashMap<Key, bool>>,
}

impl<'a> Search<'a> {
    fn new(arena: &'a Arena<'a>, goal: &'a Evaluator) -> Self {
        Search {
            arena,
            goal,
            coop: RefCell::new(HashMap::new()),
            force: RefCell::new(HashMap::new()),
        }
    }

    fn p(&self) -> &AtomPartition {
        &self.arena.o.p
    }

    fn horizon(&self) -> usize {
        self.arena.o.horizon
    }

    fn sat(&self, h: &[Letter]) -> bool {
        self.goal.satisfies(h)
    }

    /// Legal successors of `h` after agent letter `y`; `f` sees each in turn.
    fn any_answer(&self, h: &mut Vec<Letter>, y: Letter, mut f: impl FnMut(&mut Vec<Letter>) -> bool) -> bool {
        for x in 0..self.p().num_env_letters() as Letter {
            h.push(self.p().letter(y, x));
            let hit = self.arena.ext(h) && f(h);
            h.pop();
            if hit {
                return true;
            }
        }
        false
    }

    fn all_answers(&self, h: &mut Vec<Letter>, y: Letter, mut f: impl FnMut(&mut Vec<Letter>) -> bool) -> bool {
        let mut some = false;
        for x in 0..self.p().num_env_letters() as Letter {
            h.push(self.p().letter(y, x));
            let legal = self.arena.ext(h);
            let ok = !legal || f(h);
            h.pop();
            some |= legal;
            if !ok {
                return false;
            }
        }
        some
    }

    /// Some agent and some legal environment continue `h` into a play
    /// satisfying the goal.
    fn coop_node(&self, h: &mut Vec<Letter>) -> bool {
        let key = self.arena.o.key(h);
        if let Some(&v) = self.coop.borrow().get(&key) {
            return v;
        }
        let v = self.sat(h)
            || (0..self.p().num_agent_letters() as Letter).any(|y| self.coop_move(h, Move::Play(y)));
        self.coop.borrow_mut().insert(key, v);
        v
    }

    fn coop_move(&self, h: &mut Vec<Letter>, m: Move) -> bool {
        match m {
            Move::Stop => self.sat(h),
            Move::Play(y) => h.len() < self.horizon() && self.any_answer(h, y, |h| self.coop_node(h)),
        }
    }

    /// Some agent continuation satisfies the goal against every legal
    /// environment.
    fn force_node(&self, h: &mut Vec<Letter>) -> bool {
        let key = self.arena.o.key(h);
        if let Some(&v) = self.force.borrow().get(&key) {
            return v;
        }
        let v = self.sat(h)
            || (0..self.p().num_agent_letters() as Letter).any(|y| self.force_move(h, Move::Play(y)));
        self.force.borrow_mut().insert(key, v);
        v
    }

    fn force_move(&self, h: &mut Vec<Letter>, m: Move) -> bool {
        match m {
            Move::Stop => self.sat(h),
            Move::Play(y) => h.len() < self.horizon() && self.all_answers(h, y, |h| self.force_node(h)),
        }
    }

    /// Some legal continuation of `a` from `h` (in state `q`) ends in a play
    /// whose satisfaction of the goal is `want`.
    fn outcome(&self, a: &AgentTransducer, h: &mut Vec<Letter>, q: usize, want: bool) -> bool {
        match a.action(q) {
            None => self.sat(h) == want,
            Some(y) => {
                let p = self.p();
                self.any_answer(h, y, |h| {
                    let x = p.split(*h.last().unwrap()).1;
                    self.outcome(a, h, a.step(q, x), want)
                })
            }
        }
    }

    /// Visits every legal history reachable by `a`, stopping early when `f`
    /// returns true.
    fn exists_node(
        &self,
        a: &AgentTransducer,
        h: &mut Vec<Letter>,
        q: usize,
        f: &mut dyn FnMut(&mut Vec<Letter>, usize) -> bool,
    ) -> bool {
        if f(h, q) {
            return true;
        }
        let Some(y) = a.action(q) else { return false };
        let p = self.p().clone();
        for x in 0..p.num_env_letters() as Letter {
            h.push(p.letter(y, x));
            let hit = self.arena.ext(h) && self.exists_node(a, h, a.step(q, x), f);
            h.pop();
            if hit {
                return true;
            }
        }
        false
    }

    fn alternatives(&self, a: &AgentTransducer, h: &[Letter], q: usize) -> Vec<Move> {
        let own = match a.action(q) {
            Some(y) => Move::Play(y),
            None => Move::Stop,
        };
        let mut out = Vec::new();
        if !h.is_empty() {
            out.push(Move::Stop);
        }
        out.extend((0..self.p().num_agent_letters() as Letter).map(Move::Play));
        out.retain(|&m| m != own);
        out
    }
}

/// Some other strategy, diverging from `a` at a legal history, satisfies the
/// goal against an environment under which `a` fails it.
fn beaten(s: &Search, a: &AgentTransducer) -> bool {
    let mut h = Vec::new();
    s.exists_node(a, &mut h, a.initial(), &mut |h, q| {
        s.outcome(a, h, q, false)
            && s.alternatives(a, h, q)
                .into_iter()
                .any(|m| s.coop_move(h, m))
    })
}

/// Some strategy strictly dominates `a` (dominance judged in `judge`) and
/// does strictly better against an environment allowed by `witness`.
fn strictly_beaten(witness: &Search, judge: &Search, a: &AgentTransducer) -> bool {
    let mut h = Vec::new();
    witness.exists_node(a, &mut h, a.initial(), &mut |h, q| {
        if !witness.outcome(a, h, q, false) {
            return false;
        }
        let hopeless = !judge.outcome(a, h, q, true);
        witness
            .alternatives(a, h, q)
            .into_iter()
            .any(|m| witness.coop_move(h, m) && (hopeless || judge.force_move(h, m)))
    })
}

impl BoundedOracle {
    pub fn new(p: &AtomPartition, spec: &Formula, horizon: usize) -> Result<Self, OracleError> {
        spec.check_atoms(p)?;
        if horizon == 0 || horizon * p.width() > 64 || horizon > 255 {
            return Err(OracleError::BadHorizon(horizon));
        }
        let raw = to_dfa(spec, p);
        let region = env_win_region(&raw);
        let o = BoundedOracle {
            p: p.clone(),
            env: Evaluator::new(spec, p)?,
            raw,
            region,
            horizon,
        };
        if !Arena::new(&o, None).ext(&mut Vec::new()) {
            return Err(OracleError::NotEnforceable);
        }
        Ok(o)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    fn key(&self, h: &[Letter]) -> Key {
        let w = self.p.width();
        let packed = h.iter().fold(0u64, |acc, &l| (acc << w) | l as u64);
        (h.len() as u8, packed)
    }

    fn fits(&self, a: &AgentTransducer) -> Result<(), OracleError> {
        let depth = a.max_play_length();
        if depth > self.horizon {
            return Err(OracleError::HorizonExceeded {
                depth,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    fn eval(&self, f: &Formula) -> Result<Evaluator, OracleError> {
        f.check_atoms(&self.p)?;
        Ok(Evaluator::new(f, &self.p)?)
    }

    fn pinned<'o>(&'o self, a: &AgentTransducer, h: &'o History) -> Result<Arena<'o>, OracleError> {
        if !is_consistent(h, a, false) {
            return Err(OracleError::InconsistentHistory);
        }
        if h.len() > self.horizon {
            return Err(OracleError::HistoryTooLong {
                len: h.len(),
                horizon: self.horizon,
            });
        }
        let arena = Arena::new(self, Some(h.steps()));
        if !arena.ext(&mut Vec::new()) {
            return Err(OracleError::NotEnforceable);
        }
        Ok(arena)
    }

    pub fn check_win(&self, goal: &Formula, a: &AgentTransducer) -> Result<bool, OracleError> {
        self.fits(a)?;
        let g = self.eval(goal)?;
        let arena = Arena::new(self, None);
        let s = Search::new(&arena, &g);
        Ok(!s.outcome(a, &mut Vec::new(), a.initial(), false))
    }

    pub fn check_weak(&self, goal: &Formula, a: &AgentTransducer) -> Result<bool, OracleError> {
        self.fits(a)?;
        let g = self.eval(goal)?;
        let arena = Arena::new(self, None);
        let s = Search::new(&arena, &g);
        Ok(s.outcome(a, &mut Vec::new(), a.initial(), true))
    }

    pub fn exists_weak(&self, goal: &Formula) -> Result<bool, OracleError> {
        let g = self.eval(goal)?;
        let arena = Arena::new(self, None);
        Ok(Search::new(&arena, &g).coop_node(&mut Vec::new()))
    }

    pub fn check_dom(&self, goal: &Formula, a: &AgentTransducer) -> Result<bool, OracleError> {
        self.fits(a)?;
        let g = self.eval(goal)?;
        let arena = Arena::new(self, None);
        Ok(!beaten(&Search::new(&arena, &g), a))
    }

    pub fn check_be(&self, goal: &Formula, a: &AgentTransducer) -> Result<bool, OracleError> {
        self.fits(a)?;
        let g = self.eval(goal)?;
        let arena = Arena::new(self, None);
        let s = Search::new(&arena, &g);
        Ok(!strictly_beaten(&s, &s, a))
    }

    /// Dominance and best effort under the specification conjoined with the
    /// environment moves of `h`; the reduced forms of attribution.
    pub fn check_dom_on(&self, goal: &Formula, a: &AgentTransducer, h: &History) -> Result<bool, OracleError> {
        self.fits(a)?;
        let g = self.eval(goal)?;
        let arena = self.pinned(a, h)?;
        Ok(!beaten(&Search::new(&arena, &g), a))
    }

    pub fn check_be_on(&self, goal: &Formula, a: &AgentTransducer, h: &History) -> Result<bool, OracleError> {
        self.fits(a)?;
        let g = self.eval(goal)?;
        let arena = self.pinned(a, h)?;
        let s = Search::new(&arena, &g);
        Ok(!strictly_beaten(&s, &s, a))
    }

    /// Whether `e` keeps the specification on every prefix of every play of
    /// at most `H` steps.
    pub fn env_enforces(&self, e: &EnvTransducer) -> bool {
        fn go(o: &BoundedOracle, e: &EnvTransducer, h: &mut Vec<Letter>, s: usize) -> bool {
            if h.len() == o.horizon {
                return true;
            }
            (0..o.p.num_agent_letters() as Letter).all(|y| {
                let (x, s2) = e.respond(s, y);
                h.push(o.p.letter(y, x));
                let ok = o.env.satisfies(h) && go(o, e, h, s2);
                h.pop();
                ok
            })
        }
        go(self, e, &mut Vec::new(), e.initial())
    }

    /// Some agent behaviour of at most `H` steps against `e` yields a play
    /// satisfying `goal`.
    fn someone_achieves(&self, goal: &Evaluator, e: &EnvTransducer) -> bool {
        fn go(o: &BoundedOracle, g: &Evaluator, e: &EnvTransducer, h: &mut Vec<Letter>, s: usize) -> bool {
            if g.satisfies(h) {
                return true;
            }
            if h.len() == o.horizon {
                return false;
            }
            (0..o.p.num_agent_letters() as Letter).any(|y| {
                let (x, s2) = e.respond(s, y);
                h.push(o.p.letter(y, x));
                let ok = go(o, g, e, h, s2);
                h.pop();
                ok
            })
        }
        go(self, goal, e, &mut Vec::new(), e.initial())
    }

    /// The responsibility verdict `kind` for outcome `goal`, evaluated
    /// literally. Inexcusable attribution on a history judges dominance
    /// under the unrestricted specification.
    pub fn responsibility(
        &self,
        kind: Kind,
        goal: &Formula,
        a: &AgentTransducer,
        h: Option<&History>,
        e: Option<&EnvTransducer>,
    ) -> Result<bool, OracleError> {
        self.fits(a)?;
        let outcome = self.eval(goal)?;
        let avoid = self.eval(&Formula::not(goal.clone()))?;
        let free = Arena::new(self, None);
        let s = Search::new(&free, &avoid);
        Ok(match kind {
            Kind::PrAnt => beaten(&s, a),
            Kind::IprAnt => strictly_beaten(&s, &s, a),
            Kind::PrAttr => {
                let h = h.ok_or(OracleError::MissingInput(kind))?;
                let arena = self.pinned(a, h)?;
                beaten(&Search::new(&arena, &avoid), a)
            }
            Kind::IprAttr => {
                let h = h.ok_or(OracleError::MissingInput(kind))?;
                let arena = self.pinned(a, h)?;
                strictly_beaten(&Search::new(&arena, &avoid), &s, a)
            }
            Kind::Ara => {
                let fs = Search::new(&free, &outcome);
                !fs.outcome(a, &mut Vec::new(), a.initial(), false) && s.coop_node(&mut Vec::new())
            }
            Kind::PrAttrVsEnv => {
                let e = e.ok_or(OracleError::MissingInput(kind))?;
                if !self.env_enforces(e) {
                    return Err(OracleError::EnvNotEnforcing);
                }
                let play = crate::strategies::play(a, e).expect("stopping checked by depth bound");
                outcome.satisfies(&play) && self.someone_achieves(&avoid, e)
            }
        })
    }
}

/// Horizon used for universal claims: the strategy's depth plus the size of
/// the larger of the goal games for the goal and its negation. Documented,
/// not proven, as sufficient.
pub fn sufficient_horizon(
    checker: &Checker,
    goal: &Formula,
    a: &AgentTransducer,
) -> Result<usize, CheckError> {
    let g = checker.game_size(goal)?;
    let n = checker.game_size(&Formula::not(goal.clone()))?;
    Ok(a.max_play_length() + g.max(n))
}

/// [`sufficient_horizon`] under the specification conjoined with `E_h`.
pub fn sufficient_horizon_on(
    checker: &Checker,
    goal: &Formula,
    a: &AgentTransducer,
    h: &History,
) -> Result<usize, CheckError> {
    let base = sufficient_horizon(checker, goal, a)?;
    let on = sufficient_horizon(&checker.with_history(h)?, goal, a)?;
    Ok(base.max(on).max(h.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::*;

    fn oracle(h: usize) -> BoundedOracle {
        BoundedOracle::new(&partition(), &e1(), h).unwrap()
    }

    #[test]
    fn plant_strategy_classes() {
        let o = oracle(3);
        assert!(o.check_win(&phi1(), &sigma1()).unwrap());
        assert!(!o.check_win(&phi1(), &sigma3()).unwrap());
        assert!(!o.check_dom(&phi2(), &sigma2()).unwrap());
        assert!(o.check_be(&phi2(), &sigma2()).unwrap());
        assert!(o.check_be(&phi2(), &sigma3()).unwrap());
        assert!(o.check_dom(&phi3(), &sigma3()).unwrap());
        assert!(!o.check_be(&phi3(), &sigma1()).unwrap());
    }

    #[test]
    fn plant_responsibility() {
        let o = oracle(3);
        let not2 = Formula::not(phi2());
        let e = rain_evening_only();
        assert!(o
            .responsibility(Kind::PrAttrVsEnv, &not2, &sigma2(), None, Some(&e))
            .unwrap());
        assert!(!o.responsibility(Kind::Ara, &Formula::True, &sigma1(), None, None).unwrap());
        assert!(o.responsibility(Kind::Ara, &phi1(), &sigma1(), None, None).unwrap());
    }

    #[test]
    fn horizon_is_enforced() {
        let o = oracle(1);
        assert!(matches!(
            o.check_win(&phi1(), &sigma1()),
            Err(OracleError::HorizonExceeded { depth: 2, horizon: 1 })
        ));
    }

    #[test]
    fn unenforceable_spec_is_rejected() {
        let p = partition();
        let spec = crate::ltlf::parse("G w", &p).unwrap();
        assert!(matches!(
            BoundedOracle::new(&p, &spec, 2),
            Err(OracleError::NotEnforceable)
        ));
    }
}
