//! Responsibility verdicts reduced to the strategy checkers.
//!
//! | verdict | decision |
//! |---|---|
//! | passive anticipation | `!dom(!ω, E)` |
//! | inexcusable passive anticipation | `!be(!ω, E)` |
//! | passive attribution on `h` | `!dom(!ω, E ∧ E_h)` |
//! | inexcusable passive attribution on `h` | `!be(!ω, E ∧ E_h)` |
//! | active responsibility | `win(ω, E) ∧ exists_weak(!ω, E)` |
//!
//! Passive attribution against a concrete environment machine is decided
//! directly: the play satisfies `ω` and some other agent behaviour against
//! the same machine avoids it.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use crate::automata::{non_empty, product, to_nfa, Automaton};
use crate::checkers::{CheckError, Checker, Verdict, Witness};
use crate::ltlf::{AtomPartition, Evaluator, Formula};
use crate::strategies::{
    env_enforces_dfa, env_transducer_dfa, play, AgentTransducer, EnvTransducer, History,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    PrAnt,
    IprAnt,
    PrAttr,
    IprAttr,
    Ara,
    PrAttrVsEnv,
}

impl Kind {
    pub const ALL: [Kind; 6] = [
        Kind::PrAnt,
        Kind::IprAnt,
        Kind::PrAttr,
        Kind::IprAttr,
        Kind::Ara,
        Kind::PrAttrVsEnv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::PrAnt => "pr-ant",
            Kind::IprAnt => "ipr-ant",
            Kind::PrAttr => "pr-attr",
            Kind::IprAttr => "ipr-attr",
            Kind::Ara => "ara",
            Kind::PrAttrVsEnv => "pr-attr-vs-env",
        }
    }

    pub fn needs_history(self) -> bool {
        matches!(self, Kind::PrAttr | Kind::IprAttr)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown responsibility kind `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResponsibilityReport {
    pub kind: Kind,
    pub decision: bool,
    pub goal: Formula,
    pub history: Option<History>,
    /// Underlying checker verdicts, labelled by procedure.
    pub verdicts: Vec<(String, Verdict)>,
}

/// Responsibility verdicts for one partition and environment specification.
pub struct Responsibility {
    checker: Checker,
    exists_weak: Mutex<HashMap<Formula, Verdict>>,
}

impl Responsibility {
    pub fn new(p: &AtomPartition, spec: &Formula) -> Result<Self, CheckError> {
        Ok(Responsibility {
            checker: Checker::new(p, spec)?,
            exists_weak: Mutex::new(HashMap::new()),
        })
    }

    pub fn checker(&self) -> &Checker {
        &self.checker
    }

    fn report(
        kind: Kind,
        decision: bool,
        goal: &Formula,
        history: Option<&History>,
        verdicts: Vec<(&str, Verdict)>,
    ) -> ResponsibilityReport {
        ResponsibilityReport {
            kind,
            decision,
            goal: goal.clone(),
            history: history.cloned(),
            verdicts: verdicts
                .into_iter()
                .map(|(n, v)| (n.to_string(), v))
                .collect(),
        }
    }

    pub fn anticipate_passive(
        &self,
        goal: &Formula,
        a: &AgentTransducer,
    ) -> Result<ResponsibilityReport, CheckError> {
        let v = self.checker.check_dom(&Formula::not(goal.clone()), a)?;
        Ok(Self::report(Kind::PrAnt, !v.decision, goal, None, vec![("dom", v)]))
    }

    pub fn anticipate_inexcusable(
        &self,
        goal: &Formula,
        a: &AgentTransducer,
    ) -> Result<ResponsibilityReport, CheckError> {
        let v = self.checker.check_be(&Formula::not(goal.clone()), a)?;
        Ok(Self::report(Kind::IprAnt, !v.decision, goal, None, vec![("be", v)]))
    }

    fn on_history(&self, a: &AgentTransducer, h: &History) -> Result<Checker, CheckError> {
        Checker::require_consistent(h, a)?;
        self.checker.with_history(h)
    }

    pub fn attribute_passive(
        &self,
        goal: &Formula,
        a: &AgentTransducer,
        h: &History,
    ) -> Result<ResponsibilityReport, CheckError> {
        let v = self.on_history(a, h)?.check_dom(&Formula::not(goal.clone()), a)?;
        Ok(Self::report(Kind::PrAttr, !v.decision, goal, Some(h), vec![("dom", v)]))
    }

    pub fn attribute_inexcusable(
        &self,
        goal: &Formula,
        a: &AgentTransducer,
        h: &History,
    ) -> Result<ResponsibilityReport, CheckError> {
        let v = self.on_history(a, h)?.check_be(&Formula::not(goal.clone()), a)?;
        Ok(Self::report(Kind::IprAttr, !v.decision, goal, Some(h), vec![("be", v)]))
    }

    /// `exists_weak(!goal)`, computed once per goal.
    pub fn avoidable(&self, goal: &Formula) -> Result<Verdict, CheckError> {
        if let Some(v) = self.exists_weak.lock().unwrap().get(goal) {
            return Ok(v.clone());
        }
        let v = self.checker.exists_weak(&Formula::not(goal.clone()))?;
        self.exists_weak
            .lock()
            .unwrap()
            .insert(goal.clone(), v.clone());
        Ok(v)
    }

    pub fn active(
        &self,
        goal: &Formula,
        a: &AgentTransducer,
    ) -> Result<ResponsibilityReport, CheckError> {
        let win = self.checker.check_win(goal, a)?;
        let avoidable = self.avoidable(goal)?;
        let decision = win.decision && avoidable.decision;
        Ok(Self::report(
            Kind::Ara,
            decision,
            goal,
            None,
            vec![("win", win), ("exists-weak", avoidable)],
        ))
    }

    pub fn attribute_passive_vs_env(
        &self,
        goal: &Formula,
        a: &AgentTransducer,
        e: &EnvTransducer,
    ) -> Result<ResponsibilityReport, CheckError> {
        let p = self.checker.partition();
        goal.check_atoms(p)?;
        if !env_enforces_dfa(e, &self.checker.env().raw, p) {
            return Err(CheckError::EnvNotEnforcing);
        }
        let start = std::time::Instant::now();
        a.validate_stopping().map_err(CheckError::NotStopping)?;
        let trace = play(a, e).map_err(|e| CheckError::Internal(e.to_string()))?;
        let eval = Evaluator::new(goal, p).map_err(|e| CheckError::Internal(e.to_string()))?;
        let holds = eval.satisfies(&trace);
        let negated = Formula::not(goal.clone());
        let ed = env_transducer_dfa(e, p);
        let prod = product(&to_nfa(&negated, p), &ed)?;
        let alternative = non_empty(&prod.automaton);
        if let Some(w) = &alternative {
            if eval.satisfies(w) || !ed.accepts(w) {
                return Err(CheckError::Internal(
                    "alternative play failed re-verification".into(),
                ));
            }
        }
        let verdict = Verdict {
            decision: alternative.is_some(),
            witness: alternative.map(|alternative| Witness::Pair {
                play: trace,
                alternative,
            }),
            diagnostics: crate::checkers::Diagnostics {
                automaton_sizes: vec![
                    ("env machine dfa".into(), ed.num_states()),
                    ("product".into(), prod.pairs.len()),
                ],
                region_sizes: Vec::new(),
                wall_time: start.elapsed(),
            },
        };
        Ok(Self::report(
            Kind::PrAttrVsEnv,
            holds && verdict.decision,
            goal,
            None,
            vec![("avoidable against machine", verdict)],
        ))
    }

    /// Dispatches on `kind`; `h` and `e` must be given where the kind needs
    /// them.
    pub fn evaluate(
        &self,
        kind: Kind,
        goal: &Formula,
        a: &AgentTransducer,
        h: Option<&History>,
        e: Option<&EnvTransducer>,
    ) -> Result<ResponsibilityReport, CheckError> {
        let missing = |what: &str| CheckError::MissingInput(format!("{kind} needs {what}"));
        match kind {
            Kind::PrAnt => self.anticipate_passive(goal, a),
            Kind::IprAnt => self.anticipate_inexcusable(goal, a),
            Kind::PrAttr => self.attribute_passive(goal, a, h.ok_or_else(|| missing("a history"))?),
            Kind::IprAttr => {
                self.attribute_inexcusable(goal, a, h.ok_or_else(|| missing("a history"))?)
            }
            Kind::Ara => self.active(goal, a),
            Kind::PrAttrVsEnv => self.attribute_passive_vs_env(
                goal,
                a,
                e.ok_or_else(|| missing("an environment strategy"))?,
            ),
        }
    }
}
