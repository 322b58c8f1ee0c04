//! Random instances compared operation by operation between the automata
//! checkers and [`BoundedOracle`].

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;

use crate::checkers::CheckError;
use crate::ltlf::{render, AtomPartition, Formula};
use crate::responsibility::{Kind, Responsibility};
use crate::strategies::{env_enforces, AgentTransducer, EnvTransducer, History};

use super::{gen, sufficient_horizon, sufficient_horizon_on, BoundedOracle, OracleError};

#[derive(Clone, Debug)]
pub struct Instance {
    pub p: AtomPartition,
    pub goal: Formula,
    pub spec: Formula,
    pub strategy: AgentTransducer,
    pub history: History,
    pub machine: Option<EnvTransducer>,
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "goal `{}` under `{}`, strategy {:?}, history {}",
            render(&self.goal),
            render(&self.spec),
            self.strategy,
            self.p.render_trace(&self.history.trace(&self.p)),
        )?;
        if let Some(e) = &self.machine {
            write!(f, ", machine {e:?}")?;
        }
        Ok(())
    }
}

/// Random instance: goal of at most 8 nodes, enforceable specification of at
/// most 4 nodes, strategy of at most 4 states and a consistent history.
pub fn instance(rng: &mut impl Rng, p: &AtomPartition) -> Instance {
    let goal = gen::formula(rng, p, 8);
    let spec = gen::spec(rng, p, 4);
    let strategy = gen::strategy(rng, p, 4);
    let history = gen::history(rng, p, &strategy);
    let machine = (0..20)
        .map(|_| gen::env_machine(rng, p, 3))
        .find(|e| env_enforces(e, &spec, p));
    Instance {
        p: p.clone(),
        goal,
        spec,
        strategy,
        history,
        machine,
    }
}

/// Operation name of inexcusable attribution with dominance restricted to
/// the environments consistent with the history.
pub const CONJOINED_IPR_ATTR: &str = "ipr-attr-conjoined";

/// Both sides either decide or reject the input as invalid.
pub type Answer = Option<bool>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub op: String,
    pub checker: Answer,
    pub oracle: Answer,
}

impl Comparison {
    pub fn agrees(&self) -> bool {
        self.checker == self.oracle
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub horizon: usize,
    pub comparisons: Vec<Comparison>,
}

impl Outcome {
    pub fn disagreements(&self) -> impl Iterator<Item = &Comparison> {
        self.comparisons.iter().filter(|c| !c.agrees())
    }
}

fn checker_answer(r: Result<bool, CheckError>) -> Result<Answer, String> {
    match r {
        Ok(b) => Ok(Some(b)),
        Err(CheckError::NotEnforceable(_) | CheckError::EnvNotEnforcing) => Ok(None),
        Err(e) => Err(format!("checker: {e}")),
    }
}

fn oracle_answer(r: Result<bool, OracleError>) -> Result<Answer, String> {
    match r {
        Ok(b) => Ok(Some(b)),
        Err(OracleError::NotEnforceable | OracleError::EnvNotEnforcing) => Ok(None),
        Err(e) => Err(format!("oracle: {e}")),
    }
}

/// Horizon at which the oracle is run for `inst`.
pub fn horizon(inst: &Instance) -> Result<usize, CheckError> {
    let r = Responsibility::new(&inst.p, &inst.spec)?;
    let c = r.checker();
    let mut h = sufficient_horizon(c, &inst.goal, &inst.strategy)?;
    match sufficient_horizon_on(c, &inst.goal, &inst.strategy, &inst.history) {
        Ok(on) => h = h.max(on),
        Err(CheckError::NotEnforceable(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(h)
}

/// Runs every operation on both sides at horizon `h`. Errors other than
/// unenforceable inputs are reported as `Err`.
pub fn compare_at(inst: &Instance, h: usize) -> Result<Outcome, String> {
    let r = Responsibility::new(&inst.p, &inst.spec).map_err(|e| e.to_string())?;
    let c = r.checker();
    let o = BoundedOracle::new(&inst.p, &inst.spec, h).map_err(|e| e.to_string())?;
    let (g, a) = (&inst.goal, &inst.strategy);
    let mut out = Vec::new();
    let mut push = |op: &str, ch: Result<bool, CheckError>, or: Result<bool, OracleError>| {
        out.push(Comparison {
            op: op.to_string(),
            checker: checker_answer(ch)?,
            oracle: oracle_answer(or)?,
        });
        Ok::<(), String>(())
    };
    push("win", c.check_win(g, a).map(|v| v.decision), o.check_win(g, a))?;
    push("weak", c.check_weak(g, a).map(|v| v.decision), o.check_weak(g, a))?;
    push("dom", c.check_dom(g, a).map(|v| v.decision), o.check_dom(g, a))?;
    push("be", c.check_be(g, a).map(|v| v.decision), o.check_be(g, a))?;
    push("exists-weak", c.exists_weak(g).map(|v| v.decision), o.exists_weak(g))?;
    for kind in Kind::ALL {
        if kind == Kind::PrAttrVsEnv && inst.machine.is_none() {
            continue;
        }
        let hist = kind.needs_history().then_some(&inst.history);
        let e = inst.machine.as_ref();
        push(
            kind.name(),
            r.evaluate(kind, g, a, hist, e).map(|v| v.decision),
            o.responsibility(kind, g, a, hist, e),
        )?;
    }
    // inexcusable attribution with dominance judged under E ∧ E_h
    let not_goal = Formula::not(g.clone());
    push(
        CONJOINED_IPR_ATTR,
        r.evaluate(Kind::IprAttr, g, a, Some(&inst.history), None)
            .map(|v| v.decision),
        o.check_be_on(&not_goal, a, &inst.history).map(|b| !b),
    )?;
    Ok(Outcome {
        horizon: h,
        comparisons: out,
    })
}

/// Aggregate of a suite run.
#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub drawn: usize,
    pub instances: usize,
    /// Instances redrawn because their horizon exceeded the cap.
    pub resampled: usize,
    /// Per operation: (compared, agreed).
    pub per_op: BTreeMap<String, (usize, usize)>,
    pub horizons: BTreeMap<usize, usize>,
    /// First disagreements, rendered.
    pub examples: Vec<String>,
}

impl SuiteReport {
    pub fn disagreements(&self, op: &str) -> usize {
        self.per_op.get(op).map_or(0, |&(n, ok)| n - ok)
    }

    /// Disagreements over every operation except those in `skip`.
    pub fn disagreements_except(&self, skip: &[&str]) -> usize {
        self.per_op
            .iter()
            .filter(|(op, _)| !skip.contains(&op.as_str()))
            .map(|(_, &(n, ok))| n - ok)
            .sum()
    }
}

/// Compares `count` random 1+1-atom instances drawn from `seed`, each at its
/// sufficient horizon; instances whose horizon exceeds `max_horizon` are
/// redrawn.
pub fn run(seed: u64, count: usize, max_horizon: usize) -> Result<SuiteReport, String> {
    use rand::SeedableRng;
    let p = AtomPartition::new(&["y"], &["x"]).map_err(|e| e.to_string())?;
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut report = SuiteReport::default();
    while report.instances < count {
        let inst = instance(&mut rng, &p);
        report.drawn += 1;
        let h = horizon(&inst).map_err(|e| format!("{inst}: {e}"))?;
        if h > max_horizon {
            report.resampled += 1;
            continue;
        }
        report.instances += 1;
        *report.horizons.entry(h).or_default() += 1;
        let out = compare_at(&inst, h).map_err(|e| format!("{inst}: {e}"))?;
        for c in &out.comparisons {
            let e = report.per_op.entry(c.op.clone()).or_default();
            e.0 += 1;
            e.1 += usize::from(c.agrees());
            if !c.agrees() && report.examples.len() < 10 {
                report.examples.push(format!(
                    "{}: checker {:?}, oracle {:?} at horizon {h} on {inst}",
                    c.op, c.checker, c.oracle
                ));
            }
        }
    }
    Ok(report)
}
