//! The JSON problem file: partition, named formulas, strategies,
//! environment machines and histories.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use rescheck::ltlf::{parse, AtomPartition, Formula, Letter};
use rescheck::strategies::{AgentTransducer, EnvTransducer, History};
use rescheck::plant;

/// Truth values of atoms; atoms left out are false.
pub type Assignment = BTreeMap<String, bool>;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionDecl {
    pub agent: Vec<String>,
    pub env: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: String,
    #[serde(default)]
    pub output: Assignment,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub from: String,
    pub input: Assignment,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyDecl {
    pub states: Vec<AgentState>,
    pub initial: String,
    #[serde(default)]
    pub terminating: Vec<String>,
    pub transitions: Vec<Transition>,
}

/// One environment answer: on agent letter `input`, emit `output`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub input: Assignment,
    pub output: Assignment,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvState {
    pub id: String,
    pub output: Vec<Answer>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvStrategyDecl {
    pub states: Vec<EnvState>,
    pub initial: String,
    pub transitions: Vec<Transition>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub agent: Assignment,
    pub env: Assignment,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProblemFile {
    pub partition: PartitionDecl,
    #[serde(default)]
    pub formulas: BTreeMap<String, String>,
    #[serde(default)]
    pub strategies: BTreeMap<String, StrategyDecl>,
    #[serde(default)]
    pub env_strategies: BTreeMap<String, EnvStrategyDecl>,
    #[serde(default)]
    pub histories: BTreeMap<String, Vec<Step>>,
}

/// A problem file whose entries all parsed and resolved.
#[derive(Clone, Debug)]
pub struct Problem {
    pub partition: AtomPartition,
    pub formulas: BTreeMap<String, Formula>,
    pub strategies: BTreeMap<String, AgentTransducer>,
    pub env_strategies: BTreeMap<String, EnvTransducer>,
    pub histories: BTreeMap<String, History>,
}

fn letter_of(
    a: &Assignment,
    atoms: &[String],
    what: &str,
) -> Result<Letter, String> {
    let mut l = 0;
    for (name, &v) in a {
        let i = atoms
            .iter()
            .position(|x| x == name)
            .ok_or_else(|| format!("{what}: `{name}` is not one of {atoms:?}"))?;
        if v {
            l |= 1 << i;
        }
    }
    Ok(l)
}

fn assignment_of(l: Letter, atoms: &[String]) -> Assignment {
    atoms
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), l & (1 << i) != 0))
        .collect()
}

fn index_of(ids: &[String], id: &str, what: &str) -> Result<usize, String> {
    ids.iter()
        .position(|s| s == id)
        .ok_or_else(|| format!("{what}: unknown state `{id}`"))
}

fn state_ids<'a>(ids: impl Iterator<Item = &'a String>, what: &str) -> Result<Vec<String>, String> {
    let ids: Vec<String> = ids.cloned().collect();
    for (i, s) in ids.iter().enumerate() {
        if ids[..i].contains(s) {
            return Err(format!("{what}: duplicate state `{s}`"));
        }
    }
    if ids.is_empty() {
        return Err(format!("{what}: no states"));
    }
    Ok(ids)
}

/// Total transition table `next[state][input letter]`.
fn table(
    ids: &[String],
    transitions: &[Transition],
    inputs: &[String],
    skip: &[bool],
    what: &str,
) -> Result<Vec<Vec<usize>>, String> {
    let width = 1usize << inputs.len();
    let mut next = vec![vec![None; width]; ids.len()];
    for t in transitions {
        let from = index_of(ids, &t.from, what)?;
        let to = index_of(ids, &t.to, what)?;
        let l = letter_of(&t.input, inputs, what)? as usize;
        if next[from][l].replace(to).is_some() {
            return Err(format!("{what}: two transitions from `{}` on {:?}", t.from, t.input));
        }
    }
    next.into_iter()
        .enumerate()
        .map(|(s, row)| {
            row.into_iter()
                .enumerate()
                .map(|(l, t)| match t {
                    Some(t) => Ok(t),
                    // terminating states never move
                    None if skip[s] => Ok(s),
                    None => Err(format!(
                        "{what}: no transition from `{}` on {:?}",
                        ids[s],
                        assignment_of(l as Letter, inputs)
                    )),
                })
                .collect()
        })
        .collect()
}

impl StrategyDecl {
    pub fn build(&self, p: &AtomPartition, what: &str) -> Result<AgentTransducer, String> {
        let ids = state_ids(self.states.iter().map(|s| &s.id), what)?;
        let initial = index_of(&ids, &self.initial, what)?;
        let mut terminating = vec![false; ids.len()];
        for t in &self.terminating {
            terminating[index_of(&ids, t, what)?] = true;
        }
        let output = self
            .states
            .iter()
            .map(|s| letter_of(&s.output, p.agent_atoms(), what))
            .collect::<Result<Vec<_>, _>>()?;
        let next = table(&ids, &self.transitions, p.env_atoms(), &terminating, what)?;
        let a = AgentTransducer::new(p, ids, initial, output, terminating, next)
            .map_err(|e| format!("{what}: {e}"))?;
        a.validate_stopping().map_err(|e| format!("{what}: {e}"))?;
        Ok(a)
    }

    pub fn from_transducer(a: &AgentTransducer, p: &AtomPartition) -> Self {
        let names = a.names();
        let env_letters = p.num_env_letters() as Letter;
        let mut states = Vec::new();
        let mut terminating = Vec::new();
        let mut transitions = Vec::new();
        for (s, id) in names.iter().enumerate() {
            let output = match a.action(s) {
                Some(y) => assignment_of(y, p.agent_atoms()),
                None => {
                    terminating.push(id.clone());
                    Assignment::new()
                }
            };
            states.push(AgentState { id: id.clone(), output });
            if a.is_terminating(s) {
                continue;
            }
            for x in 0..env_letters {
                transitions.push(Transition {
                    from: id.clone(),
                    input: assignment_of(x, p.env_atoms()),
                    to: names[a.step(s, x)].clone(),
                });
            }
        }
        StrategyDecl {
            states,
            initial: names[a.initial()].clone(),
            terminating,
            transitions,
        }
    }
}

impl EnvStrategyDecl {
    pub fn build(&self, p: &AtomPartition, what: &str) -> Result<EnvTransducer, String> {
        let ids = state_ids(self.states.iter().map(|s| &s.id), what)?;
        let initial = index_of(&ids, &self.initial, what)?;
        let next = table(&ids, &self.transitions, p.agent_atoms(), &vec![false; ids.len()], what)?;
        let mut output = Vec::new();
        for s in &self.states {
            let mut row = vec![None; p.num_agent_letters()];
            for a in &s.output {
                let y = letter_of(&a.input, p.agent_atoms(), what)? as usize;
                let x = letter_of(&a.output, p.env_atoms(), what)?;
                if row[y].replace(x).is_some() {
                    return Err(format!("{what}: two outputs at `{}` on {:?}", s.id, a.input));
                }
            }
            let row = row
                .into_iter()
                .enumerate()
                .map(|(y, x)| {
                    x.ok_or_else(|| {
                        format!(
                            "{what}: no output at `{}` on {:?}",
                            s.id,
                            assignment_of(y as Letter, p.agent_atoms())
                        )
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            output.push(row);
        }
        EnvTransducer::new(p, ids, initial, next, output).map_err(|e| format!("{what}: {e}"))
    }

    pub fn from_transducer(e: &EnvTransducer, p: &AtomPartition) -> Self {
        let names = e.names();
        let agent_letters = p.num_agent_letters() as Letter;
        let mut states = Vec::new();
        let mut transitions = Vec::new();
        for (s, id) in names.iter().enumerate() {
            let mut output = Vec::new();
            for y in 0..agent_letters {
                let (x, t) = e.respond(s, y);
                let input = assignment_of(y, p.agent_atoms());
                output.push(Answer {
                    input: input.clone(),
                    output: assignment_of(x, p.env_atoms()),
                });
                transitions.push(Transition {
                    from: id.clone(),
                    input,
                    to: names[t].clone(),
                });
            }
            states.push(EnvState { id: id.clone(), output });
        }
        EnvStrategyDecl {
            states,
            initial: names[e.initial()].clone(),
            transitions,
        }
    }
}

pub fn build_history(steps: &[Step], p: &AtomPartition, what: &str) -> Result<History, String> {
    let steps = steps
        .iter()
        .map(|s| {
            Ok((
                letter_of(&s.agent, p.agent_atoms(), what)?,
                letter_of(&s.env, p.env_atoms(), what)?,
            ))
        })
        .collect::<Result<Vec<_>, String>>()?;
    History::new(steps).map_err(|e| format!("{what}: {e}"))
}

pub fn history_steps(h: &History, p: &AtomPartition) -> Vec<Step> {
    h.steps()
        .iter()
        .map(|&(y, x)| Step {
            agent: assignment_of(y, p.agent_atoms()),
            env: assignment_of(x, p.env_atoms()),
        })
        .collect()
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("problem file: {e}"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    /// Parses every entry; the first failure is reported.
    pub fn validate(&self) -> Result<Problem, String> {
        let partition = AtomPartition::new(&self.partition.agent, &self.partition.env)
            .map_err(|e| format!("partition: {e}"))?;
        let p = &partition;
        let mut formulas = BTreeMap::new();
        for (name, text) in &self.formulas {
            let f = parse(text, p).map_err(|e| format!("formula `{name}`: {e}"))?;
            formulas.insert(name.clone(), f);
        }
        let strategies = self
            .strategies
            .iter()
            .map(|(n, s)| Ok((n.clone(), s.build(p, &format!("strategy `{n}`"))?)))
            .collect::<Result<_, String>>()?;
        let env_strategies = self
            .env_strategies
            .iter()
            .map(|(n, s)| Ok((n.clone(), s.build(p, &format!("environment strategy `{n}`"))?)))
            .collect::<Result<_, String>>()?;
        let histories = self
            .histories
            .iter()
            .map(|(n, h)| Ok((n.clone(), build_history(h, p, &format!("history `{n}`"))?)))
            .collect::<Result<_, String>>()?;
        Ok(Problem {
            partition,
            formulas,
            strategies,
            env_strategies,
            histories,
        })
    }

    /// The plant-watering corpus.
    pub fn plant() -> Self {
        let p = plant::partition();
        let formulas = [
            ("day", plant::DAY),
            ("phi1", plant::PHI1),
            ("phi2", plant::PHI2),
            ("phi3", plant::PHI3),
            ("E1", plant::E1),
        ]
        .into_iter()
        .map(|(n, f)| (n.to_string(), f.to_string()))
        .collect();
        let strategies = [
            ("sigma1", plant::sigma1()),
            ("sigma2", plant::sigma2()),
            ("sigma3", plant::sigma3()),
        ]
        .into_iter()
        .map(|(n, a)| (n.to_string(), StrategyDecl::from_transducer(&a, &p)))
        .collect();
        let env_strategies = BTreeMap::from([(
            "rain-evening-only".to_string(),
            EnvStrategyDecl::from_transducer(&plant::rain_evening_only(), &p),
        )]);
        let histories = BTreeMap::from([(
            "sigma2-evening-rain".to_string(),
            history_steps(&plant::history_sigma2_evening_rain(), &p),
        )]);
        ProblemFile {
            partition: PartitionDecl {
                agent: p.agent_atoms().to_vec(),
                env: p.env_atoms().to_vec(),
            },
            formulas,
            strategies,
            env_strategies,
            histories,
        }
    }
}

impl Problem {
    /// A formula entry, `not NAME`, or inline formula text.
    pub fn formula(&self, text: &str) -> Result<Formula, String> {
        let text = text.trim();
        if let Some(f) = self.formulas.get(text) {
            return Ok(f.clone());
        }
        if let Some(rest) = text.strip_prefix("not ") {
            if let Some(f) = self.formulas.get(rest.trim()) {
                return Ok(Formula::not(f.clone()));
            }
        }
        parse(text, &self.partition).map_err(|e| format!("formula `{text}`: {e}"))
    }

    pub fn strategy(&self, name: &str) -> Result<&AgentTransducer, String> {
        self.strategies
            .get(name)
            .ok_or_else(|| format!("no strategy named `{name}`"))
    }

    pub fn env_strategy(&self, name: &str) -> Result<&EnvTransducer, String> {
        self.env_strategies
            .get(name)
            .ok_or_else(|| format!("no environment strategy named `{name}`"))
    }

    pub fn history(&self, name: &str) -> Result<&History, String> {
        self.histories
            .get(name)
            .ok_or_else(|| format!("no history named `{name}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plant_corpus_round_trips() {
        let f = ProblemFile::plant();
        let again = ProblemFile::from_json(&f.to_json()).unwrap();
        assert_eq!(again, f);
        let p = again.validate().unwrap();
        assert_eq!(p.strategies["sigma2"], plant::sigma2());
        assert_eq!(p.env_strategies["rain-evening-only"], plant::rain_evening_only());
        assert_eq!(p.histories["sigma2-evening-rain"], plant::history_sigma2_evening_rain());
    }

    #[test]
    fn missing_transition_is_rejected() {
        let mut f = ProblemFile::plant();
        f.strategies.get_mut("sigma1").unwrap().transitions.pop();
        let err = f.validate().unwrap_err();
        assert!(err.contains("no transition"), "{err}");
    }

    #[test]
    fn missing_env_output_is_rejected() {
        let mut f = ProblemFile::plant();
        let e = f.env_strategies.get_mut("rain-evening-only").unwrap();
        e.states[0].output.pop();
        assert!(f.validate().unwrap_err().contains("no output"));
    }

    #[test]
    fn unknown_atom_is_rejected() {
        let mut f = ProblemFile::plant();
        f.histories.get_mut("sigma2-evening-rain").unwrap()[0]
            .agent
            .insert("snow".into(), true);
        assert!(f.validate().unwrap_err().contains("snow"));
    }

    #[test]
    fn goal_references() {
        let p = ProblemFile::plant().validate().unwrap();
        assert_eq!(p.formula("not phi2").unwrap(), Formula::not(plant::phi2()));
        assert_eq!(p.formula("phi1").unwrap(), plant::phi1());
        assert_eq!(p.formula("F r").unwrap(), parse("F r", &p.partition).unwrap());
        assert!(p.formula("F snow").is_err());
    }
}
