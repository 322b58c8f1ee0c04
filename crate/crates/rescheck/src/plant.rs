//! The plant-watering scenario over one day with two steps, morning and
//! evening.
//!
//! The agent controls `w` (water the plant) and the environment controls
//! `r` (rain). Watering and rain are separate watering events, so a step
//! with both counts twice.

use crate::ltlf::{parse, AtomPartition, Formula};
use crate::strategies::{AgentTransducer, EnvTransducer, History};

/// Traces of length exactly two.
pub const DAY: &str = "X WX false";
pub const PHI1: &str = "X WX false & F (w | r)";
/// Exactly one watering event over the day.
pub const PHI2: &str =
    "X WX false & ((w & !r | !w & r) & X (!w & !r) | !w & !r & X (w & !r | !w & r))";
pub const PHI3: &str = "X WX false & G !(w | r)";
pub const E1: &str = "true";

pub fn partition() -> AtomPartition {
    AtomPartition::new(&["w"], &["r"]).unwrap()
}

pub fn formula(text: &str) -> Formula {
    parse(text, &partition()).unwrap()
}

pub fn phi1() -> Formula {
    formula(PHI1)
}

pub fn phi2() -> Formula {
    formula(PHI2)
}

pub fn phi3() -> Formula {
    formula(PHI3)
}

pub fn e1() -> Formula {
    formula(E1)
}

/// Two steps with the given agent letters, ignoring the weather.
pub fn two_step(first: u32, second: u32) -> AgentTransducer {
    let p = partition();
    AgentTransducer::new(
        &p,
        vec!["morning".into(), "evening".into(), "done".into()],
        0,
        vec![first, second, 0],
        vec![false, false, true],
        vec![vec![1, 1], vec![2, 2], vec![2, 2]],
    )
    .unwrap()
}

/// Waters morning and evening.
pub fn sigma1() -> AgentTransducer {
    two_step(1, 1)
}

/// Waters in the morning only.
pub fn sigma2() -> AgentTransducer {
    two_step(1, 0)
}

/// Never waters.
pub fn sigma3() -> AgentTransducer {
    two_step(0, 0)
}

/// Dry morning, rainy evening, dry afterwards.
pub fn rain_evening_only() -> EnvTransducer {
    let p = partition();
    EnvTransducer::new(
        &p,
        vec!["morning".into(), "evening".into(), "after".into()],
        0,
        vec![vec![1, 1], vec![2, 2], vec![2, 2]],
        vec![vec![0, 0], vec![1, 1], vec![0, 0]],
    )
    .unwrap()
}

/// The play of `sigma2` against `rain_evening_only`.
pub fn history_sigma2_evening_rain() -> History {
    History::new(vec![(1, 0), (0, 1)]).unwrap()
}
