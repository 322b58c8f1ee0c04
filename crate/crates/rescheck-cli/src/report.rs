//! Serializable verdict reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use rescheck::checkers::{Underachievement, Verdict, Witness};
use rescheck::ltlf::{AtomPartition, Letter};
use rescheck::responsibility::ResponsibilityReport;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagnosticsReport {
    pub automaton_sizes: BTreeMap<String, usize>,
    pub region_sizes: BTreeMap<String, usize>,
    pub wall_time_ms: u64,
}

/// Traces are rendered one letter per entry, e.g. `{w, !r}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum WitnessReport {
    Trace {
        source: String,
        trace: Vec<String>,
    },
    Pair {
        source: String,
        play: Vec<String>,
        alternative: Vec<String>,
    },
    Underachievement {
        source: String,
        history: Vec<String>,
        reason: String,
        continuation: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub kind: String,
    pub decision: bool,
    pub witness: Option<WitnessReport>,
    pub diagnostics: DiagnosticsReport,
}

fn trace(p: &AtomPartition, t: &[Letter]) -> Vec<String> {
    t.iter().map(|&l| p.render_letter(l)).collect()
}

fn witness(p: &AtomPartition, source: &str, w: &Witness) -> WitnessReport {
    let source = source.to_string();
    match w {
        Witness::Trace(t) => WitnessReport::Trace {
            source,
            trace: trace(p, t),
        },
        Witness::Pair { play, alternative } => WitnessReport::Pair {
            source,
            play: trace(p, play),
            alternative: trace(p, alternative),
        },
        Witness::Underachievement {
            history,
            kind,
            continuation,
        } => WitnessReport::Underachievement {
            source,
            history: trace(p, history),
            reason: match kind {
                Underachievement::Winning => "winning",
                Underachievement::Pending => "pending",
            }
            .to_string(),
            continuation: trace(p, continuation),
        },
    }
}

impl Report {
    pub fn from_verdict(p: &AtomPartition, kind: &str, v: &Verdict) -> Report {
        Report::from_verdicts(p, kind, v.decision, &[(kind.to_string(), v.clone())])
    }

    pub fn from_responsibility(p: &AtomPartition, r: &ResponsibilityReport) -> Report {
        Report::from_verdicts(p, r.kind.name(), r.decision, &r.verdicts)
    }

    /// Sizes are keyed `procedure: name`; the witness is the first one
    /// found among the underlying verdicts.
    fn from_verdicts(p: &AtomPartition, kind: &str, decision: bool, vs: &[(String, Verdict)]) -> Report {
        let mut d = DiagnosticsReport::default();
        let mut w = None;
        for (label, v) in vs {
            for (n, s) in &v.diagnostics.automaton_sizes {
                d.automaton_sizes.insert(format!("{label}: {n}"), *s);
            }
            for (n, s) in &v.diagnostics.region_sizes {
                d.region_sizes.insert(format!("{label}: {n}"), *s);
            }
            d.wall_time_ms += v.diagnostics.wall_time.as_millis() as u64;
            if w.is_none() {
                w = v.witness.as_ref().map(|x| witness(p, label, x));
            }
        }
        Report {
            kind: kind.to_string(),
            decision,
            witness: w,
            diagnostics: d,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_json(text: &str) -> Result<Report, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}: {}\n", self.kind, self.decision);
        match &self.witness {
            Some(WitnessReport::Trace { source, trace }) => {
                out += &format!("  witness ({source}): {}\n", trace.join(" "));
            }
            Some(WitnessReport::Pair {
                source,
                play,
                alternative,
            }) => {
                out += &format!("  play ({source}): {}\n", play.join(" "));
                out += &format!("  alternative: {}\n", alternative.join(" "));
            }
            Some(WitnessReport::Underachievement {
                source,
                history,
                reason,
                continuation,
            }) => {
                out += &format!("  history ({source}, {reason}): {}\n", history.join(" "));
                out += &format!("  continuation: {}\n", continuation.join(" "));
            }
            None => {}
        }
        for (n, s) in &self.diagnostics.automaton_sizes {
            out += &format!("  states {n}: {s}\n");
        }
        for (n, s) in &self.diagnostics.region_sizes {
            out += &format!("  region {n}: {s}\n");
        }
        out += &format!("  time: {} ms\n", self.diagnostics.wall_time_ms);
        out
    }
}
