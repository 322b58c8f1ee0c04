//! Command-line front end for `rescheck`.

pub mod problem;
pub mod report;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use rescheck::automata::{to_dfa, to_dot, Automaton};
use rescheck::checkers::{CheckError, Checker};
use rescheck::games::{count, env_win_region};
use rescheck::ltlf::Formula;
use rescheck::oracle::{sufficient_horizon, sufficient_horizon_on, suite, BoundedOracle};
use rescheck::responsibility::{Kind, Responsibility};

use problem::{Problem, ProblemFile};
use report::Report;

#[derive(Debug, Parser)]
#[command(name = "rescheck", version, about = "Responsibility checking for LTLf goals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide a strategy class or responsibility verdict.
    Check(CheckArgs),
    /// Parse and cross-check a problem file.
    Validate {
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
    },
    /// Compile a formula and export its automaton.
    Automaton {
        #[arg(short = 'f', long = "file")]
        file: Option<PathBuf>,
        /// Formula name, `not NAME`, or formula text.
        #[arg(long)]
        formula: String,
        /// Write DOT here instead of standard output.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Fill the states of the environment winning region, reading the
        /// formula as an environment specification.
        #[arg(long)]
        region: bool,
    },
    /// Compare every checker with the bounded oracle on random instances.
    OracleSuite {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 10)]
        max_horizon: usize,
    },
    /// Print the plant-watering problem file.
    Example {
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    /// One of win, dom, be, weak, exists-weak, pr-ant, ipr-ant, pr-attr,
    /// ipr-attr, ara, pr-attr-vs-env.
    #[arg(long)]
    pub kind: String,
    #[arg(short = 'f', long = "file")]
    pub file: Option<PathBuf>,
    /// Formula name, `not NAME`, or formula text.
    #[arg(long)]
    pub goal: String,
    /// Environment specification; defaults to `true`.
    #[arg(long, default_value = "true")]
    pub env: String,
    #[arg(long)]
    pub strategy: Option<String>,
    #[arg(long)]
    pub env_strategy: Option<String>,
    #[arg(long)]
    pub history: Option<String>,
    /// Rerun through the bounded oracle and fail on disagreement.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<CheckError> for CliError {
    fn from(e: CheckError) -> Self {
        match e {
            CheckError::Automata(_) | CheckError::Internal(_) => CliError::Internal(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

fn invalid(m: String) -> CliError {
    CliError::Validation(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    Win,
    Dom,
    Be,
    Weak,
    ExistsWeak,
    Resp(Kind),
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Win => "win",
            CheckKind::Dom => "dom",
            CheckKind::Be => "be",
            CheckKind::Weak => "weak",
            CheckKind::ExistsWeak => "exists-weak",
            CheckKind::Resp(k) => k.name(),
        }
    }
}

impl FromStr for CheckKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "win" => CheckKind::Win,
            "dom" => CheckKind::Dom,
            "be" => CheckKind::Be,
            "weak" => CheckKind::Weak,
            "exists-weak" => CheckKind::ExistsWeak,
            _ => CheckKind::Resp(s.parse()?),
        })
    }
}

pub fn load(path: Option<&Path>) -> Result<Problem, CliError> {
    let file = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| invalid(format!("{}: {e}", p.display())))?;
            ProblemFile::from_json(&text).map_err(invalid)?
        }
        None => ProblemFile::plant(),
    };
    file.validate().map_err(invalid)
}

/// The inputs of one `check` invocation, resolved against the problem.
struct Inputs<'a> {
    kind: CheckKind,
    goal: Formula,
    spec: Formula,
    strategy: Option<&'a rescheck::AgentTransducer>,
    history: Option<&'a rescheck::History>,
    env: Option<&'a rescheck::EnvTransducer>,
}

fn resolve<'a>(p: &'a Problem, args: &CheckArgs) -> Result<Inputs<'a>, CliError> {
    let kind: CheckKind = args.kind.parse().map_err(CliError::Usage)?;
    let uses_history = matches!(kind, CheckKind::Resp(k) if k.needs_history());
    let uses_env = kind == CheckKind::Resp(Kind::PrAttrVsEnv);
    if args.history.is_some() && !uses_history {
        return Err(CliError::Usage(format!("--history does not apply to {}", kind.name())));
    }
    if args.env_strategy.is_some() && !uses_env {
        return Err(CliError::Usage(format!("--env-strategy does not apply to {}", kind.name())));
    }
    let need = |flag: &str, v: &Option<String>| {
        v.clone()
            .ok_or_else(|| CliError::Usage(format!("{} needs {flag}", kind.name())))
    };
    let strategy = match kind {
        CheckKind::ExistsWeak => None,
        _ => Some(p.strategy(&need("--strategy", &args.strategy)?).map_err(invalid)?),
    };
    let history = match uses_history {
        true => Some(p.history(&need("--history", &args.history)?).map_err(invalid)?),
        false => None,
    };
    let env = match uses_env {
        true => Some(p.env_strategy(&need("--env-strategy", &args.env_strategy)?).map_err(invalid)?),
        false => None,
    };
    Ok(Inputs {
        kind,
        goal: p.formula(&args.goal).map_err(invalid)?,
        spec: p.formula(&args.env).map_err(invalid)?,
        strategy,
        history,
        env,
    })
}

/// Library verdict for `args`.
pub fn check(p: &Problem, args: &CheckArgs) -> Result<Report, CliError> {
    let inp = resolve(p, args)?;
    let part = &p.partition;
    let resp = Responsibility::new(part, &inp.spec)?;
    let c = resp.checker();
    let name = inp.kind.name();
    let a = inp.strategy;
    let v = match inp.kind {
        CheckKind::Win => c.check_win(&inp.goal, a.unwrap())?,
        CheckKind::Dom => c.check_dom(&inp.goal, a.unwrap())?,
        CheckKind::Be => c.check_be(&inp.goal, a.unwrap())?,
        CheckKind::Weak => c.check_weak(&inp.goal, a.unwrap())?,
        CheckKind::ExistsWeak => c.exists_weak(&inp.goal)?,
        CheckKind::Resp(k) => {
            let r = resp.evaluate(k, &inp.goal, a.unwrap(), inp.history, inp.env)?;
            return Ok(Report::from_responsibility(part, &r));
        }
    };
    Ok(Report::from_verdict(part, name, &v))
}

/// The oracle's answer for `args` and the horizon it used. Inexcusable
/// attribution is judged with dominance restricted to the environments
/// consistent with the history, the reading the checker decides.
pub fn oracle_answer(p: &Problem, args: &CheckArgs) -> Result<(bool, usize), CliError> {
    let inp = resolve(p, args)?;
    let part = &p.partition;
    let c = Checker::new(part, &inp.spec)?;
    let g = &inp.goal;
    let horizon = match (inp.strategy, inp.history) {
        (None, _) => c.game_size(g)?.max(1),
        (Some(a), None) => sufficient_horizon(&c, g, a)?,
        (Some(a), Some(h)) => sufficient_horizon_on(&c, g, a, h)?,
    };
    let o = BoundedOracle::new(part, &inp.spec, horizon)
        .map_err(|e| CliError::Internal(format!("oracle at horizon {horizon}: {e}")))?;
    let oracle_err = |e: rescheck::oracle::OracleError| CliError::Internal(format!("oracle: {e}"));
    let a = inp.strategy;
    let answer = match inp.kind {
        CheckKind::Win => o.check_win(g, a.unwrap()),
        CheckKind::Dom => o.check_dom(g, a.unwrap()),
        CheckKind::Be => o.check_be(g, a.unwrap()),
        CheckKind::Weak => o.check_weak(g, a.unwrap()),
        CheckKind::ExistsWeak => o.exists_weak(g),
        CheckKind::Resp(Kind::IprAttr) => o
            .check_be_on(&Formula::not(g.clone()), a.unwrap(), inp.history.unwrap())
            .map(|b| !b),
        CheckKind::Resp(k) => o.responsibility(k, g, a.unwrap(), inp.history, inp.env),
    }
    .map_err(oracle_err)?;
    Ok((answer, horizon))
}

pub fn automaton(p: &Problem, formula: &str, region: bool) -> Result<(String, String), CliError> {
    let f = p.formula(formula).map_err(invalid)?;
    let d = to_dfa(&f, &p.partition);
    let mut summary = format!("{} states", d.num_states());
    let highlight = if region {
        let r = env_win_region(&d);
        summary += &format!(", {} in the environment winning region", count(&r));
        Some(r)
    } else {
        None
    };
    Ok((to_dot(&d, formula, highlight.as_deref()), summary))
}

pub fn oracle_suite(seed: u64, count: usize, max_horizon: usize) -> Result<(String, bool), CliError> {
    let r = suite::run(seed, count, max_horizon).map_err(CliError::Internal)?;
    let mut out = format!(
        "{} instances ({} drawn, {} redrawn above horizon {max_horizon})\n",
        r.instances, r.drawn, r.resampled
    );
    for (op, (n, ok)) in &r.per_op {
        out += &format!("  {op:<20} {ok}/{n}\n");
    }
    for e in &r.examples {
        out += &format!("  disagreement: {e}\n");
    }
    // literal inexcusable attribution is a stricter reading than the
    // checker's and is reported, not enforced
    let clean = r.disagreements_except(&[Kind::IprAttr.name()]) == 0;
    Ok((out, clean))
}

/// Runs one command; returns what goes to standard output.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Check(args) => {
            let p = load(args.file.as_deref())?;
            let report = check(&p, args)?;
            let mut out = if args.json {
                report.to_json() + "\n"
            } else {
                report.to_text()
            };
            if args.oracle {
                let (answer, h) = oracle_answer(&p, args)?;
                if answer != report.decision {
                    return Err(CliError::Internal(format!(
                        "oracle disagrees at horizon {h}: checker {}, oracle {answer}",
                        report.decision
                    )));
                }
                if !args.json {
                    out += &format!("  oracle agrees at horizon {h}\n");
                }
            }
            Ok(out)
        }
        Command::Validate { file } => {
            let p = load(Some(file))?;
            for (n, a) in &p.strategies {
                a.validate_stopping()
                    .map_err(|e| invalid(format!("strategy `{n}`: {e}")))?;
            }
            Ok(format!(
                "ok: {} formulas, {} strategies, {} environment strategies, {} histories\n",
                p.formulas.len(),
                p.strategies.len(),
                p.env_strategies.len(),
                p.histories.len()
            ))
        }
        Command::Automaton {
            file,
            formula,
            dot,
            region,
        } => {
            let p = load(file.as_deref())?;
            let (text, summary) = automaton(&p, formula, *region)?;
            match dot {
                Some(path) => {
                    fs::write(path, text)
                        .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
                    Ok(summary + "\n")
                }
                None => Ok(text),
            }
        }
        Command::OracleSuite {
            seed,
            count,
            max_horizon,
        } => {
            let (out, clean) = oracle_suite(*seed, *count, *max_horizon)?;
            if clean {
                Ok(out)
            } else {
                Err(CliError::Internal(format!("checker and oracle disagree\n{out}")))
            }
        }
        Command::Example { output } => {
            let json = ProblemFile::plant().to_json() + "\n";
            match output {
                Some(path) => {
                    fs::write(path, json)
                        .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
                    Ok(String::new())
                }
                None => Ok(json),
            }
        }
    }
}
