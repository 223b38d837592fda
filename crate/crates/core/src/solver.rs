//! Runs an external SMT-LIB 2 solver on emitted scripts and turns its models
//! into motion plans.
//!
//! The solver is a child process. The script is written to a temporary file
//! and handed over either as stdin (`-in` style commands) or as a trailing
//! path argument. Output goes to another temporary file so a chatty solver
//! cannot block on a full pipe while we wait on the deadline.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Seek, SeekFrom, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use wait_timeout::ChildExt;

use crate::encode::{
    encode_kinematic, encode_pwl_with, theta_var, x_var, y_var, EncodeError, EncodingKind, KinematicParams,
    PlanningProblem, SmtScript, SolverProfile,
};
use crate::plan::{MotionPlan, PlanStats, PlannerKind, Waypoint};

/// Environment variable that overrides the solver command line.
pub const SOLVER_ENV: &str = "SMTNAV_SOLVER";
pub const DEFAULT_SOLVER: &str = "z3 -in -smt2";

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("model is missing variable {0}")]
    MissingVariable(String),
    #[error("result is {0:?}, not sat")]
    NotSat(SolverStatus),
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScriptInput {
    Stdin,
    PathArgument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub program: String,
    pub args: Vec<String>,
    pub input: ScriptInput,
    pub timeout: Duration,
    pub profile: SolverProfile,
}

impl SolverConfig {
    /// Parses a whitespace-separated command line. Commands carrying `-in`
    /// read the script from stdin; anything else gets the script path as its
    /// last argument.
    pub fn from_command_line(cmd: &str, timeout: Duration) -> Result<Self, SolverError> {
        let mut parts = cmd.split_whitespace().map(str::to_string);
        let program = parts.next().ok_or_else(|| SolverError::Solver("empty solver command".into()))?;
        let args: Vec<String> = parts.collect();
        let input = if args.iter().any(|a| a == "-in") { ScriptInput::Stdin } else { ScriptInput::PathArgument };
        Ok(Self { program, args, input, timeout, profile: SolverProfile::default() })
    }

    /// Command from [`SOLVER_ENV`] if set, else `z3 -in -smt2`.
    pub fn from_env_or(default_cmd: &str, timeout: Duration) -> Result<Self, SolverError> {
        match std::env::var(SOLVER_ENV) {
            Ok(cmd) if !cmd.trim().is_empty() => Self::from_command_line(&cmd, timeout),
            _ => Self::from_command_line(default_cmd, timeout),
        }
    }

    pub fn command_line(&self) -> String {
        std::iter::once(self.program.as_str())
            .chain(self.args.iter().map(String::as_str))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::from_command_line(DEFAULT_SOLVER, Duration::from_secs(60)).expect("default command is non-empty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Sat,
    Unsat,
    Unknown,
    Timeout,
    SolverError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub status: SolverStatus,
    /// Present iff `status == Sat`.
    pub model: Option<BTreeMap<String, f64>>,
    pub wall_time: f64,
    pub raw_output: String,
}

impl SolverResult {
    fn failed(message: String, wall_time: f64) -> Self {
        Self { status: SolverStatus::SolverError, model: None, wall_time, raw_output: message }
    }

    pub fn value(&self, name: &str) -> Result<f64, SolverError> {
        self.model
            .as_ref()
            .and_then(|m| m.get(name).copied())
            .ok_or_else(|| SolverError::MissingVariable(name.to_string()))
    }
}

pub fn run_solver(script: &SmtScript, config: &SolverConfig) -> SolverResult {
    run_solver_text(&script.text, config)
}

/// Solves a script. Turn-optimized scripts are solved as a descending series
/// of plain satisfiability checks (`sum m_t >= k` for k = M-1, M-2, ...); the
/// first sat answer is optimal. z3's own optimizer is far slower on these
/// formulas than one-shot checks. Times are summed and the configured timeout
/// bounds the whole series.
pub fn solve(script: &SmtScript, config: &SolverConfig) -> SolverResult {
    let m = script.waypoint_budget;
    if script.kind != EncodingKind::KinematicOptimized || m < 2 {
        return run_solver(script, config);
    }
    let mut spent = 0.0;
    for floor in (0..m).rev() {
        let remaining = config.timeout.as_secs_f64() - spent;
        if remaining <= 0.0 {
            return SolverResult { status: SolverStatus::Timeout, model: None, wall_time: spent, raw_output: String::new() };
        }
        let step = SolverConfig { timeout: Duration::from_secs_f64(remaining), ..config.clone() };
        let mut result = run_solver(&script.with_turn_floor(floor), &step);
        spent += result.wall_time;
        result.wall_time = spent;
        if result.status != SolverStatus::Unsat || floor == 0 {
            return result;
        }
    }
    unreachable!("floor 0 always returns")
}

/// Runs the solver on raw SMT-LIB text. Never panics on solver misbehaviour:
/// spawn failures and garbage output come back as `SolverError` results.
pub fn run_solver_text(text: &str, config: &SolverConfig) -> SolverResult {
    let io = || -> std::io::Result<(tempfile::NamedTempFile, File, File)> {
        let mut script_file = tempfile::Builder::new().prefix("smtnav-").suffix(".smt2").tempfile()?;
        script_file.write_all(text.as_bytes())?;
        script_file.flush()?;
        Ok((script_file, tempfile::tempfile()?, tempfile::tempfile()?))
    };
    let (script_file, mut out, mut err) = match io() {
        Ok(files) => files,
        Err(e) => return SolverResult::failed(format!("temp file: {e}"), 0.0),
    };

    let mut cmd = Command::new(&config.program);
    cmd.args(&config.args);
    let stdin = match config.input {
        ScriptInput::Stdin => File::open(script_file.path()).map(Stdio::from),
        ScriptInput::PathArgument => {
            cmd.arg(script_file.path());
            Ok(Stdio::null())
        }
    };
    let (stdout, stderr) = match (stdin, out.try_clone(), err.try_clone()) {
        (Ok(stdin), Ok(o), Ok(e)) => {
            cmd.stdin(stdin);
            (o, e)
        }
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
            return SolverResult::failed(format!("temp file: {e}"), 0.0)
        }
    };
    cmd.stdout(stdout).stderr(stderr);

    let started = Instant::now();
    let mut child = match cmd.spawn() {
        Ok(child) => child,
        Err(e) => return SolverResult::failed(format!("cannot spawn {:?}: {e}", config.program), 0.0),
    };
    let waited = child.wait_timeout(config.timeout);
    let wall_time = started.elapsed().as_secs_f64();

    let timed_out = match waited {
        Ok(Some(_)) => false,
        Ok(None) => {
            let _ = child.kill();
            let _ = child.wait();
            true
        }
        Err(e) => {
            let _ = child.kill();
            return SolverResult::failed(format!("waiting for solver: {e}"), wall_time);
        }
    };

    let mut raw = String::new();
    let _ = out.seek(SeekFrom::Start(0)).and_then(|_| out.read_to_string(&mut raw));
    if timed_out {
        return SolverResult { status: SolverStatus::Timeout, model: None, wall_time, raw_output: raw };
    }
    let mut stderr_text = String::new();
    let _ = err.seek(SeekFrom::Start(0)).and_then(|_| err.read_to_string(&mut stderr_text));
    if !stderr_text.trim().is_empty() {
        raw.push_str(&stderr_text);
    }
    parse_solver_output(&raw, wall_time)
}

/// Interprets solver stdout: the first `sat`/`unsat`/`unknown` line, then on
/// `sat` the `get-value` block.
pub fn parse_solver_output(raw: &str, wall_time: f64) -> SolverResult {
    let mut status = None;
    let mut rest_start = 0;
    let mut offset = 0;
    for line in raw.split_inclusive('\n') {
        offset += line.len();
        match line.trim() {
            "" | "success" | "unsupported" => continue,
            "sat" => status = Some(SolverStatus::Sat),
            "unsat" => status = Some(SolverStatus::Unsat),
            "unknown" => status = Some(SolverStatus::Unknown),
            "timeout" => status = Some(SolverStatus::Timeout),
            _ => {}
        }
        if status.is_some() {
            rest_start = offset;
        }
        break;
    }
    let Some(status) = status else {
        return SolverResult::failed(raw.to_string(), wall_time);
    };
    if status != SolverStatus::Sat {
        return SolverResult { status, model: None, wall_time, raw_output: raw.to_string() };
    }
    match parse_model(&raw[rest_start..]) {
        Ok(model) => SolverResult { status, model: Some(model), wall_time, raw_output: raw.to_string() },
        Err(e) => SolverResult::failed(format!("{e}\n{raw}"), wall_time),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(text: &str) -> Result<Vec<String>, String> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '(' | ')' => {
                tokens.push(c.to_string());
                chars.next();
            }
            ';' => {
                while chars.next().is_some_and(|c| c != '\n') {}
            }
            '"' => {
                let mut s = String::from('"');
                chars.next();
                for c in chars.by_ref() {
                    s.push(c);
                    if c == '"' {
                        break;
                    }
                }
                tokens.push(s);
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' {
                        break;
                    }
                    s.push(c);
                    chars.next();
                }
                tokens.push(s);
            }
        }
    }
    Ok(tokens)
}

fn parse_sexps(text: &str) -> Result<Vec<Sexp>, String> {
    let tokens = tokenize(text)?;
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    for tok in tokens {
        match tok.as_str() {
            "(" => stack.push(Vec::new()),
            ")" => {
                let done = stack.pop().ok_or("unbalanced ')'")?;
                stack.last_mut().ok_or("unbalanced ')'")?.push(Sexp::List(done));
            }
            _ => stack.last_mut().expect("stack never empty here").push(Sexp::Atom(tok)),
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced '('".into());
    }
    Ok(stack.pop().unwrap_or_default())
}

fn numeral(s: &str) -> Result<f64, String> {
    // z3 marks truncated decimals with a trailing '?'
    let s = s.strip_suffix('?').unwrap_or(s);
    s.parse::<f64>().map_err(|_| format!("not a number: {s:?}"))
}

fn eval_value(e: &Sexp) -> Result<f64, String> {
    match e {
        Sexp::Atom(a) => numeral(a),
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(op), x] if op == "-" => Ok(-eval_value(x)?),
            [Sexp::Atom(op), p, q] if op == "/" => Ok(eval_value(p)? / eval_value(q)?),
            _ => Err(format!("unsupported value form {e:?}")),
        },
    }
}

/// Parses `get-value` output such as `((x_1 (/ 13 2)) (y_1 (- 0.5)))`.
pub fn parse_model(text: &str) -> Result<BTreeMap<String, f64>, String> {
    let mut model = BTreeMap::new();
    for top in parse_sexps(text)? {
        let Sexp::List(pairs) = top else {
            return Err(format!("unexpected top-level atom {top:?}"));
        };
        if let Some(Sexp::Atom(head)) = pairs.first() {
            if head == "error" {
                return Err(format!("solver error: {pairs:?}"));
            }
            if head == "objectives" {
                continue;
            }
        }
        for pair in pairs {
            match pair {
                Sexp::List(kv) if kv.len() == 2 => {
                    let Sexp::Atom(name) = &kv[0] else {
                        return Err(format!("bad model key {:?}", kv[0]));
                    };
                    model.insert(name.clone(), eval_value(&kv[1])?);
                }
                other => return Err(format!("bad model entry {other:?}")),
            }
        }
    }
    Ok(model)
}

/// Reads every state `t = 0..=m` from a sat model, without collapsing.
pub fn decode_states(result: &SolverResult, m: usize, kinematic: bool) -> Result<Vec<Waypoint>, SolverError> {
    if result.status != SolverStatus::Sat {
        return Err(SolverError::NotSat(result.status));
    }
    (0..=m)
        .map(|t| {
            let x = result.value(&x_var(t))?;
            let y = result.value(&y_var(t))?;
            Ok(if kinematic { Waypoint::pose(x, y, result.value(&theta_var(t))?) } else { Waypoint::xy(x, y) })
        })
        .collect()
}

/// Waypoints ordered by `t`, with the trailing run of identical states left by
/// the reach-and-stay clause collapsed to one.
pub fn decode_plan(result: &SolverResult, m: usize, kind: EncodingKind) -> Result<MotionPlan, SolverError> {
    let mut waypoints = decode_states(result, m, kind.is_kinematic())?;
    while waypoints.len() > 1 {
        let (a, b) = (waypoints[waypoints.len() - 2], waypoints[waypoints.len() - 1]);
        let same_theta = match (a.theta, b.theta) {
            (Some(s), Some(t)) => (s - t).abs() <= 1e-9,
            _ => true,
        };
        if (a.x - b.x).abs() <= 1e-9 && (a.y - b.y).abs() <= 1e-9 && same_theta {
            waypoints.pop();
        } else {
            break;
        }
    }
    Ok(MotionPlan {
        planner: planner_for(kind),
        waypoints,
        stats: PlanStats::Encoding { stats: Default::default(), encode_time: 0.0, waypoint_budget: m },
        solve_time: result.wall_time,
    })
}

pub fn planner_for(kind: EncodingKind) -> PlannerKind {
    match kind {
        EncodingKind::Pwl => PlannerKind::Smt,
        EncodingKind::Kinematic => PlannerKind::SmtKinematic,
        EncodingKind::KinematicOptimized => PlannerKind::SmtKinematicOpt,
    }
}

pub fn encode(problem: &PlanningProblem, kind: EncodingKind, kp: &KinematicParams, profile: &SolverProfile) -> Result<SmtScript, EncodeError> {
    match kind {
        EncodingKind::Pwl => encode_pwl_with(problem, profile),
        EncodingKind::Kinematic => encode_kinematic(problem, kp, false, profile),
        EncodingKind::KinematicOptimized => encode_kinematic(problem, kp, true, profile),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub waypoint_budget: usize,
    pub status: SolverStatus,
    pub encode_time: f64,
    pub solve_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DeepeningOutcome {
    Planned { plan: MotionPlan, attempts: Vec<Attempt> },
    NoPlan { attempts: Vec<Attempt> },
}

impl DeepeningOutcome {
    pub fn attempts(&self) -> &[Attempt] {
        match self {
            DeepeningOutcome::Planned { attempts, .. } | DeepeningOutcome::NoPlan { attempts } => attempts,
        }
    }

    pub fn plan(&self) -> Option<&MotionPlan> {
        match self {
            DeepeningOutcome::Planned { plan, .. } => Some(plan),
            DeepeningOutcome::NoPlan { .. } => None,
        }
    }
}

/// Tries `M = m_min, m_min + 1, ..., m_max` and returns the first sat plan.
/// Unknown and timeout count as "no plan at this M"; a solver error aborts.
pub fn plan_with_deepening(
    problem: &PlanningProblem,
    m_min: usize,
    m_max: usize,
    kind: EncodingKind,
    kp: &KinematicParams,
    config: &SolverConfig,
) -> Result<DeepeningOutcome, SolverError> {
    if m_min == 0 || m_min > m_max {
        return Err(SolverError::Solver(format!("bad budget range {m_min}..={m_max}")));
    }
    let mut attempts = Vec::new();
    for m in m_min..=m_max {
        let started = Instant::now();
        let script = encode(&problem.with_budget(m), kind, kp, &config.profile)?;
        let encode_time = started.elapsed().as_secs_f64();
        let result = solve(&script, config);
        attempts.push(Attempt { waypoint_budget: m, status: result.status, encode_time, solve_time: result.wall_time });
        match result.status {
            SolverStatus::Sat => {
                let mut plan = decode_plan(&result, m, kind)?;
                plan.stats = PlanStats::Encoding { stats: script.stats, encode_time, waypoint_budget: m };
                return Ok(DeepeningOutcome::Planned { plan, attempts });
            }
            SolverStatus::SolverError => return Err(SolverError::Solver(result.raw_output)),
            SolverStatus::Unsat | SolverStatus::Unknown | SolverStatus::Timeout => {}
        }
    }
    Ok(DeepeningOutcome::NoPlan { attempts })
}
