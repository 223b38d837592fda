//! SMT-LIB 2 emission for the path-planning problem.
//!
//! Two encodings are produced:
//!
//! * **PWL**: waypoints `(x_t, y_t)`, `t = 0..=M`, joined by straight segments.
//!   Each segment/obstacle pair gets its own separating line
//!   `a_t_j*x + b_t_j*y + c_t_j = 0` with the segment's endpoints strictly on
//!   one side and the obstacle's four corners strictly on the other. The
//!   script is quantifier-free nonlinear real arithmetic.
//! * **Kinematic**: states `(x_t, y_t, th_t)` linked by one motion primitive
//!   per step: forward, backward, stay, or a pure rotation by one of the
//!   configured angles. Headings are in degrees. The heading's cosine and sine
//!   are carried as state (`hc_t`, `hs_t`) and rotated with exact rational
//!   constants, so no transcendental function appears and the script is
//!   linear. With `minimize_turns`, indicator `m_t` is 1 iff steps `t` and
//!   `t+1` have equal displacement, and their sum is maximized.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{point_in_rect, wrap_degrees, Point, Pose};
use crate::gridmap::{ObstacleRect, Workspace};

/// Decimal approximation of pi used when degrees must be turned into radians
/// in solver-facing text.
pub const PI_APPROX: &str = "3.14159265358979";

#[derive(Debug, Error, PartialEq)]
pub enum EncodeError {
    #[error("{which} position ({x}, {y}) lies inside obstacle {obstacle}")]
    EndpointInObstacle { which: &'static str, x: f64, y: f64, obstacle: usize },
    #[error("{which} position ({x}, {y}) lies outside the workspace")]
    EndpointOutsideWorkspace { which: &'static str, x: f64, y: f64 },
    #[error("movement bound v = {v} must satisfy 0 < v < {limit}")]
    BadMovementBound { v: u32, limit: f64 },
    #[error("waypoint budget must be at least 1")]
    EmptyBudget,
    #[error("invalid kinematic parameters: {0}")]
    BadKinematicParams(String),
    #[error("turn minimization needs an OMT-capable solver profile")]
    OmtUnsupported,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanningProblem {
    pub init: Pose,
    /// `theta` is only used by the kinematic encoding.
    pub goal: Pose,
    /// Maximum waypoint index `M`; a plan has at most `M + 1` waypoints.
    pub waypoint_budget: usize,
    /// Per-step bound `v` on |dx| and |dy|.
    pub max_step: u32,
    /// Inflation radius already applied to `obstacles`.
    pub inflation: f64,
    pub workspace: Workspace,
    /// Inflated obstacles.
    pub obstacles: Vec<ObstacleRect>,
}

impl PlanningProblem {
    pub fn with_budget(&self, m: usize) -> Self {
        Self { waypoint_budget: m, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), EncodeError> {
        if self.waypoint_budget == 0 {
            return Err(EncodeError::EmptyBudget);
        }
        let limit = self.workspace.width().min(self.workspace.height());
        if self.max_step == 0 || f64::from(self.max_step) >= limit {
            return Err(EncodeError::BadMovementBound { v: self.max_step, limit });
        }
        for (which, pose) in [("init", &self.init), ("goal", &self.goal)] {
            let p = pose.position();
            if !self.workspace.contains(p) {
                return Err(EncodeError::EndpointOutsideWorkspace { which, x: p.x, y: p.y });
            }
            if let Some(obstacle) = self.obstacles.iter().position(|o| point_in_rect(p, o)) {
                return Err(EncodeError::EndpointInObstacle { which, x: p.x, y: p.y, obstacle });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingKind {
    Pwl,
    Kinematic,
    KinematicOptimized,
}

impl EncodingKind {
    pub fn is_kinematic(self) -> bool {
        !matches!(self, EncodingKind::Pwl)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EncodingStats {
    pub num_constraints: usize,
    pub num_variables: usize,
}

/// An emitted SMT-LIB script.
#[derive(Debug, Clone, PartialEq)]
pub struct SmtScript {
    pub text: String,
    pub variable_names: Vec<String>,
    pub stats: EncodingStats,
    pub kind: EncodingKind,
    pub waypoint_budget: usize,
}

impl SmtScript {
    /// Replaces the turn objective with the hard constraint
    /// `sum m_t >= floor`. Scripts without turn indicators come back unchanged.
    pub fn with_turn_floor(&self, floor: usize) -> SmtScript {
        let m = self.waypoint_budget;
        if self.kind != EncodingKind::KinematicOptimized || m < 2 {
            return self.clone();
        }
        let terms: Vec<_> = (0..m - 1).map(turn_var).collect();
        let sum = if terms.len() == 1 { terms[0].clone() } else { format!("(+ {})", terms.join(" ")) };
        let bound = format!("(assert (>= {sum} {floor}))\n");
        let mut text = String::with_capacity(self.text.len() + bound.len());
        for line in self.text.lines() {
            if line.starts_with("(maximize ") {
                continue;
            }
            if line == "(check-sat)" {
                text.push_str(&bound);
            }
            text.push_str(line);
            text.push('\n');
        }
        let mut stats = self.stats;
        stats.num_constraints += 1;
        SmtScript { text, stats, ..self.clone() }
    }
}

/// Kinematic model behind the motion-primitive encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KinematicParams {
    pub v_x: f64,
    pub v_y: f64,
    /// Allowed per-step heading changes in degrees.
    pub rotations: Vec<f64>,
    /// Position tolerance for reaching the goal.
    pub goal_tolerance: f64,
}

impl Default for KinematicParams {
    fn default() -> Self {
        Self {
            v_x: 6.46,
            v_y: 6.46,
            rotations: vec![6.0, 4.5, 3.0, 1.5, -6.0, -4.5, -3.0, -1.5],
            goal_tolerance: 0.5,
        }
    }
}

impl KinematicParams {
    pub fn validate(&self) -> Result<(), EncodeError> {
        if !(self.v_x > 0.0 && self.v_y > 0.0) {
            return Err(EncodeError::BadKinematicParams("speeds must be positive".into()));
        }
        if self.rotations.is_empty() {
            return Err(EncodeError::BadKinematicParams("no rotations".into()));
        }
        let symmetric = self
            .rotations
            .iter()
            .all(|r| *r != 0.0 && self.rotations.iter().any(|s| (s + r).abs() < 1e-12));
        if !symmetric {
            return Err(EncodeError::BadKinematicParams("rotations must be nonzero and symmetric about 0".into()));
        }
        if !(self.goal_tolerance >= 0.0) {
            return Err(EncodeError::BadKinematicParams("negative goal tolerance".into()));
        }
        Ok(())
    }
}

/// What the target solver accepts beyond plain SMT-LIB 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverProfile {
    /// `(maximize ...)` objectives.
    pub supports_omt: bool,
    /// Emit z3's `pp.decimal` options so algebraic model values print as
    /// decimals with this many digits.
    pub decimal_precision: Option<u32>,
    /// Emitted as the standard `:random-seed` option.
    pub random_seed: Option<u64>,
}

impl Default for SolverProfile {
    fn default() -> Self {
        Self { supports_omt: true, decimal_precision: Some(12), random_seed: None }
    }
}

/// SMT-LIB literal for a finite float. Rust's `Display` never uses exponent
/// notation and yields the shortest decimal that round-trips.
pub fn smt_num(v: f64) -> String {
    debug_assert!(v.is_finite());
    let mag = format!("{}", v.abs());
    let mag = if mag.contains('.') { mag } else { format!("{mag}.0") };
    if v < 0.0 {
        format!("(- {mag})")
    } else {
        mag
    }
}

fn and(parts: &[String]) -> String {
    match parts.len() {
        0 => "true".to_string(),
        1 => parts[0].clone(),
        _ => format!("(and {})", parts.join(" ")),
    }
}

fn or(parts: &[String]) -> String {
    match parts.len() {
        0 => "false".to_string(),
        1 => parts[0].clone(),
        _ => format!("(or {})", parts.join(" ")),
    }
}

fn eq(a: &str, b: &str) -> String {
    format!("(= {a} {b})")
}

struct ScriptBuilder {
    text: String,
    names: Vec<String>,
    asserts: usize,
}

impl ScriptBuilder {
    fn new(header: &str, logic: &str, profile: &SolverProfile) -> Self {
        let mut text = String::new();
        for line in header.lines() {
            let _ = writeln!(text, "; {line}");
        }
        if let Some(digits) = profile.decimal_precision {
            text.push_str("(set-option :pp.decimal true)\n");
            let _ = writeln!(text, "(set-option :pp.decimal_precision {digits})");
        }
        if let Some(seed) = profile.random_seed {
            let _ = writeln!(text, "(set-option :random-seed {seed})");
        }
        let _ = writeln!(text, "(set-logic {logic})");
        Self { text, names: Vec::new(), asserts: 0 }
    }

    fn declare(&mut self, name: String, sort: &str) {
        let _ = writeln!(self.text, "(declare-const {name} {sort})");
        self.names.push(name);
    }

    fn assert(&mut self, term: String) {
        let _ = writeln!(self.text, "(assert {term})");
        self.asserts += 1;
    }

    fn comment(&mut self, c: &str) {
        let _ = writeln!(self.text, "; {c}");
    }

    fn finish(mut self, extra: &str, get_values: &[String], kind: EncodingKind, m: usize) -> SmtScript {
        self.text.push_str(extra);
        self.text.push_str("(check-sat)\n");
        let _ = writeln!(self.text, "(get-value ({}))", get_values.join(" "));
        let stats = EncodingStats { num_constraints: self.asserts, num_variables: self.names.len() };
        SmtScript { text: self.text, variable_names: self.names, stats, kind, waypoint_budget: m }
    }
}

pub fn x_var(t: usize) -> String {
    format!("x_{t}")
}

pub fn y_var(t: usize) -> String {
    format!("y_{t}")
}

pub fn theta_var(t: usize) -> String {
    format!("th_{t}")
}

pub fn turn_var(t: usize) -> String {
    format!("m_{t}")
}

fn in_rect(x: &str, y: &str, o: &ObstacleRect) -> String {
    and(&[
        format!("(<= {} {x})", smt_num(o.x_bl)),
        format!("(<= {x} {})", smt_num(o.x_tr)),
        format!("(<= {} {y})", smt_num(o.y_bl)),
        format!("(<= {y} {})", smt_num(o.y_tr)),
    ])
}

fn in_workspace(x: &str, y: &str, w: &Workspace) -> String {
    and(&[
        format!("(<= {} {x})", smt_num(w.x_min)),
        format!("(<= {x} {})", smt_num(w.x_max)),
        format!("(<= {} {y})", smt_num(w.y_min)),
        format!("(<= {y} {})", smt_num(w.y_max)),
    ])
}

fn at_point(x: &str, y: &str, p: Point) -> String {
    and(&[eq(x, &smt_num(p.x)), eq(y, &smt_num(p.y))])
}

fn problem_header(problem: &PlanningProblem, what: &str) -> String {
    format!(
        "{what}\nM = {}, N = {}, v = {}, r = {}\ninit = ({}, {}), goal = ({}, {})",
        problem.waypoint_budget,
        problem.obstacles.len(),
        problem.max_step,
        problem.inflation,
        problem.init.x,
        problem.init.y,
        problem.goal.x,
        problem.goal.y
    )
}

/// Piecewise-linear waypoint encoding.
pub fn encode_pwl(problem: &PlanningProblem) -> Result<SmtScript, EncodeError> {
    encode_pwl_with(problem, &SolverProfile::default())
}

pub fn encode_pwl_with(problem: &PlanningProblem, profile: &SolverProfile) -> Result<SmtScript, EncodeError> {
    problem.validate()?;
    let m = problem.waypoint_budget;
    let n = problem.obstacles.len();
    let goal = problem.goal.position();
    let v = smt_num(f64::from(problem.max_step));

    let mut b = ScriptBuilder::new(&problem_header(problem, "piecewise-linear waypoint encoding"), "QF_NRA", profile);
    for t in 0..=m {
        b.declare(x_var(t), "Real");
        b.declare(y_var(t), "Real");
    }
    let sep = |name: &str, t: usize, j: usize| format!("{name}_{t}_{j}");
    for t in 1..=m {
        for j in 0..n {
            for name in ["a", "b", "c"] {
                b.declare(sep(name, t, j), "Real");
            }
        }
    }

    b.comment("init");
    b.assert(at_point(&x_var(0), &y_var(0), problem.init.position()));

    b.comment("goal: reached at some t >= 1, and kept once reached");
    let reach: Vec<_> = (1..=m).map(|t| at_point(&x_var(t), &y_var(t), goal)).collect();
    b.assert(or(&reach));
    if m > 1 {
        let stay: Vec<_> = (1..m)
            .map(|t| {
                format!(
                    "(=> {} {})",
                    at_point(&x_var(t), &y_var(t), goal),
                    at_point(&x_var(t + 1), &y_var(t + 1), goal)
                )
            })
            .collect();
        b.assert(and(&stay));
    }

    b.comment("workspace");
    for t in 0..=m {
        b.assert(in_workspace(&x_var(t), &y_var(t), &problem.workspace));
    }

    if n > 0 {
        b.comment("avoid_obs: no waypoint inside an inflated obstacle");
        for t in 0..=m {
            for o in &problem.obstacles {
                b.assert(format!("(not {})", in_rect(&x_var(t), &y_var(t), o)));
            }
        }

        b.comment("obs_freepath: a separating line per (segment, obstacle)");
        for t in 1..=m {
            for (j, o) in problem.obstacles.iter().enumerate() {
                let (a, bb, c) = (sep("a", t, j), sep("b", t, j), sep("c", t, j));
                let lin = |x: &str, y: &str| format!("(+ (* {a} {x}) (* {bb} {y}) {c})");
                let waypoints = [lin(&x_var(t - 1), &y_var(t - 1)), lin(&x_var(t), &y_var(t))];
                let corners: Vec<_> = o.corners().iter().map(|k| lin(&smt_num(k.x), &smt_num(k.y))).collect();
                let side = |wp_rel: &str, corner_rel: &str| {
                    let mut lits: Vec<_> = waypoints.iter().map(|e| format!("({wp_rel} {e} 0.0)")).collect();
                    lits.extend(corners.iter().map(|e| format!("({corner_rel} {e} 0.0)")));
                    and(&lits)
                };
                b.assert(or(&[side("<", ">"), side(">", "<")]));
            }
        }
    }

    b.comment("mov: |dx| < v and |dy| < v");
    for t in 0..m {
        let (x0, x1, y0, y1) = (x_var(t), x_var(t + 1), y_var(t), y_var(t + 1));
        b.assert(and(&[
            format!("(< (- {x1} {x0}) {v})"),
            format!("(< (- {x0} {x1}) {v})"),
            format!("(< (- {y1} {y0}) {v})"),
            format!("(< (- {y0} {y1}) {v})"),
        ]));
    }

    let values: Vec<_> = (0..=m).flat_map(|t| [x_var(t), y_var(t)]).collect();
    Ok(b.finish("", &values, EncodingKind::Pwl, m))
}

/// Motion-primitive encoding. `minimize_turns` adds the collinearity
/// objective and requires `profile.supports_omt`.
pub fn encode_kinematic(
    problem: &PlanningProblem,
    kp: &KinematicParams,
    minimize_turns: bool,
    profile: &SolverProfile,
) -> Result<SmtScript, EncodeError> {
    problem.validate()?;
    kp.validate()?;
    if minimize_turns && !profile.supports_omt {
        return Err(EncodeError::OmtUnsupported);
    }
    let m = problem.waypoint_budget;
    let kind = if minimize_turns { EncodingKind::KinematicOptimized } else { EncodingKind::Kinematic };
    // Every product has a constant factor, so both variants are linear.
    let logic = if minimize_turns { "QF_LIRA" } else { "QF_LRA" };
    let header = format!(
        "{}\nheadings in degrees; hc_t/hs_t carry cos/sin of th_t (radians = degrees * {PI_APPROX} / 180)",
        problem_header(problem, "motion-primitive encoding")
    );
    let mut b = ScriptBuilder::new(&header, logic, profile);

    let hc = |t: usize| format!("hc_{t}");
    let hs = |t: usize| format!("hs_{t}");
    let wrap = |t: usize| format!("w_{t}");
    for t in 0..=m {
        b.declare(x_var(t), "Real");
        b.declare(y_var(t), "Real");
        b.declare(theta_var(t), "Real");
        b.declare(hc(t), "Real");
        b.declare(hs(t), "Real");
    }
    for t in 1..=m {
        b.declare(wrap(t), "Real");
    }
    if minimize_turns {
        for t in 0..m.saturating_sub(1) {
            b.declare(turn_var(t), "Int");
        }
    }

    let init = problem.init;
    let init_theta = wrap_degrees(init.theta);
    let rad = init_theta.to_radians();
    b.comment("init");
    b.assert(and(&[
        eq(&x_var(0), &smt_num(init.x)),
        eq(&y_var(0), &smt_num(init.y)),
        eq(&theta_var(0), &smt_num(init_theta)),
        eq(&hc(0), &smt_num(rad.cos())),
        eq(&hs(0), &smt_num(rad.sin())),
    ]));

    b.comment("headings stay in (-180, 180]");
    for t in 0..=m {
        let th = theta_var(t);
        b.assert(format!("(and (< (- 180.0) {th}) (<= {th} 180.0))"));
    }

    let goal_theta = smt_num(wrap_degrees(problem.goal.theta));
    let tol = smt_num(kp.goal_tolerance);
    let at_goal = |t: usize| {
        let (x, y) = (x_var(t), y_var(t));
        let (gx, gy) = (smt_num(problem.goal.x), smt_num(problem.goal.y));
        and(&[
            format!("(<= (- {x} {gx}) {tol})"),
            format!("(<= (- {gx} {x}) {tol})"),
            format!("(<= (- {y} {gy}) {tol})"),
            format!("(<= (- {gy} {y}) {tol})"),
            eq(&theta_var(t), &goal_theta),
        ])
    };
    let hold = |t: usize| {
        and(&[
            eq(&x_var(t + 1), &x_var(t)),
            eq(&y_var(t + 1), &y_var(t)),
            eq(&theta_var(t + 1), &theta_var(t)),
            eq(&hc(t + 1), &hc(t)),
            eq(&hs(t + 1), &hs(t)),
        ])
    };

    b.comment("goal: reached at some t >= 1, and kept once reached");
    let reach: Vec<_> = (1..=m).map(at_goal).collect();
    b.assert(or(&reach));
    if m > 1 {
        let stay: Vec<_> = (1..m).map(|t| format!("(=> {} {})", at_goal(t), hold(t))).collect();
        b.assert(and(&stay));
    }

    b.comment("workspace");
    for t in 0..=m {
        b.assert(in_workspace(&x_var(t), &y_var(t), &problem.workspace));
    }
    if !problem.obstacles.is_empty() {
        b.comment("avoid_obs");
        for t in 0..=m {
            for o in &problem.obstacles {
                b.assert(format!("(not {})", in_rect(&x_var(t), &y_var(t), o)));
            }
        }
    }

    b.comment("mov: one primitive per step");
    let (vx, vy) = (smt_num(kp.v_x), smt_num(kp.v_y));
    for t in 0..m {
        let (x0, x1, y0, y1) = (x_var(t), x_var(t + 1), y_var(t), y_var(t + 1));
        let (th0, th1) = (theta_var(t), theta_var(t + 1));
        let keep_heading = [eq(&th1, &th0), eq(&hc(t + 1), &hc(t)), eq(&hs(t + 1), &hs(t)), eq(&wrap(t + 1), "0.0")];
        let translate = |sign: &str| {
            let mut lits = vec![
                eq(&x1, &format!("({sign} {x0} (* {vx} {}))", hc(t))),
                eq(&y1, &format!("({sign} {y0} (* {vy} {}))", hs(t))),
            ];
            lits.extend(keep_heading.iter().cloned());
            and(&lits)
        };
        let mut cases = vec![translate("+"), translate("-")];
        let mut stay = vec![eq(&x1, &x0), eq(&y1, &y0)];
        stay.extend(keep_heading.iter().cloned());
        cases.push(and(&stay));
        for &rho in &kp.rotations {
            let (s, c) = rho.to_radians().sin_cos();
            let (c, s, ns) = (smt_num(c), smt_num(s), smt_num(-s));
            cases.push(and(&[
                eq(&x1, &x0),
                eq(&y1, &y0),
                eq(&th1, &format!("(- (+ {th0} {}) {})", smt_num(rho), wrap(t + 1))),
                eq(&hc(t + 1), &format!("(+ (* {c} {}) (* {ns} {}))", hc(t), hs(t))),
                eq(&hs(t + 1), &format!("(+ (* {s} {}) (* {c} {}))", hc(t), hs(t))),
                format!("(or {} {} {})", eq(&wrap(t + 1), "0.0"), eq(&wrap(t + 1), "360.0"), eq(&wrap(t + 1), "(- 360.0)")),
            ]));
        }
        b.assert(or(&cases));
    }

    let mut objective = String::new();
    if minimize_turns && m >= 2 {
        b.comment("turn indicators: equal consecutive displacements");
        for t in 0..m - 1 {
            let same = and(&[
                eq(&format!("(- {} {})", x_var(t), x_var(t + 1)), &format!("(- {} {})", x_var(t + 1), x_var(t + 2))),
                eq(&format!("(- {} {})", y_var(t), y_var(t + 1)), &format!("(- {} {})", y_var(t + 1), y_var(t + 2))),
            ]);
            b.assert(eq(&turn_var(t), &format!("(ite {same} 1 0)")));
        }
        let terms: Vec<_> = (0..m - 1).map(turn_var).collect();
        let sum = if terms.len() == 1 { terms[0].clone() } else { format!("(+ {})", terms.join(" ")) };
        objective = format!("(maximize {sum})\n");
    }

    let mut values: Vec<_> = (0..=m).flat_map(|t| [x_var(t), y_var(t), theta_var(t)]).collect();
    if minimize_turns {
        values.extend((0..m.saturating_sub(1)).map(turn_var));
    }
    Ok(b.finish(&objective, &values, kind, m))
}

/// Counts top-level declarations and assertions in SMT-LIB text.
pub fn count_stats(text: &str) -> EncodingStats {
    let mut stats = EncodingStats::default();
    for head in top_level_heads(text) {
        match head {
            "declare-const" | "declare-fun" => stats.num_variables += 1,
            "assert" => stats.num_constraints += 1,
            _ => {}
        }
    }
    stats
}

/// Head symbol of every top-level S-expression, skipping comments and string
/// literals.
fn top_level_heads(text: &str) -> Vec<&str> {
    let bytes = text.as_bytes();
    let mut heads = Vec::new();
    let mut depth = 0usize;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'"' => {
                i += 1;
                while i < bytes.len() && bytes[i] != b'"' {
                    i += 1;
                }
            }
            b'|' => {
                i += 1;
                while i < bytes.len() && bytes[i] != b'|' {
                    i += 1;
                }
            }
            b'(' => {
                if depth == 0 {
                    let mut j = i + 1;
                    while j < bytes.len() && bytes[j].is_ascii_whitespace() {
                        j += 1;
                    }
                    let start = j;
                    while j < bytes.len() && !bytes[j].is_ascii_whitespace() && bytes[j] != b'(' && bytes[j] != b')' {
                        j += 1;
                    }
                    heads.push(&text[start..j]);
                }
                depth += 1;
            }
            b')' => depth = depth.saturating_sub(1),
            _ => {}
        }
        i += 1;
    }
    heads
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(m: usize, obstacles: Vec<ObstacleRect>) -> PlanningProblem {
        PlanningProblem {
            init: Pose::new(1.0, 1.0, 0.0),
            goal: Pose::new(9.0, 9.0, 0.0),
            waypoint_budget: m,
            max_step: 5,
            inflation: 0.0,
            workspace: Workspace::new(0.0, 0.0, 10.0, 10.0),
            obstacles,
        }
    }

    fn block() -> ObstacleRect {
        ObstacleRect::new(4.0, 4.0, 6.0, 6.0).unwrap()
    }

    #[test]
    fn literals() {
        assert_eq!(smt_num(1.0), "1.0");
        assert_eq!(smt_num(-2.5), "(- 2.5)");
        assert_eq!(smt_num(0.1), "0.1");
        assert_eq!(smt_num(1e-7), "0.0000001");
        assert_eq!(smt_num(-0.0), "0.0");
    }

    #[test]
    fn pwl_variable_count_m2_n1() {
        let s = encode_pwl(&problem(2, vec![block()])).unwrap();
        assert_eq!(s.stats.num_variables, 12);
        assert_eq!(count_stats(&s.text), s.stats);
        assert_eq!(
            s.text.matches("(declare-const ").count(),
            s.variable_names.len(),
            "declared names and variable list must agree"
        );
        for name in &s.variable_names {
            assert!(s.text.contains(&format!("(declare-const {name} Real)")));
        }
    }

    #[test]
    fn pwl_without_obstacles_has_no_separators() {
        let s = encode_pwl(&problem(3, vec![])).unwrap();
        assert!(!s.text.contains("a_1_0"));
        assert!(!s.text.contains("obs_freepath"));
        assert!(!s.text.contains("avoid_obs"));
        assert_eq!(s.stats.num_variables, 8);
    }

    #[test]
    fn pwl_rejects_bad_problems() {
        let mut p = problem(2, vec![ObstacleRect::new(0.0, 0.0, 2.0, 2.0).unwrap()]);
        assert!(matches!(encode_pwl(&p), Err(EncodeError::EndpointInObstacle { which: "init", .. })));
        p.obstacles.clear();
        p.max_step = 10;
        assert!(matches!(encode_pwl(&p), Err(EncodeError::BadMovementBound { .. })));
        p.max_step = 3;
        p.waypoint_budget = 0;
        assert_eq!(encode_pwl(&p), Err(EncodeError::EmptyBudget));
    }

    #[test]
    fn count_stats_handles_empty_and_comments() {
        assert_eq!(count_stats(""), EncodingStats::default());
        let text = "; (assert false)\n(declare-fun f () Real)\n(assert (> f 0.0)) (assert \"(assert)\")\n(check-sat)";
        assert_eq!(count_stats(text), EncodingStats { num_constraints: 2, num_variables: 1 });
    }

    #[test]
    fn kinematic_needs_omt_for_objective() {
        let p = problem(3, vec![]);
        let kp = KinematicParams::default();
        let no_omt = SolverProfile { supports_omt: false, decimal_precision: None, random_seed: None };
        assert_eq!(encode_kinematic(&p, &kp, true, &no_omt), Err(EncodeError::OmtUnsupported));
        let s = encode_kinematic(&p, &kp, false, &no_omt).unwrap();
        assert!(!s.text.contains("maximize"));
        assert!(!s.text.contains("pp.decimal"));
        let s = encode_kinematic(&p, &kp, true, &SolverProfile::default()).unwrap();
        assert!(s.text.contains("(maximize (+ m_0 m_1))"));
        assert_eq!(s.kind, EncodingKind::KinematicOptimized);
        assert_eq!(count_stats(&s.text), s.stats);
        let bounded = s.with_turn_floor(2);
        assert!(!bounded.text.contains("maximize"));
        assert!(bounded.text.contains("(assert (>= (+ m_0 m_1) 2))\n(check-sat)"));
        assert_eq!(count_stats(&bounded.text), bounded.stats);
    }

    #[test]
    fn kinematic_params_validation() {
        let mut kp = KinematicParams::default();
        kp.rotations = vec![6.0, 3.0, -6.0];
        assert!(kp.validate().is_err());
        kp.rotations.clear();
        assert!(kp.validate().is_err());
    }
}
