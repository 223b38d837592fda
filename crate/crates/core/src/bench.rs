//! Scenario files, the plan-validate-report pipeline, and comparison tables.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encode::{EncodingKind, KinematicParams, PlanningProblem};
use crate::geometry::{Point, Pose};
use crate::graph::{astar_plan, bfs_plan, CellGraph, GraphError};
use crate::gridmap::{extract_obstacles_with, inflate_obstacles, load_map, BoxingMode, MapError, ObstacleRect, OccupancyGrid};
use crate::plan::{validate_plan, MotionPlan, PlanStats, PlannerKind, Violation};
use crate::solver::{plan_with_deepening, run_solver_text, DeepeningOutcome, SolverConfig, SolverError, SolverStatus, DEFAULT_SOLVER};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bad scenario {path}: {source}")]
    Scenario { path: PathBuf, source: serde_json::Error },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("solver unavailable: {0}")]
    SolverUnavailable(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn default_planners() -> Vec<PlannerKind> {
    vec![PlannerKind::Smt, PlannerKind::Bfs, PlannerKind::AStar]
}

fn default_timeout() -> f64 {
    60.0
}

/// One benchmark case, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Defaults to the scenario file stem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Map YAML, relative to the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_path: Option<PathBuf>,
    /// `[x, y, theta]`; theta in degrees.
    pub init: [f64; 3],
    pub goal: [f64; 3],
    pub m_min: usize,
    pub m_max: usize,
    /// Per-step bound on |dx| and |dy| for the waypoint encoding.
    pub v: u32,
    /// Obstacle inflation radius.
    pub r: f64,
    pub cell_size: f64,
    #[serde(default = "default_planners")]
    pub planners: Vec<PlannerKind>,
    /// Solver command line; the environment override and then z3 apply when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub boxing: BoxingMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kinematic: Option<KinematicParams>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io { path: path.to_path_buf(), source })?;
        let mut s: Scenario =
            serde_json::from_str(&text).map_err(|source| BenchError::Scenario { path: path.to_path_buf(), source })?;
        if s.name.is_none() {
            s.name = path.file_stem().map(|n| n.to_string_lossy().into_owned());
        }
        if let (Some(map), Some(dir)) = (&s.map_path, path.parent()) {
            if map.is_relative() {
                s.map_path = Some(dir.join(map));
            }
        }
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.planners.is_empty() {
            return Err(BenchError::Invalid("no planner selected".into()));
        }
        if self.m_min == 0 || self.m_min > self.m_max {
            return Err(BenchError::Invalid(format!("need 1 <= m_min <= m_max, got {}..{}", self.m_min, self.m_max)));
        }
        if !(self.timeout_s > 0.0 && self.timeout_s.is_finite()) {
            return Err(BenchError::Invalid(format!("timeout must be positive, got {}", self.timeout_s)));
        }
        Ok(())
    }

    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or("scenario")
    }

    pub fn init_pose(&self) -> Pose {
        Pose::new(self.init[0], self.init[1], self.init[2])
    }

    pub fn goal_pose(&self) -> Pose {
        Pose::new(self.goal[0], self.goal[1], self.goal[2])
    }

    pub fn solver_config(&self) -> Result<SolverConfig, BenchError> {
        let timeout = Duration::from_secs_f64(self.timeout_s);
        let mut config = match &self.solver {
            Some(cmd) => SolverConfig::from_command_line(cmd, timeout)?,
            None => SolverConfig::from_env_or(DEFAULT_SOLVER, timeout)?,
        };
        config.profile.random_seed = Some(self.seed);
        Ok(config)
    }
}

/// Map plus inflated obstacles for one scenario.
#[derive(Debug, Clone)]
pub struct Environment {
    pub grid: OccupancyGrid,
    pub obstacles: Vec<ObstacleRect>,
}

impl Environment {
    pub fn new(grid: OccupancyGrid, boxing: BoxingMode, r: f64) -> Result<Self, BenchError> {
        let raw = extract_obstacles_with(&grid, boxing);
        let obstacles = inflate_obstacles(&raw, r, &grid.workspace())?;
        Ok(Self { grid, obstacles })
    }

    pub fn load(scenario: &Scenario, map_override: Option<&Path>) -> Result<Self, BenchError> {
        let path = map_override
            .map(Path::to_path_buf)
            .or_else(|| scenario.map_path.clone())
            .ok_or_else(|| BenchError::Invalid("scenario has no map_path and no map was given".into()))?;
        Self::new(load_map(&path)?, scenario.boxing, scenario.r)
    }

    pub fn problem(&self, scenario: &Scenario) -> PlanningProblem {
        PlanningProblem {
            init: scenario.init_pose(),
            goal: scenario.goal_pose(),
            waypoint_budget: scenario.m_min,
            max_step: scenario.v,
            inflation: scenario.r,
            workspace: self.grid.workspace(),
            obstacles: self.obstacles.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    NoPlan,
    Failed,
}

/// One planner's outcome on one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerRow {
    pub planner: PlannerKind,
    pub status: RowStatus,
    pub reason: Option<String>,
    pub waypoint_budget: Option<usize>,
    pub constraints: Option<usize>,
    pub variables: Option<usize>,
    pub nodes: Option<usize>,
    pub edges: Option<usize>,
    pub expanded: Option<usize>,
    /// Seconds; SMT rows only, summed over all budgets tried.
    pub encode_time: Option<f64>,
    /// Seconds in the solver (summed over budgets) or in graph search.
    pub time: f64,
    pub waypoints: Option<usize>,
    pub path_length: Option<f64>,
    pub valid: bool,
    #[serde(skip)]
    plan: Option<MotionPlan>,
}

impl PlannerRow {
    fn empty(planner: PlannerKind, status: RowStatus, reason: Option<String>) -> Self {
        PlannerRow {
            planner,
            status,
            reason,
            waypoint_budget: None,
            constraints: None,
            variables: None,
            nodes: None,
            edges: None,
            expanded: None,
            encode_time: None,
            time: 0.0,
            waypoints: None,
            path_length: None,
            valid: false,
            plan: None,
        }
    }

    pub fn failed(planner: PlannerKind, reason: impl Into<String>) -> Self {
        Self::empty(planner, RowStatus::Failed, Some(reason.into()))
    }

    pub fn no_plan(planner: PlannerKind) -> Self {
        Self::empty(planner, RowStatus::NoPlan, Some("no plan within budget".into()))
    }

    /// The only way a plan enters a row: it is validated against `obstacles`
    /// and an invalid plan turns the row into a failure.
    pub fn from_plan(plan: MotionPlan, obstacles: &[ObstacleRect], encode_time: Option<f64>, time: f64) -> Self {
        let report = validate_plan(&plan, obstacles);
        let mut row = Self::empty(plan.planner, RowStatus::Ok, None);
        match plan.stats {
            PlanStats::Encoding { stats, waypoint_budget, .. } => {
                row.constraints = Some(stats.num_constraints);
                row.variables = Some(stats.num_variables);
                row.waypoint_budget = Some(waypoint_budget);
            }
            PlanStats::Graph(g) => {
                row.nodes = Some(g.nodes);
                row.edges = Some(g.edges);
                row.expanded = Some(g.expanded);
            }
        }
        row.encode_time = encode_time;
        row.time = time;
        if report.ok {
            row.valid = true;
            row.waypoints = Some(plan.waypoints.len());
            row.path_length = Some(plan.path_length());
            row.plan = Some(plan);
        } else {
            row.status = RowStatus::Failed;
            let what = match report.first {
                Some(Violation::Waypoint { waypoint, obstacle }) => format!("waypoint {waypoint} inside obstacle {obstacle}"),
                Some(Violation::Segment { segment, obstacle }) => format!("segment {segment} touches obstacle {obstacle}"),
                None => String::new(),
            };
            row.reason = Some(format!("plan failed validation: {what}"));
        }
        row
    }

    pub fn plan(&self) -> Option<&MotionPlan> {
        self.plan.as_ref()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub rows: Vec<PlannerRow>,
}

impl Report {
    pub fn plans(&self) -> Vec<MotionPlan> {
        self.rows.iter().filter_map(|r| r.plan().cloned()).collect()
    }
}

/// Checks that the solver runs at all.
pub fn probe_solver(config: &SolverConfig) -> Result<(), BenchError> {
    let r = run_solver_text("(check-sat)\n", config);
    match r.status {
        SolverStatus::Sat => Ok(()),
        _ => Err(BenchError::SolverUnavailable(format!("`{}`: {}", config.command_line(), r.raw_output.trim()))),
    }
}

fn encoding_kind(planner: PlannerKind) -> Option<EncodingKind> {
    match planner {
        PlannerKind::Smt => Some(EncodingKind::Pwl),
        PlannerKind::SmtKinematic => Some(EncodingKind::Kinematic),
        PlannerKind::SmtKinematicOpt => Some(EncodingKind::KinematicOptimized),
        PlannerKind::Bfs | PlannerKind::AStar => None,
    }
}

/// Runs one planner. Solver errors abort; planner-level failures (bad
/// endpoints, unreachable goals) become rows.
pub fn run_planner(
    scenario: &Scenario,
    env: &Environment,
    planner: PlannerKind,
    graph: Option<&CellGraph>,
    config: &SolverConfig,
) -> Result<PlannerRow, BenchError> {
    if let Some(kind) = encoding_kind(planner) {
        let problem = env.problem(scenario);
        if let Err(e) = problem.with_budget(scenario.m_min).validate() {
            return Ok(PlannerRow::failed(planner, e.to_string()));
        }
        let kp = scenario.kinematic.clone().unwrap_or_default();
        let outcome = match plan_with_deepening(&problem, scenario.m_min, scenario.m_max, kind, &kp, config) {
            Ok(o) => o,
            Err(SolverError::Encode(e)) => return Ok(PlannerRow::failed(planner, e.to_string())),
            Err(e) => return Err(e.into()),
        };
        let encode_time = outcome.attempts().iter().map(|a| a.encode_time).sum();
        let solve_time = outcome.attempts().iter().map(|a| a.solve_time).sum();
        return Ok(match outcome {
            DeepeningOutcome::Planned { plan, .. } => PlannerRow::from_plan(plan, &env.obstacles, Some(encode_time), solve_time),
            DeepeningOutcome::NoPlan { attempts } => {
                let mut row = PlannerRow::no_plan(planner);
                row.encode_time = Some(encode_time);
                row.time = solve_time;
                if attempts.iter().any(|a| a.status == SolverStatus::Timeout) {
                    row.reason = Some("no plan within budget (some budgets timed out)".into());
                }
                row
            }
        });
    }

    let owned;
    let graph = match graph {
        Some(g) => g,
        None => {
            owned = CellGraph::decompose(&env.grid.workspace(), &env.obstacles, scenario.cell_size)?;
            &owned
        }
    };
    let (start, goal) = (scenario.init_pose().position(), scenario.goal_pose().position());
    let result = match planner {
        PlannerKind::Bfs => bfs_plan(graph, start, goal),
        _ => astar_plan(graph, start, goal),
    };
    Ok(match result {
        Ok(r) => match r.plan {
            Some(plan) => PlannerRow::from_plan(plan, &env.obstacles, None, r.search_time),
            None => {
                let mut row = PlannerRow::no_plan(planner);
                row.reason = Some("goal unreachable in the cell graph".into());
                row.nodes = Some(r.stats.nodes);
                row.edges = Some(r.stats.edges);
                row.expanded = Some(r.stats.expanded);
                row.time = r.search_time;
                row
            }
        },
        Err(e) => PlannerRow::failed(planner, e.to_string()),
    })
}

/// Parses the map, extracts and inflates obstacles, runs every selected
/// planner and validates its plan. Rows keep the scenario's planner order.
pub fn run_scenario(scenario: &Scenario) -> Result<(Report, Environment), BenchError> {
    scenario.validate()?;
    let env = Environment::load(scenario, None)?;
    let report = run_scenario_in(scenario, &env)?;
    Ok((report, env))
}

pub fn run_scenario_in(scenario: &Scenario, env: &Environment) -> Result<Report, BenchError> {
    let config = scenario.solver_config()?;
    if scenario.planners.iter().any(|p| p.is_smt()) {
        probe_solver(&config)?;
    }
    let graph = if scenario.planners.iter().any(|p| !p.is_smt()) {
        Some(CellGraph::decompose(&env.grid.workspace(), &env.obstacles, scenario.cell_size)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    for &planner in &scenario.planners {
        rows.push(run_planner(scenario, env, planner, graph.as_ref(), &config)?);
    }
    Ok(Report { scenario: scenario.display_name().to_string(), rows })
}

/// Scenario JSON files in `dir`, sorted by path.
pub fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let entries = std::fs::read_dir(dir).map_err(|source| BenchError::Io { path: dir.to_path_buf(), source })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    Ok(files)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Markdown,
    Csv,
}

impl std::str::FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "md" | "markdown" => Ok(TableFormat::Markdown),
            "csv" => Ok(TableFormat::Csv),
            other => Err(format!("unknown table format {other:?} (expected md or csv)")),
        }
    }
}

pub const TABLE_COLUMNS: [&str; 13] = [
    "scenario",
    "planner",
    "status",
    "M",
    "constraints",
    "variables",
    "nodes",
    "edges",
    "encode_s",
    "time_s",
    "waypoints",
    "path_length",
    "valid",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn table_rows(reports: &[Report]) -> Vec<[String; 13]> {
    let mut rows: Vec<(&str, &PlannerRow)> =
        reports.iter().flat_map(|r| r.rows.iter().map(move |row| (r.scenario.as_str(), row))).collect();
    rows.sort_by(|a, b| a.0.cmp(b.0).then_with(|| a.1.planner.name().cmp(b.1.planner.name())));
    rows.into_iter()
        .map(|(scenario, r)| {
            [
                scenario.to_string(),
                r.planner.to_string(),
                match r.status {
                    RowStatus::Ok => "ok",
                    RowStatus::NoPlan => "no-plan",
                    RowStatus::Failed => "failed",
                }
                .to_string(),
                opt(r.waypoint_budget),
                opt(r.constraints),
                opt(r.variables),
                opt(r.nodes),
                opt(r.edges),
                opt(r.encode_time.map(|t| format!("{t:.3}"))),
                format!("{:.3}", r.time),
                opt(r.waypoints),
                opt(r.path_length.map(|l| format!("{l:.3}"))),
                r.valid.to_string(),
            ]
        })
        .collect()
}

/// Comparison table grouped by scenario, then planner name. Times are
/// seconds at millisecond precision.
pub fn emit_table(reports: &[Report], format: TableFormat) -> Result<String, BenchError> {
    let rows = table_rows(reports);
    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(TABLE_COLUMNS)?;
            for r in &rows {
                w.write_record(r)?;
            }
            let bytes = w.into_inner().map_err(|e| BenchError::Invalid(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        TableFormat::Markdown => {
            let mut out = String::new();
            let _ = writeln!(out, "| {} |", TABLE_COLUMNS.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(TABLE_COLUMNS.len()));
            for r in &rows {
                let _ = writeln!(out, "| {} |", r.join(" | "));
            }
            out.push_str("\nbfs minimizes hop count; astar minimizes metric path length (orthogonal 1, diagonal sqrt 2).\n");
            Ok(out)
        }
    }
}

/// Convenience for examples and the CLI: the plan of a given planner.
pub fn plan_of(report: &Report, planner: PlannerKind) -> Option<&MotionPlan> {
    report.rows.iter().find(|r| r.planner == planner).and_then(PlannerRow::plan)
}

/// Goal point of a scenario.
pub fn goal_point(scenario: &Scenario) -> Point {
    scenario.goal_pose().position()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::Cell;
    use crate::plan::{GraphStats, Waypoint};

    fn scenario(planners: Vec<PlannerKind>) -> Scenario {
        Scenario {
            name: Some("unit".into()),
            map_path: None,
            init: [1.0, 1.0, 0.0],
            goal: [8.0, 8.0, 0.0],
            m_min: 1,
            m_max: 4,
            v: 5,
            r: 0.25,
            cell_size: 0.5,
            planners,
            solver: None,
            timeout_s: 10.0,
            seed: 0,
            boxing: BoxingMode::default(),
            kinematic: None,
        }
    }

    fn env_with_block() -> Environment {
        let mut g = OccupancyGrid::filled(10, 10, 1.0, [0.0, 0.0, 0.0], Cell::Free).unwrap();
        for c in 4..6 {
            for r in 4..6 {
                g.set(c, r, Cell::Occupied);
            }
        }
        Environment::new(g, BoxingMode::default(), 0.25).unwrap()
    }

    #[test]
    fn graph_planners_report_rows() {
        let s = scenario(vec![PlannerKind::AStar, PlannerKind::Bfs]);
        let r = run_scenario_in(&s, &env_with_block()).unwrap();
        assert_eq!(r.rows.len(), 2);
        for row in &r.rows {
            assert_eq!(row.status, RowStatus::Ok, "{row:?}");
            assert!(row.valid && row.nodes == Some(400) && row.constraints.is_none());
        }
    }

    #[test]
    fn blocked_goal_marks_failure() {
        let mut s = scenario(vec![PlannerKind::AStar]);
        s.goal = [5.0, 5.0, 0.0];
        let r = run_scenario_in(&s, &env_with_block()).unwrap();
        assert_eq!(r.rows[0].status, RowStatus::Failed);
        assert!(r.rows[0].reason.as_ref().unwrap().contains("blocked"));
    }

    #[test]
    fn invalid_plan_never_counts_as_ok() {
        let plan = MotionPlan {
            planner: PlannerKind::Bfs,
            waypoints: vec![Waypoint::xy(0.0, 0.0), Waypoint::xy(10.0, 10.0)],
            stats: PlanStats::Graph(GraphStats::default()),
            solve_time: 0.0,
        };
        let row = PlannerRow::from_plan(plan, &env_with_block().obstacles, None, 0.0);
        assert_eq!(row.status, RowStatus::Failed);
        assert!(!row.valid && row.plan().is_none());
    }

    #[test]
    fn table_formats() {
        let s = scenario(vec![PlannerKind::Bfs, PlannerKind::AStar]);
        let mut r = run_scenario_in(&s, &env_with_block()).unwrap();
        r.rows.push(PlannerRow::no_plan(PlannerKind::Smt));
        let md = emit_table(std::slice::from_ref(&r), TableFormat::Markdown).unwrap();
        let lines: Vec<_> = md.lines().collect();
        assert!(lines[0].starts_with("| scenario | planner |"));
        assert!(lines[2].starts_with("| unit | astar |") && lines[3].starts_with("| unit | bfs |"));
        assert!(lines[4].starts_with("| unit | smt | no-plan |"));

        let csv_text = emit_table(&[r], TableFormat::Csv).unwrap();
        let mut rd = csv::Reader::from_reader(csv_text.as_bytes());
        assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), TABLE_COLUMNS);
        let recs: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
        assert_eq!(recs.len(), 3);
        assert_eq!(&recs[0][1], "astar");
        assert_eq!(&recs[0][6], "400");
        assert_eq!(&recs[0][4], "");
        assert!("tsv".parse::<TableFormat>().is_err());
    }

    #[test]
    fn scenario_validation() {
        assert!(scenario(vec![]).validate().is_err());
        let mut s = scenario(vec![PlannerKind::Smt]);
        s.m_min = 5;
        assert!(s.validate().is_err());
        let json = r#"{"init":[0,0,0],"goal":[1,1,0],"m_min":1,"m_max":2,"v":3,"r":0.1,"cell_size":1,"planners":["smt","astar"]}"#;
        let s: Scenario = serde_json::from_str(json).unwrap();
        assert_eq!(s.planners, vec![PlannerKind::Smt, PlannerKind::AStar]);
        assert_eq!(s.timeout_s, 60.0);
        assert!(serde_json::from_str::<Scenario>(r#"{"init":[0,0,0],"bogus":1}"#).is_err());
    }
}
