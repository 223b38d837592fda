//! Motion plans, their JSON form, and geometric validation against obstacles.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::encode::EncodingStats;
use crate::geometry::{point_in_rect, segment_intersects_rect, Point};
use crate::gridmap::ObstacleRect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlannerKind {
    #[serde(rename = "smt")]
    Smt,
    #[serde(rename = "smt-kin")]
    SmtKinematic,
    #[serde(rename = "smt-kin-opt")]
    SmtKinematicOpt,
    #[serde(rename = "bfs")]
    Bfs,
    #[serde(rename = "astar")]
    AStar,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 5] = [
        PlannerKind::Smt,
        PlannerKind::SmtKinematic,
        PlannerKind::SmtKinematicOpt,
        PlannerKind::Bfs,
        PlannerKind::AStar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::Smt => "smt",
            PlannerKind::SmtKinematic => "smt-kin",
            PlannerKind::SmtKinematicOpt => "smt-kin-opt",
            PlannerKind::Bfs => "bfs",
            PlannerKind::AStar => "astar",
        }
    }

    pub fn is_smt(self) -> bool {
        matches!(self, PlannerKind::Smt | PlannerKind::SmtKinematic | PlannerKind::SmtKinematicOpt)
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PlannerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PlannerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown planner {s:?} (expected smt, smt-kin, smt-kin-opt, bfs or astar)"))
    }
}

/// One plan sample. Serialized as `[x, y]` or `[x, y, theta]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub x: f64,
    pub y: f64,
    pub theta: Option<f64>,
}

impl Waypoint {
    pub fn xy(x: f64, y: f64) -> Self {
        Self { x, y, theta: None }
    }

    pub fn pose(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta: Some(theta) }
    }

    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

impl From<Point> for Waypoint {
    fn from(p: Point) -> Self {
        Waypoint::xy(p.x, p.y)
    }
}

impl Serialize for Waypoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.theta {
            Some(th) => [self.x, self.y, th].serialize(s),
            None => [self.x, self.y].serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Waypoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        match v.as_slice() {
            [x, y] => Ok(Waypoint::xy(*x, *y)),
            [x, y, th] => Ok(Waypoint::pose(*x, *y, *th)),
            _ => Err(serde::de::Error::custom(format!("waypoint needs 2 or 3 numbers, got {}", v.len()))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GraphStats {
    pub nodes: usize,
    /// Directed adjacency count.
    pub edges: usize,
    pub expanded: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlanStats {
    Encoding { stats: EncodingStats, encode_time: f64, waypoint_budget: usize },
    Graph(GraphStats),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionPlan {
    pub planner: PlannerKind,
    pub waypoints: Vec<Waypoint>,
    pub stats: PlanStats,
    /// Seconds spent in the solver or graph search.
    pub solve_time: f64,
}

impl MotionPlan {
    pub fn path_length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| w[0].point().distance(w[1].point())).sum()
    }

    pub fn points(&self) -> Vec<Point> {
        self.waypoints.iter().map(Waypoint::point).collect()
    }

    pub fn to_json(&self) -> PlanJson {
        let (enc, graph, budget, encode_time) = match self.stats {
            PlanStats::Encoding { stats, encode_time, waypoint_budget } => {
                (Some(stats), None, Some(waypoint_budget), Some(encode_time))
            }
            PlanStats::Graph(g) => (None, Some(g), None, None),
        };
        PlanJson {
            planner: self.planner,
            waypoints: self.waypoints.clone(),
            solve_time_s: self.solve_time,
            num_constraints: enc.map(|s| s.num_constraints),
            num_variables: enc.map(|s| s.num_variables),
            encode_time_s: encode_time,
            waypoint_budget: budget,
            nodes: graph.map(|g| g.nodes),
            edges: graph.map(|g| g.edges),
            expanded: graph.map(|g| g.expanded),
        }
    }

    pub fn from_json(json: PlanJson) -> Self {
        let stats = match (json.nodes, json.edges, json.expanded) {
            (Some(nodes), Some(edges), Some(expanded)) => PlanStats::Graph(GraphStats { nodes, edges, expanded }),
            _ => PlanStats::Encoding {
                stats: EncodingStats {
                    num_constraints: json.num_constraints.unwrap_or(0),
                    num_variables: json.num_variables.unwrap_or(0),
                },
                encode_time: json.encode_time_s.unwrap_or(0.0),
                waypoint_budget: json.waypoint_budget.unwrap_or(json.waypoints.len().saturating_sub(1)),
            },
        };
        MotionPlan { planner: json.planner, waypoints: json.waypoints, stats, solve_time: json.solve_time_s }
    }
}

/// On-disk plan format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanJson {
    pub planner: PlannerKind,
    pub waypoints: Vec<Waypoint>,
    pub solve_time_s: f64,
    pub num_constraints: Option<usize>,
    pub num_variables: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encode_time_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waypoint_budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expanded: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Waypoint index inside obstacle index.
    Waypoint { waypoint: usize, obstacle: usize },
    /// Segment `segment -> segment + 1` touches obstacle index.
    Segment { segment: usize, obstacle: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: usize,
    pub first: Option<Violation>,
}

/// Checks every waypoint and every consecutive segment against the closed
/// obstacle rectangles.
pub fn validate_plan(plan: &MotionPlan, obstacles: &[ObstacleRect]) -> ValidationReport {
    validate_points(&plan.points(), obstacles)
}

pub fn validate_points(points: &[Point], obstacles: &[ObstacleRect]) -> ValidationReport {
    let mut found = Vec::new();
    for (i, &p) in points.iter().enumerate() {
        for (j, o) in obstacles.iter().enumerate() {
            if point_in_rect(p, o) {
                found.push(Violation::Waypoint { waypoint: i, obstacle: j });
            }
        }
    }
    for (i, w) in points.windows(2).enumerate() {
        for (j, o) in obstacles.iter().enumerate() {
            if segment_intersects_rect(w[0], w[1], o) {
                found.push(Violation::Segment { segment: i, obstacle: j });
            }
        }
    }
    ValidationReport { ok: found.is_empty(), violations: found.len(), first: found.first().copied() }
}
