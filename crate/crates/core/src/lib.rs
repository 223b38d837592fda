//! Motion planning for small indoor robots over 2D occupancy grids.
//!
//! Obstacles are extracted from a map_server style map as axis-aligned
//! rectangles, the planning problem is encoded as SMT-LIB 2 and discharged by
//! an external solver, and the resulting waypoints are followed by a
//! line-of-sight controller built from discrete motion primitives. Grid
//! planners (BFS, A*) serve as baselines.

pub mod geometry;
pub mod gridmap;
pub mod encode;
pub mod solver;
pub mod plan;
pub mod graph;
pub mod controller;
pub mod svg;
pub mod bench;

pub use encode::{EncodingKind, KinematicParams, PlanningProblem, SmtScript, SolverProfile};
pub use geometry::{Point, Pose};
pub use gridmap::{OccupancyGrid, ObstacleRect, Workspace};
pub use plan::{MotionPlan, PlannerKind, Waypoint};
pub use solver::{SolverConfig, SolverStatus};
