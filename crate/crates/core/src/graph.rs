//! Uniform cell decomposition of the workspace and BFS / A* planners over it.
//!
//! Cells are 8-connected. A diagonal move additionally needs both orthogonal
//! neighbors it squeezes between to be free, so a path never cuts an obstacle
//! corner. Plans are `[start, centers of intermediate cells..., goal]`,
//! simplified by dropping interior points that continue in a straight line.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::time::Instant;

use thiserror::Error;

use crate::geometry::{cross, Point, EPS};
use crate::gridmap::{ObstacleRect, Workspace};
use crate::plan::{GraphStats, MotionPlan, PlanStats, PlannerKind, Waypoint};

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("cell size must be positive, got {0}")]
    BadCellSize(f64),
    #[error("mask has {got} cells, expected {cols} x {rows}")]
    BadMask { cols: usize, rows: usize, got: usize },
    #[error("{which} point ({x}, {y}) is outside the grid")]
    OutsideGrid { which: &'static str, x: f64, y: f64 },
    #[error("{which} point ({x}, {y}) lies in a blocked cell")]
    Blocked { which: &'static str, x: f64, y: f64 },
}

/// Neighbor offsets: orthogonal first, then diagonal.
const MOVES: [(i64, i64); 8] = [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (-1, -1), (1, -1)];

#[derive(Debug, Clone, PartialEq)]
pub struct CellGraph {
    cols: usize,
    rows: usize,
    cell_size: f64,
    /// World coordinates of the bottom-left corner of cell (0, 0).
    origin: Point,
    /// Cells past the last full column or row are clipped to these bounds.
    bounds: Workspace,
    blocked: Vec<bool>,
}

impl CellGraph {
    /// Splits `workspace` into `cell_size` squares. A cell is blocked iff its
    /// closed square overlaps one of `obstacles`.
    pub fn decompose(workspace: &Workspace, obstacles: &[ObstacleRect], cell_size: f64) -> Result<Self, GraphError> {
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(GraphError::BadCellSize(cell_size));
        }
        let count = |extent: f64| ((extent / cell_size) - EPS).ceil().max(1.0) as usize;
        let (cols, rows) = (count(workspace.width()), count(workspace.height()));
        let mut graph = CellGraph {
            cols,
            rows,
            cell_size,
            origin: Point::new(workspace.x_min, workspace.y_min),
            bounds: *workspace,
            blocked: vec![false; cols * rows],
        };
        for o in obstacles {
            // Only cells whose index range can touch the obstacle are tested.
            let lo = |v: f64, min: f64| (((v - min) / cell_size).floor() - 1.0).max(0.0) as usize;
            let hi = |v: f64, min: f64, n: usize| ((((v - min) / cell_size).floor() + 1.0).max(0.0) as usize).min(n - 1);
            let (c0, c1) = (lo(o.x_bl, workspace.x_min), hi(o.x_tr, workspace.x_min, cols));
            let (r0, r1) = (lo(o.y_bl, workspace.y_min), hi(o.y_tr, workspace.y_min, rows));
            for row in r0..=r1 {
                for col in c0..=c1 {
                    let idx = row * cols + col;
                    if !graph.blocked[idx] && graph.cell_rect(col, row).overlaps(o) {
                        graph.blocked[idx] = true;
                    }
                }
            }
        }
        Ok(graph)
    }

    /// Builds a graph from an explicit blocked mask (row-major, row 0 at the
    /// bottom), with unit cells anchored at the world origin.
    pub fn from_mask(cols: usize, rows: usize, blocked: Vec<bool>) -> Result<Self, GraphError> {
        if blocked.len() != cols * rows || cols == 0 || rows == 0 {
            return Err(GraphError::BadMask { cols, rows, got: blocked.len() });
        }
        let bounds = Workspace { x_min: 0.0, y_min: 0.0, x_max: cols as f64, y_max: rows as f64 };
        Ok(CellGraph { cols, rows, cell_size: 1.0, origin: Point::new(0.0, 0.0), bounds, blocked })
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn node_count(&self) -> usize {
        self.cols * self.rows
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.cols + col
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.cols, idx / self.cols)
    }

    pub fn is_blocked(&self, idx: usize) -> bool {
        self.blocked[idx]
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|&&b| b).count()
    }

    /// The closed world square of a cell, clipped to the workspace.
    pub fn cell_rect(&self, col: usize, row: usize) -> ObstacleRect {
        let x0 = self.origin.x + col as f64 * self.cell_size;
        let y0 = self.origin.y + row as f64 * self.cell_size;
        ObstacleRect {
            x_bl: x0,
            y_bl: y0,
            x_tr: (x0 + self.cell_size).min(self.bounds.x_max),
            y_tr: (y0 + self.cell_size).min(self.bounds.y_max),
        }
    }

    pub fn cell_center(&self, idx: usize) -> Point {
        let (col, row) = self.coords(idx);
        let r = self.cell_rect(col, row);
        Point::new((r.x_bl + r.x_tr) / 2.0, (r.y_bl + r.y_tr) / 2.0)
    }

    /// Cell containing `p`. Points on the far workspace edge map to the last
    /// column or row.
    pub fn locate(&self, p: Point) -> Option<usize> {
        if !self.bounds.contains(p) {
            return None;
        }
        let col = (((p.x - self.origin.x) / self.cell_size).floor() as usize).min(self.cols - 1);
        let row = (((p.y - self.origin.y) / self.cell_size).floor() as usize).min(self.rows - 1);
        Some(self.index(col, row))
    }

    /// Free neighbors of a free cell with their step costs (1 or sqrt 2), in a
    /// fixed order.
    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (col, row) = self.coords(idx);
        let (col, row) = (col as i64, row as i64);
        let free = move |c: i64, r: i64| {
            (0..self.cols as i64).contains(&c)
                && (0..self.rows as i64).contains(&r)
                && !self.blocked[r as usize * self.cols + c as usize]
        };
        let here_free = !self.blocked[idx];
        MOVES.iter().filter_map(move |&(dc, dr)| {
            let (c, r) = (col + dc, row + dr);
            if !here_free || !free(c, r) {
                return None;
            }
            let diagonal = dc != 0 && dr != 0;
            if diagonal && !(free(col + dc, row) && free(col, row + dr)) {
                return None;
            }
            let cost = if diagonal { std::f64::consts::SQRT_2 } else { 1.0 };
            Some((r as usize * self.cols + c as usize, cost))
        })
    }

    /// Directed arc count: every free cell contributes one arc per free,
    /// reachable neighbor.
    pub fn edge_count(&self) -> usize {
        (0..self.node_count()).map(|i| self.neighbors(i).count()).sum()
    }

    fn endpoint(&self, which: &'static str, p: Point) -> Result<usize, GraphError> {
        let idx = self.locate(p).ok_or(GraphError::OutsideGrid { which, x: p.x, y: p.y })?;
        if self.blocked[idx] {
            return Err(GraphError::Blocked { which, x: p.x, y: p.y });
        }
        Ok(idx)
    }

    /// Octile distance between two cells in cell units.
    pub fn octile(&self, a: usize, b: usize) -> f64 {
        let (ac, ar) = self.coords(a);
        let (bc, br) = self.coords(b);
        let dx = ac.abs_diff(bc) as f64;
        let dy = ar.abs_diff(br) as f64;
        dx.max(dy) + (std::f64::consts::SQRT_2 - 1.0) * dx.min(dy)
    }
}

/// Cell-level search result.
#[derive(Debug, Clone, PartialEq)]
pub struct CellPath {
    /// Cell indices from start to goal; empty when unreachable.
    pub cells: Vec<usize>,
    pub expanded: usize,
}

impl CellPath {
    pub fn found(&self) -> bool {
        !self.cells.is_empty()
    }

    /// Metric cost in cell units (1 per orthogonal step, sqrt 2 per diagonal).
    pub fn cost(&self, graph: &CellGraph) -> f64 {
        let (orth, diag) = step_counts(graph, &self.cells);
        orth as f64 + diag as f64 * std::f64::consts::SQRT_2
    }

    pub fn hops(&self) -> usize {
        self.cells.len().saturating_sub(1)
    }
}

/// Orthogonal and diagonal step counts along a cell path.
pub fn step_counts(graph: &CellGraph, cells: &[usize]) -> (usize, usize) {
    cells.windows(2).fold((0, 0), |(o, d), w| {
        let (a, b) = (graph.coords(w[0]), graph.coords(w[1]));
        if a.0 != b.0 && a.1 != b.1 {
            (o, d + 1)
        } else {
            (o + 1, d)
        }
    })
}

fn unwind(parent: &[usize], goal: usize) -> Vec<usize> {
    let mut cells = vec![goal];
    let mut cur = goal;
    while parent[cur] != cur {
        cur = parent[cur];
        cells.push(cur);
    }
    cells.reverse();
    cells
}

/// Breadth-first search counting every edge as one hop. A node counts as
/// expanded when it is dequeued; the search stops when the goal is dequeued.
pub fn bfs_cells(graph: &CellGraph, start: usize, goal: usize) -> CellPath {
    let mut parent = vec![usize::MAX; graph.node_count()];
    let mut queue = VecDeque::from([start]);
    parent[start] = start;
    let mut expanded = 0;
    while let Some(cur) = queue.pop_front() {
        expanded += 1;
        if cur == goal {
            return CellPath { cells: unwind(&parent, goal), expanded };
        }
        for (next, _) in graph.neighbors(cur) {
            if parent[next] == usize::MAX {
                parent[next] = cur;
                queue.push_back(next);
            }
        }
    }
    CellPath { cells: Vec::new(), expanded }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Open {
    f: f64,
    h: f64,
    idx: usize,
    g: f64,
}

impl Eq for Open {}

impl Ord for Open {
    // Reversed so the max-heap pops the smallest (f, h, idx).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A* with octile heuristic. Ties on `f` go to the smaller `h`, then the
/// smaller cell index.
pub fn astar_cells(graph: &CellGraph, start: usize, goal: usize) -> CellPath {
    let n = graph.node_count();
    let mut g_best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    g_best[start] = 0.0;
    parent[start] = start;
    let h0 = graph.octile(start, goal);
    open.push(Open { f: h0, h: h0, idx: start, g: 0.0 });
    let mut expanded = 0;
    while let Some(Open { idx: cur, g, .. }) = open.pop() {
        if closed[cur] || g > g_best[cur] {
            continue;
        }
        closed[cur] = true;
        expanded += 1;
        if cur == goal {
            return CellPath { cells: unwind(&parent, goal), expanded };
        }
        for (next, cost) in graph.neighbors(cur) {
            let ng = g + cost;
            if !closed[next] && ng < g_best[next] {
                g_best[next] = ng;
                parent[next] = cur;
                let h = graph.octile(next, goal);
                open.push(Open { f: ng + h, h, idx: next, g: ng });
            }
        }
    }
    CellPath { cells: Vec::new(), expanded }
}

/// Outcome of a graph planner query. `plan` is `None` when the goal cell is
/// unreachable.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphPlanResult {
    pub plan: Option<MotionPlan>,
    pub stats: GraphStats,
    pub search_time: f64,
}

fn graph_plan(
    graph: &CellGraph,
    start: Point,
    goal: Point,
    planner: PlannerKind,
    search: fn(&CellGraph, usize, usize) -> CellPath,
) -> Result<GraphPlanResult, GraphError> {
    let s = graph.endpoint("start", start)?;
    let g = graph.endpoint("goal", goal)?;
    let started = Instant::now();
    let path = search(graph, s, g);
    let search_time = started.elapsed().as_secs_f64();
    let stats = GraphStats { nodes: graph.node_count(), edges: graph.edge_count(), expanded: path.expanded };
    let plan = path.found().then(|| {
        let mut points = vec![start];
        if path.cells.len() > 2 {
            points.extend(path.cells[1..path.cells.len() - 1].iter().map(|&c| graph.cell_center(c)));
        }
        points.push(goal);
        MotionPlan {
            planner,
            waypoints: simplify(&points).into_iter().map(Waypoint::from).collect(),
            stats: PlanStats::Graph(stats),
            solve_time: search_time,
        }
    });
    Ok(GraphPlanResult { plan, stats, search_time })
}

pub fn bfs_plan(graph: &CellGraph, start: Point, goal: Point) -> Result<GraphPlanResult, GraphError> {
    graph_plan(graph, start, goal, PlannerKind::Bfs, bfs_cells)
}

pub fn astar_plan(graph: &CellGraph, start: Point, goal: Point) -> Result<GraphPlanResult, GraphError> {
    graph_plan(graph, start, goal, PlannerKind::AStar, astar_cells)
}

/// Drops repeated points and interior points that continue straight on in
/// the same direction. Endpoints are kept.
pub fn simplify(points: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    for &p in points {
        if out.last().is_some_and(|&q| q.distance(p) <= EPS) {
            continue;
        }
        while out.len() >= 2 {
            let (a, b) = (out[out.len() - 2], out[out.len() - 1]);
            let straight = cross(a, b, p).abs() <= EPS && (b.x - a.x) * (p.x - b.x) + (b.y - a.y) * (p.y - b.y) > 0.0;
            if straight {
                out.pop();
            } else {
                break;
            }
        }
        out.push(p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::validate_plan;

    fn ws(w: f64, h: f64) -> Workspace {
        Workspace::new(0.0, 0.0, w, h)
    }

    #[test]
    fn empty_workspace_two_by_two() {
        let g = CellGraph::decompose(&ws(10.0, 10.0), &[], 5.0).unwrap();
        assert_eq!((g.cols(), g.rows(), g.node_count(), g.blocked_count()), (2, 2, 4, 0));
        // every cell sees the other three
        assert_eq!(g.edge_count(), 12);
    }

    #[test]
    fn full_cover_blocks_everything() {
        let g = CellGraph::decompose(&ws(10.0, 10.0), &[ObstacleRect::new(0.0, 0.0, 10.0, 10.0).unwrap()], 1.0).unwrap();
        assert_eq!(g.blocked_count(), 100);
        assert_eq!(g.edge_count(), 0);
        assert!(matches!(CellGraph::decompose(&ws(1.0, 1.0), &[], 0.0), Err(GraphError::BadCellSize(_))));
    }

    #[test]
    fn overlap_not_center_sampling() {
        // A thin wall on a cell boundary blocks both neighbors.
        let wall = ObstacleRect { x_bl: 2.0, y_bl: 0.0, x_tr: 2.0, y_tr: 4.0 };
        let g = CellGraph::decompose(&ws(4.0, 4.0), &[wall], 1.0).unwrap();
        for row in 0..4 {
            assert!(g.is_blocked(g.index(1, row)) && g.is_blocked(g.index(2, row)));
            assert!(!g.is_blocked(g.index(0, row)) && !g.is_blocked(g.index(3, row)));
        }
    }

    #[test]
    fn no_corner_cutting() {
        // . X
        // X .
        let g = CellGraph::from_mask(2, 2, vec![false, true, true, false]).unwrap();
        assert_eq!(g.neighbors(0).count(), 0);
        assert!(!bfs_cells(&g, 0, 3).found());
    }

    #[test]
    fn same_cell_and_corridor() {
        let g = CellGraph::decompose(&ws(10.0, 3.0), &[], 1.0).unwrap();
        let p = Point::new(0.5, 1.5);
        let same = bfs_plan(&g, p, p).unwrap().plan.unwrap();
        assert_eq!(same.waypoints.len(), 1);

        let r = astar_plan(&g, Point::new(0.5, 1.5), Point::new(9.5, 1.5)).unwrap();
        assert_eq!(r.plan.unwrap().waypoints.len(), 2);
        let r = bfs_plan(&g, Point::new(0.5, 1.5), Point::new(9.5, 1.5)).unwrap();
        assert_eq!(r.plan.unwrap().waypoints.len(), 2);
    }

    #[test]
    fn wall_means_no_plan_and_blocked_goal_is_an_error() {
        let wall = ObstacleRect::new(4.2, 0.0, 4.8, 10.0).unwrap();
        let g = CellGraph::decompose(&ws(10.0, 10.0), &[wall], 1.0).unwrap();
        let r = bfs_plan(&g, Point::new(1.0, 1.0), Point::new(9.0, 9.0)).unwrap();
        assert!(r.plan.is_none());
        assert!(r.stats.expanded > 0);
        assert!(astar_plan(&g, Point::new(1.0, 1.0), Point::new(9.0, 9.0)).unwrap().plan.is_none());
        assert!(matches!(astar_plan(&g, Point::new(1.0, 1.0), Point::new(4.5, 5.0)), Err(GraphError::Blocked { which: "goal", .. })));
        assert!(matches!(bfs_plan(&g, Point::new(-1.0, 1.0), Point::new(1.0, 5.0)), Err(GraphError::OutsideGrid { which: "start", .. })));
    }

    #[test]
    fn open_diagonal_cost() {
        let g = CellGraph::from_mask(8, 8, vec![false; 64]).unwrap();
        let p = astar_cells(&g, 0, g.index(7, 7));
        assert_eq!(p.cost(&g), 7.0 * std::f64::consts::SQRT_2);
        assert_eq!(p.hops(), 7);
        assert_eq!(g.octile(5, 5), 0.0);
        let b = bfs_cells(&g, 0, g.index(7, 7));
        assert_eq!(b.hops(), 7);
    }

    #[test]
    fn plans_avoid_obstacles() {
        let obstacles = [ObstacleRect::new(3.0, 0.0, 4.0, 7.0).unwrap(), ObstacleRect::new(6.0, 3.0, 7.0, 10.0).unwrap()];
        let g = CellGraph::decompose(&ws(10.0, 10.0), &obstacles, 0.5).unwrap();
        for r in [
            bfs_plan(&g, Point::new(1.0, 1.0), Point::new(9.0, 1.0)).unwrap(),
            astar_plan(&g, Point::new(1.0, 1.0), Point::new(9.0, 1.0)).unwrap(),
        ] {
            let plan = r.plan.unwrap();
            assert!(validate_plan(&plan, &obstacles).ok, "{plan:?}");
            assert_eq!(plan.waypoints.first().unwrap().point(), Point::new(1.0, 1.0));
            assert_eq!(plan.waypoints.last().unwrap().point(), Point::new(9.0, 1.0));
        }
    }

    #[test]
    fn partial_cells_clip_to_the_workspace() {
        let g = CellGraph::decompose(&ws(2.5, 1.0), &[], 1.0).unwrap();
        assert_eq!(g.cols(), 3);
        assert_eq!(g.cell_center(2), Point::new(2.25, 0.5));
        assert_eq!(g.locate(Point::new(2.5, 1.0)), Some(2));
    }

    #[test]
    fn simplify_examples() {
        let pts = |v: &[(f64, f64)]| v.iter().map(|&(x, y)| Point::new(x, y)).collect::<Vec<_>>();
        assert_eq!(simplify(&pts(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)])), pts(&[(0.0, 0.0), (2.0, 2.0)]));
        assert_eq!(simplify(&pts(&[(0.0, 0.0)])), pts(&[(0.0, 0.0)]));
        assert_eq!(simplify(&pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)])), pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]));
        // a reversal is a real turn
        assert_eq!(simplify(&pts(&[(0.0, 0.0), (2.0, 0.0), (1.0, 0.0)])).len(), 3);
        assert_eq!(simplify(&pts(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0), (2.0, 0.0)])), pts(&[(0.0, 0.0), (2.0, 0.0)]));
    }
}
