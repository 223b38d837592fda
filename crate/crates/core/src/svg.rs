//! SVG 1.1 rendering of a map, its obstacles and plans.
//!
//! Drawing happens in world units with the y axis flipped, so the view box
//! is the workspace itself.

use std::fmt::Write as _;

use crate::geometry::Point;
use crate::gridmap::{Cell, ObstacleRect, OccupancyGrid, Workspace};
use crate::plan::{MotionPlan, PlannerKind};

pub fn planner_color(kind: PlannerKind) -> &'static str {
    match kind {
        PlannerKind::Smt => "#1f4fd8",
        PlannerKind::SmtKinematic => "#7b2cbf",
        PlannerKind::SmtKinematicOpt => "#0b8a8a",
        PlannerKind::Bfs => "#e08a00",
        PlannerKind::AStar => "#d62828",
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn rect(out: &mut String, r: &ObstacleRect, attrs: &str) {
    let _ = writeln!(
        out,
        r#"  <rect x="{}" y="{}" width="{}" height="{}" {attrs}/>"#,
        num(r.x_bl),
        num(-r.y_tr),
        num(r.width()),
        num(r.height())
    );
}

/// Renders the map. `grid` supplies the unknown cells and extent; without
/// one, `workspace` sets the extent.
pub fn render_svg(
    grid: Option<&OccupancyGrid>,
    workspace: &Workspace,
    obstacles: &[ObstacleRect],
    plans: &[MotionPlan],
    init: Point,
    goal: Point,
) -> String {
    let ws = grid.map_or(*workspace, OccupancyGrid::workspace);
    let span = ws.width().max(ws.height());
    let stroke = span / 300.0;
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{} {} {} {}" width="800" height="{}">"#,
        num(ws.x_min),
        num(-ws.y_max),
        num(ws.width()),
        num(ws.height()),
        num((800.0 * ws.height() / ws.width()).round())
    );
    let bounds = ObstacleRect { x_bl: ws.x_min, y_bl: ws.y_min, x_tr: ws.x_max, y_tr: ws.y_max };
    rect(&mut out, &bounds, r#"fill="white""#);

    if let Some(g) = grid {
        out.push_str("  <g id=\"unknown\" fill=\"#b0b0b0\">\n");
        let res = g.resolution();
        let [ox, oy, _] = g.origin();
        for row in 0..g.height() {
            let mut col = 0;
            while col < g.width() {
                if g.get(col, row) != Cell::Unknown {
                    col += 1;
                    continue;
                }
                let start = col;
                while col < g.width() && g.get(col, row) == Cell::Unknown {
                    col += 1;
                }
                let run = ObstacleRect {
                    x_bl: ox + start as f64 * res,
                    y_bl: oy + row as f64 * res,
                    x_tr: ox + col as f64 * res,
                    y_tr: oy + (row + 1) as f64 * res,
                };
                out.push_str("  ");
                rect(&mut out, &run, "");
            }
        }
        out.push_str("  </g>\n");
    }

    out.push_str("  <g id=\"obstacles\" fill=\"black\">\n");
    for o in obstacles {
        out.push_str("  ");
        rect(&mut out, o, "");
    }
    out.push_str("  </g>\n");

    for plan in plans {
        let points: Vec<String> = plan.waypoints.iter().map(|w| format!("{},{}", num(w.x), num(-w.y))).collect();
        let _ = writeln!(
            out,
            r#"  <polyline class="plan {}" points="{}" fill="none" stroke="{}" stroke-width="{}" stroke-linejoin="round"/>"#,
            plan.planner,
            points.join(" "),
            planner_color(plan.planner),
            num(stroke)
        );
    }

    let _ = writeln!(
        out,
        r#"  <circle id="start" cx="{}" cy="{}" r="{}" fill="black" stroke="white" stroke-width="{}"/>"#,
        num(init.x),
        num(-init.y),
        num(stroke * 3.0),
        num(stroke / 2.0)
    );
    let half = stroke * 4.0;
    let goal_box = ObstacleRect { x_bl: goal.x - half, y_bl: goal.y - half, x_tr: goal.x + half, y_tr: goal.y + half };
    rect(&mut out, &goal_box, &format!(r#"id="goal" fill="none" stroke="green" stroke-width="{}""#, num(stroke)));
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{PlanStats, Waypoint};

    fn plan(kind: PlannerKind, pts: &[(f64, f64)]) -> MotionPlan {
        MotionPlan {
            planner: kind,
            waypoints: pts.iter().map(|&(x, y)| Waypoint::xy(x, y)).collect(),
            stats: PlanStats::Graph(Default::default()),
            solve_time: 0.0,
        }
    }

    #[test]
    fn map_only() {
        let ws = Workspace::new(0.0, 0.0, 10.0, 10.0);
        let s = render_svg(None, &ws, &[ObstacleRect::new(2.0, 2.0, 4.0, 4.0).unwrap()], &[], Point::new(1.0, 1.0), Point::new(9.0, 9.0));
        assert!(!s.contains("<polyline"));
        assert!(s.contains(r#"<rect x="2" y="-4" width="2" height="2" />"#));
        assert!(s.contains(r#"id="goal""#));
    }

    #[test]
    fn polylines_per_plan() {
        let ws = Workspace::new(0.0, 0.0, 10.0, 10.0);
        let plans = [plan(PlannerKind::Smt, &[(1.0, 1.0), (5.0, 8.0), (9.0, 9.0)]), plan(PlannerKind::AStar, &[(1.0, 1.0), (9.0, 9.0)])];
        let s = render_svg(None, &ws, &[], &plans, Point::new(1.0, 1.0), Point::new(9.0, 9.0));
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(s.contains(r#"points="1,-1 5,-8 9,-9""#));
        assert!(s.contains(planner_color(PlannerKind::Smt)) && s.contains(planner_color(PlannerKind::AStar)));
    }

    #[test]
    fn unknown_cells_are_grey_runs() {
        let mut g = OccupancyGrid::filled(4, 2, 1.0, [0.0, 0.0, 0.0], Cell::Free).unwrap();
        g.set(1, 0, Cell::Unknown);
        g.set(2, 0, Cell::Unknown);
        let s = render_svg(Some(&g), &g.workspace(), &[], &[], Point::new(0.5, 0.5), Point::new(3.5, 1.5));
        assert!(s.contains(r#"<rect x="1" y="-1" width="2" height="1" />"#));
    }
}
