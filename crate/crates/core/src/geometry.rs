//! Geometric predicates shared by the planners, the plan validator and the
//! controller.
//!
//! Rectangles are closed sets: a point on the boundary is inside, and a
//! segment that only touches an edge intersects. Orientation tests treat a
//! cross product within [`EPS`] of zero as collinear, which errs on the side of
//! reporting a contact.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gridmap::ObstacleRect;

/// Comparison margin for floating-point orientation tests.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("effective angle undefined: goal ({0}, {1}) coincides with the robot position")]
    CoincidentGoal(f64, f64),
}

/// A point in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// Robot pose. `theta` is in degrees, measured anticlockwise from +X, and is
/// kept in `(-180, 180]` by the constructors in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    /// Builds a pose, wrapping `theta` into `(-180, 180]`.
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_degrees(theta),
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// Line `a*x + b*y + c = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparatingLine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl SeparatingLine {
    pub fn eval(&self, p: Point) -> f64 {
        self.a * p.x + self.b * p.y + self.c
    }

    /// True when `first` points are all strictly on one side and `second`
    /// points strictly on the other.
    pub fn strictly_separates(&self, first: &[Point], second: &[Point]) -> bool {
        let side = |pts: &[Point], positive: bool| {
            pts.iter().all(|&p| {
                let v = self.eval(p);
                if positive {
                    v > 0.0
                } else {
                    v < 0.0
                }
            })
        };
        (side(first, false) && side(second, true)) || (side(first, true) && side(second, false))
    }
}

/// Wraps an angle in degrees into `(-180, 180]`.
pub fn wrap_degrees(angle: f64) -> f64 {
    let mut a = angle % 360.0;
    if a > 180.0 {
        a -= 360.0;
    } else if a <= -180.0 {
        a += 360.0;
    }
    a
}

pub fn point_in_rect(p: Point, rect: &ObstacleRect) -> bool {
    rect.x_bl <= p.x && p.x <= rect.x_tr && rect.y_bl <= p.y && p.y <= rect.y_tr
}

/// Cross product of `a - o` and `b - o`.
pub fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn orientation(o: Point, a: Point, b: Point) -> i8 {
    let c = cross(o, a, b);
    let scale = 1.0_f64
        .max((a.x - o.x).abs())
        .max((a.y - o.y).abs())
        .max((b.x - o.x).abs())
        .max((b.y - o.y).abs());
    if c.abs() <= EPS * scale * scale {
        0
    } else if c > 0.0 {
        1
    } else {
        -1
    }
}

fn within_box(p: Point, a: Point, b: Point) -> bool {
    p.x >= a.x.min(b.x) - EPS
        && p.x <= a.x.max(b.x) + EPS
        && p.y >= a.y.min(b.y) - EPS
        && p.y <= a.y.max(b.y) + EPS
}

/// Closed segment-segment intersection, collinear overlap included.
pub fn segments_intersect(p1: Point, q1: Point, p2: Point, q2: Point) -> bool {
    let o1 = orientation(p1, q1, p2);
    let o2 = orientation(p1, q1, q2);
    let o3 = orientation(p2, q2, p1);
    let o4 = orientation(p2, q2, q1);

    if o1 != o2 && o3 != o4 {
        return true;
    }
    (o1 == 0 && within_box(p2, p1, q1))
        || (o2 == 0 && within_box(q2, p1, q1))
        || (o3 == 0 && within_box(p1, p2, q2))
        || (o4 == 0 && within_box(q1, p2, q2))
}

/// Whether the closed segment `pq` meets the closed rectangle.
pub fn segment_intersects_rect(p: Point, q: Point, rect: &ObstacleRect) -> bool {
    if point_in_rect(p, rect) || point_in_rect(q, rect) {
        return true;
    }
    let [bl, br, tr, tl] = rect.corners();
    [(bl, br), (br, tr), (tr, tl), (tl, bl)]
        .into_iter()
        .any(|(a, b)| segments_intersect(p, q, a, b))
}

/// Finds a line with `p`, `q` strictly on one side and all four corners of
/// `rect` strictly on the other.
///
/// Candidates are the two axis directions (rectangle edge normals) and the
/// normal of the segment itself; for a segment and a convex rectangle one of
/// them separates whenever the two are disjoint. Returns `None` whenever
/// [`segment_intersects_rect`] reports contact.
pub fn find_separating_line(p: Point, q: Point, rect: &ObstacleRect) -> Option<SeparatingLine> {
    if segment_intersects_rect(p, q, rect) {
        return None;
    }
    let seg = [p, q];
    let corners = rect.corners();

    let max_x = p.x.max(q.x);
    let min_x = p.x.min(q.x);
    let max_y = p.y.max(q.y);
    let min_y = p.y.min(q.y);

    let mut candidates = Vec::with_capacity(5);
    if max_x < rect.x_bl {
        candidates.push(SeparatingLine { a: 1.0, b: 0.0, c: -0.5 * (max_x + rect.x_bl) });
    }
    if min_x > rect.x_tr {
        candidates.push(SeparatingLine { a: 1.0, b: 0.0, c: -0.5 * (min_x + rect.x_tr) });
    }
    if max_y < rect.y_bl {
        candidates.push(SeparatingLine { a: 0.0, b: 1.0, c: -0.5 * (max_y + rect.y_bl) });
    }
    if min_y > rect.y_tr {
        candidates.push(SeparatingLine { a: 0.0, b: 1.0, c: -0.5 * (min_y + rect.y_tr) });
    }

    let (dx, dy) = (q.x - p.x, q.y - p.y);
    let len = dx.hypot(dy);
    if len > 0.0 {
        // Unit normal of the supporting line through p and q.
        let (a, b) = (-dy / len, dx / len);
        let c = -(a * p.x + b * p.y);
        let values = corners.map(|k| a * k.x + b * k.y + c);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo > 0.0 {
            candidates.push(SeparatingLine { a, b, c: c - 0.5 * lo });
        } else if hi < 0.0 {
            candidates.push(SeparatingLine { a, b, c: c - 0.5 * hi });
        }
    }

    candidates
        .into_iter()
        .find(|line| line.strictly_separates(&seg, &corners))
}

/// Heading correction in degrees needed to face `goal` from `pose`, in
/// `(-180, 180]`. Positive values mean an anticlockwise turn.
pub fn effective_angle(pose: &Pose, goal: Point) -> Result<f64, GeometryError> {
    let (dx, dy) = (goal.x - pose.x, goal.y - pose.y);
    if dx == 0.0 && dy == 0.0 {
        return Err(GeometryError::CoincidentGoal(goal.x, goal.y));
    }
    let phi = wrap_degrees(dy.atan2(dx).to_degrees());
    Ok(wrap_degrees(phi - pose.theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> ObstacleRect {
        ObstacleRect::new(x0, y0, x1, y1).unwrap()
    }

    #[test]
    fn point_containment_is_closed() {
        let r = rect(2.0, 2.0, 4.0, 4.0);
        assert!(point_in_rect(Point::new(3.0, 3.0), &r));
        assert!(point_in_rect(Point::new(2.0, 2.0), &r));
        assert!(!point_in_rect(Point::new(4.001, 3.0), &r));
    }

    #[test]
    fn segment_rect_cases() {
        let r = rect(2.0, 2.0, 4.0, 4.0);
        assert!(segment_intersects_rect(Point::new(0.0, 3.0), Point::new(6.0, 3.0), &r));
        assert!(!segment_intersects_rect(Point::new(0.0, 0.0), Point::new(1.0, 1.0), &r));
        assert!(segment_intersects_rect(Point::new(0.0, 0.0), Point::new(5.0, 5.0), &r));
        // grazing the top edge
        assert!(segment_intersects_rect(Point::new(0.0, 4.0), Point::new(6.0, 4.0), &r));
        // touching a corner only
        assert!(segment_intersects_rect(Point::new(0.0, 8.0), Point::new(8.0, 0.0), &r));
        assert!(!segment_intersects_rect(Point::new(0.0, 8.01), Point::new(8.01, 0.0), &r));
    }

    #[test]
    fn separating_line_examples() {
        let r = rect(2.0, 2.0, 4.0, 4.0);
        let seg = [Point::new(0.0, 0.0), Point::new(0.0, 1.0)];
        let line = find_separating_line(seg[0], seg[1], &r).expect("gap exists");
        assert!(line.strictly_separates(&seg, &r.corners()));

        assert!(find_separating_line(Point::new(0.0, 3.0), Point::new(6.0, 3.0), &r).is_none());

        // Anti-diagonal x + y = 5 clears the unit square's far corner (1,1).
        let unit = rect(0.0, 0.0, 1.0, 1.0);
        let seg = [Point::new(0.0, 5.0), Point::new(5.0, 0.0)];
        let line = find_separating_line(seg[0], seg[1], &unit).expect("segment clears corner");
        for k in unit.corners() {
            assert!(line.eval(k) * line.eval(seg[0]) < 0.0);
        }
        assert!(line.eval(seg[0]) * line.eval(seg[1]) > 0.0);
    }

    #[test]
    fn degenerate_segment_matches_point_test() {
        let r = rect(2.0, 2.0, 4.0, 4.0);
        for p in [Point::new(3.0, 3.0), Point::new(4.0, 2.0), Point::new(5.0, 3.0)] {
            assert_eq!(segment_intersects_rect(p, p, &r), point_in_rect(p, &r));
            assert_eq!(find_separating_line(p, p, &r).is_some(), !point_in_rect(p, &r));
        }
    }

    #[test]
    fn effective_angle_examples() {
        assert_abs_diff_eq!(
            effective_angle(&Pose::new(0.0, 0.0, 0.0), Point::new(1.0, 1.0)).unwrap(),
            45.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            effective_angle(&Pose::new(0.0, 0.0, 90.0), Point::new(0.0, 5.0)).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        // phi = -45, theta = -215 wraps to +145
        assert_abs_diff_eq!(
            effective_angle(&Pose::new(0.0, 0.0, 170.0), Point::new(1.0, -1.0)).unwrap(),
            145.0,
            epsilon = 1e-9
        );
        assert!(effective_angle(&Pose::new(1.0, 1.0, 0.0), Point::new(1.0, 1.0)).is_err());
    }

    #[test]
    fn wrap_edges() {
        assert_eq!(wrap_degrees(180.0), 180.0);
        assert_eq!(wrap_degrees(-180.0), 180.0);
        assert_eq!(wrap_degrees(540.0), 180.0);
        assert_eq!(wrap_degrees(-190.0), 170.0);
        assert_eq!(wrap_degrees(-360.0), 0.0);
    }
}
