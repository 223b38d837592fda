//! Line-of-sight waypoint following over discrete legged-robot motion
//! primitives, and a kinematic simulator for them.
//!
//! A primitive is a net pose change: a forward or backward step of length
//! `L`, or a pure rotation by one of four fixed angles. Positive angles turn
//! anticlockwise. Rotations can use nominal angles or the measured effective
//! ones from the calibration table.

use std::fmt;
use std::io;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{effective_angle, wrap_degrees, Point, Pose, EPS};
use crate::plan::MotionPlan;

/// Nominal step length in world units (cm).
pub const STEP_LENGTH: f64 = 6.46;

#[derive(Debug, Error)]
pub enum ControllerError {
    #[error("invalid controller parameters: {0}")]
    BadParams(String),
    #[error("invalid noise model: {0}")]
    BadNoise(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One of the four rotation discretizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RotStep {
    #[serde(rename = "6")]
    Six,
    #[serde(rename = "4.5")]
    FourHalf,
    #[serde(rename = "3")]
    Three,
    #[serde(rename = "1.5")]
    OneHalf,
}

impl RotStep {
    /// Largest first.
    pub const ALL: [RotStep; 4] = [RotStep::Six, RotStep::FourHalf, RotStep::Three, RotStep::OneHalf];

    pub fn nominal(self) -> f64 {
        match self {
            RotStep::Six => 6.0,
            RotStep::FourHalf => 4.5,
            RotStep::Three => 3.0,
            RotStep::OneHalf => 1.5,
        }
    }

    /// Measured effective rotation.
    pub fn calibrated(self) -> f64 {
        match self {
            RotStep::Six => 5.947,
            RotStep::FourHalf => 4.535,
            RotStep::Three => 3.072,
            RotStep::OneHalf => 1.485,
        }
    }

    pub fn from_degrees(deg: f64) -> Option<RotStep> {
        RotStep::ALL.into_iter().find(|s| (s.nominal() - deg).abs() <= EPS)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "degrees", rename_all = "snake_case")]
pub enum MotionPrimitive {
    Forward,
    Backward,
    /// The backward step issued after each rotation; moves `d_b`, not `L`.
    CompensatingBackward,
    /// No motion. Never scheduled by the controller; it is the idle step of
    /// the kinematic encoding.
    Stay,
    /// Clockwise: heading decreases.
    RotClk(RotStep),
    /// Anticlockwise: heading increases.
    RotAclk(RotStep),
}

impl MotionPrimitive {
    pub fn is_rotation(self) -> bool {
        matches!(self, MotionPrimitive::RotClk(_) | MotionPrimitive::RotAclk(_))
    }

    /// Every primitive the kinematic encoding can choose per step.
    pub fn encoding_set() -> Vec<MotionPrimitive> {
        let mut all = vec![MotionPrimitive::Forward, MotionPrimitive::Backward, MotionPrimitive::Stay];
        for s in RotStep::ALL {
            all.push(MotionPrimitive::RotAclk(s));
            all.push(MotionPrimitive::RotClk(s));
        }
        all
    }
}

impl fmt::Display for MotionPrimitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MotionPrimitive::Forward => f.write_str("forward"),
            MotionPrimitive::Backward => f.write_str("backward"),
            MotionPrimitive::CompensatingBackward => f.write_str("compensating_backward"),
            MotionPrimitive::Stay => f.write_str("stay"),
            MotionPrimitive::RotClk(s) => write!(f, "rot_clk({})", s.nominal()),
            MotionPrimitive::RotAclk(s) => write!(f, "rot_aclk({})", s.nominal()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerParams {
    /// Forward/backward step length `L`.
    pub step_length: f64,
    /// Heading errors below this are left uncorrected.
    pub angle_deadband: f64,
    /// Distance of the backward step that follows each rotation.
    pub backstep_distance: f64,
    /// Use measured effective rotations instead of nominal ones.
    pub calibrated: bool,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self { step_length: STEP_LENGTH, angle_deadband: 1.5, backstep_distance: 0.0, calibrated: false }
    }
}

impl ControllerParams {
    pub fn validate(&self) -> Result<(), ControllerError> {
        if !(self.step_length > 0.0 && self.step_length.is_finite()) {
            return Err(ControllerError::BadParams(format!("step length must be positive, got {}", self.step_length)));
        }
        if (self.angle_deadband - RotStep::OneHalf.nominal()).abs() > EPS {
            return Err(ControllerError::BadParams(format!(
                "angle deadband must equal the smallest rotation (1.5), got {}",
                self.angle_deadband
            )));
        }
        if !(self.backstep_distance >= 0.0 && self.backstep_distance.is_finite()) {
            return Err(ControllerError::BadParams(format!(
                "backstep distance must be non-negative, got {}",
                self.backstep_distance
            )));
        }
        Ok(())
    }

    pub fn rotation(&self, step: RotStep) -> f64 {
        if self.calibrated {
            step.calibrated()
        } else {
            step.nominal()
        }
    }
}

/// One calibration measurement: a commanded turn from `theta1` to `theta2`
/// realized by repeated steps of nominal size, observed to rotate `alpha`
/// per step, with the reported gain `k_reported`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub step: RotStep,
    pub theta1: f64,
    pub theta2: f64,
    pub alpha: f64,
    pub k_reported: f64,
}

impl CalibrationRow {
    /// `|theta1| - |theta2|`.
    pub fn gamma(&self) -> f64 {
        self.theta1.abs() - self.theta2.abs()
    }

    /// Proportional gain `gamma / alpha`.
    pub fn k(&self) -> f64 {
        self.gamma() / self.alpha
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationCalibration {
    pub rows: Vec<CalibrationRow>,
}

impl RotationCalibration {
    /// The measured table for the four rotation sizes.
    pub fn measured() -> Self {
        let row = |step: RotStep, theta1, k_reported| CalibrationRow {
            step,
            theta1,
            theta2: 20.0,
            alpha: step.calibrated(),
            k_reported,
        };
        Self {
            rows: vec![
                row(RotStep::Six, 45.0, 4.204),
                row(RotStep::FourHalf, 40.0, 4.414),
                row(RotStep::Three, 35.0, 4.883),
                row(RotStep::OneHalf, 30.0, 6.734),
            ],
        }
    }
}

/// Seeded Gaussian perturbation added to every simulated primitive.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    pos: Normal<f64>,
    ang: Normal<f64>,
    rng: ChaCha8Rng,
}

impl NoiseModel {
    pub fn new(sigma_pos: f64, sigma_ang: f64, seed: u64) -> Result<Self, ControllerError> {
        let normal = |s: f64| {
            if s >= 0.0 && s.is_finite() {
                Normal::new(0.0, s).map_err(|e| ControllerError::BadNoise(e.to_string()))
            } else {
                Err(ControllerError::BadNoise(format!("sigma must be non-negative, got {s}")))
            }
        };
        Ok(Self { pos: normal(sigma_pos)?, ang: normal(sigma_ang)?, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    fn perturb(&mut self, pose: Pose) -> Pose {
        let dx = self.pos.sample(&mut self.rng);
        let dy = self.pos.sample(&mut self.rng);
        let dth = self.ang.sample(&mut self.rng);
        Pose::new(pose.x + dx, pose.y + dy, pose.theta + dth)
    }
}

fn translate(pose: Pose, dist: f64) -> Pose {
    let (s, c) = pose.theta.to_radians().sin_cos();
    Pose { x: pose.x + dist * c, y: pose.y + dist * s, theta: pose.theta }
}

/// Pose after one primitive.
pub fn apply_primitive(pose: Pose, p: MotionPrimitive, params: &ControllerParams, noise: Option<&mut NoiseModel>) -> Pose {
    let next = match p {
        MotionPrimitive::Forward => translate(pose, params.step_length),
        MotionPrimitive::Backward => translate(pose, -params.step_length),
        MotionPrimitive::CompensatingBackward => translate(pose, -params.backstep_distance),
        MotionPrimitive::Stay => pose,
        MotionPrimitive::RotClk(s) => Pose::new(pose.x, pose.y, pose.theta - params.rotation(s)),
        MotionPrimitive::RotAclk(s) => Pose::new(pose.x, pose.y, pose.theta + params.rotation(s)),
    };
    match noise {
        Some(n) => n.perturb(next),
        None => next,
    }
}

/// Primitives whose ideal application takes `prev` to `next` within `tol` on
/// every coordinate (heading compared modulo 360).
pub fn matching_primitives(prev: Pose, next: Pose, params: &ControllerParams, tol: f64) -> Vec<MotionPrimitive> {
    MotionPrimitive::encoding_set()
        .into_iter()
        .filter(|&p| pose_error(apply_primitive(prev, p, params, None), next) <= tol)
        .collect()
}

/// Largest per-coordinate difference between two poses.
pub fn pose_error(a: Pose, b: Pose) -> f64 {
    (a.x - b.x).abs().max((a.y - b.y).abs()).max(wrap_degrees(a.theta - b.theta).abs())
}

/// Greedy rotation cascade for a heading error `theta` in degrees. Each
/// rotation is followed by a compensating backward step. Returns the
/// primitives and the uncorrected residual (nominal angles).
pub fn rotation_schedule(theta: f64) -> (Vec<MotionPrimitive>, f64) {
    let mut out = Vec::new();
    let mut rest = theta;
    let smallest = RotStep::OneHalf.nominal();
    while rest.abs() >= smallest - EPS {
        let mag = rest.abs();
        let step = RotStep::ALL.into_iter().find(|s| s.nominal() <= mag + EPS).unwrap_or(RotStep::OneHalf);
        if rest > 0.0 {
            out.push(MotionPrimitive::RotAclk(step));
            rest -= step.nominal();
        } else {
            out.push(MotionPrimitive::RotClk(step));
            rest += step.nominal();
        }
        out.push(MotionPrimitive::CompensatingBackward);
    }
    (out, rest)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub primitive: MotionPrimitive,
    #[serde(with = "pose_array")]
    pub pose: Pose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveTrace {
    #[serde(with = "pose_array")]
    pub start: Pose,
    pub steps: Vec<TraceStep>,
}

impl PrimitiveTrace {
    pub fn new(start: Pose) -> Self {
        Self { start, steps: Vec::new() }
    }

    pub fn final_pose(&self) -> Pose {
        self.steps.last().map_or(self.start, |s| s.pose)
    }

    pub fn push(&mut self, primitive: MotionPrimitive, params: &ControllerParams, noise: Option<&mut NoiseModel>) {
        let pose = apply_primitive(self.final_pose(), primitive, params, noise);
        self.steps.push(TraceStep { primitive, pose });
    }

    /// Whether every step equals the ideal application of its primitive to
    /// the previous pose. Holds for noise-free traces.
    pub fn replays(&self, params: &ControllerParams) -> bool {
        let mut pose = self.start;
        self.steps.iter().all(|s| {
            let ok = apply_primitive(pose, s.primitive, params, None) == s.pose;
            pose = s.pose;
            ok
        })
    }

    pub fn count(&self, pred: impl Fn(MotionPrimitive) -> bool) -> usize {
        self.steps.iter().filter(|s| pred(s.primitive)).count()
    }
}

/// Turns toward `waypoint` with the rotation cascade, then walks
/// `round(dist / L)` forward steps. A waypoint at the current position yields
/// an empty trace.
pub fn los_navigate(pose: Pose, waypoint: Point, params: &ControllerParams, mut noise: Option<&mut NoiseModel>) -> PrimitiveTrace {
    let mut trace = PrimitiveTrace::new(pose);
    let Ok(theta) = effective_angle(&pose, waypoint) else {
        return trace;
    };
    let (rotations, _) = rotation_schedule(theta);
    for p in rotations {
        trace.push(p, params, noise.as_deref_mut());
    }
    let dist = trace.final_pose().position().distance(waypoint);
    let n_steps = (dist / params.step_length).round() as usize;
    for _ in 0..n_steps {
        trace.push(MotionPrimitive::Forward, params, noise.as_deref_mut());
    }
    if noise.is_none() {
        debug_assert!(trace.replays(params));
    }
    trace
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    #[serde(with = "pose_array")]
    pub start: Pose,
    pub steps: Vec<TraceStep>,
    /// Euclidean distance to each waypoint on arrival.
    pub arrival_errors: Vec<f64>,
    #[serde(skip)]
    pub targets: Vec<Point>,
}

impl Trajectory {
    pub fn final_pose(&self) -> Pose {
        self.steps.last().map_or(self.start, |s| s.pose)
    }

    pub fn write_arrival_csv<W: io::Write>(&self, out: W) -> Result<(), ControllerError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["waypoint", "x", "y", "arrival_error"])?;
        for (i, (p, e)) in self.targets.iter().zip(&self.arrival_errors).enumerate() {
            w.write_record([i.to_string(), p.x.to_string(), p.y.to_string(), e.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Follows every waypoint of `plan` in order from `init`.
pub fn execute_plan(plan: &MotionPlan, init: Pose, params: &ControllerParams, mut noise: Option<&mut NoiseModel>) -> Trajectory {
    let mut traj = Trajectory { start: init, steps: Vec::new(), arrival_errors: Vec::new(), targets: Vec::new() };
    let mut pose = init;
    for wp in &plan.waypoints {
        let target = wp.point();
        let trace = los_navigate(pose, target, params, noise.as_deref_mut());
        pose = trace.final_pose();
        traj.steps.extend(trace.steps);
        traj.arrival_errors.push(pose.position().distance(target));
        traj.targets.push(target);
    }
    traj
}

mod pose_array {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::geometry::Pose;

    pub fn serialize<S: Serializer>(p: &Pose, s: S) -> Result<S::Ok, S::Error> {
        [p.x, p.y, p.theta].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Pose, D::Error> {
        let [x, y, theta] = <[f64; 3]>::deserialize(d)?;
        Ok(Pose { x, y, theta })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{PlanStats, PlannerKind, Waypoint};
    use approx::assert_abs_diff_eq;
    use MotionPrimitive::*;

    fn ideal() -> ControllerParams {
        ControllerParams::default()
    }

    #[test]
    fn primitive_examples() {
        let p = apply_primitive(Pose::new(0.0, 0.0, 0.0), Forward, &ideal(), None);
        assert_eq!(p, Pose::new(6.46, 0.0, 0.0));
        let cal = ControllerParams { calibrated: true, ..ideal() };
        let p = apply_primitive(Pose::new(0.0, 0.0, 0.0), RotClk(RotStep::Six), &cal, None);
        assert_eq!(p, Pose::new(0.0, 0.0, -5.947));
        let p = apply_primitive(Pose::new(1.0, 2.0, 90.0), RotAclk(RotStep::FourHalf), &ideal(), None);
        assert_eq!(p, Pose::new(1.0, 2.0, 94.5));
        let p = apply_primitive(Pose::new(0.0, 0.0, 178.5), RotAclk(RotStep::Three), &ideal(), None);
        assert_eq!(p.theta, -178.5);
        let back = apply_primitive(Pose::new(0.0, 0.0, 90.0), Backward, &ideal(), None);
        assert_abs_diff_eq!(back.y, -6.46, epsilon = 1e-12);
        assert_eq!(apply_primitive(Pose::new(3.0, 4.0, 10.0), CompensatingBackward, &ideal(), None), Pose::new(3.0, 4.0, 10.0));
    }

    #[test]
    fn schedule_examples() {
        let (s, r) = rotation_schedule(10.0);
        assert_eq!(s, vec![RotAclk(RotStep::Six), CompensatingBackward, RotAclk(RotStep::Three), CompensatingBackward]);
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-12);
        assert_eq!(rotation_schedule(0.0), (vec![], 0.0));
        let (s, r) = rotation_schedule(-7.5);
        assert_eq!(s, vec![RotClk(RotStep::Six), CompensatingBackward, RotClk(RotStep::OneHalf), CompensatingBackward]);
        assert_eq!(r, 0.0);
        let (s, r) = rotation_schedule(1.4);
        assert!(s.is_empty());
        assert_eq!(r, 1.4);
    }

    #[test]
    fn los_examples() {
        let t = los_navigate(Pose::new(0.0, 0.0, 0.0), Point::new(19.38, 0.0), &ideal(), None);
        assert_eq!(t.steps.len(), 3);
        assert_eq!(t.count(|p| p == Forward), 3);
        assert_eq!(t.final_pose(), Pose::new(19.38, 0.0, 0.0));

        let t = los_navigate(Pose::new(0.0, 0.0, 0.0), Point::new(0.0, 6.46), &ideal(), None);
        assert_eq!(t.count(MotionPrimitive::is_rotation), 15);
        assert_eq!(t.count(|p| p == Forward), 1);
        let f = t.final_pose();
        assert_abs_diff_eq!(f.theta, 90.0, epsilon = 1e-9);
        assert_abs_diff_eq!(f.x, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(f.y, 6.46, epsilon = 1e-9);

        let t = los_navigate(Pose::new(0.0, 0.0, 179.0), Point::new(-6.46, 0.0), &ideal(), None);
        assert_eq!(t.steps.iter().map(|s| s.primitive).collect::<Vec<_>>(), vec![Forward]);
        assert_abs_diff_eq!(t.final_pose().y, 6.46 * 1f64.to_radians().sin(), epsilon = 1e-12);
    }

    fn plan(points: &[(f64, f64)]) -> MotionPlan {
        MotionPlan {
            planner: PlannerKind::AStar,
            waypoints: points.iter().map(|&(x, y)| Waypoint::xy(x, y)).collect(),
            stats: PlanStats::Graph(Default::default()),
            solve_time: 0.0,
        }
    }

    #[test]
    fn execute_examples() {
        let t = execute_plan(&plan(&[(0.0, 0.0)]), Pose::new(0.0, 0.0, 0.0), &ideal(), None);
        assert!(t.steps.is_empty());
        assert_eq!(t.arrival_errors, vec![0.0]);

        let t = execute_plan(&plan(&[(0.0, 0.0), (12.92, 0.0), (12.92, 19.38)]), Pose::new(0.0, 0.0, 0.0), &ideal(), None);
        assert_eq!(t.arrival_errors.len(), 3);
        for e in &t.arrival_errors {
            assert!(*e < 1e-9, "{:?}", t.arrival_errors);
        }
    }

    #[test]
    fn noise_is_seeded() {
        let p = plan(&[(0.0, 0.0), (30.0, 20.0), (-10.0, 40.0)]);
        let run = |seed| {
            let mut n = NoiseModel::new(0.3, 0.5, seed).unwrap();
            execute_plan(&p, Pose::new(0.0, 0.0, 0.0), &ideal(), Some(&mut n))
        };
        assert_eq!(run(7), run(7));
        assert_ne!(run(7), run(8));
        assert!(NoiseModel::new(-1.0, 0.0, 0).is_err());
    }

    #[test]
    fn calibration_table() {
        let t = RotationCalibration::measured();
        assert_eq!(t.rows.len(), 4);
        for r in &t.rows {
            assert_abs_diff_eq!(r.gamma(), r.k() * r.alpha, epsilon = 1e-3);
            assert!(((r.k_reported - r.k()) / r.k()).abs() < 1e-3, "{r:?}");
        }
        assert_eq!(t.rows[0].gamma(), 25.0);
    }

    #[test]
    fn params_and_csv() {
        assert!(ideal().validate().is_ok());
        assert!(ControllerParams { step_length: 0.0, ..ideal() }.validate().is_err());
        assert!(ControllerParams { angle_deadband: 2.0, ..ideal() }.validate().is_err());
        let t = execute_plan(&plan(&[(0.0, 0.0), (6.46, 0.0)]), Pose::new(0.0, 0.0, 0.0), &ideal(), None);
        let mut buf = Vec::new();
        t.write_arrival_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("waypoint,x,y,arrival_error"));
        assert_eq!(text.lines().count(), 3);
        let json = serde_json::to_value(&t).unwrap();
        assert_eq!(json["steps"][0]["primitive"]["kind"], "forward");
        assert_eq!(json["steps"][0]["pose"], serde_json::json!([6.46, 0.0, 0.0]));
    }

    #[test]
    fn replay_classification_is_unique() {
        let start = Pose::new(1.0, 1.0, 30.0);
        for p in MotionPrimitive::encoding_set() {
            let next = apply_primitive(start, p, &ideal(), None);
            assert_eq!(matching_primitives(start, next, &ideal(), 1e-6), vec![p]);
        }
    }
}
