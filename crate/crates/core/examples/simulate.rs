//! Follows a waypoint plan with the line-of-sight controller, once with
//! ideal motion and once with seeded Gaussian noise, and prints the
//! primitive counts and arrival errors.
//!
//!     cargo run --example simulate [plan.json] [sigma_pos sigma_ang]

use smtnav::controller::{execute_plan, ControllerParams, MotionPrimitive, NoiseModel, Trajectory};
use smtnav::geometry::Pose;
use smtnav::plan::{MotionPlan, PlanJson};
use smtnav::{PlannerKind, Waypoint};

fn summary(label: &str, t: &Trajectory) {
    let count = |f: fn(&MotionPrimitive) -> bool| t.steps.iter().filter(|s| f(&s.primitive)).count();
    let f = t.final_pose();
    println!(
        "{label}: {} primitives ({} forward, {} rotations), final ({:.2}, {:.2}, {:.1})",
        t.steps.len(),
        count(|p| *p == MotionPrimitive::Forward),
        count(|p| p.is_rotation()),
        f.x,
        f.y,
        f.theta
    );
    let errs: Vec<String> = t.arrival_errors.iter().map(|e| format!("{e:.2}")).collect();
    println!("  arrival errors [{}]", errs.join(", "));
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let plan = match args.first().filter(|a| a.ends_with(".json")) {
        Some(path) => MotionPlan::from_json(serde_json::from_str::<PlanJson>(&std::fs::read_to_string(path)?)?),
        None => MotionPlan::from_json(PlanJson {
            planner: PlannerKind::Smt,
            waypoints: vec![Waypoint::xy(0.0, 0.0), Waypoint::xy(300.0, 0.0), Waypoint::xy(300.0, 400.0), Waypoint::xy(700.0, 700.0)],
            solve_time_s: 0.0,
            num_constraints: None,
            num_variables: None,
            encode_time_s: None,
            waypoint_budget: None,
            nodes: None,
            edges: None,
            expanded: None,
        }),
    };
    let nums: Vec<f64> = args.iter().filter_map(|a| a.parse().ok()).collect();
    let (sp, sa) = match nums[..] {
        [sp, sa, ..] => (sp, sa),
        _ => (0.5, 0.5),
    };

    let init = Pose::new(plan.waypoints[0].x, plan.waypoints[0].y, 0.0);
    let ideal = ControllerParams::default();
    summary("ideal", &execute_plan(&plan, init, &ideal, None));
    let calibrated = ControllerParams { calibrated: true, ..ideal };
    summary("calibrated rotations", &execute_plan(&plan, init, &calibrated, None));
    for seed in [1, 2] {
        let mut noise = NoiseModel::new(sp, sa, seed)?;
        summary(&format!("noise ({sp}, {sa}) seed {seed}"), &execute_plan(&plan, init, &ideal, Some(&mut noise)));
    }
    Ok(())
}
