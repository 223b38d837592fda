//! Plans with the motion-primitive encoding, with and without the
//! turn-minimizing objective, and lists the primitive taken at each step.
//!
//!     cargo run --example kinematic_plan [goal_x goal_y goal_theta]

use std::time::Duration;

use smtnav::controller::{matching_primitives, ControllerParams};
use smtnav::encode::{EncodingKind, KinematicParams, PlanningProblem};
use smtnav::geometry::Pose;
use smtnav::gridmap::{ObstacleRect, Workspace};
use smtnav::solver::{plan_with_deepening, SolverConfig, DEFAULT_SOLVER};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let goal = match g[..] {
        [x, y, th] => Pose::new(x, y, th),
        _ => Pose::new(12.92, 0.0, 10.5),
    };
    let kp = KinematicParams::default();
    let problem = PlanningProblem {
        init: Pose::new(0.0, 0.0, 0.0),
        goal,
        waypoint_budget: 1,
        max_step: 10,
        inflation: 0.0,
        workspace: Workspace::new(-10.0, -10.0, 40.0, 40.0),
        obstacles: vec![ObstacleRect::new(8.0, 3.0, 12.0, 8.0)?],
    };
    let config = SolverConfig::from_env_or(DEFAULT_SOLVER, Duration::from_secs(60))?;
    let params = ControllerParams { step_length: kp.v_x, ..ControllerParams::default() };

    for kind in [EncodingKind::Kinematic, EncodingKind::KinematicOptimized] {
        let outcome = plan_with_deepening(&problem, 1, 8, kind, &kp, &config)?;
        let solve: f64 = outcome.attempts().iter().map(|a| a.solve_time).sum();
        println!("{kind:?}: {} budgets tried, {solve:.2} s in the solver", outcome.attempts().len());
        let Some(plan) = outcome.plan() else {
            println!("  no plan");
            continue;
        };
        let poses: Vec<Pose> = plan.waypoints.iter().map(|w| Pose::new(w.x, w.y, w.theta.unwrap_or(0.0))).collect();
        for (t, w) in poses.windows(2).enumerate() {
            let p = matching_primitives(w[0], w[1], &params, 1e-6);
            let name = p.first().map_or("?".to_string(), |p| p.to_string());
            println!("  {t}: {name:<10} -> ({:.2}, {:.2}, {:.1})", w[1].x, w[1].y, w[1].theta);
        }
    }
    Ok(())
}
