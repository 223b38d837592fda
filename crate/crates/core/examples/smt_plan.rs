//! Plans through a bundled environment with the waypoint encoding and
//! iterative deepening on the waypoint budget M, printing each attempt.
//!
//!     cargo run --example smt_plan [scenario.json] [--dump script.smt2]

use std::path::PathBuf;
use std::time::Duration;

use smtnav::bench::{Environment, Scenario};
use smtnav::encode::{encode_pwl_with, EncodingKind, KinematicParams};
use smtnav::plan::validate_plan;
use smtnav::solver::{plan_with_deepening, DeepeningOutcome};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scenario_path = args
        .iter()
        .find(|a| a.ends_with(".json"))
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/scenarios/env1.json"));
    let scenario = Scenario::load(&scenario_path)?;
    let env = Environment::load(&scenario, None)?;
    println!("{}: {} inflated obstacles", scenario.display_name(), env.obstacles.len());
    for o in &env.obstacles {
        println!("  ({:.1}, {:.1}) - ({:.1}, {:.1})", o.x_bl, o.y_bl, o.x_tr, o.y_tr);
    }

    let mut config = scenario.solver_config()?;
    config.timeout = Duration::from_secs_f64(scenario.timeout_s);
    let problem = env.problem(&scenario);
    let outcome = plan_with_deepening(
        &problem,
        scenario.m_min,
        scenario.m_max,
        EncodingKind::Pwl,
        &KinematicParams::default(),
        &config,
    )?;
    for a in outcome.attempts() {
        println!("  M = {:2}: {:?} (encode {:.3} s, solve {:.3} s)", a.waypoint_budget, a.status, a.encode_time, a.solve_time);
    }
    match outcome {
        DeepeningOutcome::Planned { plan, .. } => {
            println!("plan with {} waypoints, length {:.1}:", plan.waypoints.len(), plan.path_length());
            for w in &plan.waypoints {
                println!("  ({:.3}, {:.3})", w.x, w.y);
            }
            println!("valid: {}", validate_plan(&plan, &env.obstacles).ok);
            if let Some(i) = args.iter().position(|a| a == "--dump") {
                let m = plan.waypoints.len() - 1;
                let script = encode_pwl_with(&problem.with_budget(m.max(1)), &config.profile)?;
                let out = args.get(i + 1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("plan.smt2"));
                std::fs::write(&out, &script.text)?;
                println!("wrote {} ({} constraints, {} variables)", out.display(), script.stats.num_constraints, script.stats.num_variables);
            }
        }
        DeepeningOutcome::NoPlan { .. } => println!("no plan up to M = {}", scenario.m_max),
    }
    Ok(())
}
