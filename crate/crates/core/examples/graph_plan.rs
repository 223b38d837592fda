//! Runs BFS and A* on the cell decomposition of a bundled environment and
//! writes both paths to an SVG.
//!
//!     cargo run --example graph_plan [scenario.json] [out.svg]

use std::path::PathBuf;

use smtnav::bench::{goal_point, Environment, Scenario};
use smtnav::graph::{astar_plan, bfs_plan, CellGraph};
use smtnav::plan::validate_plan;
use smtnav::svg::render_svg;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let scenario_path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/scenarios/env2.json"));
    let svg_path = args.next().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("graph_plan.svg"));

    let scenario = Scenario::load(&scenario_path)?;
    let env = Environment::load(&scenario, None)?;
    let ws = env.grid.workspace();
    let graph = CellGraph::decompose(&ws, &env.obstacles, scenario.cell_size)?;
    println!(
        "{} x {} cells of {}: {} nodes, {} blocked, {} directed edges",
        graph.cols(),
        graph.rows(),
        graph.cell_size(),
        graph.node_count(),
        graph.blocked_count(),
        graph.edge_count()
    );

    let (start, goal) = (scenario.init_pose().position(), goal_point(&scenario));
    let mut plans = Vec::new();
    for (name, result) in [("bfs", bfs_plan(&graph, start, goal)?), ("astar", astar_plan(&graph, start, goal)?)] {
        let expanded = result.stats.expanded;
        let Some(plan) = result.plan else {
            println!("{name}: no path ({expanded} expanded)");
            continue;
        };
        println!(
            "{name}: {} waypoints, length {:.1}, {expanded} expanded, {:.4} s, valid {}",
            plan.waypoints.len(),
            plan.path_length(),
            result.search_time,
            validate_plan(&plan, &env.obstacles).ok
        );
        plans.push(plan);
    }
    std::fs::write(&svg_path, render_svg(Some(&env.grid), &ws, &env.obstacles, &plans, start, goal))?;
    println!("wrote {}", svg_path.display());
    Ok(())
}
