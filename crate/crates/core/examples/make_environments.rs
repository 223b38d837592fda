//! Writes the two bundled indoor environments (map YAML + PGM) and their
//! benchmark scenarios into `data/`.
//!
//! Units are centimeters: 5 cm pixels, maps anchored at (-50, -50).
//!
//!     cargo run --example make_environments [out_dir]

use std::path::PathBuf;

use smtnav::bench::Scenario;
use smtnav::gridmap::{save_map, BoxingMode, Cell, ObstacleRect, OccupancyGrid};
use smtnav::PlannerKind;

struct Env {
    name: &'static str,
    width: usize,
    height: usize,
    occupied: Vec<[f64; 4]>,
    unknown: Vec<[f64; 4]>,
    init: [f64; 3],
    goal: [f64; 3],
    cell_size: f64,
}

fn environments() -> Vec<Env> {
    vec![
        // Two offset walls and some furniture.
        Env {
            name: "env1",
            width: 220,
            height: 220,
            occupied: vec![
                [250.0, -50.0, 280.0, 650.0],
                [550.0, 350.0, 580.0, 1050.0],
                [750.0, 100.0, 900.0, 250.0],
                [50.0, 800.0, 200.0, 950.0],
                [800.0, 600.0, 950.0, 700.0],
            ],
            unknown: vec![[400.0, 100.0, 450.0, 150.0]],
            init: [0.0, 0.0, 0.0],
            goal: [1000.0, 1000.0, 0.0],
            cell_size: 5.0,
        },
        // A corridor with doorways between rooms.
        Env {
            name: "env2",
            width: 180,
            height: 140,
            occupied: vec![
                [-50.0, 300.0, 300.0, 330.0],
                [420.0, 300.0, 850.0, 330.0],
                [300.0, -50.0, 330.0, 150.0],
                [600.0, 450.0, 630.0, 650.0],
                [100.0, 420.0, 250.0, 520.0],
                [650.0, 80.0, 780.0, 180.0],
            ],
            unknown: vec![[450.0, 420.0, 520.0, 480.0]],
            init: [50.0, 50.0, 0.0],
            goal: [780.0, 580.0, 90.0],
            cell_size: 2.5,
        },
    ]
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"));
    let scenarios = out.join("scenarios");
    std::fs::create_dir_all(&scenarios)?;

    for env in environments() {
        let mut grid = OccupancyGrid::filled(env.width, env.height, 5.0, [-50.0, -50.0, 0.0], Cell::Free)?;
        for [x0, y0, x1, y1] in &env.occupied {
            grid.paint_rect(&ObstacleRect::new(*x0, *y0, *x1, *y1)?, Cell::Occupied);
        }
        for [x0, y0, x1, y1] in &env.unknown {
            grid.paint_rect(&ObstacleRect::new(*x0, *y0, *x1, *y1)?, Cell::Unknown);
        }
        let yaml = out.join(format!("{}.yaml", env.name));
        save_map(&grid, &yaml)?;

        let scenario = Scenario {
            name: Some(env.name.to_string()),
            map_path: Some(PathBuf::from(format!("../{}.yaml", env.name))),
            init: env.init,
            goal: env.goal,
            m_min: 1,
            m_max: 20,
            v: 500,
            r: 15.0,
            cell_size: env.cell_size,
            planners: vec![PlannerKind::Smt, PlannerKind::Bfs, PlannerKind::AStar],
            solver: None,
            timeout_s: 60.0,
            seed: 1,
            boxing: BoxingMode::ComponentBounds,
            kinematic: None,
        };
        let path = scenarios.join(format!("{}.json", env.name));
        std::fs::write(&path, serde_json::to_string_pretty(&scenario)? + "\n")?;
        println!("wrote {} and {}", yaml.display(), path.display());
    }
    Ok(())
}
