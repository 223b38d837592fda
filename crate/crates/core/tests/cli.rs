use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use smtnav::bench::Scenario;
use smtnav::gridmap::{save_map, BoxingMode, Cell, ObstacleRect, OccupancyGrid};
use smtnav::plan::PlanJson;
use smtnav::PlannerKind;

fn smtnav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smtnav")).args(args).output().expect("binary runs")
}

fn data(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(rel).display().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A 10 x 10 room (0.5 cells) split in two by a full-height wall.
fn split_room(dir: &Path) -> (PathBuf, PathBuf) {
    let mut grid = OccupancyGrid::filled(20, 20, 0.5, [0.0, 0.0, 0.0], Cell::Free).unwrap();
    grid.paint_rect(&ObstacleRect::new(5.0, 0.0, 5.5, 10.0).unwrap(), Cell::Occupied);
    let map = dir.join("split.yaml");
    save_map(&grid, &map).unwrap();
    let scenario = Scenario {
        name: Some("split".into()),
        map_path: None,
        init: [1.0, 1.0, 0.0],
        goal: [7.0, 7.0, 0.0],
        m_min: 1,
        m_max: 3,
        v: 5,
        r: 0.0,
        cell_size: 0.25,
        planners: vec![PlannerKind::Smt, PlannerKind::Bfs, PlannerKind::AStar],
        solver: None,
        timeout_s: 20.0,
        seed: 0,
        boxing: BoxingMode::ComponentBounds,
        kinematic: None,
    };
    let path = dir.join("split.json");
    std::fs::write(&path, serde_json::to_string(&scenario).unwrap()).unwrap();
    (map, path)
}

#[test]
fn plan_writes_json_and_valid_svg() {
    let dir = tempfile::tempdir().unwrap();
    let (out, svg) = (dir.path().join("plan.json"), dir.path().join("plan.svg"));
    let o = smtnav(&[
        "plan", "--map", &data("env2.yaml"), "--scenario", &data("scenarios/env2.json"), "--planner", "astar",
        "--out", s(&out), "--svg", s(&svg),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let plan: PlanJson = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(plan.planner, PlannerKind::AStar);
    assert!(plan.waypoints.len() >= 2);
    assert!(plan.nodes.is_some() && plan.edges.is_some());

    let text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).expect("well-formed SVG");
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    assert!(root.attribute("viewBox").is_some());
    let polyline = doc
        .descendants()
        .find(|n| n.tag_name().name() == "polyline" && n.attribute("class") == Some("plan astar"))
        .expect("plan polyline");
    let coords = polyline.attribute("points").unwrap().split_whitespace().count();
    assert_eq!(coords, plan.waypoints.len());
    assert!(doc.descendants().any(|n| n.attribute("id") == Some("goal")));
}

#[test]
fn unreachable_goal_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let (map, scenario) = split_room(dir.path());
    let out = dir.path().join("p.json");
    for planner in ["bfs", "astar", "smt"] {
        let o = smtnav(&["plan", "--map", s(&map), "--scenario", s(&scenario), "--planner", planner, "--out", s(&out)]);
        assert_eq!(o.status.code(), Some(1), "{planner}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!out.exists());
    }
}

#[test]
fn errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.json");
    let missing = dir.path().join("nope.json");
    let o = smtnav(&["plan", "--map", &data("env2.yaml"), "--scenario", s(&missing), "--planner", "bfs", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"init": [0, 0, 0], "goal": [1, 1, 0], "m_min": 1, "m_max": 2, "v": 1, "r": 0, "cell_size": 1, "color": "red"}"#)
        .unwrap();
    let o = smtnav(&["plan", "--map", &data("env2.yaml"), "--scenario", s(&bad), "--planner", "bfs", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));

    let o = Command::new(env!("CARGO_BIN_EXE_smtnav"))
        .env("SMTNAV_SOLVER", "/nonexistent/solver -in")
        .args(["plan", "--map", &data("env2.yaml"), "--scenario", &data("scenarios/env2.json"), "--planner", "smt", "--out", s(&out)])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));

    let o = smtnav(&["bench", "--scenarios", s(dir.path()), "--table", "csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    std::fs::write(
        &plan,
        r#"{"planner": "smt", "waypoints": [[0, 0], [30, 0], [30, 40]], "solve_time_s": 0.1, "num_constraints": 10, "num_variables": 6}"#,
    )
    .unwrap();
    let run = |name: &str, extra: &[&str]| {
        let trace = dir.path().join(name);
        let mut args = vec!["simulate", "--plan", s(&plan), "--init", "-1,0,0", "--trace", s(&trace)];
        args.extend_from_slice(extra);
        let o = smtnav(&args);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        serde_json::from_str::<serde_json::Value>(&std::fs::read_to_string(trace).unwrap()).unwrap()
    };
    let ideal = run("ideal.json", &[]);
    // one entry per plan waypoint, the first included
    assert_eq!(ideal["arrival_errors"].as_array().unwrap().len(), 3);
    assert!(ideal["steps"].as_array().unwrap().len() > 5);

    let a = run("a.json", &["--noise", "0.1,0.5", "--seed", "7"]);
    let b = run("b.json", &["--noise", "0.1,0.5", "--seed", "7"]);
    let c = run("c.json", &["--noise", "0.1,0.5", "--seed", "8"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_ne!(a, ideal);
}
